"""Request-rate traces: generation, parsing, serialization.

A trace is a piecewise-constant request-rate signal quantized to one-second
buckets: the rate of the sample at time t applies on [t, t+1) until the next
sample. Generators evaluate a closed-form rate curve at every integer second,
so equal specs always produce byte-identical traces; randomness (Poisson
arrival realization) lives in the engine, not here.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

from .errors import TraceParseError, ValidationError

PATTERNS = ("constant", "sinusoid", "peaked")

TRACE_HEADER = "time_s,rate_req_per_s"


@dataclass(frozen=True)
class TraceSpec:
    """Parameters for a synthetic trace.

    seed is carried for noise-bearing patterns; the three shipped patterns
    are closed-form and do not consume it.
    """

    pattern: str
    peak_rate: float
    duration_s: float
    base_rate: float = 0.0
    period_s: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ValidationError(
                f"unknown trace pattern {self.pattern!r}; expected one of {PATTERNS}"
            )
        if not self.peak_rate >= 0:
            raise ValidationError(f"peak_rate must be >= 0, got {self.peak_rate}")
        if not 0 <= self.base_rate <= self.peak_rate:
            raise ValidationError(
                f"base_rate must satisfy 0 <= base_rate <= peak_rate, got {self.base_rate}"
            )
        if not self.duration_s > 0:
            raise ValidationError(f"duration_s must be > 0, got {self.duration_s}")
        if self.period_s is not None and not self.period_s > 0:
            raise ValidationError(f"period_s must be > 0, got {self.period_s}")
        if self.seed < 0:
            raise ValidationError(f"seed must be a non-negative integer, got {self.seed}")


@dataclass(frozen=True)
class RequestTrace:
    """An ordered piecewise-constant rate signal.

    samples: (time_s, rate) pairs, strictly increasing times, first at 0.
    duration_s: total horizon; must be >= the last sample time.
    """

    samples: tuple[tuple[float, float], ...]
    duration_s: float
    _times: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.samples:
            raise ValidationError("trace must contain at least one sample")
        times = tuple(t for t, _ in self.samples)
        if times[0] != 0:
            raise ValidationError(f"first sample must be at time 0, got {times[0]}")
        for a, b in zip(times, times[1:]):
            if b <= a:
                raise ValidationError(f"sample times must be strictly increasing ({a} -> {b})")
        for t, r in self.samples:
            if r < 0:
                raise ValidationError(f"negative rate {r} at time {t}")
        if self.duration_s < times[-1]:
            raise ValidationError(
                f"duration_s ({self.duration_s}) is before the last sample ({times[-1]})"
            )
        object.__setattr__(self, "_times", times)

    def rate_at(self, t: float) -> float:
        """Rate in effect at time t (the most recent sample at or before t)."""
        if t < 0:
            raise ValidationError(f"time must be >= 0, got {t}")
        idx = bisect_right(self._times, t) - 1
        return self.samples[idx][1]

    def __len__(self) -> int:
        return len(self.samples)


def peak_rate(trace: RequestTrace) -> float:
    """Maximum rate over the trace."""
    return max(r for _, r in trace.samples)


def _rate_fn(spec: TraceSpec):
    if spec.pattern == "constant":
        return lambda t: spec.peak_rate
    if spec.pattern == "sinusoid":
        period = spec.period_s if spec.period_s is not None else spec.duration_s
        span = spec.peak_rate - spec.base_rate
        return lambda t: spec.base_rate + span * (1.0 - math.cos(2.0 * math.pi * t / period)) / 2.0
    # peaked: flat base with one smooth bump reaching peak_rate mid-trace
    center = spec.duration_s / 2.0
    sigma = spec.duration_s / 8.0
    span = spec.peak_rate - spec.base_rate
    return lambda t: spec.base_rate + span * math.exp(-(((t - center) / sigma) ** 2))


def generate_trace(spec: TraceSpec) -> RequestTrace:
    """Sample the spec's rate curve at every integer second of the horizon."""
    fn = _rate_fn(spec)
    n = math.ceil(spec.duration_s)
    samples = tuple((float(t), min(fn(t), spec.peak_rate)) for t in range(n))
    return RequestTrace(samples=samples, duration_s=float(spec.duration_s))


def dump_trace(trace: RequestTrace) -> str:
    """Serialize to the trace CSV format (header + integer-second rows, LF)."""
    lines = [TRACE_HEADER]
    for t, r in trace.samples:
        if not float(t).is_integer():
            raise ValidationError(
                f"trace CSV requires integer sample times, got {t}"
            )
        lines.append(f"{int(t)},{r!r}")
    return "\n".join(lines) + "\n"


def load_trace(text: str, duration_s: float | None = None) -> RequestTrace:
    """Parse trace CSV text.

    The header row is optional. Times must be non-negative integers, strictly
    increasing, starting at 0; rates must be non-negative. When duration_s is
    not given it defaults to the last sample time plus one bucket.
    """
    samples: list[tuple[float, float]] = []
    last_t = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if line_no == 1 and parts[:2] == TRACE_HEADER.split(","):
            continue
        if len(parts) != 2:
            raise TraceParseError(line_no, f"expected 2 fields, got {len(parts)}")
        t_text, r_text = parts
        try:
            t = int(t_text)
        except ValueError:
            raise TraceParseError(line_no, f"time_s must be an integer, got {t_text!r}") from None
        try:
            r = float(r_text)
        except ValueError:
            raise TraceParseError(line_no, f"rate must be a number, got {r_text!r}") from None
        if t < 0:
            raise TraceParseError(line_no, f"time_s must be non-negative, got {t}")
        if r < 0 or not math.isfinite(r):
            raise ValidationError(f"line {line_no}: rate must be finite and >= 0, got {r}")
        if last_t is not None and t <= last_t:
            raise ValidationError(
                f"line {line_no}: timestamps must be strictly increasing ({last_t} -> {t})"
            )
        samples.append((float(t), r))
        last_t = t
    if not samples:
        raise ValidationError("trace contains no samples")
    if duration_s is None:
        duration_s = samples[-1][0] + 1.0
    return RequestTrace(samples=tuple(samples), duration_s=float(duration_s))

"""Provisioning policies: sizing rules and sleep/wake decision logic.

All sizing is expressed against a per-server service capacity (default
60 req/s): AlwaysOn provisions ceil(peak/capacity) once, Reactive tracks
ceil(rate/capacity) every decision epoch, SoftReactive is Reactive with a
per-server idle timeout before sleep, and the hybrid schema floors a
per-tier latency-budget estimate with the Reactive count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .errors import ValidationError

DEFAULT_CAPACITY = 60.0

ALWAYSON = "alwayson"
REACTIVE = "reactive"
SOFTREACTIVE = "softreactive"
HYBRID = "hybrid"

POLICY_KINDS = (ALWAYSON, REACTIVE, SOFTREACTIVE, HYBRID)


class Command(NamedTuple):
    """A sleep or wake instruction for one server."""

    action: str  # "sleep" | "wake"
    server: int


@dataclass(frozen=True)
class TierInput:
    """Per-tier inputs to the hybrid sizing rule.

    queued: requests waiting at the tier (L_i)
    incoming: request inflow for the interval (r_i)
    t_sla_ms: end-to-end latency budget
    throughput_est_ms: estimated tier service time contribution (tau_i)
    """

    queued: float
    incoming: float
    t_sla_ms: float
    throughput_est_ms: float

    def __post_init__(self):
        if self.queued < 0:
            raise ValidationError(f"queued must be >= 0, got {self.queued}")
        if self.incoming < 0:
            raise ValidationError(f"incoming must be >= 0, got {self.incoming}")
        if self.t_sla_ms + self.throughput_est_ms <= 0:
            raise ValidationError(
                "t_sla_ms + throughput_est_ms must be > 0, got "
                f"{self.t_sla_ms} + {self.throughput_est_ms}"
            )


@dataclass(frozen=True)
class PolicySpec:
    """A policy kind plus its parameters.

    idle_timeout_s applies to SoftReactive only; 0 is the degenerate case
    that behaves exactly like Reactive. tiers/t_sla_ms/throughput_est_ms
    configure the hybrid schema; the first tier is the front end and its
    queued/incoming fields are refreshed from live observations each epoch.
    """

    kind: str
    provisioned_count: int | None = None
    idle_timeout_s: float | None = None
    t_sla_ms: float = 2000.0
    throughput_est_ms: float = 1000.0
    extra_tiers: tuple[TierInput, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValidationError(
                f"unknown policy kind {self.kind!r}; expected one of {POLICY_KINDS}"
            )
        if self.kind == ALWAYSON:
            if self.provisioned_count is None or self.provisioned_count < 1:
                raise ValidationError(
                    f"alwayson requires provisioned_count >= 1, got {self.provisioned_count}"
                )
        if self.idle_timeout_s is not None and self.idle_timeout_s < 0:
            raise ValidationError(
                f"idle_timeout_s must be >= 0, got {self.idle_timeout_s}"
            )

    @property
    def label(self) -> str:
        return self.kind


def alwayson(provisioned_count: int) -> PolicySpec:
    return PolicySpec(kind=ALWAYSON, provisioned_count=provisioned_count)


def reactive() -> PolicySpec:
    return PolicySpec(kind=REACTIVE)


def softreactive(idle_timeout_s: float) -> PolicySpec:
    return PolicySpec(kind=SOFTREACTIVE, idle_timeout_s=idle_timeout_s)


def hybrid(
    t_sla_ms: float = 2000.0,
    throughput_est_ms: float = 1000.0,
    extra_tiers: Sequence[TierInput] = (),
) -> PolicySpec:
    return PolicySpec(
        kind=HYBRID,
        t_sla_ms=t_sla_ms,
        throughput_est_ms=throughput_est_ms,
        extra_tiers=tuple(extra_tiers),
    )


def alwayson_servers(peak_rate: float, capacity: float = DEFAULT_CAPACITY) -> int:
    """Static provisioning for the peak: ceil(peak_rate / capacity)."""
    if peak_rate < 0:
        raise ValidationError(f"peak_rate must be >= 0, got {peak_rate}")
    if capacity <= 0:
        raise ValidationError(f"capacity must be > 0, got {capacity}")
    return math.ceil(peak_rate / capacity)


def reactive_target(rate: float, capacity: float = DEFAULT_CAPACITY) -> int:
    """Servers needed for the observed rate: ceil(rate / capacity)."""
    if rate < 0:
        raise ValidationError(f"rate must be >= 0, got {rate}")
    if capacity <= 0:
        raise ValidationError(f"capacity must be > 0, got {capacity}")
    return math.ceil(rate / capacity)


def tier_minimal_servers(tier: TierInput) -> float:
    """Latency-budget sizing for one tier: (L_i + r_i) / (T_SLA + tau_i)."""
    return (tier.queued + tier.incoming) / (tier.t_sla_ms + tier.throughput_est_ms)


def hybrid_target(
    tiers: Sequence[TierInput], rate: float, capacity: float = DEFAULT_CAPACITY
) -> int:
    """Front-end target: max(ceil(v_frontend), ceil(rate / capacity)).

    tiers[0] is the front end; v_i is evaluated for every tier (validating
    the inputs) but only the front end bounds the returned count.
    """
    if not tiers:
        raise ValidationError("hybrid_target requires at least one tier")
    v = [tier_minimal_servers(t) for t in tiers]
    return max(math.ceil(v[0]), reactive_target(rate, capacity))


def softreactive_decide(
    states: Sequence[str],
    rate: float,
    elapsed_idle: Sequence[float | None],
    idle_timeout_s: float,
    capacity: float = DEFAULT_CAPACITY,
) -> list[Command]:
    """Commands to reconcile the cluster with the Reactive target.

    states holds per-server state names ("sleep"/"setup"/"idle"/"busy");
    elapsed_idle holds each server's continuous idle time (None when not
    idle). Deficits wake the lowest-indexed sleeping servers; surplus sleeps
    the highest-indexed idle servers whose idle time has reached the
    timeout. A dispatch during the wait resets the clock, so a server never
    receives a sleep command while its countdown is still running.
    """
    if len(states) != len(elapsed_idle):
        raise ValidationError("states and elapsed_idle must have equal length")
    target = reactive_target(rate, capacity)
    active = sum(1 for s in states if s != "sleep")
    commands: list[Command] = []
    if active < target:
        for i, s in enumerate(states):
            if len(commands) >= target - active:
                break
            if s == "sleep":
                commands.append(Command("wake", i))
    elif active > target:
        surplus = active - target
        eligible = [
            i
            for i, s in enumerate(states)
            if s == "idle"
            and elapsed_idle[i] is not None
            and elapsed_idle[i] >= idle_timeout_s
        ]
        for i in sorted(eligible, reverse=True)[:surplus]:
            commands.append(Command("sleep", i))
    return commands

"""Energy/power math and metric tables.

The energy model turns a renewal-interval description of one server into
consumed energy; dividing by the setup time expressed in hours converts it
to the average-power figure used in the sweep tables. Performance per watt
is 1/(P_avg * T_95) and normalized PPW divides by the AlwaysOn constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import reference
from .errors import ValidationError


@dataclass(frozen=True)
class EnergyModelParams:
    """Inputs to the per-interval energy model.

    p_full_speed_w: server power at full CPU speed and utilization 1
    t_interval_h:   renewal interval length T (hours)
    t_sleep_h:      time asleep within the interval (hours)
    rho:            utilization while awake
    k:              idle power fraction (idle draws k * p_full_speed_w)
    k_prime:        sleep power fraction (sleep draws k' * p_full_speed_w)
    cpu_speed:      normalized CPU speed s (carried for response-time math)
    """

    p_full_speed_w: float = 200.0
    t_interval_h: float = 2.0
    t_sleep_h: float = 0.5
    rho: float = 0.5
    k: float = 0.6
    k_prime: float = 0.1
    cpu_speed: float = 1.0

    def __post_init__(self):
        if self.p_full_speed_w < 0:
            raise ValidationError(f"p_full_speed_w must be >= 0, got {self.p_full_speed_w}")
        if self.t_interval_h <= 0:
            raise ValidationError(f"t_interval_h must be > 0, got {self.t_interval_h}")
        if not 0 <= self.t_sleep_h <= self.t_interval_h:
            raise ValidationError(
                f"t_sleep_h must lie in [0, t_interval_h], got {self.t_sleep_h}"
            )
        if not 0 <= self.rho <= 1:
            raise ValidationError(f"rho must lie in [0, 1], got {self.rho}")
        if not 0 <= self.k_prime <= self.k <= 1:
            raise ValidationError(
                f"need 0 <= k_prime <= k <= 1, got k_prime={self.k_prime}, k={self.k}"
            )
        if self.cpu_speed <= 0:
            raise ValidationError(f"cpu_speed must be > 0, got {self.cpu_speed}")


def energy_eq1(params: EnergyModelParams) -> float:
    """Energy (Wh) consumed over one renewal interval.

    E = P(s,1) * [(T - t) * (rho(1 - k) + k) + t * k']; evaluated in
    distributed form so the shipped 250 Wh preimage is exact in floats.
    """
    p = params.p_full_speed_w
    awake_h = params.t_interval_h - params.t_sleep_h
    blend = params.rho * (1.0 - params.k) + params.k
    return p * awake_h * blend + p * params.t_sleep_h * params.k_prime


def power_from_energy(energy_wh: float, t_setup_min: float) -> float:
    """Average power (W) when the interval is taken as the setup time."""
    if energy_wh < 0:
        raise ValidationError(f"energy_wh must be >= 0, got {energy_wh}")
    if t_setup_min <= 0:
        raise ValidationError(f"t_setup_min must be > 0, got {t_setup_min}")
    return energy_wh / (t_setup_min / 60.0)


def p_avg_model(
    t_setup_min: float, p_sleep_w: float, energy_wh: float, n_sleeping: int
) -> float:
    """Cluster average power: setup-amortized energy plus sleeping draw."""
    if p_sleep_w < 0:
        raise ValidationError(f"p_sleep_w must be >= 0, got {p_sleep_w}")
    if n_sleeping < 0:
        raise ValidationError(f"n_sleeping must be >= 0, got {n_sleeping}")
    return power_from_energy(energy_wh, t_setup_min) + n_sleeping * p_sleep_w


def t95(values: Sequence[float]) -> float:
    """Nearest-rank 95th percentile: sorted[ceil(0.95 * n)] (1-based)."""
    if not len(values):
        raise ValidationError("t95 of an empty sequence is undefined")
    ordered = sorted(values)
    rank = math.ceil(0.95 * len(ordered))
    return ordered[rank - 1]


def avg_power(result) -> float:
    """Time-weighted mean of a simulation's power timeline (W)."""
    times = result.power_times
    watts = result.power_watts
    duration = result.duration_s
    if duration <= 0:
        raise ValidationError(f"duration must be > 0, got {duration}")
    if not len(times):
        raise ValidationError("empty power timeline")
    segments = []
    for i in range(len(times)):
        end = times[i + 1] if i + 1 < len(times) else duration
        segments.append(watts[i] * (end - times[i]))
    return math.fsum(segments) / duration


def approx_response_time(queued: int, n: int, s: float) -> float:
    """Rough response time (L + 1) * n / s for L queued requests.

    n is the number of scheduling disciplines crossed per request and s the
    normalized CPU speed; neither has a universal default, so both are
    required.
    """
    if queued < 0:
        raise ValidationError(f"queued must be >= 0, got {queued}")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if s <= 0:
        raise ValidationError(f"s must be > 0, got {s}")
    return (queued + 1) * n / s


def ppw(p_avg_w: float, t95_ms: float) -> float:
    """Performance per watt: 1 / (P_avg * T_95)."""
    if p_avg_w <= 0:
        raise ValidationError(f"p_avg_w must be > 0, got {p_avg_w}")
    if t95_ms <= 0:
        raise ValidationError(f"t95_ms must be > 0, got {t95_ms}")
    return 1.0 / (p_avg_w * t95_ms)


def derive_row_t95(p_avg_col0_w: float, ppw_col0: float) -> float:
    """Back out a row's T_95 (ms) from its zero-sleep-power cell pair."""
    if p_avg_col0_w <= 0 or ppw_col0 <= 0:
        raise ValidationError("p_avg_col0_w and ppw_col0 must be > 0")
    return 1.0 / (p_avg_col0_w * ppw_col0)


def nppw(ppw_policy: float, ppw_alwayson: float) -> float:
    """Normalized PPW; > 1 means the policy beats AlwaysOn."""
    if ppw_policy <= 0 or ppw_alwayson <= 0:
        raise ValidationError("ppw values must be > 0")
    return ppw_policy / ppw_alwayson


@dataclass(frozen=True)
class MetricsCell:
    t_setup_min: float
    p_sleep_w: float
    p_avg_w: float
    t95_ms: float
    ppw: float
    nppw: float


@dataclass(frozen=True)
class MetricsTable:
    """One cell per (t_setup, p_sleep) pair, row-major in sweep order."""

    cells: tuple[MetricsCell, ...]

    def cell(self, t_setup_min: float, p_sleep_w: float) -> MetricsCell:
        for c in self.cells:
            if c.t_setup_min == t_setup_min and c.p_sleep_w == p_sleep_w:
                return c
        raise KeyError((t_setup_min, p_sleep_w))

    def to_csv(self) -> str:
        lines = ["t_setup_min,p_sleep_w,p_avg_w,t95_ms,ppw,nppw"]
        for c in self.cells:
            lines.append(
                f"{c.t_setup_min!r},{c.p_sleep_w!r},{c.p_avg_w!r},"
                f"{c.t95_ms!r},{c.ppw!r},{c.nppw!r}"
            )
        return "\n".join(lines) + "\n"


def build_metrics_table(
    energy_wh: float = 250.0,
    n_sleeping: int = 10,
    t_setups_min: Sequence[float] = reference.T_SETUPS_MIN,
    p_sleeps_w: Sequence[float] = reference.P_SLEEPS_W,
    ppw_alwayson: float = reference.ALWAYSON_PPW,
    row_anchor_ppw: Mapping[float, float] | None = None,
    ppw_grid: Mapping[tuple[float, float], float] | None = None,
) -> MetricsTable:
    """Build the sweep table.

    Per cell p_avg comes from p_avg_model; each row's T_95 is backed out of
    its own P_sleep=0 column and the row's zero-sleep PPW anchor (defaults
    cover the published 15..19 minute sweep). PPW is computed from those
    two unless ppw_grid supplies published values to install instead
    (reproduction mode); either way nppw = ppw / ppw_alwayson exactly.
    """
    if not t_setups_min or not p_sleeps_w:
        raise ValidationError("t_setups_min and p_sleeps_w must be non-empty")
    if ppw_alwayson <= 0:
        raise ValidationError(f"ppw_alwayson must be > 0, got {ppw_alwayson}")
    anchors = dict(reference.ROW_ANCHOR_PPW) if row_anchor_ppw is None else dict(row_anchor_ppw)
    cells = []
    for t in t_setups_min:
        if t not in anchors:
            raise ValidationError(
                f"no PPW anchor for t_setup_min={t}; pass row_anchor_ppw for "
                "rows outside the default sweep"
            )
        p_avg_col0 = p_avg_model(t, 0.0, energy_wh, n_sleeping)
        row_t95 = derive_row_t95(p_avg_col0, anchors[t])
        for p in p_sleeps_w:
            p_avg = p_avg_model(t, p, energy_wh, n_sleeping)
            if ppw_grid is not None:
                if (t, p) not in ppw_grid:
                    raise ValidationError(f"ppw_grid is missing cell ({t}, {p})")
                cell_ppw = ppw_grid[(t, p)]
            else:
                cell_ppw = ppw(p_avg, row_t95)
            cells.append(
                MetricsCell(
                    t_setup_min=float(t),
                    p_sleep_w=float(p),
                    p_avg_w=p_avg,
                    t95_ms=row_t95,
                    ppw=cell_ppw,
                    nppw=cell_ppw / ppw_alwayson,
                )
            )
    return MetricsTable(cells=tuple(cells))

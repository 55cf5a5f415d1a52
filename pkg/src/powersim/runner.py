"""Mode orchestration shared by the CLI and the HTTP service.

Builds traces, policies, and cluster configs from a RunConfig, runs the
simulations, and (for the CLI) writes the CSV artifacts. All outputs are
deterministic for a given config and seed: rows are emitted in config
order and floats use their shortest round-trip representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from . import analysis, policies, reference
from .config import RunConfig
from .engine import ClusterConfig, ServerPowerProfile, SimResult, run_simulation
from .errors import ValidationError
from .policies import ALWAYSON, REACTIVE, SOFTREACTIVE, PolicySpec, alwayson_servers
from .workload import RequestTrace, TraceSpec, generate_trace, load_trace, peak_rate

COMPARE_HEADER = "policy,avg_power_w,t95_ms,ppw,completed,saturated"
SCALING_HEADER = "fleet_size,policy,nppw,avg_power_w,t95_ms"
SWEEP_HEADER = "t_setup_min,p_sleep_w,value"


@dataclass(frozen=True)
class CompareRow:
    policy: str
    avg_power_w: float
    t95_ms: float
    ppw: float
    completed: int
    saturated: bool


@dataclass(frozen=True)
class ScalingRow:
    fleet_size: int
    policy: str
    nppw: float
    avg_power_w: float
    t95_ms: float
    saturated: bool


def build_trace(cfg: RunConfig) -> RequestTrace:
    if cfg.trace_file is not None:
        with open(cfg.trace_file, encoding="utf-8") as fh:
            return load_trace(fh.read())
    base = cfg.trace_base_rate if cfg.trace_pattern != "constant" else 0.0
    spec = TraceSpec(
        pattern=cfg.trace_pattern,
        peak_rate=cfg.trace_peak_rate,
        duration_s=cfg.trace_duration_s,
        base_rate=base,
        period_s=cfg.trace_period_s,
        seed=cfg.seed,
    )
    return generate_trace(spec)


def build_policies(cfg: RunConfig, trace: RequestTrace) -> list[PolicySpec]:
    out = []
    for kind in cfg.policies:
        if kind == ALWAYSON:
            count = cfg.alwayson_count
            if count is None:
                count = alwayson_servers(peak_rate(trace), cfg.service_rate)
            out.append(policies.alwayson(count))
        elif kind == REACTIVE:
            out.append(policies.reactive())
        elif kind == SOFTREACTIVE:
            out.append(policies.softreactive(cfg.idle_timeout_s))
        else:
            out.append(policies.hybrid(cfg.t_sla_ms, cfg.throughput_est_ms))
    return out


def build_cluster(
    cfg: RunConfig, trace: RequestTrace, n_servers: int | None = None
) -> ClusterConfig:
    n = n_servers if n_servers is not None else cfg.n_servers
    if n is None:
        n = alwayson_servers(peak_rate(trace), cfg.service_rate)
    profile = ServerPowerProfile(
        p_full_w=cfg.p_full_w,
        idle_fraction=cfg.idle_fraction,
        p_sleep_w=cfg.p_sleep_w,
        p_setup_w=cfg.p_setup_w,
    )
    return ClusterConfig(
        n_servers=n,
        t_setup_s=cfg.t_setup_s,
        service_rate=cfg.service_rate,
        decision_epoch_s=cfg.decision_epoch_s,
        idle_timeout_s=cfg.idle_timeout_s,
        power=profile,
    )


def trace_description(cfg: RunConfig) -> str:
    if cfg.trace_file is not None:
        return f"trace file {cfg.trace_file}"
    return (
        f"{cfg.trace_pattern} trace base={cfg.trace_base_rate:g} "
        f"peak={cfg.trace_peak_rate:g} duration={cfg.trace_duration_s:g}s"
    )


# ---------------------------------------------------------------------------
# tables mode

def tables_result(cfg: RunConfig) -> analysis.MetricsTable:
    """The T_setup x P_sleep sweep table for the configured parameters."""
    grid = reference.ppw_grid() if cfg.ppw_source == "reference" else None
    return analysis.build_metrics_table(
        energy_wh=cfg.energy_wh,
        n_sleeping=cfg.n_sleeping,
        t_setups_min=cfg.t_setups_min,
        p_sleeps_w=cfg.p_sleeps_w,
        ppw_alwayson=cfg.ppw_alwayson,
        ppw_grid=grid,
    )


def table_flags(table: analysis.MetricsTable) -> list[analysis.MetricsCell]:
    """Cells where the sweep beats AlwaysOn (nppw > 1)."""
    return [c for c in table.cells if c.nppw > 1.0]


def _sweep_csv(table: analysis.MetricsTable, field: str) -> str:
    lines = [SWEEP_HEADER]
    for c in table.cells:
        lines.append(f"{c.t_setup_min!r},{c.p_sleep_w!r},{getattr(c, field)!r}")
    return "\n".join(lines) + "\n"


def run_tables(cfg: RunConfig) -> dict[str, Path]:
    table = tables_result(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, fld in (("pavg", "p_avg_w"), ("ppw", "ppw"), ("nppw", "nppw")):
        paths[name] = out / f"{name}.csv"
        _write(paths[name], _sweep_csv(table, fld))
    flag_lines = ["t_setup_min,p_sleep_w,nppw"]
    for c in table_flags(table):
        flag_lines.append(f"{c.t_setup_min!r},{c.p_sleep_w!r},{c.nppw!r}")
    paths["flags"] = out / "flags.csv"
    _write(paths["flags"], "\n".join(flag_lines) + "\n")
    paths["metrics"] = out / "metrics.csv"
    _write(paths["metrics"], table.to_csv())
    return paths


# ---------------------------------------------------------------------------
# simulation-backed modes

def run_metrics(res: SimResult) -> tuple[float, float]:
    """(t95_ms, ppw) of one run; NaN when the run has no usable signal."""
    if res.completed == 0:
        return float("nan"), float("nan")
    t95_ms = analysis.t95(res.response_times)
    if res.avg_power_w <= 0 or t95_ms <= 0:
        return t95_ms, float("nan")
    return t95_ms, analysis.ppw(res.avg_power_w, t95_ms)


def simulate_result(cfg: RunConfig) -> list[tuple[PolicySpec, SimResult]]:
    """One simulation per configured policy on the shared trace and seed."""
    trace = build_trace(cfg)
    cluster = build_cluster(cfg, trace)
    out = []
    for pol in build_policies(cfg, trace):
        res = run_simulation(
            trace, pol, cluster, cfg.seed, deterministic=cfg.deterministic
        )
        out.append((pol, res))
    return out


def compare_row(pol: PolicySpec, res: SimResult) -> CompareRow:
    t95_ms, row_ppw = run_metrics(res)
    return CompareRow(
        policy=pol.label,
        avg_power_w=res.avg_power_w,
        t95_ms=t95_ms,
        ppw=row_ppw,
        completed=res.completed,
        saturated=res.saturated,
    )


def compare_result(cfg: RunConfig) -> tuple[list[CompareRow], str]:
    if len(cfg.policies) < 2:
        raise ValidationError(
            f"compare mode needs at least two policies, got {len(cfg.policies)}"
        )
    runs = simulate_result(cfg)
    duration = {res.duration_s for _, res in runs}
    if len(duration) != 1:
        raise ValidationError(f"policies ran over mismatched horizons: {sorted(duration)}")
    rows = [compare_row(pol, res) for pol, res in runs]
    return rows, summary_text(rows, trace_description(cfg), cfg.seed)


def summary_text(rows: list[CompareRow], description: str, seed: int) -> str:
    lines = [f"compared {len(rows)} policies on {description} (seed {seed})"]
    for r in rows:
        lines.append(
            f"  {r.policy}: avg_power_w={r.avg_power_w:.1f} t95_ms={r.t95_ms:.3f} "
            f"ppw={r.ppw:.6g} completed={r.completed} saturated={_bool(r.saturated)}"
        )
    scored = [r for r in rows if not math.isnan(r.ppw)]
    if scored:
        best = max(scored, key=lambda r: r.ppw)
        lines.append(f"highest ppw: {best.policy} ({best.ppw:.6g})")
    baseline = next((r for r in rows if r.policy == ALWAYSON), None)
    if baseline is not None and baseline.avg_power_w > 0:
        for r in rows:
            if r is baseline:
                continue
            cut = (1.0 - r.avg_power_w / baseline.avg_power_w) * 100.0
            lines.append(
                f"{r.policy} average power is {cut:.1f}% below {baseline.policy}"
            )
    return "\n".join(lines) + "\n"


def run_compare(cfg: RunConfig) -> dict[str, Path]:
    rows, summary = compare_result(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = [COMPARE_HEADER]
    for r in rows:
        lines.append(
            f"{r.policy},{r.avg_power_w!r},{r.t95_ms!r},{r.ppw!r},"
            f"{r.completed},{_bool(r.saturated)}"
        )
    paths = {"compare": out / "compare.csv", "summary": out / "summary.txt"}
    _write(paths["compare"], "\n".join(lines) + "\n")
    _write(paths["summary"], summary)
    return paths


def scaling_rows(
    trace: RequestTrace,
    pols: list[PolicySpec],
    clusters: dict[int, ClusterConfig],
    seed: int,
    deterministic: bool = False,
) -> list[ScalingRow]:
    """Per fleet size: each policy's PPW against a full-fleet AlwaysOn run.

    The baseline keeps every server of the fleet provisioned, so the
    normalization captures how much idle capacity the policy can reclaim
    as the fleet grows.
    """
    rows = []
    for size, cluster in clusters.items():
        base = run_simulation(
            trace, policies.alwayson(size), cluster, seed, deterministic=deterministic
        )
        _, base_ppw = run_metrics(base)
        for pol in pols:
            res = run_simulation(
                trace, pol, cluster, seed, deterministic=deterministic
            )
            t95_ms, pol_ppw = run_metrics(res)
            ratio = (
                pol_ppw / base_ppw
                if not (math.isnan(pol_ppw) or math.isnan(base_ppw))
                else float("nan")
            )
            rows.append(
                ScalingRow(
                    fleet_size=size,
                    policy=pol.label,
                    nppw=ratio,
                    avg_power_w=res.avg_power_w,
                    t95_ms=t95_ms,
                    saturated=res.saturated,
                )
            )
    return rows


def scaling_result(cfg: RunConfig) -> list[ScalingRow]:
    trace = build_trace(cfg)
    pols = build_policies(cfg, trace)
    clusters = {
        size: build_cluster(cfg, trace, n_servers=size) for size in cfg.fleet_sizes
    }
    return scaling_rows(trace, pols, clusters, cfg.seed, cfg.deterministic)


def run_scaling(cfg: RunConfig) -> dict[str, Path]:
    rows = scaling_result(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = [SCALING_HEADER]
    flag_lines = ["fleet_size,policy,saturated"]
    for r in rows:
        lines.append(
            f"{r.fleet_size},{r.policy},{r.nppw!r},{r.avg_power_w!r},{r.t95_ms!r}"
        )
        if r.saturated:
            flag_lines.append(f"{r.fleet_size},{r.policy},true")
    paths = {"scaling": out / "scaling.csv", "flags": out / "scaling_flags.csv"}
    _write(paths["scaling"], "\n".join(lines) + "\n")
    _write(paths["flags"], "\n".join(flag_lines) + "\n")
    return paths


def run_simulate(cfg: RunConfig) -> dict[str, Path]:
    """Single-run mode: per-policy result rows plus plot-ready timelines."""
    runs = simulate_result(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = [COMPARE_HEADER]
    paths: dict[str, Path] = {}
    for pol, res in runs:
        r = compare_row(pol, res)
        lines.append(
            f"{r.policy},{r.avg_power_w!r},{r.t95_ms!r},{r.ppw!r},"
            f"{r.completed},{_bool(r.saturated)}"
        )
        power_lines = ["time_s,power_w"]
        for t, w in zip(res.power_times, res.power_watts):
            power_lines.append(f"{t!r},{w!r}")
        paths[f"power_{pol.label}"] = out / f"power_{pol.label}.csv"
        _write(paths[f"power_{pol.label}"], "\n".join(power_lines) + "\n")
        server_lines = ["time_s,busy,idle,setup,sleep"]
        for t, counts in res.active_server_timeline:
            server_lines.append(
                f"{t!r},{counts.busy},{counts.idle},{counts.setup},{counts.sleep}"
            )
        paths[f"servers_{pol.label}"] = out / f"servers_{pol.label}.csv"
        _write(paths[f"servers_{pol.label}"], "\n".join(server_lines) + "\n")
    paths["result"] = out / "result.csv"
    _write(paths["result"], "\n".join(lines) + "\n")
    return paths


def run_mode(cfg: RunConfig) -> dict[str, Path]:
    """Dispatch on cfg.mode; returns the files written."""
    if cfg.mode == "tables":
        return run_tables(cfg)
    if cfg.mode == "compare":
        return run_compare(cfg)
    if cfg.mode == "scaling":
        return run_scaling(cfg)
    return run_simulate(cfg)


def _bool(flag: bool) -> str:
    return "true" if flag else "false"


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)

"""HTTP front end over the simulator and analysis tables.

Thin JSON wrapper: every endpoint builds the same core objects the CLI
builds from its config file, runs the same functions, and returns the
rows the CLI would have written as CSV.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import analysis, reference, runner
from ..config import PPW_SOURCES
from ..engine import ClusterConfig, ServerPowerProfile, run_simulation
from ..errors import ContractViolationError, ValidationError
from ..policies import PolicySpec, alwayson_servers
from ..workload import RequestTrace, TraceSpec, generate_trace, peak_rate
from .schemas import (
    ClusterModel,
    CompareRequest,
    CompareResponse,
    MetricsCellModel,
    PolicyModel,
    PolicyResultModel,
    ScalingRequest,
    ScalingResponse,
    ScalingRowModel,
    SimulateRequest,
    SimulateResponse,
    TablesRequest,
    TablesResponse,
    TraceModel,
)

app = FastAPI(title="powersim", version="0.1.0")


@app.exception_handler(ValidationError)
async def _on_validation_error(request: Request, exc: ValidationError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(ContractViolationError)
async def _on_contract_violation(request: Request, exc: ContractViolationError):
    return JSONResponse(status_code=500, content={"detail": str(exc)})


def _trace_from(model: TraceModel) -> RequestTrace:
    if model.samples is not None:
        samples = tuple((float(t), float(r)) for t, r in model.samples)
        return RequestTrace(samples=samples, duration_s=model.duration_s)
    base = model.base_rate if model.pattern != "constant" else 0.0
    spec = TraceSpec(
        pattern=model.pattern,
        peak_rate=model.peak_rate,
        duration_s=model.duration_s,
        base_rate=base,
        period_s=model.period_s,
    )
    return generate_trace(spec)


def _describe(model: TraceModel) -> str:
    if model.samples is not None:
        return f"inline trace ({len(model.samples)} samples)"
    return (
        f"{model.pattern} trace base={model.base_rate:g} "
        f"peak={model.peak_rate:g} duration={model.duration_s:g}s"
    )


def _policy_from(model: PolicyModel) -> PolicySpec:
    return PolicySpec(
        kind=model.kind,
        provisioned_count=model.provisioned_count,
        idle_timeout_s=model.idle_timeout_s,
        t_sla_ms=model.t_sla_ms,
        throughput_est_ms=model.throughput_est_ms,
    )


def _cluster_from(
    model: ClusterModel, trace: RequestTrace, n_servers: int | None = None
) -> ClusterConfig:
    n = n_servers if n_servers is not None else model.n_servers
    if n is None:
        n = alwayson_servers(peak_rate(trace), model.service_rate)
    profile = ServerPowerProfile(
        p_full_w=model.p_full_w,
        idle_fraction=model.idle_fraction,
        p_sleep_w=model.p_sleep_w,
        p_setup_w=model.p_setup_w,
    )
    return ClusterConfig(
        n_servers=n,
        t_setup_s=model.t_setup_s,
        service_rate=model.service_rate,
        decision_epoch_s=model.decision_epoch_s,
        idle_timeout_s=model.idle_timeout_s,
        power=profile,
    )


def _nullable(value: float) -> float | None:
    return None if math.isnan(value) else value


def _row_model(row: runner.CompareRow) -> PolicyResultModel:
    return PolicyResultModel(
        policy=row.policy,
        avg_power_w=row.avg_power_w,
        t95_ms=_nullable(row.t95_ms),
        ppw=_nullable(row.ppw),
        completed=row.completed,
        saturated=row.saturated,
    )


@app.get("/healthz")
def healthz():
    return {"status": "ok"}


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> SimulateResponse:
    trace = _trace_from(req.trace)
    pol = _policy_from(req.policy)
    cluster = _cluster_from(req.cluster, trace)
    res = run_simulation(
        trace, pol, cluster, req.seed, deterministic=req.deterministic
    )
    t95_ms, row_ppw = runner.run_metrics(res)
    return SimulateResponse(
        policy=res.policy,
        duration_s=res.duration_s,
        arrived=res.arrived,
        completed=res.completed,
        queued_at_end=res.queued_at_end,
        in_service_at_end=res.in_service_at_end,
        energy_wh=res.energy_wh,
        avg_power_w=res.avg_power_w,
        t95_ms=_nullable(t95_ms),
        ppw=_nullable(row_ppw),
        saturated=res.saturated,
        commands_issued=len(res.commands),
    )


@app.post("/compare", response_model=CompareResponse)
def compare(req: CompareRequest) -> CompareResponse:
    trace = _trace_from(req.trace)
    cluster = _cluster_from(req.cluster, trace)
    rows = []
    for pm in req.policies:
        pol = _policy_from(pm)
        res = run_simulation(
            trace, pol, cluster, req.seed, deterministic=req.deterministic
        )
        rows.append(runner.compare_row(pol, res))
    summary = runner.summary_text(rows, _describe(req.trace), req.seed)
    return CompareResponse(rows=[_row_model(r) for r in rows], summary=summary)


@app.post("/scaling", response_model=ScalingResponse)
def scaling(req: ScalingRequest) -> ScalingResponse:
    trace = _trace_from(req.trace)
    pols = [_policy_from(pm) for pm in req.policies]
    clusters = {
        size: _cluster_from(req.cluster, trace, n_servers=size)
        for size in req.fleet_sizes
    }
    rows = runner.scaling_rows(trace, pols, clusters, req.seed, req.deterministic)
    return ScalingResponse(
        rows=[
            ScalingRowModel(
                fleet_size=r.fleet_size,
                policy=r.policy,
                nppw=_nullable(r.nppw),
                avg_power_w=r.avg_power_w,
                t95_ms=_nullable(r.t95_ms),
                saturated=r.saturated,
            )
            for r in rows
        ]
    )


@app.post("/tables", response_model=TablesResponse)
def tables(req: TablesRequest) -> TablesResponse:
    if req.ppw_source not in PPW_SOURCES:
        raise ValidationError(
            f"ppw_source must be one of {PPW_SOURCES}, got {req.ppw_source!r}"
        )
    grid = reference.ppw_grid() if req.ppw_source == "reference" else None
    table = analysis.build_metrics_table(
        energy_wh=req.energy_wh,
        n_sleeping=req.n_sleeping,
        t_setups_min=tuple(req.t_setups_min),
        p_sleeps_w=tuple(req.p_sleeps_w),
        ppw_alwayson=req.ppw_alwayson,
        ppw_grid=grid,
    )
    cells = [MetricsCellModel(**vars(c)) for c in table.cells]
    flags = [MetricsCellModel(**vars(c)) for c in runner.table_flags(table)]
    return TablesResponse(cells=cells, flags=flags)

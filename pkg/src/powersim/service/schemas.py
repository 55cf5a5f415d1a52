"""Request/response models for the HTTP service.

NaN has no JSON encoding, so metrics that can be undefined (t95/ppw of a
run with no completions) are nullable and arrive as null instead.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class TraceModel(BaseModel):
    """A generated pattern, or explicit (time, rate) samples when given."""

    pattern: str = "sinusoid"
    base_rate: float = 200.0
    peak_rate: float = 800.0
    duration_s: float = 14400.0
    period_s: float | None = None
    samples: list[tuple[float, float]] | None = None


class PolicyModel(BaseModel):
    kind: str
    provisioned_count: int | None = None
    idle_timeout_s: float | None = None
    t_sla_ms: float = 2000.0
    throughput_est_ms: float = 1000.0


class ClusterModel(BaseModel):
    n_servers: int | None = None
    t_setup_s: float = 60.0
    service_rate: float = 60.0
    decision_epoch_s: float = 60.0
    idle_timeout_s: float = 0.0
    p_full_w: float = 200.0
    idle_fraction: float = 0.9
    p_sleep_w: float = 0.0
    p_setup_w: float | None = None


class SimulateRequest(BaseModel):
    trace: TraceModel = Field(default_factory=TraceModel)
    policy: PolicyModel
    cluster: ClusterModel = Field(default_factory=ClusterModel)
    seed: int = Field(default=0, ge=0)
    deterministic: bool = False


class SimulateResponse(BaseModel):
    policy: str
    duration_s: float
    arrived: int
    completed: int
    queued_at_end: int
    in_service_at_end: int
    energy_wh: float
    avg_power_w: float
    t95_ms: float | None
    ppw: float | None
    saturated: bool
    commands_issued: int


class CompareRequest(BaseModel):
    trace: TraceModel = Field(default_factory=TraceModel)
    policies: list[PolicyModel] = Field(min_length=2)
    cluster: ClusterModel = Field(default_factory=ClusterModel)
    seed: int = Field(default=0, ge=0)
    deterministic: bool = False


class PolicyResultModel(BaseModel):
    policy: str
    avg_power_w: float
    t95_ms: float | None
    ppw: float | None
    completed: int
    saturated: bool


class CompareResponse(BaseModel):
    rows: list[PolicyResultModel]
    summary: str


class ScalingRequest(BaseModel):
    trace: TraceModel = Field(default_factory=TraceModel)
    policies: list[PolicyModel] = Field(min_length=1)
    fleet_sizes: list[int] = Field(default=[14, 20, 30, 40, 50, 60], min_length=1)
    cluster: ClusterModel = Field(default_factory=ClusterModel)
    seed: int = Field(default=0, ge=0)
    deterministic: bool = False


class ScalingRowModel(BaseModel):
    fleet_size: int
    policy: str
    nppw: float | None
    avg_power_w: float
    t95_ms: float | None
    saturated: bool


class ScalingResponse(BaseModel):
    rows: list[ScalingRowModel]


class TablesRequest(BaseModel):
    energy_wh: float = 250.0
    n_sleeping: float = 10.0
    t_setups_min: list[float] = Field(default=[15, 16, 17, 18, 19], min_length=1)
    p_sleeps_w: list[float] = Field(default=[0, 28, 56, 84], min_length=1)
    ppw_alwayson: float = 1.7e-6
    ppw_source: str = "reference"


class MetricsCellModel(BaseModel):
    t_setup_min: float
    p_sleep_w: float
    p_avg_w: float
    t95_ms: float
    ppw: float
    nppw: float


class TablesResponse(BaseModel):
    cells: list[MetricsCellModel]
    flags: list[MetricsCellModel]

"""Trace-driven simulation and analysis of data-center power management.

Core pieces: workload traces (workload), provisioning policies (policies),
the discrete-event cluster simulator (engine), energy/PPW math and sweep
tables (analysis), run orchestration (runner, config), and two front ends
(cli, service).
"""

from .analysis import MetricsTable, build_metrics_table
from .config import RunConfig, load_config, parse_config
from .engine import ClusterConfig, ServerPowerProfile, SimResult, run_simulation
from .errors import ContractViolationError, PowersimError, ValidationError
from .policies import PolicySpec, alwayson, hybrid, reactive, softreactive
from .workload import RequestTrace, TraceSpec, dump_trace, generate_trace, load_trace

__version__ = "0.1.0"

__all__ = [
    "ClusterConfig",
    "ContractViolationError",
    "MetricsTable",
    "PolicySpec",
    "PowersimError",
    "RequestTrace",
    "RunConfig",
    "ServerPowerProfile",
    "SimResult",
    "TraceSpec",
    "ValidationError",
    "alwayson",
    "build_metrics_table",
    "dump_trace",
    "generate_trace",
    "hybrid",
    "load_config",
    "load_trace",
    "parse_config",
    "reactive",
    "run_simulation",
    "softreactive",
    "__version__",
]

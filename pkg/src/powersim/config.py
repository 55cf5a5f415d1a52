"""Flat key = value run configuration.

One documented key per field, `#` starts a comment, blank lines are
ignored, unknown keys are rejected. The same RunConfig drives every mode
(simulate, tables, compare, scaling); the CLI subcommand overrides the
mode key when both are given.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ValidationError
from .policies import POLICY_KINDS
from .workload import PATTERNS

MODES = ("simulate", "tables", "compare", "scaling")
PPW_SOURCES = ("reference", "computed")

DEFAULT_T_SETUPS_MIN = (15.0, 16.0, 17.0, 18.0, 19.0)
DEFAULT_P_SLEEPS_W = (0.0, 28.0, 56.0, 84.0)
DEFAULT_FLEET_SIZES = (14, 20, 30, 40, 50, 60)


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs: workload, policies, cluster, sweep, output."""

    mode: str = "tables"
    # workload: either a trace file or a generated pattern
    trace_file: str | None = None
    trace_pattern: str = "sinusoid"
    trace_base_rate: float = 200.0
    trace_peak_rate: float = 800.0
    trace_duration_s: float = 14400.0
    trace_period_s: float | None = None
    # policies
    policies: tuple[str, ...] = ("alwayson", "hybrid")
    alwayson_count: int | None = None
    idle_timeout_s: float = 0.0
    t_sla_ms: float = 2000.0
    throughput_est_ms: float = 1000.0
    # cluster
    n_servers: int | None = None
    t_setup_s: float = 60.0
    service_rate: float = 60.0
    decision_epoch_s: float = 60.0
    p_full_w: float = 200.0
    idle_fraction: float = 0.9
    p_sleep_w: float = 0.0
    p_setup_w: float | None = None
    # sweep ranges (tables mode)
    t_setups_min: tuple[float, ...] = DEFAULT_T_SETUPS_MIN
    p_sleeps_w: tuple[float, ...] = DEFAULT_P_SLEEPS_W
    # analysis parameters
    energy_wh: float = 250.0
    n_sleeping: float = 10.0
    ppw_alwayson: float = 1.7e-6
    n_disciplines: int = 1
    cpu_speed: float = 1.0
    ppw_source: str = "reference"
    # scaling mode
    fleet_sizes: tuple[int, ...] = DEFAULT_FLEET_SIZES
    # run control
    out_dir: str = "out"
    seed: int = 0
    deterministic: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.trace_pattern not in PATTERNS:
            raise ValidationError(
                f"trace_pattern must be one of {PATTERNS}, got {self.trace_pattern!r}"
            )
        if self.ppw_source not in PPW_SOURCES:
            raise ValidationError(
                f"ppw_source must be one of {PPW_SOURCES}, got {self.ppw_source!r}"
            )
        if not self.policies:
            raise ValidationError("at least one policy is required")
        for kind in self.policies:
            if kind not in POLICY_KINDS:
                raise ValidationError(
                    f"unknown policy {kind!r}; choose from {POLICY_KINDS}"
                )
        if not self.t_setups_min or not self.p_sleeps_w:
            raise ValidationError("sweep ranges t_setups_min/p_sleeps_w are empty")
        if not self.fleet_sizes:
            raise ValidationError("fleet_sizes is empty")
        if self.seed < 0:
            raise ValidationError(f"seed must be a non-negative integer, got {self.seed}")


def _parse_bool(raw: str, key: str) -> bool:
    low = raw.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValidationError(f"config key {key!r}: expected a boolean, got {raw!r}")


def _parse_number(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ValidationError(f"config key {key!r}: expected a number, got {raw!r}") from None


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"config key {key!r}: expected an integer, got {raw!r}") from None


def _parse_num_list(raw: str, key: str) -> tuple[float, ...]:
    items = [part.strip() for part in raw.split(",") if part.strip()]
    return tuple(_parse_number(part, key) for part in items)


def _parse_int_list(raw: str, key: str) -> tuple[int, ...]:
    items = [part.strip() for part in raw.split(",") if part.strip()]
    return tuple(_parse_int(part, key) for part in items)


def _parse_str_list(raw: str, key: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in raw.split(",") if part.strip())


_STR_KEYS = {"mode", "trace_file", "trace_pattern", "ppw_source", "out_dir"}
_INT_KEYS = {"alwayson_count", "n_servers", "n_disciplines", "seed"}
_BOOL_KEYS = {"deterministic"}
_NUM_LIST_KEYS = {"t_setups_min", "p_sleeps_w"}
_INT_LIST_KEYS = {"fleet_sizes"}
_STR_LIST_KEYS = {"policies"}
_FLOAT_KEYS = {
    "trace_base_rate",
    "trace_peak_rate",
    "trace_duration_s",
    "trace_period_s",
    "idle_timeout_s",
    "t_sla_ms",
    "throughput_est_ms",
    "t_setup_s",
    "service_rate",
    "decision_epoch_s",
    "p_full_w",
    "idle_fraction",
    "p_sleep_w",
    "p_setup_w",
    "energy_wh",
    "n_sleeping",
    "ppw_alwayson",
    "cpu_speed",
}
_ALL_KEYS = (
    _STR_KEYS | _INT_KEYS | _BOOL_KEYS | _NUM_LIST_KEYS | _INT_LIST_KEYS
    | _STR_LIST_KEYS | _FLOAT_KEYS
)
assert _ALL_KEYS == {f.name for f in fields(RunConfig)}


def parse_config(text: str) -> RunConfig:
    """Parse the flat key = value format into a RunConfig."""
    values: dict = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValidationError(f"config line {line_no}: expected key = value, got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _ALL_KEYS:
            raise ValidationError(f"config line {line_no}: unknown key {key!r}")
        if key in values:
            raise ValidationError(f"config line {line_no}: duplicate key {key!r}")
        if not raw:
            continue  # empty value keeps the default
        if key in _STR_KEYS:
            values[key] = raw
        elif key in _BOOL_KEYS:
            values[key] = _parse_bool(raw, key)
        elif key in _INT_KEYS:
            values[key] = _parse_int(raw, key)
        elif key in _NUM_LIST_KEYS:
            values[key] = _parse_num_list(raw, key)
        elif key in _INT_LIST_KEYS:
            values[key] = _parse_int_list(raw, key)
        elif key in _STR_LIST_KEYS:
            values[key] = _parse_str_list(raw, key)
        else:
            values[key] = _parse_number(raw, key)
    return RunConfig(**values)


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text)


def with_overrides(
    cfg: RunConfig,
    mode: str | None = None,
    out_dir: str | None = None,
    seed: int | None = None,
    deterministic: bool | None = None,
) -> RunConfig:
    """Apply command-line overrides on top of a parsed config."""
    updates: dict = {}
    if mode is not None:
        updates["mode"] = mode
    if out_dir is not None:
        updates["out_dir"] = out_dir
    if seed is not None:
        updates["seed"] = seed
    if deterministic is not None:
        updates["deterministic"] = deterministic
    return replace(cfg, **updates) if updates else cfg

"""Flat key = value config parsing and CLI overrides."""

from pathlib import Path

import pytest

from powersim.config import (
    DEFAULT_FLEET_SIZES,
    DEFAULT_P_SLEEPS_W,
    DEFAULT_T_SETUPS_MIN,
    RunConfig,
    load_config,
    parse_config,
    with_overrides,
)
from powersim.errors import ValidationError


def test_empty_text_yields_defaults():
    assert parse_config("") == RunConfig()


def test_defaults():
    cfg = RunConfig()
    assert cfg.mode == "tables"
    assert cfg.trace_pattern == "sinusoid"
    assert cfg.trace_base_rate == 200.0
    assert cfg.trace_peak_rate == 800.0
    assert cfg.policies == ("alwayson", "hybrid")
    assert cfg.t_setups_min == DEFAULT_T_SETUPS_MIN
    assert cfg.p_sleeps_w == DEFAULT_P_SLEEPS_W
    assert cfg.fleet_sizes == DEFAULT_FLEET_SIZES
    assert cfg.energy_wh == 250.0
    assert cfg.ppw_alwayson == 1.7e-6
    assert cfg.seed == 0
    assert cfg.deterministic is False


def test_parse_every_value_kind():
    text = """
    mode = compare
    trace_pattern = constant        # trailing comment
    trace_peak_rate = 240
    trace_duration_s = 600
    policies = alwayson, reactive, hybrid
    alwayson_count = 4
    n_servers = 6
    t_setups_min = 15, 16
    p_sleeps_w = 0, 28
    fleet_sizes = 2, 4, 8
    deterministic = true
    seed = 7
    out_dir = results
    ppw_source = computed
    idle_timeout_s = 30.5
    """
    cfg = parse_config(text)
    assert cfg.mode == "compare"
    assert cfg.trace_pattern == "constant"
    assert cfg.trace_peak_rate == 240.0
    assert cfg.policies == ("alwayson", "reactive", "hybrid")
    assert cfg.alwayson_count == 4
    assert cfg.n_servers == 6
    assert cfg.t_setups_min == (15.0, 16.0)
    assert cfg.p_sleeps_w == (0.0, 28.0)
    assert cfg.fleet_sizes == (2, 4, 8)
    assert cfg.deterministic is True
    assert cfg.seed == 7
    assert cfg.out_dir == "results"
    assert cfg.ppw_source == "computed"
    assert cfg.idle_timeout_s == 30.5


@pytest.mark.parametrize("raw,expected", [
    ("true", True), ("yes", True), ("1", True), ("on", True),
    ("false", False), ("no", False), ("0", False), ("off", False),
])
def test_bool_spellings(raw, expected):
    assert parse_config(f"deterministic = {raw}").deterministic is expected


def test_comments_and_blank_lines_are_skipped():
    cfg = parse_config("# a comment\n\n   \nseed = 3\n")
    assert cfg.seed == 3


def test_empty_value_keeps_the_default():
    cfg = parse_config("seed =\nout_dir =\n")
    assert cfg.seed == 0
    assert cfg.out_dir == "out"


def test_unknown_key_reports_the_line():
    with pytest.raises(ValidationError, match="line 2.*sleep_power"):
        parse_config("seed = 1\nsleep_power = 3\n")


def test_duplicate_key_reports_the_line():
    with pytest.raises(ValidationError, match="line 3.*duplicate.*seed"):
        parse_config("seed = 1\n# spacer\nseed = 2\n")


def test_line_without_equals_is_rejected():
    with pytest.raises(ValidationError, match="line 1"):
        parse_config("just some words\n")


def test_bad_typed_values_name_the_key():
    with pytest.raises(ValidationError, match="seed"):
        parse_config("seed = soon\n")
    with pytest.raises(ValidationError, match="trace_peak_rate"):
        parse_config("trace_peak_rate = fast\n")
    with pytest.raises(ValidationError, match="deterministic"):
        parse_config("deterministic = maybe\n")
    with pytest.raises(ValidationError, match="fleet_sizes"):
        parse_config("fleet_sizes = 2, two\n")


def test_semantic_validation():
    with pytest.raises(ValidationError, match="mode"):
        parse_config("mode = graphs\n")
    with pytest.raises(ValidationError, match="trace_pattern"):
        parse_config("trace_pattern = square\n")
    with pytest.raises(ValidationError, match="ppw_source"):
        parse_config("ppw_source = guess\n")
    with pytest.raises(ValidationError, match="policy"):
        parse_config("policies = alwayson, lazy\n")
    with pytest.raises(ValidationError, match="fleet_sizes"):
        parse_config("fleet_sizes = ,\n")
    with pytest.raises(ValidationError, match="seed"):
        parse_config("seed = -1\n")


def test_load_config_reads_a_file(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("mode = scaling\nseed = 11\n", encoding="utf-8")
    cfg = load_config(str(path))
    assert cfg.mode == "scaling"
    assert cfg.seed == 11


def test_shipped_sample_configs_parse():
    configs = Path(__file__).resolve().parent.parent / "configs"
    for name in ("tables.conf", "compare.conf", "scaling.conf"):
        cfg = load_config(str(configs / name))
        assert cfg.mode == name.removesuffix(".conf")


def test_with_overrides():
    cfg = RunConfig()
    out = with_overrides(cfg, mode="compare", out_dir="elsewhere", seed=9, deterministic=True)
    assert (out.mode, out.out_dir, out.seed, out.deterministic) == ("compare", "elsewhere", 9, True)
    # untouched fields carry over; no overrides returns the same object
    assert out.policies == cfg.policies
    assert with_overrides(cfg) is cfg

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dtqc.config import (
    RunConfig,
    chain_from_settings,
    load_settings,
    parse_bool,
    parse_float,
    parse_values,
    read_ini,
)
from dtqc.errors import DataIOError, PartitionError, ValidationError
from dtqc.model import GOLDEN_RATIO

EXAMPLE = """
[chain]
n_sites = 8
n_left = 3
couplings = uniform   ; same couplings on both sides
omega_left = 1.5

[drive]
f_left = 1.33
theta = 0.5pi

[run]
t_max = 20
sample_dt = 0.1
observables = m, m_signed

[output]
path = out.csv
"""


@pytest.mark.parametrize("text,value", [
    ("pi", math.pi), ("-pi", -math.pi), ("0.5pi", math.pi / 2), ("0.5*pi", math.pi / 2),
    (" 2.5 ", 2.5), ("1e-3", 1e-3), (3, 3.0),
])
def test_parse_float(text, value):
    assert parse_float(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text", ["abc", "pi pi", "", "1,2"])
def test_parse_float_rejects(text):
    with pytest.raises(ValidationError):
        parse_float(text)


def test_parse_values():
    assert parse_values("1, 2.5, pi") == (1.0, 2.5, math.pi)
    assert parse_values("2.0:2.2:0.05") == (2.0, 2.05, 2.1, 2.15, 2.2)
    assert len(parse_values("2.0:4.5:0.05")) == 51
    assert len(parse_values("0.5:3.5:0.05")) == 61
    assert parse_values("") == ()
    assert parse_values([1, "pi"]) == (1.0, math.pi)
    for bad in ("1:2", "1:2:0", "2:1:0.5", "1:2:-1"):
        with pytest.raises(ValidationError):
            parse_values(bad)


@given(st.floats(-5, 5), st.floats(0, 5), st.floats(0.01, 1))
def test_range_is_inclusive_and_bounded(start, span, step):
    vals = parse_values(f"{start!r}:{start + span!r}:{step!r}")
    assert vals[0] == pytest.approx(start, abs=1e-11)
    assert vals[-1] <= start + span + 1e-9
    assert start + span - vals[-1] < step + 1e-9


def test_parse_bool():
    assert parse_bool("yes") and parse_bool(True) and not parse_bool("off")
    with pytest.raises(ValidationError):
        parse_bool("maybe")


def test_ini_roundtrip(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(EXAMPLE)
    s = read_ini(path)
    assert s["chain.couplings"] == "uniform"
    cfg = RunConfig.from_settings(s)
    p = cfg.params
    assert (p.n_sites, p.n_left) == (8, 3)
    assert p.omega_right == p.omega_left == 1.5
    assert p.f_left == pytest.approx(1.33) and p.period_right == p.period_left
    assert p.theta_left == p.theta_right == pytest.approx(math.pi / 2)
    assert cfg.observables == ("m", "m_signed")
    assert (cfg.t_max, cfg.sample_dt, cfg.output) == (20.0, 0.1, "out.csv")


def test_cli_overrides_win(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(EXAMPLE)
    s = load_settings(path, {"chain.n_sites": 10, "chain.n_left": None, "run.t_max": "5"})
    cfg = RunConfig.from_settings(s)
    assert cfg.params.n_sites == 10 and cfg.params.n_left == 3 and cfg.t_max == 5.0


def test_golden_defaults():
    p = chain_from_settings({"drive.period_left": "4.74"})
    assert (p.n_sites, p.n_left) == (10, 5)
    assert p.omega_right == pytest.approx(GOLDEN_RATIO)
    assert p.period_right == pytest.approx(4.74 / GOLDEN_RATIO)
    assert p.theta_left == p.theta_right == math.pi
    q = chain_from_settings({"chain.omega_right": "2.0", "drive.theta_right": "0"})
    assert q.omega_right == 2.0 and q.theta_right == 0.0 and q.theta_left == math.pi


def test_explicit_needs_right_values():
    with pytest.raises(ValidationError):
        chain_from_settings({"chain.couplings": "explicit"})
    with pytest.raises(ValidationError):
        chain_from_settings({"chain.couplings": "explicit", "chain.omega_right": "1"})
    p = chain_from_settings({"chain.couplings": "explicit", "chain.omega_right": "1",
                             "drive.f_right": "2"})
    assert p.period_right == pytest.approx(math.pi)


def test_config_errors(tmp_path):
    with pytest.raises(ValidationError):
        chain_from_settings({"chain.couplings": "random"})
    with pytest.raises(ValidationError):
        chain_from_settings({"drive.f_left": "1", "drive.period_left": "6"})
    with pytest.raises(ValidationError):
        chain_from_settings({"drive.f_left": "0"})
    with pytest.raises(PartitionError):
        chain_from_settings({"chain.n_sites": "6", "chain.n_left": "6"})
    with pytest.raises(ValidationError):
        RunConfig.from_settings({"run.sample_dt": "0"})
    with pytest.raises(ValidationError):
        RunConfig.from_settings({"run.t_max": "-1"})
    bad = tmp_path / "bad.ini"
    bad.write_text("[chains]\nn_sites = 4\n")
    with pytest.raises(ValidationError):
        read_ini(bad)
    bad.write_text("n_sites = 4\n")
    with pytest.raises(ValidationError):
        read_ini(bad)
    with pytest.raises(DataIOError):
        read_ini(tmp_path / "missing.ini")

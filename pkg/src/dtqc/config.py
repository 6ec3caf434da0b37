"""Run configuration from an INI file plus command-line overrides.

Example::

    [chain]
    n_sites = 10
    n_left = 5
    couplings = golden      ; golden | uniform | explicit
    omega_left = 1.0
    initial_state = Z2

    [drive]
    period_left = 4.74      ; or f_left = 1.3255
    theta = pi

    [run]
    t_max = 1000
    sample_dt = 0.05
    engine = auto
    observables = m, fidelity, entropy

    [grid]
    theta_values = 2.0:4.5:0.05
    f_left_values = 0.6, 1.0, 1.33
    sizes = 10
    observable = m

    [output]
    path = out/run.csv

With ``couplings = golden`` the right-region values default to
``omega_right = r * omega_left`` and ``period_right = period_left / r``; with
``uniform`` they equal the left ones. Explicit keys always win.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataIOError, ValidationError
from .model import GOLDEN_RATIO, ChainParameters
from .propagator import DEFAULT_SAMPLE_DT

SECTIONS = ("chain", "drive", "run", "grid", "output")
COUPLINGS = ("golden", "uniform", "explicit")


def parse_float(text) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower()
    try:
        if s.endswith("pi"):
            # "pi", "-pi", "0.5pi", "0.5*pi"
            head = s[:-2].strip().rstrip("*").strip()
            coef = {"": 1.0, "+": 1.0, "-": -1.0}.get(head)
            return math.pi * (float(head) if coef is None else coef)
        return float(s)
    except ValueError:
        raise ValidationError(f"not a number: {text!r}") from None


def parse_values(text) -> tuple:
    """Comma list (``1, 2.5, pi``) or inclusive range ``start:stop:step``."""
    if isinstance(text, (list, tuple)):
        return tuple(parse_float(v) for v in text)
    s = str(text).strip()
    if not s:
        return ()
    if ":" in s:
        parts = [parse_float(p) for p in s.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValidationError(f"range must be start:stop:step with step > 0, got {text!r}")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ValidationError(f"empty range {text!r}")
        return tuple(float(v) for v in np.round(start + step * np.arange(count), 12))
    return tuple(parse_float(v) for v in s.split(",") if v.strip())


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {text!r}")


def parse_int(text) -> int:
    try:
        return int(str(text).strip())
    except ValueError:
        raise ValidationError(f"not an integer: {text!r}") from None


def read_ini(path) -> dict:
    """Flatten an INI file into ``{"section.key": value}``."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise DataIOError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ValidationError(f"malformed config {path}: {exc}") from exc
    out = {}
    for section in cp.sections():
        if section not in SECTIONS:
            raise ValidationError(f"unknown config section [{section}]; known: {', '.join(SECTIONS)}")
        for key, value in cp.items(section):
            out[f"{section}.{key}"] = value
    return out


def chain_from_settings(s: dict) -> ChainParameters:
    def get(key, default=None):
        return s.get(key, default)

    n_sites = parse_int(get("chain.n_sites", 10))
    n_left = parse_int(get("chain.n_left", n_sites // 2))
    couplings = str(get("chain.couplings", "golden")).strip()
    if couplings not in COUPLINGS:
        raise ValidationError(f"couplings must be one of {COUPLINGS}, got {couplings!r}")
    ratio = {"golden": GOLDEN_RATIO, "uniform": 1.0, "explicit": None}[couplings]

    omega_left = parse_float(get("chain.omega_left", 1.0))
    if get("chain.omega_right") is not None:
        omega_right = parse_float(get("chain.omega_right"))
    elif ratio is not None:
        omega_right = omega_left * ratio
    else:
        raise ValidationError("explicit couplings need chain.omega_right")

    if get("drive.period_left") is not None and get("drive.f_left") is not None:
        raise ValidationError("give drive.period_left or drive.f_left, not both")
    if get("drive.f_left") is not None:
        f_left = parse_float(get("drive.f_left"))
        if not f_left > 0:
            raise ValidationError("f_left must be positive")
        period_left = 2 * math.pi / f_left
    else:
        period_left = parse_float(get("drive.period_left", 4.74))
    if get("drive.period_right") is not None:
        period_right = parse_float(get("drive.period_right"))
    elif get("drive.f_right") is not None:
        period_right = 2 * math.pi / parse_float(get("drive.f_right"))
    elif ratio is not None:
        period_right = period_left / ratio
    else:
        raise ValidationError("explicit couplings need drive.period_right")

    theta = get("drive.theta")
    theta_left = parse_float(get("drive.theta_left", theta if theta is not None else math.pi))
    theta_right = parse_float(get("drive.theta_right", theta if theta is not None else math.pi))
    return ChainParameters(
        n_sites=n_sites, n_left=n_left, omega_left=omega_left, omega_right=omega_right,
        period_left=period_left, period_right=period_right, theta_left=theta_left,
        theta_right=theta_right, initial_state=str(get("chain.initial_state", "Z2")).strip(),
    )


@dataclass
class RunConfig:
    params: ChainParameters
    t_max: float = 1000.0
    sample_dt: float = DEFAULT_SAMPLE_DT
    engine: str = "auto"
    observables: tuple = ("m", "fidelity", "entropy")
    densities: bool = False
    entropy_cut: int | None = None
    seed: int = 0
    workers: int | None = None
    output: str | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_settings(cls, s: dict) -> RunConfig:
        params = chain_from_settings(s)
        observables = tuple(o.strip() for o in str(
            s.get("run.observables", "m, fidelity, entropy")).split(",") if o.strip())
        cut = s.get("run.entropy_cut")
        workers = s.get("run.workers")
        cfg = cls(
            params=params,
            t_max=parse_float(s.get("run.t_max", 1000.0)),
            sample_dt=parse_float(s.get("run.sample_dt", DEFAULT_SAMPLE_DT)),
            engine=str(s.get("run.engine", "auto")).strip(),
            observables=observables,
            densities=parse_bool(s.get("run.densities", False)),
            entropy_cut=None if cut is None else parse_int(cut),
            seed=parse_int(s.get("run.seed", 0)),
            workers=None if workers is None else parse_int(workers),
            output=s.get("output.path"),
            extra={k: v for k, v in s.items() if k.startswith(("grid.", "output."))},
        )
        if not cfg.t_max >= 0:
            raise ValidationError(f"t_max must be non-negative, got {cfg.t_max}")
        if not cfg.sample_dt > 0:
            raise ValidationError(f"sample_dt must be positive, got {cfg.sample_dt}")
        return cfg


def load_settings(path=None, overrides=None) -> dict:
    """Merge an optional INI file with ``overrides`` (None values ignored)."""
    settings = read_ini(path) if path else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            settings[key] = value
    return settings

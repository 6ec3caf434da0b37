"""Command-line frontend.

Exit codes
----------
0  success
1  other package error
2  invalid input (parameters, config, grid, column names, sampling)
3  file read or write failure
4  numerical failure (eigendecomposition check)
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, load_settings, parse_values
from .errors import DTQCError, ValidationError
from .kernels import BACKEND
from .model import GOLDEN_RATIO, golden_chain
from .observables import max_entropy
from .presets import (
    PRESETS,
    EvolveJob,
    FrequencyScanJob,
    HeatmapJob,
    PhaseJob,
    SizeScanJob,
    StateScanJob,
    get_preset,
)
from .propagator import run
from .spectral import DEFAULT_FLOOR, DEFAULT_K_MAX, analyze
from .svg import spectrum_svg, write_svg
from .sweep import (
    GridSpec,
    frequency_scan,
    initial_state_scan,
    run_phase_diagram,
    size_scan,
)
from .tables import (
    read_csv,
    read_json,
    series_from_table,
    trajectory_columns,
    write_columns,
    write_csv,
    write_json,
)

log = logging.getLogger("dtqc")

EVOLVE_COLUMNS = ("m", "fidelity", "entropy")
PHASE_HEADER = ("theta", "f_L", "A_mm", "tau_mm", "A_pp", "tau_pp", "is_dtqc",
                "tau_lo_mm", "tau_lo_pp", "present_mm", "present_pp",
                "contrast_mm", "contrast_pp", "n_sites", "dominant", "error")
STANDARD_HEATMAP_SIZE = 51


# -- shared pipelines ----------------------------------------------------------

def evolve(cfg: RunConfig):
    """Run with the fixed leading columns m, fidelity, entropy."""
    names = list(dict.fromkeys(cfg.observables))
    for required in EVOLVE_COLUMNS:
        if required not in names:
            names.insert(EVOLVE_COLUMNS.index(required), required)
    if cfg.densities and "densities" not in names:
        names.append("densities")
    return run(cfg.params, cfg.t_max, cfg.sample_dt, tuple(names), engine=cfg.engine,
               entropy_cut=cfg.entropy_cut)


def spectrum_analysis(series, sample_dt, f_left, f_right, *, window="rectangular",
                      floor_factor=DEFAULT_FLOOR, k_max=DEFAULT_K_MAX):
    """Spectrum, labeled peaks and a lifetime for every labeled peak."""
    return analyze(series, sample_dt, f_left, f_right, window=window,
                   floor_factor=floor_factor, k_max=k_max, lifetimes="all",
                   period_left=2 * math.pi / f_left)


def peak_records(analysis):
    out = []
    for p in analysis.peaks:
        fit = p.fit
        out.append({
            "omega": p.omega, "amplitude": p.amplitude, "k1": p.k1, "k2": p.k2,
            "residual": p.residual, "label": p.label_text() if p.labeled else None,
            "tau": None if fit is None else fit.tau,
            "r2": None if fit is None else fit.r2,
            "tau_lower": None if fit is None else fit.tau_lower,
            "lifetime_status": None if fit is None else fit.status,
        })
    return out


def write_spectrum_outputs(analysis, spectrum_path, peaks_path, svg_path, title=""):
    spec = analysis.spectrum
    write_csv(spectrum_path, ("omega", "amplitude"),
              zip(spec.angular_frequencies.tolist(), spec.amplitudes.tolist()))
    if peaks_path:
        write_json(peaks_path, {
            "f_left": analysis.f_left, "f_right": analysis.f_right,
            "resolution": spec.resolution, "window": spec.window,
            "peaks": peak_records(analysis),
        })
    if svg_path:
        write_svg(svg_path, spectrum_svg(spec, analysis.peaks, title=title))


def meta_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".meta.json")


def run_metadata(cfg: RunConfig) -> dict:
    return {
        "params": cfg.params.to_dict(),
        "f_left": cfg.params.f_left, "f_right": cfg.params.f_right,
        "t_max": cfg.t_max, "sample_dt": cfg.sample_dt, "engine": cfg.engine,
        "kernel_backend": BACKEND, "version": __version__,
    }


def phase_rows(cells):
    for c in cells:
        fm, fp = c.fit_mm, c.fit_pp
        yield (c.theta, c.f_left, c.amp_mm, None if fm is None else fm.tau,
               c.amp_pp, None if fp is None else fp.tau, c.is_dtqc,
               None if fm is None else fm.tau_lower, None if fp is None else fp.tau_lower,
               c.present_mm, c.present_pp, c.contrast_mm, c.contrast_pp, c.n_sites,
               ";".join(f"{a}:{b}" for a, b in c.dominant), c.error)


def heatmap_metadata(basis, order):
    meta = {
        "n_sites": basis.n_sites, "n_left": basis.n_left, "dim": basis.dim,
        "row_order": "ascending Hamming distance from Z2, ties by bitmask value",
        "pattern_convention": "character i is site i; 1 = excited",
        "columns": {f"c_{j}": basis.pattern(int(k)) for j, k in enumerate(order)},
    }
    if basis.n_sites == 9:
        meta["note"] = (f"open-chain blockade enumeration gives {basis.dim} configurations; "
                        f"the {STANDARD_HEATMAP_SIZE}-state arrangement used elsewhere is a "
                        "subset and is not reproduced")
    return meta


# -- argument handling -----------------------------------------------------------

CHAIN_FLAGS = {
    "n_sites": "chain.n_sites", "n_left": "chain.n_left",
    "couplings": "chain.couplings", "omega_left": "chain.omega_left",
    "omega_right": "chain.omega_right", "initial_state": "chain.initial_state",
    "period_left": "drive.period_left", "period_right": "drive.period_right",
    "f_left": "drive.f_left", "theta": "drive.theta",
    "theta_left": "drive.theta_left", "theta_right": "drive.theta_right",
    "t_max": "run.t_max", "sample_dt": "run.sample_dt",
    "engine": "run.engine", "observables": "run.observables",
    "entropy_cut": "run.entropy_cut", "workers": "run.workers",
    "output": "output.path",
}


def _add_chain_args(p):
    g = p.add_argument_group("chain and drive (override the config file)")
    g.add_argument("--config", help="INI file with [chain], [drive], [run], [grid], [output]")
    g.add_argument("--n-sites", type=int)
    g.add_argument("--n-left", type=int)
    g.add_argument("--couplings", choices=("golden", "uniform", "explicit"))
    g.add_argument("--omega-left")
    g.add_argument("--omega-right")
    g.add_argument("--initial-state", choices=("Z2", "Z2prime", "Z3", "ground"))
    g.add_argument("--period-left")
    g.add_argument("--period-right")
    g.add_argument("--f-left", help="left drive angular frequency (instead of --period-left)")
    g.add_argument("--theta", help="kick strength on both regions; accepts 'pi'")
    g.add_argument("--theta-left")
    g.add_argument("--theta-right")
    r = p.add_argument_group("run")
    r.add_argument("--t-max")
    r.add_argument("--sample-dt")
    r.add_argument("--engine", choices=("auto", "dense", "krylov"))
    r.add_argument("-o", "--output", help="output CSV ('-' for stdout)")


def _settings(args) -> dict:
    overrides = {}
    for attr, key in CHAIN_FLAGS.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    return load_settings(getattr(args, "config", None), overrides)


def _parser():
    p = argparse.ArgumentParser(prog="dtqc",
                                description="Rydberg chains under two incommensurate kick trains.",
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                epilog=__doc__)
    p.add_argument("--version", action="version", version=f"dtqc {__version__} ({BACKEND} kernels)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evolve", help="time series of m, fidelity, entropy")
    _add_chain_args(ev)
    ev.add_argument("--observables", help="extra columns, e.g. m_signed,energy,norm")
    ev.add_argument("--densities", action="store_true", help="append n_0..n_{N-1}")
    ev.add_argument("--entropy-cut", help="bond for the entropy (default: region boundary)")

    sp = sub.add_parser("spectrum", help="Fourier spectrum and labeled peaks of a column")
    sp.add_argument("input", help="CSV with a 't' column (e.g. evolve output)")
    sp.add_argument("--column", default="m")
    sp.add_argument("--f-left", help="default: from the input's .meta.json")
    sp.add_argument("--f-right")
    sp.add_argument("--period-left")
    sp.add_argument("--period-right")
    sp.add_argument("--window", choices=("rectangular", "hann"), default="rectangular")
    sp.add_argument("--floor-factor", type=float, default=DEFAULT_FLOOR)
    sp.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    sp.add_argument("-o", "--output", help="spectrum CSV (default stdout)")
    sp.add_argument("--peaks", help="labeled peaks JSON")
    sp.add_argument("--svg", help="spectrum plot")

    ph = sub.add_parser("phasediag", help="grid of (theta, f_L) cells with DTQC classification")
    _add_chain_args(ph)
    ph.add_argument("--theta-values", help="list or start:stop:step")
    ph.add_argument("--f-left-values", help="list or start:stop:step")
    ph.add_argument("--sizes", help="chain lengths (default 10)")
    ph.add_argument("--observable", choices=("m", "fidelity", "entropy"))
    ph.add_argument("--workers", help="worker processes (default: available CPUs)")

    hm = sub.add_parser("heatmap", help="|<s|psi(t)>| for every basis configuration")
    _add_chain_args(hm)
    hm.add_argument("--metadata", help="column-to-pattern JSON (default: <output>.json)")

    pr = sub.add_parser("preset", help="run a named study")
    pr.add_argument("name", nargs="?", choices=sorted(PRESETS), metavar="NAME")
    pr.add_argument("--list", action="store_true", help="list presets")
    pr.add_argument("--out-dir", default="out")
    pr.add_argument("--workers", type=int)
    return p


# -- commands ---------------------------------------------------------------------

def cmd_evolve(args):
    cfg = RunConfig.from_settings(_settings(args))
    cfg.densities = cfg.densities or args.densities
    traj = evolve(cfg)
    header, cols = trajectory_columns(traj)
    write_columns(cfg.output, header, cols)
    if cfg.output and cfg.output != "-":
        write_json(meta_path(cfg.output), run_metadata(cfg))
    return 0


def _drive_frequencies(args):
    def freq(f, period):
        if f is not None:
            return parse_values(f)[0]
        if period is not None:
            return 2 * math.pi / parse_values(period)[0]
        return None

    f_left = freq(args.f_left, args.period_left)
    f_right = freq(args.f_right, args.period_right)
    meta = meta_path(args.input)
    if (f_left is None or f_right is None) and meta.exists():
        info = read_json(meta)
        f_left = info["f_left"] if f_left is None else f_left
        f_right = info["f_right"] if f_right is None else f_right
    if f_left is None:
        raise ValidationError("drive frequency unknown: pass --f-left or --period-left")
    if f_right is None:
        f_right = f_left * GOLDEN_RATIO
    return f_left, f_right


def cmd_spectrum(args):
    table = read_csv(args.input)
    series, dt = series_from_table(table, args.column)
    f_left, f_right = _drive_frequencies(args)
    analysis = spectrum_analysis(series, dt, f_left, f_right, window=args.window,
                                 floor_factor=args.floor_factor, k_max=args.k_max)
    write_spectrum_outputs(analysis, args.output, args.peaks, args.svg,
                           title=f"{args.column}: {Path(args.input).name}")
    return 0


def grid_from_settings(s: dict, *, default_t_max=1000.0) -> GridSpec:
    cfg = RunConfig.from_settings(s)
    base = cfg.params
    theta_values = parse_values(s.get("grid.theta_values", "")) or (base.theta_left,)
    f_values = parse_values(s.get("grid.f_left_values", "")) or (base.f_left,)
    sizes = tuple(int(v) for v in parse_values(s.get("grid.sizes", ""))) or (base.n_sites,)
    return GridSpec(
        theta_values=theta_values, f_left_values=f_values, sizes=sizes,
        observable=str(s.get("grid.observable", "m")).strip(),
        t_max=cfg.t_max if "run.t_max" in s else default_t_max,
        sample_dt=cfg.sample_dt, omega_left=base.omega_left,
        omega_ratio=base.omega_right / base.omega_left,
        period_ratio=base.period_left / base.period_right,
        initial_state=base.initial_state,
    )


def cmd_phasediag(args):
    s = _settings(args)
    for attr, key in (("theta_values", "grid.theta_values"), ("f_left_values", "grid.f_left_values"),
                      ("sizes", "grid.sizes"), ("observable", "grid.observable")):
        if getattr(args, attr) is not None:
            s[key] = getattr(args, attr)
    for key in ("grid.theta_values", "grid.f_left_values"):
        if key in s and not parse_values(s[key]):
            raise ValidationError(f"{key} is empty")
    grid = grid_from_settings(s)
    workers = RunConfig.from_settings(s).workers
    cells = run_phase_diagram(grid, workers=workers)
    write_csv(s.get("output.path"), PHASE_HEADER, phase_rows(cells))
    failed = sum(1 for c in cells if c.error)
    if failed:
        log.warning("%d of %d cells failed", failed, len(cells))
    return 0 if failed < len(cells) else 1


def cmd_heatmap(args):
    cfg = RunConfig.from_settings(_settings(args))
    traj = run(cfg.params, cfg.t_max, cfg.sample_dt, ("overlaps",), engine=cfg.engine)
    basis = traj.basis
    header, cols = trajectory_columns(traj)
    write_columns(cfg.output, header, cols)
    target = args.metadata
    if target is None and cfg.output and cfg.output != "-":
        target = Path(cfg.output).with_suffix(".json")
    if target:
        write_json(target, heatmap_metadata(basis, basis.heatmap_order))
    return 0


def _run_job(job, out_dir: Path, workers):
    if isinstance(job, EvolveJob):
        cfg = RunConfig(job.params, job.t_max, job.sample_dt, observables=job.observables,
                        densities=job.densities)
        traj = evolve(cfg)
        header, cols = trajectory_columns(traj)
        write_columns(out_dir / f"{job.name}.csv", header, cols)
        meta = run_metadata(cfg)
        meta["entropy_bound"] = max_entropy(traj.basis)
        write_json(out_dir / f"{job.name}.meta.json", meta)
        for column in job.spectra:
            analysis = spectrum_analysis(traj[column], job.sample_dt, job.params.f_left,
                                         job.params.f_right)
            stem = out_dir / f"{job.name}_{column}"
            write_spectrum_outputs(analysis, f"{stem}_spectrum.csv", f"{stem}_peaks.json",
                                   f"{stem}.svg", title=f"{job.name}: {column}")
    elif isinstance(job, HeatmapJob):
        traj = run(job.params, job.t_max, job.sample_dt, ("overlaps",))
        header, cols = trajectory_columns(traj)
        write_columns(out_dir / f"{job.name}.csv", header, cols)
        write_json(out_dir / f"{job.name}.json",
                   heatmap_metadata(traj.basis, traj.basis.heatmap_order))
    elif isinstance(job, PhaseJob):
        cells = run_phase_diagram(job.grid, workers=workers)
        write_csv(out_dir / f"{job.name}.csv", PHASE_HEADER, phase_rows(cells))
    elif isinstance(job, SizeScanJob):
        scan = size_scan(job.sizes, lambda n: golden_chain(n, period_left=job.period_left,
                                                          theta=job.theta),
                         job.observable, t_max=job.t_max)
        write_csv(out_dir / f"{job.name}.csv",
                  ("n_sites", "A_mm", "A_pp", "present_mm", "present_pp"),
                  ((r.n_sites, r.amp_mm, r.amp_pp, r.present_mm, r.present_pp) for r in scan.rows))
        write_json(out_dir / f"{job.name}_fit.json", {
            f"{k1}:{k2}": {"slope": f.slope, "intercept": f.intercept, "r2": f.r2}
            for (k1, k2), f in scan.fits.items()})
    elif isinstance(job, FrequencyScanJob):
        rows = frequency_scan(job.f_left_values, job.theta, job.observable,
                              n_sites=job.n_sites, t_max=job.t_max)
        write_csv(out_dir / f"{job.name}.csv",
                  ("f_L", "rank", "omega", "amplitude", "k1", "k2"),
                  ((r.f_left, i, p.omega, p.amplitude, p.k1, p.k2)
                   for r in rows for i, p in enumerate(r.analysis.peaks[:8])))
    elif isinstance(job, StateScanJob):
        rows = initial_state_scan(job.theta_values, job.initial_states, n_sites=job.n_sites,
                                  period_left=job.period_left, t_max=job.t_max)
        write_csv(out_dir / f"{job.name}.csv",
                  ("initial_state", "theta", "observable", "A_mm", "A_pp"),
                  ((r.initial_state, r.theta, r.observable, r.amp_mm, r.amp_pp) for r in rows))
    else:  # pragma: no cover
        raise TypeError(job)


def cmd_preset(args):
    if args.list or args.name is None:
        width = max(map(len, PRESETS))
        for name, preset in PRESETS.items():
            print(f"{name:<{width}}  {preset.description}")
        return 0
    preset = get_preset(args.name)
    out_dir = Path(args.out_dir)
    for job in preset.jobs:
        log.info("preset %s: job %s", preset.name, job.name)
        _run_job(job, out_dir, args.workers)
    return 0


COMMANDS = {"evolve": cmd_evolve, "spectrum": cmd_spectrum, "phasediag": cmd_phasediag,
            "heatmap": cmd_heatmap, "preset": cmd_preset}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except DTQCError as exc:
        print(f"dtqc {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())

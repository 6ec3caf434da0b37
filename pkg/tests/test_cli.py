import csv
import json
import math

import numpy as np
import pytest

from dtqc.cli import PHASE_HEADER, main, peak_records, spectrum_analysis
from dtqc.model import golden_chain
from dtqc.presets import PRESETS
from dtqc.propagator import run
from dtqc.tables import read_csv


def header_of(path):
    with open(path) as fh:
        return next(csv.reader(fh))


def labels(peaks_json):
    return {(p["k1"], p["k2"]) for p in json.loads(peaks_json.read_text())["peaks"]
            if p["k1"] is not None}


@pytest.fixture(scope="module")
def fig1b(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig1b")
    assert main(["preset", "fig1b", "--out-dir", str(out)]) == 0
    return out / "fig1b.csv"


def test_fig1b_evolve_schema(fig1b):
    head = header_of(fig1b)
    assert head == ["t", "m", "fidelity", "entropy"] + [f"n_{j}" for j in range(10)]
    table = read_csv(fig1b)
    assert table["t"].size == 1000 / 0.05 + 1
    assert table["m"][0] == 1.0
    # 17 significant digits
    with open(fig1b) as fh:
        next(fh)
        first = next(fh).split(",")
    assert all(len(v.split("e")[0].replace("-", "").replace(".", "")) == 17 for v in first)


def test_fig1b_spectrum_labels(fig1b, tmp_path):
    peaks = tmp_path / "peaks.json"
    svg = tmp_path / "spec.svg"
    spec = tmp_path / "spec.csv"
    assert main(["spectrum", str(fig1b), "--column", "m", "-o", str(spec),
                 "--peaks", str(peaks), "--svg", str(svg)]) == 0
    assert {(1, 1), (-1, 1)} <= labels(peaks)
    record = json.loads(peaks.read_text())["peaks"][0]
    assert {"omega", "amplitude", "k1", "k2", "residual", "tau", "r2"} <= set(record)
    assert header_of(spec) == ["omega", "amplitude"]
    assert svg.read_text().startswith("<svg")


def test_spectrum_round_trip_is_exact(tmp_path):
    csv_path = tmp_path / "ev.csv"
    assert main(["evolve", "--n-sites", "8", "--t-max", "300", "-o", str(csv_path)]) == 0
    peaks = tmp_path / "p.json"
    assert main(["spectrum", str(csv_path), "--peaks", str(peaks), "-o", str(tmp_path / "s.csv")]) == 0
    params = golden_chain(8)
    traj = run(params, 300.0, 0.05, ("m", "fidelity", "entropy"))
    analysis = spectrum_analysis(traj["m"], 0.05, params.f_left, params.f_right)
    on_disk = json.loads(peaks.read_text())["peaks"]
    in_memory = json.loads(json.dumps(peak_records(analysis),
                                      default=lambda x: None))
    assert len(on_disk) == len(in_memory)
    for a, b in zip(on_disk, in_memory):
        for key in ("omega", "amplitude", "k1", "k2", "residual", "r2"):
            assert a[key] == b[key]
    spec = read_csv(tmp_path / "s.csv")
    assert np.array_equal(spec["amplitude"], analysis.spectrum.amplitudes)


def test_synthetic_single_tone(tmp_path):
    t = np.arange(20000) * 0.05
    path = tmp_path / "tone.csv"
    with open(path, "w") as fh:
        fh.write("t,x\n")
        for a, b in zip(t, 0.4 * np.cos(1.1 * t)):
            fh.write(f"{a:.16e},{b:.16e}\n")
    peaks = tmp_path / "p.json"
    assert main(["spectrum", str(path), "--column", "x", "--period-left", "4.74",
                 "--peaks", str(peaks), "-o", str(tmp_path / "s.csv")]) == 0
    found = json.loads(peaks.read_text())["peaks"]
    assert len(found) == 1
    assert abs(found[0]["omega"] - 1.1) < 2 * math.pi / 1000


def test_fig3_fidelity_has_single_drive_lines(tmp_path):
    job = PRESETS["fig3"].jobs[0]
    csv_path = tmp_path / "fig3.csv"
    assert main(["evolve", "--period-left", repr(job.params.period_left),
                 "--t-max", repr(job.t_max), "-o", str(csv_path)]) == 0
    peaks = tmp_path / "p.json"
    assert main(["spectrum", str(csv_path), "--column", "fidelity", "--peaks", str(peaks),
                 "-o", str(tmp_path / "s.csv")]) == 0
    assert {(0, 1), (1, 0)} <= labels(peaks)


def test_evolve_edge_cases(tmp_path, capsys):
    path = tmp_path / "zero.csv"
    assert main(["evolve", "--t-max", "0", "-o", str(path)]) == 0
    table = read_csv(path)
    assert table["t"].tolist() == [0.0] and table["m"].tolist() == [1.0]
    assert main(["evolve", "--n-sites", "6", "--n-left", "6", "-o", str(path)]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["evolve", "--n-sites", "6", "--n-left", "0", "-o", str(path)]) == 2


def test_error_exit_codes(tmp_path, fig1b):
    assert main(["spectrum", str(fig1b), "--column", "nope", "-o", str(tmp_path / "s.csv")]) == 2
    assert main(["spectrum", str(tmp_path / "missing.csv"), "--f-left", "1"]) == 3
    blocker = tmp_path / "plain_file"
    blocker.write_text("")
    assert main(["evolve", "--n-sites", "6", "-o", str(blocker / "x.csv")]) == 3
    assert main(["evolve", "--config", str(tmp_path / "missing.ini")]) == 3
    assert main(["phasediag", "--theta-values", "", "--f-left-values", "1.0"]) == 2
    assert main(["phasediag", "--theta-values", "pi", "--f-left-values", "3:1:0.5"]) == 2


def test_nonuniform_input_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    times = [0, 0.1, 0.2, 0.35] + [0.4 + 0.1 * k for k in range(100)]
    path.write_text("t,m\n" + "".join(f"{t},{math.cos(t)}\n" for t in times))
    assert main(["spectrum", str(path), "--f-left", "1.3"]) == 2


def test_phasediag_schema(tmp_path):
    out = tmp_path / "ph.csv"
    assert main(["phasediag", "--theta-values", "pi", "--f-left-values", "1.33,3.3",
                 "--observable", "fidelity", "--t-max", "500", "--workers", "1",
                 "-o", str(out)]) == 0
    assert header_of(out) == list(PHASE_HEADER)
    assert header_of(out)[:7] == ["theta", "f_L", "A_mm", "tau_mm", "A_pp", "tau_pp", "is_dtqc"]
    rows = list(csv.DictReader(open(out)))
    assert [float(r["f_L"]) for r in rows] == [1.33, 3.3]
    assert all(r["is_dtqc"] in ("true", "false") and r["error"] == "" for r in rows)


def test_phasediag_reports_failed_cells(tmp_path):
    out = tmp_path / "ph.csv"
    assert main(["phasediag", "--theta-values", "pi", "--f-left-values", "1.0",
                 "--t-max", "1", "--workers", "1", "-o", str(out)]) == 1
    [row] = list(csv.DictReader(open(out)))
    assert "SamplingError" in row["error"]


def test_fig7_small_schema_matches(tmp_path):
    job = PRESETS["fig7-small"].jobs[0]
    assert job.grid.observable == "fidelity"
    assert len(job.grid.cells()) == 30
    assert PRESETS["fig2-small"].jobs[0].grid.cells() == job.grid.cells()


def test_heatmap(tmp_path):
    out = tmp_path / "hm.csv"
    assert main(["heatmap", "--n-sites", "9", "--n-left", "5", "--t-max", "19", "-o", str(out)]) == 0
    table = read_csv(out)
    cols = [f"c_{j}" for j in range(89)]
    assert header_of(out) == ["t"] + cols
    mat = np.column_stack([table[c] for c in cols])
    assert mat[0, 0] == 1.0 and mat[0, 1:].sum() == 0
    assert np.abs((mat ** 2).sum(axis=1) - 1).max() < 1e-9
    meta = json.loads((tmp_path / "hm.json").read_text())
    assert meta["dim"] == 89 and meta["columns"]["c_0"] == "101010101"
    assert "51" in meta["note"]


def test_preset_list(capsys):
    assert main(["preset", "--list"]) == 0
    listed = capsys.readouterr().out
    for name in ("fig1b", "fig1c", "fig1d", "fig2", "fig2c", "fig2d", "fig3", "fig4",
                 "fig5a", "fig5b", "fig5c", "fig5d", "fig6", "fig7"):
        assert name in listed


@pytest.mark.parametrize("name", ["fig1d", "fig5c"])
def test_quick_presets_run(name, tmp_path):
    assert main(["preset", name, "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / f"{name}.csv").exists()

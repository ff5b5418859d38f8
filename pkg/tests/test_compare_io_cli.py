import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from deltashell.model import ModelParams, InitialState, characteristic_time
from deltashell.poles import find_poles
from deltashell.compare import (ExperimentSeries, ingest_decay_csv,
                                export_decay_csv, lambda_scan, scale_mapping,
                                DataValidationError)
from deltashell import io as dio
from deltashell.cli import main as cli_main


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_ingest_well_formed(tmp_path):
    rows = "\n".join(f"{t},{np.exp(-t / 4):.6e}" for t in range(1, 31))
    p = _write(tmp_path, "ok.csv", "t_ns,intensity\n" + rows + "\n")
    ser = ingest_decay_csv(p)
    assert len(ser.times_ns) == 30
    assert ser.intensities.max() == pytest.approx(1.0)
    ser2 = ingest_decay_csv(p, normalization="first")
    assert ser2.intensities[0] == pytest.approx(1.0)


def test_ingest_negative_intensity_names_line(tmp_path):
    rows = [f"{t},1.0" for t in range(1, 15)]
    rows[4] = "5,-0.2"
    p = _write(tmp_path, "neg.csv", "t_ns,intensity\n" + "\n".join(rows) + "\n")
    with pytest.raises(DataValidationError, match="line 6"):
        ingest_decay_csv(p)


def test_ingest_rejects_non_monotone_and_short(tmp_path):
    p = _write(tmp_path, "mono.csv",
               "t_ns,i\n" + "\n".join(f"{t},1" for t in [1, 2, 2, 3] + list(range(4, 15))))
    with pytest.raises(DataValidationError, match="increasing"):
        ingest_decay_csv(p)
    p2 = _write(tmp_path, "short.csv", "t_ns,i\n1,1\n2,0.5\n")
    with pytest.raises(DataValidationError, match="10 rows"):
        ingest_decay_csv(p2)
    p3 = _write(tmp_path, "bad.csv",
                "t_ns,i\n" + "\n".join(f"{t},x{t}" for t in range(1, 15)))
    with pytest.raises(DataValidationError, match="unparseable"):
        ingest_decay_csv(p3)


def test_round_trip(tmp_path):
    t = np.linspace(0.5, 80, 40)
    ser = ExperimentSeries(times_ns=t, intensities=np.exp(-t / 3.9))
    path = tmp_path / "rt.csv"
    export_decay_csv(path, ser)
    back = ingest_decay_csv(path)
    assert np.allclose(back.times_ns, ser.times_ns, rtol=0, atol=0)
    assert np.allclose(back.intensities, ser.intensities / ser.intensities.max(),
                       rtol=0, atol=0)


def test_scale_mapping_reference_value():
    val = scale_mapping(3.6, 3.55, 3.9e-9)
    assert val == pytest.approx(1.2e5, rel=0.05)
    assert scale_mapping(3.6, 3.55, 2 * 3.9e-9) == pytest.approx(2 * val, rel=1e-12)
    with pytest.raises(ValueError):
        scale_mapping(-1.0, 3.55, 3.9e-9)


def test_scale_mapping_unit_invariance():
    """tau_pole/tau0 is dimensionless, so the mapping ignores internal units."""
    ratios = []
    for m, a, hb in ((1.0, 1.0, 1.0), (2.0, 3.0, 0.5), (7.0, 0.2, 4.0)):
        params = ModelParams(lam=3.6, mass=m, well_width=a, hbar=hb)
        pole = find_poles(params, 1)[0]
        ratios.append(pole.lifetime / characteristic_time(params))
    assert np.max(np.abs(np.diff(ratios))) < 1e-12 * ratios[0]
    vals = [scale_mapping(3.6, r, 3.9e-9) for r in ratios]
    assert np.max(np.abs(np.diff(vals))) < 1e-12 * vals[0]


def test_lambda_scan_requires_range():
    t = np.linspace(0.5, 30, 40)
    ser = ExperimentSeries(times_ns=t, intensities=np.exp(-t / 10))  # ~1.3 decades
    with pytest.raises(DataValidationError, match="decades"):
        lambda_scan(ser, [3.6], InitialState(1))


def test_lambda_scan_single_candidate():
    params = ModelParams(lam=3.6)
    tau0 = characteristic_time(params)
    t = np.geomspace(0.05, 60, 60)
    inten = np.exp(-t / 3.9) + 2e-6
    ser = ExperimentSeries(times_ns=t, intensities=inten / inten.max())
    best, entries = lambda_scan(ser, [3.6], InitialState(1), tau_exp_ns=3.9)
    assert best == 3.6
    assert len(entries) == 1 and entries[0].log_residual >= 0


def test_csv_provenance_and_round_trip(tmp_path):
    path = tmp_path / "out.csv"
    dio.write_csv(path, ["a", "b"], [(1.0, 2.0), (3.0, 4.5)],
                  config={"x": 1})
    text = path.read_text()
    assert text.startswith("# deltashell")
    meta = json.loads((tmp_path / "out.csv.meta.json").read_text())
    assert meta["config"] == {"x": 1}
    cols = dio.read_csv_columns(path, required=["a", "b"])
    assert cols["b"][1] == 4.5
    with pytest.raises(ValueError, match="missing columns"):
        dio.read_csv_columns(path, required=["zz"])


def test_cli_poles_and_exit_codes(tmp_path):
    rc = cli_main(["poles", "--lam", "3.6", "--count", "4",
                   "--output-dir", str(tmp_path), "--format", "both"])
    assert rc == 0
    assert (tmp_path / "poles_lam3.6.csv").exists()
    assert (tmp_path / "poles_lam3.6.json").exists()
    cols = dio.read_csv_columns(tmp_path / "poles_lam3.6.csv",
                                required=dio.POLE_COLUMNS)
    assert len(cols["n"]) == 4
    # usage error from argparse
    assert cli_main(["poles", "--lam"]) == 2
    # data validation failure
    bad = tmp_path / "bad.csv"
    bad.write_text("t,i\n1,1\n")
    assert cli_main(["compare", "--input", str(bad),
                     "--output-dir", str(tmp_path)]) == 4
    assert cli_main(["compare", "--input", str(tmp_path / "missing.csv"),
                     "--output-dir", str(tmp_path)]) == 4


def test_cli_scale(tmp_path, capsys):
    rc = cli_main(["scale", "--lam", "3.6", "--tau-th", "3.55",
                   "--tau-exp-ns", "3.9", "--output-dir", str(tmp_path)])
    assert rc == 0
    doc = json.loads((tmp_path / "scale_mapping.json").read_text())
    assert doc["ma2_in_proton_bohr2"] == pytest.approx(1.2e5, rel=0.05)


def test_cli_survival_deterministic(tmp_path):
    args = ["survival", "--lam", "2.0", "--output-dir", str(tmp_path),
            "--config", str(_write(tmp_path, "cfg.yaml",
                                   "n_times: 40\nt_min_tau0: 0.01\n"
                                   "t_max_tau0: 100.0\n"))]
    assert cli_main(args) == 0
    first = (tmp_path / "survival_lam2.csv").read_bytes()
    assert cli_main(args) == 0
    second = (tmp_path / "survival_lam2.csv").read_bytes()
    assert first == second
    cols = dio.read_csv_columns(tmp_path / "survival_lam2.csv",
                                required=dio.SURVIVAL_COLUMNS)
    assert len(cols["t"]) == 40
    gap = np.abs(cols["p_total"] - (cols["p_bg"] + cols["p_poles"]
                                    + cols["p_interf"]))
    assert gap.max() < 1e-10


def test_cli_decompose_and_fit(tmp_path):
    assert cli_main(["decompose", "--lam", "3.6", "--times", "0.4",
                     "--output-dir", str(tmp_path)]) == 0
    field = dio.read_csv_columns(tmp_path / "field_lam3.6_t0.4tau0.csv")
    assert abs(field["re_total"][0]) < 1e-12
    # survival file then fit it
    cfgp = _write(tmp_path, "cfg.yaml", "n_times: 220\nt_max_tau0: 1000.0\n")
    assert cli_main(["survival", "--lam", "3.6", "--output-dir", str(tmp_path),
                     "--config", str(cfgp)]) == 0
    assert cli_main(["fit", "--lam", "3.6",
                     "--input", str(tmp_path / "survival_lam3.6.csv"),
                     "--output-dir", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "survival_lam3.6_fit.json").read_text())
    assert doc["exponential"]["tau_over_tau0"] == pytest.approx(3.5, rel=0.05)


def test_cli_entrypoint_runs():
    out = subprocess.run([sys.executable, "-m", "deltashell.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0

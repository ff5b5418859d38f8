import json
import shutil
from pathlib import Path

import pytest

from decayfigs import PlotSpec, render, SchemaError
from decayfigs.cli import main as cli_main
from decayfigs.schema import load_survival

DATA = Path(__file__).parent / "data"
SURVIVAL = sorted(DATA.glob("survival_lam*.csv"))
CURVES = [DATA / f"compare_curve_lam{v}.csv" for v in ("3.2", "3.6", "4")]
EXPERIMENT = DATA / "experiment_synthetic.csv"


def test_data_is_checked_in():
    assert len(SURVIVAL) == 4
    assert all(p.exists() for p in CURVES)
    assert EXPERIMENT.exists()


def test_fig1_renders_and_is_deterministic(tmp_path):
    out = tmp_path / "fig1.png"
    spec = PlotSpec(kind="fig1", inputs=tuple(str(p) for p in SURVIVAL),
                    output=str(out))
    render(spec)
    first = out.read_bytes()
    render(spec)
    assert out.read_bytes() == first
    assert len(first) > 10_000


def test_fig1_svg_deterministic(tmp_path):
    out = tmp_path / "fig1.svg"
    spec = PlotSpec(kind="fig1", inputs=(str(SURVIVAL[0]),), output=str(out))
    render(spec)
    first = out.read_bytes()
    render(spec)
    assert out.read_bytes() == first
    assert b"<svg" in first


def test_fig2_both_panels(tmp_path):
    src = str(DATA / "survival_lam1.csv")
    for kind in ("fig2a", "fig2b"):
        out = tmp_path / f"{kind}.png"
        render(PlotSpec(kind=kind, inputs=(src,), output=str(out),
                        normalization="t_over_tau0"))
        assert out.stat().st_size > 10_000


def test_fig3_with_experiment(tmp_path):
    for kind in ("fig3a", "fig3b"):
        out = tmp_path / f"{kind}.png"
        render(PlotSpec(kind=kind, inputs=tuple(str(p) for p in CURVES),
                        output=str(out), normalization="raw",
                        experiment=str(EXPERIMENT)))
        assert out.stat().st_size > 10_000


def test_fig3_requires_experiment():
    with pytest.raises(ValueError, match="experiment"):
        PlotSpec(kind="fig3a", inputs=(str(CURVES[0]),), output="x.png")


def test_corrupted_csv_rejected_by_name(tmp_path):
    bad = tmp_path / "corrupt.csv"
    lines = (DATA / "survival_lam3.6.csv").read_text().splitlines()
    header = lines[1].replace("p_total", "p_tot")
    bad.write_text("\n".join([lines[0], header] + lines[2:]) + "\n")
    with pytest.raises(SchemaError, match="p_total"):
        render(PlotSpec(kind="fig1", inputs=(str(bad),),
                        output=str(tmp_path / "x.png"), normalization="raw"))


def test_empty_series_refused(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("t,t_over_tau0,p_total,p_bg,p_poles,p_interf,err_est\n")
    with pytest.raises(SchemaError, match="empty series"):
        load_survival(empty)


def test_missing_sidecar_blocks_lifetime_normalization(tmp_path):
    bare = tmp_path / "bare.csv"
    shutil.copy(DATA / "survival_lam3.6.csv", bare)
    with pytest.raises(SchemaError, match="tau_fit"):
        render(PlotSpec(kind="fig1", inputs=(str(bare),),
                        output=str(tmp_path / "x.png")))
    # explicit override works without the sidecar
    render(PlotSpec(kind="fig1", inputs=(str(bare),),
                    output=str(tmp_path / "y.png"), tau_fit=(0.72,)))


def test_cli_spec_file_and_shortcuts(tmp_path):
    spec = [{"kind": "fig1",
             "inputs": [str(p) for p in SURVIVAL],
             "output": str(tmp_path / "f1.png")},
            {"kind": "fig3b",
             "inputs": [str(p) for p in CURVES],
             "experiment": str(EXPERIMENT),
             "normalization": "raw",
             "output": str(tmp_path / "f3b.png")}]
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    assert cli_main(["render", "--spec", str(spec_path)]) == 0
    assert (tmp_path / "f1.png").exists()
    assert (tmp_path / "f3b.png").exists()
    assert cli_main(["fig2a", "--csv", str(DATA / "survival_lam1.csv"),
                     "--out", str(tmp_path / "f2a.png"),
                     "--normalization", "t_over_tau0"]) == 0
    assert cli_main(["fig1", "--csv", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "x.png")]) == 4


def test_acceptance_secondary_criterion(tmp_path):
    """Criterion 12: deterministic renders from checked-in CSVs; corrupted
    input rejected."""
    outs = []
    for kind, kwargs in (
            ("fig1", dict(inputs=tuple(str(p) for p in SURVIVAL))),
            ("fig2a", dict(inputs=(str(DATA / "survival_lam1.csv"),),
                           normalization="t_over_tau0")),
            ("fig2b", dict(inputs=(str(DATA / "survival_lam1.csv"),),
                           normalization="t_over_tau0")),
            ("fig3a", dict(inputs=tuple(str(p) for p in CURVES),
                           experiment=str(EXPERIMENT), normalization="raw")),
            ("fig3b", dict(inputs=tuple(str(p) for p in CURVES),
                           experiment=str(EXPERIMENT), normalization="raw"))):
        out = tmp_path / f"{kind}.png"
        render(PlotSpec(kind=kind, output=str(out), **kwargs))
        b1 = out.read_bytes()
        render(PlotSpec(kind=kind, output=str(out), **kwargs))
        assert out.read_bytes() == b1, f"{kind} not deterministic"
        outs.append(out)
    bad = tmp_path / "corrupt.csv"
    text = (DATA / "survival_lam3.6.csv").read_text()
    bad.write_text(text.replace("p_interf", "p_x"))
    with pytest.raises(SchemaError):
        render(PlotSpec(kind="fig1", inputs=(str(bad),),
                        output=str(tmp_path / "z.png"), normalization="raw"))
    print(f"[PASS] criterion 12 (secondary): {len(outs)} figure kinds render "
          "deterministically; schema validation rejects corrupted CSV")

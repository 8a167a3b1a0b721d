import json
from pathlib import Path

import numpy as np
import pytest

from figplots import PlotError, histogram_density, read_curve, read_histogram, render
from figplots.cli import main as figplots_main

from qcamaps import cli as qcamaps_cli

# the six reference-figure analogs and the statistic kind each one renders
FIGURES = [
    ("fig1", "q_distribution"),
    ("fig2", "spacing"),
    ("fig3", "q_distribution"),
    ("fig4", "eigvec"),
    ("fig5ring", "spacing"),
    ("fig5repeat", "eigvec"),
    ("fig6", "spacing"),
    ("fig6sym", "eigvec"),
]


@pytest.fixture(scope="module")
def preset_outputs(tmp_path_factory):
    """Small-ensemble preset runs; the output format is scale-independent."""
    root = tmp_path_factory.mktemp("runs")
    for name, _ in FIGURES:
        code = qcamaps_cli.main(
            ["preset", name, "--out", str(root / name), "--ensemble-size", "4"]
        )
        assert code == 0
    return root


def test_regenerates_figure_analogs(preset_outputs, tmp_path):
    for name, kind in FIGURES:
        out = tmp_path / f"{name}.png"
        render(preset_outputs / name, kind, out)
        assert out.is_file() and out.stat().st_size > 5000


def test_histogram_density_normalized_within_one_percent(preset_outputs):
    for name, kind in FIGURES:
        hist_name = {
            "spacing": "hist_spacings.csv",
            "eigvec": "hist_eigvec_elements.csv",
        }.get(kind)
        if hist_name is None:
            hists = sorted((preset_outputs / name).glob("hist_q_m*.csv"))
        else:
            hists = [preset_outputs / name / hist_name]
        for path in hists:
            lefts, rights, counts = read_histogram(path)
            density = histogram_density(lefts, rights, counts)
            area = float(np.sum(density * (rights - lefts)))
            assert abs(area - 1.0) <= 0.01


def test_overlay_curves_read_from_cli_tables(preset_outputs):
    xs, ys = read_curve(preset_outputs / "fig2" / "curve_cue_s.csv")
    assert xs.size == ys.size > 100
    assert np.all(ys >= 0)


def test_plot_layer_owns_no_formulas():
    import figplots.cli as fp_cli
    import figplots.plotting as plotting

    for module in (plotting, fp_cli):
        source = Path(module.__file__).read_text(encoding="utf-8")
        for banned in ("import qcamaps", "from qcamaps", "scipy",
                       "np.exp", "math.exp", "erf(", "erfc("):
            assert banned not in source


def test_cli_plot_roundtrip(preset_outputs, tmp_path):
    out = tmp_path / "fig4.png"
    code = figplots_main(
        ["plot", "--in", str(preset_outputs / "fig4"), "--kind", "eigvec", "--out", str(out)]
    )
    assert code == 0
    assert out.is_file()


def test_cli_explicit_overlay_selection(preset_outputs, tmp_path):
    out = tmp_path / "fig2_only_two_block.png"
    code = figplots_main([
        "plot", "--in", str(preset_outputs / "fig2"), "--kind", "spacing",
        "--out", str(out), "--overlay", "cue2_s",
    ])
    assert code == 0
    assert out.is_file()


def test_empty_histogram_errors(tmp_path):
    run = tmp_path / "run"
    run.mkdir()
    (run / "metadata.json").write_text(json.dumps({"name": "broken"}))
    (run / "hist_spacings.csv").write_text("bin_left,bin_right,count\n")
    with pytest.raises(PlotError, match="no rows"):
        render(run, "spacing", tmp_path / "x.png")
    (run / "hist_spacings.csv").write_text("bin_left,bin_right,count\n0,0.1,0\n0.1,0.2,0\n")
    with pytest.raises(PlotError, match="empty"):
        render(run, "spacing", tmp_path / "x.png")


def test_missing_inputs_error(tmp_path):
    with pytest.raises(PlotError, match="metadata"):
        render(tmp_path, "spacing", tmp_path / "x.png")
    code = figplots_main(
        ["plot", "--in", str(tmp_path), "--kind", "spacing", "--out", str(tmp_path / "x.png")]
    )
    assert code == 1


def test_garbled_metadata_errors(tmp_path):
    run = tmp_path / "run"
    run.mkdir()
    (run / "metadata.json").write_text("{not json")
    with pytest.raises(PlotError, match="garbled"):
        render(run, "spacing", tmp_path / "x.png")

import json
import math
from pathlib import Path

import numpy as np
import pytest

from qcamaps import cli
from qcamaps.experiments import (
    PRESETS,
    SpecError,
    linear_histogram,
    list_presets,
    log_histogram,
    parse_spec,
    preset_spec,
    run_experiment,
    spec_to_json_dict,
)

TINY_SPEC = {
    "name": "tiny",
    "map": {
        "topology": {"kind": "chain", "qubits": 4},
        "couplings": 0.25,
        "rotations": {"mode": "qca", "species": 1},
        "iterations": 6,
    },
    "ensemble_size": 3,
    "seed": 91,
    "statistics": ["spacings", "eigvec_elements", "mirror_check"],
    "references": {"spacings": ["cue2_s", "poisson_s"], "eigvec_elements": ["cue_y"]},
}


# ---------------------------------------------------------------- spec parsing

def test_spec_round_trips_exactly():
    spec = parse_spec(TINY_SPEC)
    again = parse_spec(spec_to_json_dict(spec))
    assert spec == again


def test_spec_defaults_and_pi_units():
    spec = parse_spec(TINY_SPEC)
    config = spec.map_config()
    assert config.couplings.angles == (math.pi / 4,) * 3
    assert spec.spacing_hist == (0.1, 4.0)
    assert spec.eigvec_ks_cap == 25600
    # two-block reference defaults to the topology's reversal fractions
    (ref0, _) = spec.references["spacings"]
    assert ref0.name == "cue2_s"
    assert ref0.fractions == (0.375, 0.625)  # n=4: blocks 6/16 and 10/16


@pytest.mark.parametrize("mutate,message", [
    (lambda d: d.__setitem__("ensemble_size", 0), "ensemble_size"),
    (lambda d: d.__setitem__("statistics", ["nope"]), "unknown statistic"),
    (lambda d: d["map"].__setitem__("iterations", -1), "iterations"),
    (lambda d: d["map"].__setitem__("couplings", [0.25]), "edges"),
    (lambda d: d.__setitem__("references", {"spacings": ["cue_y"]}), "does not apply"),
    (lambda d: d.__setitem__("q_iterations", [99]), "q_iterations"),
    (lambda d: d.__setitem__("ks_alpha", 0.5), "ks_alpha"),
    (lambda d: d.__setitem__("bogus_field", 1), "unknown spec fields"),
    (lambda d: d["map"]["rotations"].__setitem__("species", 7), "species"),
])
def test_spec_validation_errors(mutate, message):
    raw = json.loads(json.dumps(TINY_SPEC))
    mutate(raw)
    with pytest.raises(SpecError, match=message):
        parse_spec(raw)


# ---------------------------------------------------------------- histograms

def test_linear_histogram_counts_and_extension():
    samples = np.array([0.05, 0.15, 3.95, 4.0, 5.3])
    edges, counts = linear_histogram(samples, 0.1, 4.0)
    assert counts.sum() == samples.size
    assert edges[-1] >= 5.3
    assert edges[0] == 0.0


def test_log_histogram_underflow_bin_and_counts():
    samples = np.array([0.0, 1e-9, 1e-5, 0.5, 19.0, 30.0])
    edges, counts = log_histogram(samples, 1e-6, 20.0, 12)
    assert counts.sum() == samples.size
    assert edges[0] == 0.0 and edges[1] == 1e-6
    assert counts[0] == 2  # the two sub-floor values


# ---------------------------------------------------------------- runner

@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny_run")
    spec = parse_spec(TINY_SPEC)
    bundle = run_experiment(spec, out)
    return spec, bundle, out


def test_run_writes_expected_files(tiny_run):
    _, _, out = tiny_run
    names = {p.name for p in out.iterdir()}
    assert {"metadata.json", "hist_spacings.csv", "hist_eigvec_elements.csv",
            "curve_cue2_s.csv", "curve_poisson_s.csv", "curve_cue_y.csv",
            "mirror_check.csv"} <= names


def test_histogram_totals_match_sample_counts(tiny_run):
    spec, bundle, _ = tiny_run
    dim = 2**spec.qubits
    edges, counts = bundle.histograms["spacings"]
    assert counts.sum() == spec.ensemble_size * dim
    edges, counts = bundle.histograms["eigvec_elements"]
    assert counts.sum() == spec.ensemble_size * dim * dim


def test_metadata_round_trips_spec(tiny_run):
    spec, _, out = tiny_run
    meta = json.loads((out / "metadata.json").read_text())
    assert parse_spec(meta["spec"]) == spec
    assert meta["version"]
    assert "wall_time_s" in meta


def test_mirror_summary_small_for_symmetric_chain(tiny_run):
    _, bundle, _ = tiny_run
    assert bundle.summaries["mirror_check"]["max_norm"] <= 1e-10


def test_rerun_byte_identical_except_wall_time(tmp_path):
    spec = parse_spec(TINY_SPEC)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run_experiment(spec, out1)
    run_experiment(spec, out2)
    for path1 in sorted(out1.iterdir()):
        path2 = out2 / path1.name
        if path1.name == "metadata.json":
            m1 = json.loads(path1.read_text())
            m2 = json.loads(path2.read_text())
            m1.pop("wall_time_s"), m2.pop("wall_time_s")
            assert json.dumps(m1, sort_keys=True) == json.dumps(m2, sort_keys=True)
        else:
            assert path1.read_bytes() == path2.read_bytes()


def test_threads_do_not_change_results(tmp_path):
    spec = parse_spec(TINY_SPEC)
    out1, out2 = tmp_path / "serial", tmp_path / "parallel"
    run_experiment(spec, out1, threads=1)
    run_experiment(spec, out2, threads=2)
    for path1 in sorted(out1.iterdir()):
        if path1.name == "metadata.json":
            continue
        assert path1.read_bytes() == (out2 / path1.name).read_bytes()


def test_q_statistic_run(tmp_path):
    raw = json.loads(json.dumps(TINY_SPEC))
    raw["statistics"] = ["q_distribution"]
    raw["references"] = {}
    raw["q_iterations"] = [2, 6]
    spec = parse_spec(raw)
    bundle = run_experiment(spec, tmp_path / "q")
    assert {"q_m2", "q_m6", "q_haar"} <= set(bundle.histograms)
    per_m = bundle.summaries["q_distribution"]["per_m"]
    assert set(per_m) == {"2", "6"}
    assert (tmp_path / "q" / "curve_q_haar.csv").exists()


def test_fidelity_statistic_run(tmp_path):
    raw = json.loads(json.dumps(TINY_SPEC))
    raw["statistics"] = ["fidelity_decay"]
    raw["references"] = {}
    raw["fidelity"] = {"epsilon": 0.08, "steps": 12}
    spec = parse_spec(raw)
    bundle = run_experiment(spec, tmp_path / "f")
    curve = bundle.summaries["fidelity_decay"]["mean_curve"]
    assert len(curve) == 12
    assert all(0.0 <= v <= 1.0 for v in curve)
    text = (tmp_path / "f" / "fidelity_decay.csv").read_text()
    assert text.startswith("t,f_mean")


def test_empty_statistics_metadata_only(tmp_path):
    raw = json.loads(json.dumps(TINY_SPEC))
    raw["statistics"] = []
    raw["references"] = {}
    raw["ensemble_size"] = 1
    spec = parse_spec(raw)
    bundle = run_experiment(spec, tmp_path / "empty")
    assert bundle.histograms == {}
    assert (tmp_path / "empty" / "metadata.json").exists()


# ---------------------------------------------------------------- presets

def test_preset_listing_contents():
    presets = dict(list_presets())
    assert len(presets) >= 7
    for name in ("fig1", "fig2", "fig3", "fig4", "fig5ring", "fig5repeat", "fig6"):
        assert name in presets
    assert "pi/5" in presets["fig5ring"] and "pi/4.5" in presets["fig5ring"]
    assert "pi/5" in presets["fig6"] and "pi/4" in presets["fig6"]


def test_every_preset_parses():
    for name in PRESETS:
        spec = preset_spec(name)
        spec.map_config()


def test_preset_overrides():
    spec = preset_spec("fig2", seed=7, ensemble_size=5)
    assert spec.seed == 7
    assert spec.ensemble_size == 5


def test_preset_ring_couplings_exact():
    spec = preset_spec("fig5ring")
    assert spec.couplings_pi[0] == 0.2
    assert spec.couplings_pi[3] == 1 / 4.5
    assert all(c == 0.25 for i, c in enumerate(spec.couplings_pi) if i not in (0, 3))


# ---------------------------------------------------------------- CLI surface

def write_spec(tmp_path, raw):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(raw))
    return str(path)


def test_cli_run_success(tmp_path, capsys):
    raw = json.loads(json.dumps(TINY_SPEC))
    raw["statistics"] = ["spacings"]
    raw["references"] = {"spacings": ["poisson_s"]}
    code = cli.main(["run", "--spec", write_spec(tmp_path, raw), "--out", str(tmp_path / "out")])
    assert code == 0
    assert (tmp_path / "out" / "hist_spacings.csv").exists()


def test_cli_invalid_spec_exits_2(tmp_path, capsys):
    raw = json.loads(json.dumps(TINY_SPEC))
    raw["ensemble_size"] = -3
    code = cli.main(["run", "--spec", write_spec(tmp_path, raw), "--out", str(tmp_path / "out")])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_cli_missing_spec_file_exits_2(tmp_path, capsys):
    code = cli.main(["run", "--spec", str(tmp_path / "nope.json"), "--out", str(tmp_path / "out")])
    assert code == 2


def test_cli_validate(tmp_path, capsys):
    code = cli.main(["validate", "--spec", write_spec(tmp_path, TINY_SPEC)])
    assert code == 0
    out = capsys.readouterr().out
    assert json.loads(out)["name"] == "tiny"


def test_cli_validate_warns_on_center_coupling(tmp_path, capsys):
    raw = json.loads(json.dumps(TINY_SPEC))
    raw["map"]["topology"]["qubits"] = 8
    raw["map"]["couplings"] = [0.25, 0.25, 0.25, 0.2, 0.25, 0.25, 0.25]
    code = cli.main(["validate", "--spec", write_spec(tmp_path, raw)])
    assert code == 0
    assert "center" in capsys.readouterr().err


def test_cli_list_presets(capsys):
    assert cli.main(["list-presets"]) == 0
    out = capsys.readouterr().out
    assert "fig5ring" in out and "pi/4.5" in out


def test_cli_preset_with_overrides(tmp_path):
    code = cli.main(["preset", "fig4", "--out", str(tmp_path / "p"),
                     "--ensemble-size", "2", "--seed", "5"])
    assert code == 0
    meta = json.loads((tmp_path / "p" / "metadata.json").read_text())
    assert meta["seed"] == 5
    assert meta["spec"]["ensemble_size"] == 2


def test_cli_unknown_preset_exits_2(tmp_path, capsys):
    assert cli.main(["preset", "fig99", "--out", str(tmp_path / "x")]) == 2

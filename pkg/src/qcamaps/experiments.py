"""Experiment runner: build map ensembles, collect the requested statistics,
test them against reference distributions, and write machine-readable results.

A run produces, inside its output directory:

* ``metadata.json``  -- spec echo, seed, version, wall time, per-statistic
  summaries with goodness-of-fit results,
* ``hist_<statistic>.csv`` -- ``bin_left,bin_right,count`` histograms,
* ``curve_<reference>.csv`` -- ``x,density`` tables of every analytic
  reference requested (the plotting layer reads these instead of owning
  formulas),
* ``raw_<statistic>.csv`` -- one sample per line, when requested,
* ``fidelity_decay.csv`` / ``mirror_check.csv`` for those statistics.

All angles entering or leaving a spec file are in units of pi.  Every file is
byte-identical across re-runs with the same seed; the only nondeterministic
field is ``wall_time_s`` in the metadata.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path

import numpy as np

from . import rng
from .entanglement import haar_q_reference, map_ensemble_configs, meyer_wallach_q_many
from .operators import (
    CouplingSchedule,
    MapConfig,
    RotationSchedule,
    Topology,
    commutator_maxnorm,
    config_warnings,
    map_iteration_snapshots,
    mirror_block_fractions,
    mirror_permutation,
)
from .refdist import ReferencePdf, ks_test, ks_two_sample, reference_pdf
from .spectral import (
    dephasing_perturbation,
    eigendecompose,
    eigvec_elements,
    fidelity_decay,
    log_linear_fit,
    spacings,
)

__version__ = "0.1.0"

PI = math.pi

STAT_SPACINGS = "spacings"
STAT_EIGVEC = "eigvec_elements"
STAT_Q = "q_distribution"
STAT_FIDELITY = "fidelity_decay"
STAT_MIRROR = "mirror_check"
STATISTICS = (STAT_SPACINGS, STAT_EIGVEC, STAT_Q, STAT_FIDELITY, STAT_MIRROR)

_S_REFERENCES = ("cue_s", "cue2_s", "cue2_s_equal", "coe_s", "coe2_s", "coe2_s_equal", "poisson_s")
_Y_REFERENCES = ("cue_y", "coe_y")


class SpecError(ValueError):
    """The experiment spec is malformed or inconsistent."""


@dataclass(frozen=True)
class RefRequest:
    """One requested reference density (two-block names carry fractions)."""

    name: str
    fractions: tuple[float, float] | None = None

    def resolve(self) -> ReferencePdf:
        return reference_pdf(self.name, self.fractions)

    @property
    def label(self) -> str:
        return self.resolve().label


@dataclass(frozen=True)
class ExperimentSpec:
    """Validated experiment description; angles are stored in units of pi."""

    name: str
    topology_kind: str
    qubits: int
    couplings_pi: tuple[float, ...]
    rotation_mode: str
    species_count: int | None
    angle_measure: str
    iterations: int
    ensemble_size: int
    seed: int
    statistics: tuple[str, ...]
    references: dict
    q_iterations: tuple[int, ...]
    spacing_hist: tuple[float, float]          # (bin width, minimum upper edge)
    eigvec_hist: tuple[float, float, int]      # (positive floor, minimum upper edge, bins per decade)
    q_hist_width: float
    fidelity_epsilon: float
    fidelity_steps: int
    raw_output: bool
    ks_alpha: float
    eigvec_ks_cap: int

    def map_config(self) -> MapConfig:
        topology = Topology(self.topology_kind, self.qubits)
        schedule = RotationSchedule(
            self.rotation_mode, species_count=self.species_count, angle_measure=self.angle_measure
        )
        couplings = CouplingSchedule(tuple(a * PI for a in self.couplings_pi))
        return MapConfig(topology, schedule, self.iterations, self.seed, couplings)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SpecError(message)


def _parse_reference(entry, spec_qubits: int) -> RefRequest:
    if isinstance(entry, str):
        name, fractions = entry, None
    elif isinstance(entry, dict):
        name = entry.get("name")
        fractions = entry.get("fractions")
        _require(isinstance(name, str), "reference entries need a 'name'")
        if fractions is not None:
            _require(
                isinstance(fractions, (list, tuple)) and len(fractions) == 2,
                "reference 'fractions' must be a pair",
            )
            fractions = (float(fractions[0]), float(fractions[1]))
    else:
        raise SpecError(f"unrecognized reference entry {entry!r}")
    if name in ("cue2_s", "coe2_s") and fractions is None:
        fractions = mirror_block_fractions(spec_qubits)
    request = RefRequest(name, fractions)
    try:
        request.resolve()
    except ValueError as exc:
        raise SpecError(str(exc)) from exc
    return request


def parse_spec(raw: dict) -> ExperimentSpec:
    """Validate a JSON-level spec dict and return the canonical form."""
    _require(isinstance(raw, dict), "spec must be a JSON object")
    known = {
        "name", "map", "ensemble_size", "seed", "statistics", "references",
        "histogram", "q_iterations", "fidelity", "raw_output", "ks_alpha",
        "eigvec_ks_cap",
    }
    unknown = set(raw) - known
    _require(not unknown, f"unknown spec fields: {sorted(unknown)}")

    map_raw = raw.get("map")
    _require(isinstance(map_raw, dict), "spec needs a 'map' object")
    topo_raw = map_raw.get("topology")
    _require(isinstance(topo_raw, dict), "'map.topology' must be an object")
    kind = topo_raw.get("kind")
    qubits = topo_raw.get("qubits")
    _require(kind in ("chain", "ring"), "'map.topology.kind' must be 'chain' or 'ring'")
    _require(isinstance(qubits, int) and qubits >= 2, "'map.topology.qubits' must be an integer >= 2")

    try:
        topology = Topology(kind, qubits)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc

    couplings = map_raw.get("couplings", 0.25)
    if isinstance(couplings, (int, float)):
        couplings_pi = (float(couplings),) * topology.edge_count
    elif isinstance(couplings, list):
        _require(
            len(couplings) == topology.edge_count,
            f"'map.couplings' lists {len(couplings)} angles but the topology has "
            f"{topology.edge_count} edges",
        )
        couplings_pi = tuple(float(c) for c in couplings)
    else:
        raise SpecError("'map.couplings' must be a number or a list (units of pi)")

    rot_raw = map_raw.get("rotations")
    _require(isinstance(rot_raw, dict), "'map.rotations' must be an object")
    mode = rot_raw.get("mode")
    species = rot_raw.get("species")
    measure = rot_raw.get("angle_measure", "haar")
    iterations = map_raw.get("iterations")
    _require(isinstance(iterations, int) and iterations >= 0, "'map.iterations' must be an integer >= 0")

    ensemble_size = raw.get("ensemble_size", 100)
    _require(isinstance(ensemble_size, int) and ensemble_size >= 1, "'ensemble_size' must be >= 1")
    seed = raw.get("seed", 0)
    _require(isinstance(seed, int) and 0 <= seed < 2**64, "'seed' must be an unsigned 64-bit integer")

    statistics = tuple(raw.get("statistics", ()))
    for stat in statistics:
        _require(stat in STATISTICS, f"unknown statistic {stat!r}; choose from {STATISTICS}")
    _require(len(set(statistics)) == len(statistics), "duplicate statistics requested")

    references_raw = raw.get("references", {})
    _require(isinstance(references_raw, dict), "'references' must map statistic -> list")
    references: dict[str, tuple[RefRequest, ...]] = {}
    for stat, entries in references_raw.items():
        _require(stat in (STAT_SPACINGS, STAT_EIGVEC), f"references not supported for {stat!r}")
        _require(isinstance(entries, list), f"references for {stat!r} must be a list")
        requests = tuple(_parse_reference(entry, qubits) for entry in entries)
        allowed = _S_REFERENCES if stat == STAT_SPACINGS else _Y_REFERENCES
        for request in requests:
            _require(
                request.name in allowed,
                f"reference {request.name!r} does not apply to statistic {stat!r}",
            )
        references[stat] = requests

    hist_raw = raw.get("histogram", {})
    _require(isinstance(hist_raw, dict), "'histogram' must be an object")
    s_hist = hist_raw.get(STAT_SPACINGS, {})
    spacing_hist = (float(s_hist.get("width", 0.1)), float(s_hist.get("max", 4.0)))
    _require(spacing_hist[0] > 0, "spacing histogram width must be > 0")
    y_hist = hist_raw.get(STAT_EIGVEC, {})
    eigvec_hist = (
        float(y_hist.get("floor", 1e-6)),
        float(y_hist.get("max", 20.0)),
        int(y_hist.get("per_decade", 12)),
    )
    _require(eigvec_hist[0] > 0 and eigvec_hist[2] > 0, "element histogram floor and density must be > 0")
    q_hist_width = float(hist_raw.get("q_distribution", {}).get("width", 0.02))
    _require(0 < q_hist_width <= 1, "q histogram width must be in (0, 1]")

    q_iterations = raw.get("q_iterations")
    if q_iterations is None:
        q_iterations = (iterations,)
    else:
        _require(
            isinstance(q_iterations, list) and q_iterations
            and all(isinstance(m, int) and 0 <= m for m in q_iterations),
            "'q_iterations' must be a non-empty list of integers >= 0",
        )
        _require(max(q_iterations) <= iterations, "'q_iterations' cannot exceed 'map.iterations'")
        q_iterations = tuple(sorted(set(q_iterations)))

    fid_raw = raw.get("fidelity", {})
    _require(isinstance(fid_raw, dict), "'fidelity' must be an object")
    fidelity_epsilon = float(fid_raw.get("epsilon", 0.05))
    fidelity_steps = int(fid_raw.get("steps", 100))
    _require(fidelity_steps >= 1, "'fidelity.steps' must be >= 1")

    raw_output = bool(raw.get("raw_output", False))
    ks_alpha = float(raw.get("ks_alpha", 0.01))
    _require(ks_alpha in (0.01, 0.05), "'ks_alpha' must be 0.01 or 0.05")
    eigvec_ks_cap = int(raw.get("eigvec_ks_cap", 25600))
    _require(eigvec_ks_cap >= 50, "'eigvec_ks_cap' must be >= 50")

    spec = ExperimentSpec(
        name=str(raw.get("name", "experiment")),
        topology_kind=kind,
        qubits=qubits,
        couplings_pi=couplings_pi,
        rotation_mode=mode,
        species_count=species,
        angle_measure=measure,
        iterations=iterations,
        ensemble_size=ensemble_size,
        seed=seed,
        statistics=statistics,
        references=references,
        q_iterations=q_iterations,
        spacing_hist=spacing_hist,
        eigvec_hist=eigvec_hist,
        q_hist_width=q_hist_width,
        fidelity_epsilon=fidelity_epsilon,
        fidelity_steps=fidelity_steps,
        raw_output=raw_output,
        ks_alpha=ks_alpha,
        eigvec_ks_cap=eigvec_ks_cap,
    )
    try:
        spec.map_config()
    except ValueError as exc:
        raise SpecError(str(exc)) from exc
    return spec


def spec_to_json_dict(spec: ExperimentSpec) -> dict:
    """Canonical JSON form; parsing it back yields an identical spec."""
    rotations = {"mode": spec.rotation_mode, "angle_measure": spec.angle_measure}
    if spec.species_count is not None:
        rotations["species"] = spec.species_count
    references = {
        stat: [
            {"name": req.name, "fractions": list(req.fractions)}
            if req.fractions is not None
            else req.name
            for req in requests
        ]
        for stat, requests in spec.references.items()
    }
    return {
        "name": spec.name,
        "map": {
            "topology": {"kind": spec.topology_kind, "qubits": spec.qubits},
            "couplings": list(spec.couplings_pi),
            "rotations": rotations,
            "iterations": spec.iterations,
        },
        "ensemble_size": spec.ensemble_size,
        "seed": spec.seed,
        "statistics": list(spec.statistics),
        "references": references,
        "histogram": {
            STAT_SPACINGS: {"width": spec.spacing_hist[0], "max": spec.spacing_hist[1]},
            STAT_EIGVEC: {
                "floor": spec.eigvec_hist[0],
                "max": spec.eigvec_hist[1],
                "per_decade": spec.eigvec_hist[2],
            },
            STAT_Q: {"width": spec.q_hist_width},
        },
        "q_iterations": list(spec.q_iterations),
        "fidelity": {"epsilon": spec.fidelity_epsilon, "steps": spec.fidelity_steps},
        "raw_output": spec.raw_output,
        "ks_alpha": spec.ks_alpha,
        "eigvec_ks_cap": spec.eigvec_ks_cap,
    }


def load_spec(path) -> ExperimentSpec:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise SpecError(f"cannot read spec file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec file is not valid JSON: {exc}") from exc
    return parse_spec(raw)


# ---------------------------------------------------------------------------
# histograms


def linear_histogram(samples: np.ndarray, width: float, hi_min: float, lo: float = 0.0):
    """Fixed-width bins from lo; the range grows to cover every sample."""
    hi = hi_min
    if samples.size:
        top = float(samples.max())
        if top > hi:
            hi = math.ceil((top - lo) / width) * width + lo
    nbins = max(1, round((hi - lo) / width))
    edges = lo + width * np.arange(nbins + 1)
    if samples.size and edges[-1] < samples.max():
        edges = np.append(edges, edges[-1] + width)
    counts, _ = np.histogram(samples, bins=edges)
    return edges, counts


def log_histogram(samples: np.ndarray, floor: float, hi_min: float, per_decade: int):
    """Logarithmic bins above ``floor`` plus one underflow bin [0, floor)."""
    ratio = 10.0 ** (1.0 / per_decade)
    steps = max(1, math.ceil(math.log(hi_min / floor) / math.log(ratio)))
    top = floor * ratio**steps
    if samples.size:
        largest = float(samples.max())
        while top < largest:
            steps += 1
            top *= ratio
    edges = np.concatenate(([0.0], floor * ratio ** np.arange(steps + 1)))
    counts, _ = np.histogram(samples, bins=edges)
    return edges, counts


# ---------------------------------------------------------------------------
# per-member statistics (top level so process pools can pickle the worker)


def _member_statistics(member: MapConfig, task: tuple) -> dict:
    wants, q_ms, fid_eps, fid_steps = task
    snapshot_ms = sorted(set(list(q_ms) + [member.iterations])) if STAT_Q in wants else [member.iterations]
    snapshots = dict(map_iteration_snapshots(member, snapshot_ms))
    unitary = snapshots[member.iterations]

    out: dict = {}
    if STAT_SPACINGS in wants or STAT_EIGVEC in wants:
        angles, vectors = eigendecompose(unitary)
        if STAT_SPACINGS in wants:
            out[STAT_SPACINGS] = spacings(angles)
        if STAT_EIGVEC in wants:
            out[STAT_EIGVEC] = eigvec_elements(vectors)
    if STAT_Q in wants:
        out[STAT_Q] = {m: meyer_wallach_q_many(snapshots[m]) for m in q_ms}
    if STAT_MIRROR in wants:
        out[STAT_MIRROR] = commutator_maxnorm(unitary, mirror_permutation(member.n))
    if STAT_FIDELITY in wants:
        state = np.zeros(2**member.n, dtype=complex)
        state[0] = 1.0
        perturbation = dephasing_perturbation(member.n, fid_eps)
        out[STAT_FIDELITY] = fidelity_decay(unitary, perturbation, state, fid_steps)
    return out


# ---------------------------------------------------------------------------
# result bundle and serialization


@dataclass
class ResultBundle:
    """Everything one run produced, before and after being written to disk."""

    spec: ExperimentSpec
    histograms: dict = field(default_factory=dict)   # name -> (edges, counts)
    curves: dict = field(default_factory=dict)       # name -> (xs, densities)
    raw: dict = field(default_factory=dict)          # name -> samples
    summaries: dict = field(default_factory=dict)    # statistic -> JSON-ready summary
    warnings: list = field(default_factory=list)
    wall_time_s: float = 0.0

    def metadata(self) -> dict:
        extra = []
        if STAT_FIDELITY in self.summaries:
            extra.append("fidelity_decay.csv")
        if STAT_MIRROR in self.summaries:
            extra.append("mirror_check.csv")
        return {
            "name": self.spec.name,
            "version": __version__,
            "seed": self.spec.seed,
            "wall_time_s": self.wall_time_s,
            "spec": spec_to_json_dict(self.spec),
            "warnings": list(self.warnings),
            "results": self.summaries,
            "files": sorted(
                [f"hist_{name}.csv" for name in self.histograms]
                + [f"curve_{name}.csv" for name in self.curves]
                + [f"raw_{name}.csv" for name in self.raw]
                + extra
            ),
        }


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _write_histogram(path: Path, edges: np.ndarray, counts: np.ndarray) -> None:
    lines = ["bin_left,bin_right,count"]
    for left, right, count in zip(edges[:-1], edges[1:], counts):
        lines.append(f"{_fmt(left)},{_fmt(right)},{int(count)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_curve(path: Path, xs: np.ndarray, ys: np.ndarray) -> None:
    lines = ["x,density"]
    for x, y in zip(xs, ys):
        lines.append(f"{_fmt(x)},{_fmt(y)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_raw(path: Path, values: np.ndarray) -> None:
    path.write_text("\n".join(_fmt(v) for v in values) + "\n", encoding="utf-8")


def write_bundle(bundle: ResultBundle, out_dir) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, (edges, counts) in bundle.histograms.items():
        _write_histogram(out / f"hist_{name}.csv", edges, counts)
    for name, (xs, ys) in bundle.curves.items():
        _write_curve(out / f"curve_{name}.csv", xs, ys)
    for name, values in bundle.raw.items():
        _write_raw(out / f"raw_{name}.csv", values)
    if STAT_FIDELITY in bundle.summaries:
        curve = bundle.summaries[STAT_FIDELITY]["mean_curve"]
        lines = ["t,f_mean"] + [f"{t + 1},{_fmt(f)}" for t, f in enumerate(curve)]
        (out / "fidelity_decay.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if STAT_MIRROR in bundle.summaries:
        norms = bundle.summaries[STAT_MIRROR]["norms"]
        lines = ["map_index,commutator_norm"] + [f"{i},{_fmt(v)}" for i, v in enumerate(norms)]
        (out / "mirror_check.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    meta = bundle.metadata()
    (out / "metadata.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return meta["files"] + ["metadata.json"]


# ---------------------------------------------------------------------------
# the runner


def _gof_or_note(samples: np.ndarray, ref: ReferencePdf, alpha: float) -> dict:
    if samples.size < 50:
        return {"reference": ref.label, "skipped": "fewer than 50 samples"}
    return ks_test(samples, ref, alpha).as_dict()


def run_experiment(spec: ExperimentSpec, out_dir=None, threads: int = 1) -> ResultBundle:
    """Run one experiment; deterministic given the spec's master seed."""
    start = time.monotonic()
    base = spec.map_config()
    bundle = ResultBundle(spec=spec)
    bundle.warnings = config_warnings(base)

    wants = set(spec.statistics)
    members = map_ensemble_configs(base, spec.ensemble_size)
    task = (tuple(sorted(wants)), spec.q_iterations, spec.fidelity_epsilon, spec.fidelity_steps)

    if wants:
        worker = partial(_member_statistics, task=task)
        if threads > 1:
            chunk = max(1, spec.ensemble_size // (4 * threads))
            with ProcessPoolExecutor(max_workers=threads) as pool:
                per_member = list(pool.map(worker, members, chunksize=chunk))
        else:
            per_member = [worker(member) for member in members]
    else:
        per_member = []

    dim = 2**spec.qubits

    if STAT_SPACINGS in wants:
        pooled = np.concatenate([m[STAT_SPACINGS] for m in per_member])
        edges, counts = linear_histogram(pooled, spec.spacing_hist[0], spec.spacing_hist[1])
        assert int(counts.sum()) == pooled.size
        bundle.histograms[STAT_SPACINGS] = (edges, counts)
        gofs = []
        for request in spec.references.get(STAT_SPACINGS, ()):
            ref = request.resolve()
            gofs.append(_gof_or_note(pooled, ref, spec.ks_alpha))
            xs = np.linspace(0.0, edges[-1], 481)
            bundle.curves[request.name] = (xs, ref.pdf(xs))
        bundle.summaries[STAT_SPACINGS] = {
            "count": int(pooled.size),
            "mean": float(pooled.mean()),
            "gof": gofs,
        }
        if spec.raw_output:
            bundle.raw[STAT_SPACINGS] = pooled

    if STAT_EIGVEC in wants:
        pooled = np.concatenate([m[STAT_EIGVEC] for m in per_member])
        floor, hi_min, per_decade = spec.eigvec_hist
        edges, counts = log_histogram(pooled, floor, hi_min, per_decade)
        assert int(counts.sum()) == pooled.size
        bundle.histograms[STAT_EIGVEC] = (edges, counts)
        # the KS test runs on a seeded subsample: at full pooled size the
        # asymptotic critical value drops below the finite-dimension bias of
        # the references themselves (see README), which would reject even
        # exact ensemble matrices
        if pooled.size > spec.eigvec_ks_cap:
            picker = rng.auxiliary_stream(spec.seed, rng.KS_SUBSAMPLE)
            ks_samples = pooled[picker.choice(pooled.size, spec.eigvec_ks_cap, replace=False)]
        else:
            ks_samples = pooled
        gofs = []
        for request in spec.references.get(STAT_EIGVEC, ()):
            ref = request.resolve()
            gofs.append(_gof_or_note(ks_samples, ref, spec.ks_alpha))
            xs = np.geomspace(floor, edges[-1], 481)
            bundle.curves[request.name] = (xs, ref.pdf(xs))
        bundle.summaries[STAT_EIGVEC] = {
            "count": int(pooled.size),
            "mean": float(pooled.mean()),
            "ks_sample_size": int(ks_samples.size),
            "gof": gofs,
        }
        if spec.raw_output:
            bundle.raw[STAT_EIGVEC] = pooled

    if STAT_Q in wants:
        haar = haar_q_reference(spec.qubits, spec.ensemble_size * dim, spec.seed)
        haar_edges, haar_counts = linear_histogram(haar, spec.q_hist_width, 1.0)
        bundle.histograms["q_haar"] = (haar_edges, haar_counts)
        fine_edges, fine_counts = linear_histogram(haar, 0.005, 1.0)
        widths = np.diff(fine_edges)
        density = fine_counts / (haar.size * widths)
        bundle.curves["q_haar"] = ((fine_edges[:-1] + fine_edges[1:]) / 2.0, density)
        per_m = {}
        for m in spec.q_iterations:
            q_values = np.concatenate([member[STAT_Q][m] for member in per_member])
            edges, counts = linear_histogram(q_values, spec.q_hist_width, 1.0)
            assert int(counts.sum()) == q_values.size
            bundle.histograms[f"q_m{m}"] = (edges, counts)
            if q_values.size >= 50:
                gof = ks_two_sample(q_values, haar, spec.ks_alpha, reference="haar_q").as_dict()
            else:
                gof = {"reference": "haar_q", "skipped": "fewer than 50 samples"}
            per_m[str(m)] = {
                "count": int(q_values.size),
                "mean_q": float(q_values.mean()),
                "mean_q_diff_from_haar": float(haar.mean() - q_values.mean()),
                "gof": gof,
            }
            if spec.raw_output:
                bundle.raw[f"q_m{m}"] = q_values
        bundle.summaries[STAT_Q] = {
            "m_values": list(spec.q_iterations),
            "haar_count": int(haar.size),
            "haar_mean_q": float(haar.mean()),
            "per_m": per_m,
        }

    if STAT_FIDELITY in wants:
        curves = np.array([m[STAT_FIDELITY] for m in per_member])
        mean_curve = curves.mean(axis=0)
        summary = {
            "epsilon": spec.fidelity_epsilon,
            "steps": spec.fidelity_steps,
            "mean_curve": [float(v) for v in mean_curve],
        }
        try:
            rate, r_squared = log_linear_fit(np.arange(1, spec.fidelity_steps + 1), mean_curve)
            summary["decay_rate"] = -rate
            summary["r_squared"] = r_squared
        except ValueError:
            summary["decay_rate"] = None
            summary["r_squared"] = None
        bundle.summaries[STAT_FIDELITY] = summary

    if STAT_MIRROR in wants:
        norms = [m[STAT_MIRROR] for m in per_member]
        bundle.summaries[STAT_MIRROR] = {
            "norms": [float(v) for v in norms],
            "max_norm": float(max(norms)),
            "min_norm": float(min(norms)),
            "count_ge_0.1": int(sum(1 for v in norms if v >= 0.1)),
        }

    bundle.wall_time_s = time.monotonic() - start
    if out_dir is not None:
        write_bundle(bundle, out_dir)
    return bundle


# ---------------------------------------------------------------------------
# presets reproducing the reference ensemble settings


def _base_map(kind="chain", qubits=8, couplings=0.25, mode="qca", species=1, iterations=40):
    rotations = {"mode": mode, "angle_measure": "haar"}
    if species is not None:
        rotations["species"] = species
    return {
        "topology": {"kind": kind, "qubits": qubits},
        "couplings": couplings,
        "rotations": rotations,
        "iterations": iterations,
    }


def _chain_couplings(**overrides):
    values = [0.25] * 7
    for index, value in overrides.items():
        values[int(index)] = value
    return values


_PI5 = 0.2        # pi/5 in units of pi
_PI45 = 1 / 4.5   # pi/4.5 in units of pi

PRESETS: dict[str, tuple[str, dict]] = {
    "fig1": (
        "one-species chain entanglement convergence: q over m in {16,24,32,40}, 500 maps",
        {
            "name": "fig1",
            "map": _base_map(),
            "ensemble_size": 500,
            "seed": 1001,
            "statistics": [STAT_Q],
            "q_iterations": [16, 24, 32, 40],
        },
    ),
    "fig2": (
        "one-species chain spectral statistics: 100 maps, m=40, spacings vs the "
        "two-block and plain unitary-ensemble laws, element magnitudes, mirror check",
        {
            "name": "fig2",
            "map": _base_map(),
            "ensemble_size": 100,
            "seed": 1002,
            "statistics": [STAT_SPACINGS, STAT_EIGVEC, STAT_MIRROR],
            "references": {
                STAT_SPACINGS: ["cue2_s", "cue2_s_equal", "cue_s", "poisson_s"],
                STAT_EIGVEC: ["cue_y"],
            },
        },
    ),
    "fig3": (
        "two-species chain entanglement convergence: q over m in {16,24,32,40}, 500 maps",
        {
            "name": "fig3",
            "map": _base_map(species=2),
            "ensemble_size": 500,
            "seed": 1003,
            "statistics": [STAT_Q],
            "q_iterations": [16, 24, 32, 40],
        },
    ),
    "fig4": (
        "two-species chain spectral statistics: 100 maps, m=40, spacings and "
        "element magnitudes vs the unitary-ensemble laws",
        {
            "name": "fig4",
            "map": _base_map(species=2),
            "ensemble_size": 100,
            "seed": 1004,
            "statistics": [STAT_SPACINGS, STAT_EIGVEC],
            "references": {
                STAT_SPACINGS: ["cue_s", "poisson_s"],
                STAT_EIGVEC: ["cue_y"],
            },
        },
    ),
    "fig5ring": (
        "one-species ring, 100 maps, m=40; couplings pi/4 on all edges except "
        "two: one pi/5 and one pi/4.5 (full randomness recovered)",
        {
            "name": "fig5ring",
            "map": _base_map(
                kind="ring",
                couplings=[_PI5, 0.25, 0.25, _PI45, 0.25, 0.25, 0.25, 0.25],
            ),
            "ensemble_size": 100,
            "seed": 1005,
            "statistics": [STAT_SPACINGS, STAT_EIGVEC],
            "references": {
                STAT_SPACINGS: ["cue_s", "poisson_s"],
                STAT_EIGVEC: ["cue_y"],
            },
        },
    ),
    "fig5repeat": (
        "repeat maps (fixed per-qubit rotations), 100 maps, m=40; statistics vs "
        "the time-reversal-invariant ensemble laws",
        {
            "name": "fig5repeat",
            "map": _base_map(mode="repeat", species=None),
            "ensemble_size": 100,
            "seed": 1006,
            "statistics": [STAT_SPACINGS, STAT_EIGVEC],
            "references": {
                STAT_SPACINGS: ["coe_s", "cue_s", "poisson_s"],
                STAT_EIGVEC: ["coe_y", "cue_y"],
            },
        },
    ),
    "fig6": (
        "homogeneous maps (one rotation for all qubits and iterations), 100 maps, "
        "m=40, chain coupling pi/5 on one edge while all the rest are pi/4",
        {
            "name": "fig6",
            "map": _base_map(mode="homogeneous", species=None,
                             couplings=_chain_couplings(**{"1": _PI5})),
            "ensemble_size": 100,
            "seed": 1007,
            "statistics": [STAT_SPACINGS, STAT_EIGVEC],
            "references": {
                STAT_SPACINGS: ["coe_s", "poisson_s"],
                STAT_EIGVEC: ["coe_y"],
            },
        },
    ),
    "fig6sym": (
        "homogeneous maps with uniform pi/4 couplings, 100 maps, m=40; spacings "
        "vs the two-block time-reversal-invariant law",
        {
            "name": "fig6sym",
            "map": _base_map(mode="homogeneous", species=None),
            "ensemble_size": 100,
            "seed": 1008,
            "statistics": [STAT_SPACINGS, STAT_EIGVEC],
            "references": {
                STAT_SPACINGS: ["coe2_s", "coe2_s_equal", "coe_s"],
                STAT_EIGVEC: ["coe_y"],
            },
        },
    ),
    "chainasym": (
        "one-species chain with one non-center coupling pi/5 (reflection symmetry "
        "broken with 3m+2 variables), 100 maps, m=40",
        {
            "name": "chainasym",
            "map": _base_map(couplings=_chain_couplings(**{"1": _PI5})),
            "ensemble_size": 100,
            "seed": 1009,
            "statistics": [STAT_SPACINGS, STAT_EIGVEC, STAT_MIRROR],
            "references": {
                STAT_SPACINGS: ["cue_s", "cue2_s", "poisson_s"],
                STAT_EIGVEC: ["cue_y"],
            },
        },
    ),
    "fidelity": (
        "one-species chain fidelity decay under a weak dephasing perturbation, "
        "20 maps, m=40, epsilon=0.05",
        {
            "name": "fidelity",
            "map": _base_map(),
            "ensemble_size": 20,
            "seed": 1010,
            "statistics": [STAT_FIDELITY],
        },
    ),
}


def preset_spec(name: str, seed: int | None = None, ensemble_size: int | None = None) -> ExperimentSpec:
    if name not in PRESETS:
        raise SpecError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    raw = json.loads(json.dumps(PRESETS[name][1]))
    if seed is not None:
        raw["seed"] = seed
    if ensemble_size is not None:
        raw["ensemble_size"] = ensemble_size
    return parse_spec(raw)


def list_presets() -> list[tuple[str, str]]:
    return [(name, description) for name, (description, _) in PRESETS.items()]

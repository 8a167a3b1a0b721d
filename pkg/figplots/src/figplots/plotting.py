"""Render figure analogs from experiment output directories.

The input directory is one produced by the ``qcamaps`` CLI: histograms as
``hist_<name>.csv`` (bin_left,bin_right,count), analytic overlay curves as
``curve_<name>.csv`` (x,density), and ``metadata.json``.  This layer owns no
formulas or physics constants: every overlay curve is read from the CSV
tables the experiment runner emitted.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

KINDS = ("q_distribution", "spacing", "eigvec")

_CURVE_STYLES = ["-", "--", "-.", ":"]


class PlotError(RuntimeError):
    """Input files are missing, malformed, or empty."""


def read_histogram(path):
    """(bin_lefts, bin_rights, counts) from a histogram CSV."""
    path = Path(path)
    if not path.is_file():
        raise PlotError(f"missing histogram file: {path}")
    lefts, rights, counts = [], [], []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != ["bin_left", "bin_right", "count"]:
            raise PlotError(f"unexpected histogram header in {path}: {reader.fieldnames}")
        for row in reader:
            lefts.append(float(row["bin_left"]))
            rights.append(float(row["bin_right"]))
            counts.append(int(row["count"]))
    if not counts:
        raise PlotError(f"histogram file has no rows: {path}")
    return np.array(lefts), np.array(rights), np.array(counts)


def read_curve(path):
    """(x, density) columns from a curve CSV."""
    path = Path(path)
    if not path.is_file():
        raise PlotError(f"missing curve file: {path}")
    xs, ys = [], []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != ["x", "density"]:
            raise PlotError(f"unexpected curve header in {path}: {reader.fieldnames}")
        for row in reader:
            xs.append(float(row["x"]))
            ys.append(float(row["density"]))
    if not xs:
        raise PlotError(f"curve file has no rows: {path}")
    return np.array(xs), np.array(ys)


def read_metadata(in_dir) -> dict:
    path = Path(in_dir) / "metadata.json"
    if not path.is_file():
        raise PlotError(f"missing metadata.json in {in_dir}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PlotError(f"garbled metadata.json: {exc}") from exc


def histogram_density(lefts, rights, counts):
    """Counts normalized to a probability density (unit total area)."""
    total = counts.sum()
    if total == 0:
        raise PlotError("histogram is empty (all counts zero)")
    widths = rights - lefts
    if np.any(widths <= 0):
        raise PlotError("histogram has non-positive bin widths")
    return counts / (total * widths)


def _curve_files(in_dir: Path, suffix: str, overlays):
    """Curve CSVs to overlay: explicit names, or every matching file found."""
    if overlays:
        paths = []
        for name in overlays:
            path = in_dir / f"curve_{name}.csv"
            if not path.is_file():
                raise PlotError(f"requested overlay curve not found: {path}")
            paths.append(path)
        return paths
    return sorted(in_dir.glob(f"curve_*{suffix}.csv"))


def _step_histogram(ax, lefts, rights, density, **kwargs):
    edges = np.append(lefts, rights[-1])
    ax.stairs(density, edges, **kwargs)


def render(in_dir, kind: str, out_path, overlays=None) -> Path:
    """Write one figure analog; returns the output path."""
    in_dir = Path(in_dir)
    if kind not in KINDS:
        raise PlotError(f"unknown figure kind {kind!r}; choose from {KINDS}")
    meta = read_metadata(in_dir)
    title = meta.get("name", in_dir.name)

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if kind == "spacing":
        lefts, rights, counts = read_histogram(in_dir / "hist_spacings.csv")
        _step_histogram(ax, lefts, rights, histogram_density(lefts, rights, counts),
                        color="0.35", fill=True, alpha=0.35, label="ensemble")
        for style, path in zip(_CURVE_STYLES * 4, _curve_files(in_dir, "_s", overlays)):
            xs, ys = read_curve(path)
            ax.plot(xs, ys, style, lw=1.4, label=path.stem.removeprefix("curve_"))
        ax.set_xlabel("s")
        ax.set_ylabel("P(s)")
        ax.set_xlim(0, max(4.0, rights[-1] if rights[-1] <= 6 else 6.0))

    elif kind == "eigvec":
        lefts, rights, counts = read_histogram(in_dir / "hist_eigvec_elements.csv")
        density = histogram_density(lefts, rights, counts)
        # the first bin is the [0, floor) underflow catching the tiny-element
        # spike; clip its left edge so it renders on the log axis
        plot_lefts = lefts.copy()
        if plot_lefts[0] == 0.0:
            plot_lefts[0] = rights[0] / 10.0
        _step_histogram(ax, plot_lefts, rights, density,
                        color="0.35", fill=True, alpha=0.35, label="ensemble")
        for style, path in zip(_CURVE_STYLES * 4, _curve_files(in_dir, "_y", overlays)):
            xs, ys = read_curve(path)
            mask = (xs > 0) & (ys > 0)
            ax.plot(xs[mask], ys[mask], style, lw=1.4, label=path.stem.removeprefix("curve_"))
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("y")
        ax.set_ylabel("P(y)")

    else:  # q_distribution
        hist_files = sorted(in_dir.glob("hist_q_m*.csv"),
                            key=lambda p: int(p.stem.removeprefix("hist_q_m")))
        if not hist_files:
            raise PlotError(f"no hist_q_m*.csv files in {in_dir}")
        markers = "x+*od^"
        for marker, path in zip(markers * 4, hist_files):
            lefts, rights, counts = read_histogram(path)
            density = histogram_density(lefts, rights, counts)
            centers = (lefts + rights) / 2.0
            label = "m=" + path.stem.removeprefix("hist_q_m")
            ax.plot(centers, density, marker, ms=4, ls="none", label=label)
        xs, ys = read_curve(in_dir / "curve_q_haar.csv")
        ax.plot(xs, ys, "-", lw=1.4, color="k", label="haar states")
        ax.set_xlabel("Q")
        ax.set_ylabel("P(Q)")
        ax.set_xlim(0, 1)

    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path

"""Figure rendering for qcamaps experiment output directories."""

from .plotting import KINDS, PlotError, histogram_density, read_curve, read_histogram, render

__version__ = "0.1.0"

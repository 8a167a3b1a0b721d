"""Analytic reference densities for spacing and eigenvector statistics,
exact circular-ensemble samplers, and Kolmogorov-Smirnov machinery.

Spacing densities cover the rotation-invariant unitary ensemble, the
time-reversal-invariant (symmetric-unitary) ensemble, the two-block
superpositions produced by a spectrum split into independent sectors of
Hilbert-space fractions (f1, f2), and the Poisson law of regular integrable
operators.  All spacing and element densities have unit mass and unit mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import erf, erfc, kolmogi, kolmogorov

PI = math.pi


def _cue_spacing(s):
    return (32.0 / PI**2) * s**2 * np.exp(-4.0 * s**2 / PI)


def _coe_spacing(s):
    return (PI / 2.0) * s * np.exp(-PI * s**2 / 4.0)


def _poisson_spacing(s):
    return np.exp(-s)


def _cue_element(y):
    return np.exp(-y)


def _coe_element(y):
    with np.errstate(divide="ignore"):
        return np.exp(-y / 2.0) / np.sqrt(2.0 * PI * y)


def _cue2_spacing(s, f1, f2):
    # superposition of two independent rotation-invariant blocks
    erf1 = erf(2.0 * f1 * s / math.sqrt(PI))
    erf2 = erf(2.0 * f2 * s / math.sqrt(PI))
    erfc1, erfc2 = 1.0 - erf1, 1.0 - erf2
    e1 = np.exp(-4.0 * f1**2 * s**2 / PI)
    e2 = np.exp(-4.0 * f2**2 * s**2 / PI)
    out = 2.0 * f1 * f2 * (1.0 - erf1 - erf2 + erf1 * erf2)
    out += (32.0 / PI**2) * s**2 * e1 * e2 * (f1**4 + f1**2 * f2**2 + f2**4)
    out += (8.0 / PI) * f1 * f2 * s * (
        f1 * e1 * (1.0 - f1**2 * 4.0 * s**2 / PI) * erfc2
        + f2 * e2 * (1.0 - f2**2 * 4.0 * s**2 / PI) * erfc1
    )
    return out


def _cue2_spacing_equal(s):
    # the f1 = f2 = 1/2 special case in its reduced closed form
    ec = erfc(s / math.sqrt(PI))
    return (
        0.5 * ec**2
        + (6.0 / PI**2) * s**2 * np.exp(-2.0 * s**2 / PI)
        + (2.0 / PI) * s * np.exp(-(s**2) / PI) * (1.0 - s**2 / PI) * ec
    )


def _coe2_spacing(s, f1, f2):
    # superposition of two independent time-reversal-invariant blocks
    out = (PI / 2.0) * s * f1**3 * erfc(math.sqrt(PI) * f2 * s / 2.0) * np.exp(-PI * f1**2 * s**2 / 4.0)
    out += (PI / 2.0) * s * f2**3 * erfc(math.sqrt(PI) * f1 * s / 2.0) * np.exp(-PI * f2**2 * s**2 / 4.0)
    out += 2.0 * f1 * f2 * np.exp(-PI * s**2 * (f1**2 + f2**2) / 4.0)
    return out


def _coe2_spacing_equal(s):
    return 0.5 * (
        erfc(math.sqrt(PI) * s / 4.0) * (PI * s / 4.0) * np.exp(-PI * s**2 / 16.0)
        + np.exp(-PI * s**2 / 8.0)
    )


# name -> (density or density(s, f1, f2), needs fractions, grid max, sqrt substitution)
_REGISTRY = {
    "cue_s": (_cue_spacing, False, 12.0, False),
    "cue2_s": (_cue2_spacing, True, 16.0, False),
    "cue2_s_equal": (_cue2_spacing_equal, False, 16.0, False),
    "coe_s": (_coe_spacing, False, 12.0, False),
    "coe2_s": (_coe2_spacing, True, 16.0, False),
    "coe2_s_equal": (_coe2_spacing_equal, False, 16.0, False),
    "poisson_s": (_poisson_spacing, False, 40.0, False),
    "cue_y": (_cue_element, False, 48.0, False),
    "coe_y": (_coe_element, False, 96.0, True),
}

REFERENCE_NAMES = tuple(_REGISTRY)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _panel_integrals(fn, edges: np.ndarray) -> np.ndarray:
    """Gauss-Legendre integral of fn over each consecutive edge interval."""
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    points = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    values = fn(points)
    return half * (values @ _GL_WEIGHTS)


class ReferencePdf:
    """One analytic density with a numerically integrated, cached CDF.

    The CDF is accumulated on a dense grid with high-order panel quadrature
    and interpolated monotonically; densities with an integrable 1/sqrt
    divergence at 0 are integrated in the sqrt-substituted variable.
    """

    _GRID_POINTS = 24576

    def __init__(self, name: str, fractions: tuple[float, float] | None = None):
        if name not in _REGISTRY:
            raise ValueError(f"unknown reference {name!r}; choose from {REFERENCE_NAMES}")
        density, needs_fractions, grid_max, sqrt_sub = _REGISTRY[name]
        if needs_fractions:
            if fractions is None:
                raise ValueError(f"reference {name!r} needs block fractions (f1, f2)")
            f1, f2 = float(fractions[0]), float(fractions[1])
            if not (0.0 < f1 < 1.0 and 0.0 < f2 < 1.0):
                raise ValueError("block fractions must lie in (0, 1)")
            if abs(f1 + f2 - 1.0) > 1e-12:
                raise ValueError("block fractions must sum to 1")
            self.fractions = (f1, f2)
            self._density = lambda x: density(x, f1, f2)
        else:
            if fractions is not None:
                raise ValueError(f"reference {name!r} takes no block fractions")
            self.fractions = None
            self._density = density
        self.name = name
        self.grid_max = grid_max
        self._sqrt_sub = sqrt_sub
        self._cdf_interp = None

    @property
    def label(self) -> str:
        if self.fractions is None:
            return self.name
        return f"{self.name}({self.fractions[0]:g},{self.fractions[1]:g})"

    def pdf(self, x):
        """Density at x >= 0 (scalar or array)."""
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0.0):
            raise ValueError("density is supported on x >= 0")
        values = self._density(arr)
        if np.isscalar(x) or arr.ndim == 0:
            return float(values)
        return values

    def _tables(self):
        if self._cdf_interp is None:
            if self._sqrt_sub:
                u = np.linspace(0.0, math.sqrt(self.grid_max), self._GRID_POINTS)
                integrand = lambda t: 2.0 * t * self._density(t * t)
                cdf = np.concatenate(([0.0], np.cumsum(_panel_integrals(integrand, u))))
                grid = u * u
            else:
                grid = np.linspace(0.0, self.grid_max, self._GRID_POINTS)
                cdf = np.concatenate(([0.0], np.cumsum(_panel_integrals(self._density, grid))))
            self._total_mass = float(cdf[-1])
            self._cdf_interp = PchipInterpolator(grid, cdf, extrapolate=False)
        return self._cdf_interp

    def cdf(self, x):
        """Numerically integrated cumulative distribution, clipped to [0, 1]."""
        interp = self._tables()
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0.0):
            raise ValueError("density is supported on x >= 0")
        values = interp(np.minimum(arr, self.grid_max))
        values = np.clip(values, 0.0, 1.0)
        values = np.where(arr >= self.grid_max, 1.0, values)
        if np.isscalar(x) or arr.ndim == 0:
            return float(values)
        return values

    def mass(self) -> float:
        """Total integrated probability mass (should be 1)."""
        self._tables()
        return self._total_mass

    def mean(self) -> float:
        """First moment by the same panel quadrature (should be 1)."""
        if self._sqrt_sub:
            u = np.linspace(0.0, math.sqrt(self.grid_max), self._GRID_POINTS)
            return float(np.sum(_panel_integrals(lambda t: 2.0 * t**3 * self._density(t * t), u)))
        grid = np.linspace(0.0, self.grid_max, self._GRID_POINTS)
        return float(np.sum(_panel_integrals(lambda t: t * self._density(t), grid)))


def reference_pdf(name: str, fractions: tuple[float, float] | None = None) -> ReferencePdf:
    """Look up a reference density by name; two-block names need fractions."""
    return ReferencePdf(name, fractions)


def sample_cue(dim: int, seed) -> np.ndarray:
    """Haar-distributed unitary via Ginibre + QR with the phase correction
    that makes the factorization unique (and the distribution exactly Haar)."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    gen = seed if isinstance(seed, np.random.Generator) else np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed))
    )
    z = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def sample_coe(dim: int, seed) -> np.ndarray:
    """Symmetric unitary U^T U with U Haar: the time-reversal-invariant ensemble."""
    u = sample_cue(dim, seed)
    return u.T @ u


@dataclass(frozen=True)
class GofResult:
    """Kolmogorov-Smirnov outcome; reject iff statistic > critical_value."""

    statistic: float
    sample_size: int
    alpha: float
    critical_value: float
    reject: bool
    pvalue: float
    reference: str

    def as_dict(self) -> dict:
        return {
            "reference": self.reference,
            "statistic": self.statistic,
            "sample_size": self.sample_size,
            "alpha": self.alpha,
            "critical_value": self.critical_value,
            "reject": self.reject,
            "pvalue": self.pvalue,
        }


_ALLOWED_ALPHA = (0.01, 0.05)


def ks_test(samples: np.ndarray, ref: ReferencePdf, alpha: float = 0.01) -> GofResult:
    """One-sample KS distance against the reference's numerical CDF.

    The critical value comes from the asymptotic Kolmogorov distribution,
    adequate at the sample sizes used here (>= 50 enforced).
    """
    samples = np.sort(np.asarray(samples, dtype=float))
    count = samples.size
    if count < 50:
        raise ValueError("need at least 50 samples")
    if alpha not in _ALLOWED_ALPHA:
        raise ValueError(f"alpha must be one of {_ALLOWED_ALPHA}")
    cdf = ref.cdf(samples)
    upper = np.arange(1, count + 1) / count
    lower = np.arange(0, count) / count
    statistic = float(max(np.max(upper - cdf), np.max(cdf - lower)))
    critical = float(kolmogi(alpha)) / math.sqrt(count)
    pvalue = float(kolmogorov(math.sqrt(count) * statistic))
    return GofResult(statistic, count, alpha, critical, statistic > critical, pvalue, ref.label)


def ks_two_sample(first: np.ndarray, second: np.ndarray, alpha: float = 0.01,
                  reference: str = "two_sample") -> GofResult:
    """Two-sample KS distance with the asymptotic critical value."""
    first = np.sort(np.asarray(first, dtype=float))
    second = np.sort(np.asarray(second, dtype=float))
    n1, n2 = first.size, second.size
    if n1 < 50 or n2 < 50:
        raise ValueError("need at least 50 samples on each side")
    if alpha not in _ALLOWED_ALPHA:
        raise ValueError(f"alpha must be one of {_ALLOWED_ALPHA}")
    grid = np.concatenate([first, second])
    cdf1 = np.searchsorted(first, grid, side="right") / n1
    cdf2 = np.searchsorted(second, grid, side="right") / n2
    statistic = float(np.max(np.abs(cdf1 - cdf2)))
    effective = math.sqrt(n1 * n2 / (n1 + n2))
    critical = float(kolmogi(alpha)) / effective
    pvalue = float(kolmogorov(effective * statistic))
    return GofResult(statistic, n1 + n2, alpha, critical, statistic > critical, pvalue, reference)

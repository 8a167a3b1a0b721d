"""Spectral observables of unitary matrices: unfolded eigenangle spacings,
scaled eigenvector-element magnitudes, and fidelity decay under perturbation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

TWO_PI = 2.0 * math.pi


def eigendecompose(unitary: np.ndarray, *, unitarity_tol: float = 1e-6):
    """Eigenangles in [0, 2pi) (sorted) and a unitary eigenvector matrix.

    Uses the complex Schur form: for a unitary input the triangular factor is
    diagonal to machine precision, so the Schur basis is an orthonormal
    eigenbasis even across degenerate clusters.
    """
    unitary = np.asarray(unitary, dtype=np.complex128)
    if unitary.ndim != 2 or unitary.shape[0] != unitary.shape[1]:
        raise ValueError("expected a square matrix")
    dim = unitary.shape[0]
    defect = np.max(np.abs(unitary @ unitary.conj().T - np.eye(dim)))
    if defect > unitarity_tol:
        raise ValueError(f"matrix is not unitary (max defect {defect:.3e})")
    triangular, basis = scipy.linalg.schur(unitary, output="complex")
    angles = np.angle(np.diagonal(triangular)) % TWO_PI
    order = np.argsort(angles, kind="stable")
    return angles[order], basis[:, order]


def spacings(eigenangles: np.ndarray) -> np.ndarray:
    """Unfolded nearest-neighbor spacings, circular closure included.

    Angles are sorted, consecutive differences are rescaled by N/(2pi), and
    the wrap-around gap closes the circle, so the N values average exactly 1.
    """
    angles = np.sort(np.asarray(eigenangles, dtype=float) % TWO_PI)
    count = angles.size
    if count < 2:
        raise ValueError("need at least 2 eigenangles")
    scale = count / TWO_PI
    gaps = np.diff(angles) * scale
    closing = (angles[0] + TWO_PI - angles[-1]) * scale
    return np.append(gaps, closing)


def eigvec_elements(eigenvectors: np.ndarray, *, orthonormal_tol: float = 1e-6) -> np.ndarray:
    """All N^2 scaled squared moduli N*|v_ij|^2 of an orthonormal eigenbasis."""
    vecs = np.asarray(eigenvectors, dtype=np.complex128)
    if vecs.ndim != 2 or vecs.shape[0] != vecs.shape[1]:
        raise ValueError("expected a square eigenvector matrix")
    dim = vecs.shape[0]
    defect = np.max(np.abs(vecs.conj().T @ vecs - np.eye(dim)))
    if defect > orthonormal_tol:
        raise ValueError(f"eigenvectors are not orthonormal (max defect {defect:.3e})")
    return (dim * np.abs(vecs) ** 2).ravel()


@dataclass(frozen=True)
class SpectralData:
    """Eigenangles, unfolded spacings, and eigenvector-element magnitudes."""

    eigenangles: np.ndarray
    spacings: np.ndarray
    eigvec_elements: np.ndarray


def spectral_data(unitary: np.ndarray) -> SpectralData:
    angles, vecs = eigendecompose(unitary)
    return SpectralData(angles, spacings(angles), eigvec_elements(vecs))


def dephasing_perturbation(n: int, epsilon: float) -> np.ndarray:
    """Diagonal unitary exp(i*epsilon * sum_j sigma_z^j) on n qubits."""
    idx = np.arange(2**n)
    zsum = np.zeros(2**n)
    for qubit in range(1, n + 1):
        zsum += 1 - 2 * ((idx >> (n - qubit)) & 1)
    return np.diag(np.exp(1j * epsilon * zsum))


def fidelity_decay(
    unitary: np.ndarray,
    perturbation: np.ndarray,
    state: np.ndarray,
    steps: int,
    *,
    unitarity_tol: float = 1e-6,
) -> np.ndarray:
    """Overlap decay |<psi| (PU)^-t U^t |psi>|^2 for t = 1..steps.

    ``perturbation @ unitary`` is the perturbed map; both operators evolve the
    same initial state and the squared overlap is recorded each step.
    """
    unitary = np.asarray(unitary, dtype=np.complex128)
    perturbation = np.asarray(perturbation, dtype=np.complex128)
    state = np.asarray(state, dtype=np.complex128)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dim = unitary.shape[0]
    if unitary.shape != (dim, dim) or perturbation.shape != (dim, dim) or state.shape != (dim,):
        raise ValueError("operator and state dimensions do not match")
    for op in (unitary, perturbation):
        defect = np.max(np.abs(op @ op.conj().T - np.eye(dim)))
        if defect > unitarity_tol:
            raise ValueError(f"operator is not unitary (max defect {defect:.3e})")
    if abs(np.vdot(state, state).real - 1.0) > 1e-8:
        raise ValueError("state is not normalized")

    perturbed = perturbation @ unitary
    forward = state.copy()
    reference = state.copy()
    out = np.empty(steps)
    for t in range(steps):
        forward = unitary @ forward
        reference = perturbed @ reference
        out[t] = abs(np.vdot(reference, forward)) ** 2
    return np.clip(out, 0.0, 1.0)


def log_linear_fit(times: np.ndarray, values: np.ndarray, *, floor: float = 0.1):
    """Least-squares slope and R^2 of log(values) vs times, above ``floor``.

    Used to check exponential decay: only points with value >= floor enter
    the fit so the asymptotic plateau does not distort it.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = values >= floor
    if mask.sum() < 3:
        raise ValueError("need at least 3 points above the floor to fit")
    x, y = times[mask], np.log(values[mask])
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(r_squared)

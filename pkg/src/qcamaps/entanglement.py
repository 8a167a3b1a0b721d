"""Multipartite entanglement of pure states: average single-qubit mixedness,
its distribution over map-evolved basis states, and the Haar-state reference."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from . import operators, rng

QSAMPLE_DTYPE = np.dtype([("q", np.float64), ("source_state", np.uint32), ("map_seed", np.uint64)])


def _qubit_purities(states: np.ndarray, n: int) -> np.ndarray:
    """Tr[rho_j^2] for each qubit j and each state column; shape (n, n_states).

    Each single-qubit reduced density matrix is accumulated directly from the
    bit-indexed amplitudes (a 2x2 contraction), never the full density matrix.
    """
    n_states = states.shape[1]
    purities = np.empty((n, n_states))
    tensor = states.reshape([2] * n + [n_states])
    for qubit in range(n):
        front = np.moveaxis(tensor, qubit, 0).reshape(2, -1, n_states)
        rho = np.einsum("ars,brs->abs", front, front.conj())
        purities[qubit] = np.einsum("abs,abs->s", rho, rho.conj()).real
    return purities


def meyer_wallach_q_many(states: np.ndarray) -> np.ndarray:
    """Entanglement measure for each column of an (N, n_states) array."""
    states = np.asarray(states, dtype=np.complex128)
    dim = states.shape[0]
    n = int(math.log2(dim))
    if 2**n != dim or n < 2:
        raise ValueError("state dimension must be 2**n with n >= 2")
    norms = np.sum(np.abs(states) ** 2, axis=0)
    if np.max(np.abs(norms - 1.0)) > 1e-8:
        raise ValueError("states must be normalized")
    purities = _qubit_purities(states, n)
    # 2*(1 - mean purity) rather than 2 - (2/n)*sum: identical algebraically,
    # and exactly 0.0 for product states in floating point; the clip removes
    # sub-epsilon excursions outside [0, 1]
    return np.clip(2.0 * (1.0 - purities.mean(axis=0)), 0.0, 1.0)


def meyer_wallach_q(state: np.ndarray) -> float:
    """Average single-qubit mixedness of a pure state; 0 on product states, <= 1."""
    state = np.asarray(state, dtype=np.complex128)
    if state.ndim != 1:
        raise ValueError("expected a state vector")
    return float(meyer_wallach_q_many(state[:, None])[0])


def haar_q_reference(n: int, sample_count: int, seed: int) -> np.ndarray:
    """Entanglement values of Haar-random pure states.

    States are normalized complex-Gaussian vectors, which is exactly the
    Haar distribution on the sphere.
    """
    if n < 2:
        raise ValueError("need at least 2 qubits")
    if sample_count == 0:
        return np.empty(0)
    gen = rng.auxiliary_stream(seed, rng.HAAR_STATES)
    dim = 2**n
    out = np.empty(sample_count)
    batch = max(1, min(sample_count, (1 << 22) // dim))
    done = 0
    while done < sample_count:
        take = min(batch, sample_count - done)
        z = gen.standard_normal((dim, take)) + 1j * gen.standard_normal((dim, take))
        z /= np.linalg.norm(z, axis=0, keepdims=True)
        out[done : done + take] = meyer_wallach_q_many(z)
        done += take
    return out


def haar_average_q(n: int) -> float:
    """Exact ensemble-average entanglement of Haar states on n qubits.

    From the average subsystem purity (d_a + d_b)/(d_a*d_b + 1) with a single
    qubit against the rest.
    """
    dim = 2**n
    return 2.0 - 2.0 * (2 + dim // 2) / (dim + 1)


def map_ensemble_configs(config: operators.MapConfig, ensemble_size: int):
    """Member configs with per-map seeds derived from the config's master seed."""
    if ensemble_size < 1:
        raise ValueError("ensemble_size must be >= 1")
    return [
        replace(config, seed=rng.derive_map_seed(config.seed, index))
        for index in range(ensemble_size)
    ]


def q_distribution(config: operators.MapConfig, ensemble_size: int) -> np.recarray:
    """Entanglement of every computational basis state under an ensemble of maps.

    Returns ensemble_size * 2**n records ordered by (map index, basis state),
    each carrying the q value, the source basis-state index, and the seed of
    the map that produced it.
    """
    members = map_ensemble_configs(config, ensemble_size)
    dim = 2**config.n
    out = np.recarray(ensemble_size * dim, dtype=QSAMPLE_DTYPE)
    for index, member in enumerate(members):
        unitary = operators.build_map(member)
        block = slice(index * dim, (index + 1) * dim)
        out.q[block] = meyer_wallach_q_many(unitary)
        out.source_state[block] = np.arange(dim)
        out.map_seed[block] = member.seed
    return out


def q_convergence(
    config: operators.MapConfig,
    m_values,
    ensemble_size: int,
) -> dict[int, np.ndarray]:
    """q samples at several iteration counts, sharing each map's evolution prefix.

    Equivalent to ``q_distribution`` at every m (shorter maps are prefixes of
    longer ones under the seed-derivation rule) but ~len(m_values) times
    cheaper.  The config's ``iterations`` must cover max(m_values).
    """
    members = map_ensemble_configs(config, ensemble_size)
    dim = 2**config.n
    wanted = sorted(set(int(m) for m in m_values))
    samples = {m: np.empty(ensemble_size * dim) for m in wanted}
    for index, member in enumerate(members):
        block = slice(index * dim, (index + 1) * dim)
        for m, unitary in operators.map_iteration_snapshots(member, wanted):
            samples[m][block] = meyer_wallach_q_many(unitary)
    return samples

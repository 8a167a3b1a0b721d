import math
from dataclasses import replace

import numpy as np
import pytest

from qcamaps import (
    RotationSchedule,
    build_map,
    haar_average_q,
    haar_q_reference,
    meyer_wallach_q,
    meyer_wallach_q_many,
    q_convergence,
    q_distribution,
    su2_rotation,
)

from test_operators import chain_config

PI = math.pi


def basis_state(dim, index):
    state = np.zeros(dim, dtype=complex)
    state[index] = 1.0
    return state


def test_q_zero_on_every_basis_state_exactly():
    for n in (2, 3, 4):
        states = np.eye(2**n, dtype=complex)
        vals = meyer_wallach_q_many(states)
        assert np.all(vals == 0.0)


def test_q_bell_state():
    bell = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    assert meyer_wallach_q(bell) == pytest.approx(1.0, abs=1e-12)


def test_q_w_state():
    w = np.zeros(8, dtype=complex)
    w[[1, 2, 4]] = 1 / math.sqrt(3)
    assert meyer_wallach_q(w) == pytest.approx(8 / 9, abs=1e-12)


def test_q_ghz_state():
    ghz = np.zeros(16, dtype=complex)
    ghz[[0, 15]] = 1 / math.sqrt(2)
    assert meyer_wallach_q(ghz) == pytest.approx(1.0, abs=1e-12)


def test_q_rejects_unnormalized():
    with pytest.raises(ValueError):
        meyer_wallach_q(np.ones(4, dtype=complex))


def test_q_invariant_under_local_unitaries_and_global_phase():
    gen = np.random.default_rng(17)
    state = gen.standard_normal(16) + 1j * gen.standard_normal(16)
    state /= np.linalg.norm(state)
    base = meyer_wallach_q(state)
    assert 0.0 <= base <= 1.0

    local = np.array([[1.0]], dtype=complex)
    for _ in range(4):
        local = np.kron(local, su2_rotation(tuple(gen.uniform(0, 2 * PI, 3))))
    assert meyer_wallach_q(local @ state) == pytest.approx(base, abs=1e-9)
    assert meyer_wallach_q(np.exp(1j * 1.234) * state) == pytest.approx(base, abs=1e-12)


def test_purity_bounds_give_unit_interval():
    gen = np.random.default_rng(3)
    states = gen.standard_normal((32, 50)) + 1j * gen.standard_normal((32, 50))
    states /= np.linalg.norm(states, axis=0, keepdims=True)
    vals = meyer_wallach_q_many(states)
    assert np.all(vals >= 0.0) and np.all(vals <= 1.0)


# ---------------------------------------------------------------- Haar reference

def test_haar_q_empty_sample():
    assert haar_q_reference(8, 0, 1).size == 0


def test_haar_q_mean_two_qubits():
    # analytic ensemble mean 0.4; frozen MC oracle (10^6 samples): 0.400018 +/- 0.00023
    assert haar_average_q(2) == pytest.approx(0.4, abs=1e-15)
    vals = haar_q_reference(2, 40000, 12)
    sem = vals.std() / math.sqrt(vals.size)
    assert abs(vals.mean() - 0.4) <= 3 * sem


def test_haar_q_mean_eight_qubits():
    # analytic ensemble mean 254/257
    target = 254 / 257
    assert haar_average_q(8) == pytest.approx(target, abs=1e-15)
    vals = haar_q_reference(8, 20000, 13)
    sem = vals.std() / math.sqrt(vals.size)
    assert abs(vals.mean() - target) <= 3 * sem


def test_haar_q_deterministic_in_seed():
    a = haar_q_reference(4, 100, 55)
    b = haar_q_reference(4, 100, 55)
    np.testing.assert_array_equal(a, b)
    c = haar_q_reference(4, 100, 56)
    assert not np.array_equal(a, c)


# ---------------------------------------------------------------- map ensembles

def test_q_distribution_identity_maps():
    # m=0 map is a single local rotation layer: basis states stay products
    config = chain_config(n=3, m=0, seed=4, mode="homogeneous", k=None)
    samples = q_distribution(config, 3)
    assert samples.q.shape == (3 * 8,)
    np.testing.assert_allclose(samples.q, 0.0, atol=1e-12)
    assert list(samples.source_state[:8]) == list(range(8))


def test_q_distribution_sample_layout_and_determinism():
    config = chain_config(n=3, m=2, seed=99, mode="qca", k=1)
    a = q_distribution(config, 4)
    b = q_distribution(config, 4)
    np.testing.assert_array_equal(a.q, b.q)
    assert len(set(a.map_seed)) == 4
    assert a.q.size == 4 * 8


def test_q_convergence_matches_q_distribution():
    config = chain_config(n=3, m=6, seed=123, mode="qca", k=2)
    conv = q_convergence(config, [2, 6], 3)
    for m in (2, 6):
        direct = q_distribution(replace(config, iterations=m), 3)
        np.testing.assert_allclose(conv[m], direct.q, atol=1e-9)


def test_q_convergence_validates_range():
    config = chain_config(n=3, m=4, seed=1)
    with pytest.raises(ValueError):
        q_convergence(config, [2, 6], 2)

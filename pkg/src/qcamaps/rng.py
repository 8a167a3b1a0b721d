"""Counter-based random streams for reproducible, order-independent ensembles.

Stream-splitting rule:

* master seed + ``(0, map_index)`` -> per-map seed (``derive_map_seed``),
* per-map seed + ``(layer, entity)`` -> one rotation-angle stream
  (``angle_stream``); layer ``i`` in ``1..m`` is iteration ``i``, layer
  ``m+1`` is the closing rotation layer, layer ``0`` is reserved for
  schedules whose angles are drawn once and reused,
* master seed + ``(1, purpose)`` -> auxiliary streams (reference samples,
  subsampling) that must not collide with map streams.

Every stream is an independent Philox generator, so ensemble members can be
produced in any order (or in parallel) without changing the values drawn.
"""

from __future__ import annotations

import math

import numpy as np

# auxiliary-stream purposes
HAAR_STATES = 0
KS_SUBSAMPLE = 1

TWO_PI = 2.0 * math.pi


def _stream(root_seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(root_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_map_seed(master_seed: int, map_index: int) -> int:
    """Per-map seed for ensemble member ``map_index`` under ``master_seed``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(0, int(map_index)))
    return int(ss.generate_state(1, np.uint64)[0])


def auxiliary_stream(master_seed: int, purpose: int) -> np.random.Generator:
    """Stream for non-map randomness (purpose is one of the module constants)."""
    return _stream(int(master_seed), 1, purpose)


def angle_stream(map_seed: int, layer: int, entity: int) -> np.random.Generator:
    """Stream holding the angle triple of (rotation layer, species-or-qubit)."""
    return _stream(int(map_seed), layer, entity)


def sample_rotation_angles(gen: np.random.Generator, measure: str = "haar"):
    """Draw one (theta, phi, psi) triple.

    ``haar``: phi, psi uniform on [0, 2pi) and sin^2(theta) uniform on [0, 1),
    the invariant measure of the single-qubit rotation family.  ``uniform``:
    theta also uniform on [0, 2pi), for sensitivity studies.
    """
    u = gen.random(3)
    if measure == "haar":
        theta = math.asin(math.sqrt(u[0]))
    elif measure == "uniform":
        theta = TWO_PI * u[0]
    else:
        raise ValueError(f"unknown angle measure {measure!r}")
    return theta, TWO_PI * u[1], TWO_PI * u[2]

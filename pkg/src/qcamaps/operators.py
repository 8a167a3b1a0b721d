"""Builders for coupled-rotation map unitaries on qubit chains and rings.

A map is ``m`` iterations of (single-qubit rotation layer, then diagonal
nearest-neighbor coupling), closed by one more rotation layer.  Iteration 1
acts first on states, i.e. it is the rightmost factor of the matrix product.
Qubit 1 is the most significant bit of the basis-state index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Literal, Sequence

import numpy as np

from . import rng

TWO_PI = 2.0 * math.pi
DEFAULT_COUPLING = math.pi / 4.0
MAX_QUBITS = 12

SPECIES_MODE = "qca"
PER_QUBIT_MODE = "circuit"
REPEAT_MODE = "repeat"
HOMOGENEOUS_MODE = "homogeneous"
ROTATION_MODES = (SPECIES_MODE, PER_QUBIT_MODE, REPEAT_MODE, HOMOGENEOUS_MODE)


class CapacityError(ValueError):
    """Requested Hilbert-space dimension exceeds the dense-matrix cap."""


@dataclass(frozen=True)
class RotationAngles:
    """Angle triple (theta, phi, psi) of one single-qubit rotation."""

    theta: float
    phi: float
    psi: float

    def __post_init__(self):
        for name in ("theta", "phi", "psi"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"rotation angle {name!r} must be finite")
            object.__setattr__(self, name, value % TWO_PI)


@dataclass(frozen=True)
class Topology:
    """Qubit layout: open chain (n-1 edges) or closed ring (n edges)."""

    kind: Literal["chain", "ring"]
    n: int

    def __post_init__(self):
        if self.kind not in ("chain", "ring"):
            raise ValueError(f"topology kind must be 'chain' or 'ring', got {self.kind!r}")
        if self.n < 2:
            raise ValueError("need at least 2 qubits")
        if self.kind == "ring" and self.n < 3:
            raise ValueError("a ring needs at least 3 qubits")

    @property
    def edge_count(self) -> int:
        return self.n - 1 if self.kind == "chain" else self.n

    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges as 1-based qubit pairs; the ring closes with (n, 1)."""
        pairs = [(j, j + 1) for j in range(1, self.n)]
        if self.kind == "ring":
            pairs.append((self.n, 1))
        return tuple(pairs)

    @property
    def center_edge(self) -> int | None:
        """0-based index of the reflection-invariant chain edge, if any."""
        if self.kind == "chain" and self.edge_count % 2 == 1:
            return self.edge_count // 2
        return None


@dataclass(frozen=True)
class CouplingSchedule:
    """Per-edge coupling angles, listed in the topology's edge order."""

    angles: tuple[float, ...]

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles)
        if not all(math.isfinite(a) for a in angles):
            raise ValueError("coupling angles must be finite")
        object.__setattr__(self, "angles", angles)

    @classmethod
    def uniform(cls, edge_count: int, angle: float = DEFAULT_COUPLING) -> "CouplingSchedule":
        return cls((float(angle),) * edge_count)


@dataclass(frozen=True)
class RotationSchedule:
    """How rotation angles are assigned to qubits and iterations.

    ``qca``: one fresh triple per species per layer (pattern ABAB.. along the
    qubits, qubit 1 is species A).  ``circuit``: one fresh triple per qubit
    per layer.  ``repeat``: one triple per qubit, drawn once, reused by every
    layer including the closing one.  ``homogeneous``: a single triple reused
    for every qubit and layer.
    """

    mode: str
    species_count: int | None = None
    angle_measure: str = "haar"

    def __post_init__(self):
        if self.mode not in ROTATION_MODES:
            raise ValueError(f"rotation mode must be one of {ROTATION_MODES}, got {self.mode!r}")
        if self.mode == SPECIES_MODE:
            if self.species_count not in (1, 2, 3):
                raise ValueError("species_count must be 1, 2, or 3 for the qca mode")
        elif self.species_count is not None:
            raise ValueError(f"species_count only applies to the qca mode, not {self.mode!r}")
        if self.angle_measure not in ("haar", "uniform"):
            raise ValueError(f"angle_measure must be 'haar' or 'uniform', got {self.angle_measure!r}")


@dataclass(frozen=True)
class MapConfig:
    """Complete, seed-included description of one map-family instance."""

    topology: Topology
    rotations: RotationSchedule
    iterations: int
    seed: int
    couplings: CouplingSchedule | None = None

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        couplings = self.couplings
        if couplings is None:
            couplings = CouplingSchedule.uniform(self.topology.edge_count)
            object.__setattr__(self, "couplings", couplings)
        if len(couplings.angles) != self.topology.edge_count:
            raise ValueError(
                f"coupling schedule has {len(couplings.angles)} angles but the "
                f"topology has {self.topology.edge_count} edges"
            )

    @property
    def n(self) -> int:
        return self.topology.n


def config_warnings(config: MapConfig) -> list[str]:
    """Non-fatal issues: legal configs that will not do what one may expect."""
    warnings = []
    center = config.topology.center_edge
    if center is not None and config.rotations.mode in (SPECIES_MODE, HOMOGENEOUS_MODE):
        if config.rotations.mode != SPECIES_MODE or config.rotations.species_count == 1:
            angles = config.couplings.angles
            others = [a for i, a in enumerate(angles) if i != center]
            if others and all(a == others[0] for a in others) and angles[center] != others[0]:
                warnings.append(
                    "only the center coupling differs: the run is legal but the "
                    "reflection symmetry of the chain is not broken"
                )
    return warnings


def species_assignment(n: int, species_count: int) -> tuple[int, ...]:
    """Periodic species ids (0-based) along qubits 1..n; qubit 1 gets species 0."""
    return tuple(q % species_count for q in range(n))


def su2_rotation(angles) -> np.ndarray:
    """2x2 determinant-one rotation built from an angle triple."""
    a = angles if isinstance(angles, RotationAngles) else RotationAngles(*angles)
    ct, st = math.cos(a.theta), math.sin(a.theta)
    ephi, epsi = np.exp(1j * a.phi), np.exp(1j * a.psi)
    return np.array(
        [[ephi * ct, epsi * st], [-np.conj(epsi) * st, np.conj(ephi) * ct]],
        dtype=np.complex128,
    )


def _check_capacity(n: int, max_qubits: int = MAX_QUBITS) -> None:
    if n > max_qubits:
        raise CapacityError(f"dense construction is capped at {max_qubits} qubits, got n={n}")


def _qubit_z(n: int, qubit: int) -> np.ndarray:
    """z values (+1 for bit 0, -1 for bit 1) of 1-based ``qubit`` over all basis states."""
    idx = np.arange(2**n)
    return 1 - 2 * ((idx >> (n - qubit)) & 1)


def coupling_phases(topology: Topology, couplings: CouplingSchedule) -> np.ndarray:
    """Diagonal of the nearest-neighbor coupling unitary, as a length-N vector."""
    if len(couplings.angles) != topology.edge_count:
        raise ValueError(
            f"coupling schedule has {len(couplings.angles)} angles but the "
            f"topology has {topology.edge_count} edges"
        )
    _check_capacity(topology.n)
    n = topology.n
    total = np.zeros(2**n)
    for angle, (j, jp) in zip(couplings.angles, topology.edges()):
        total += angle * (_qubit_z(n, j) * _qubit_z(n, jp))
    return np.exp(1j * total)


def nnc_unitary(topology: Topology, couplings: CouplingSchedule) -> np.ndarray:
    """Dense diagonal coupling unitary; off-diagonal entries are exactly zero."""
    return np.diag(coupling_phases(topology, couplings))


def _apply_single_qubit(tensor: np.ndarray, gate: np.ndarray, axis: int) -> np.ndarray:
    """Apply a 2x2 gate to one qubit axis of a [2]*n (+ trailing axes) tensor."""
    out = np.tensordot(gate, tensor, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def _apply_rotation_layer(tensor: np.ndarray, triples: Sequence[RotationAngles]) -> np.ndarray:
    for axis, angles in enumerate(triples):
        tensor = _apply_single_qubit(tensor, su2_rotation(angles), axis)
    return tensor


def species_rotation_layer(
    n: int,
    assignment: Sequence[int],
    species_angles: Sequence[RotationAngles],
) -> np.ndarray:
    """Tensor product assigning each qubit its species' rotation.

    The per-species rotations act on disjoint qubits, so applying them in
    sequence equals the n-fold tensor product.
    """
    if len(assignment) != n:
        raise ValueError(f"assignment lists {len(assignment)} qubits, expected {n}")
    if any(s < 0 or s >= len(species_angles) for s in assignment):
        raise ValueError("a qubit is assigned a species with no rotation angles")
    _check_capacity(n)
    dim = 2**n
    tensor = np.eye(dim, dtype=np.complex128).reshape([2] * n + [dim])
    tensor = _apply_rotation_layer(tensor, [species_angles[s] for s in assignment])
    return tensor.reshape(dim, dim)


@dataclass(frozen=True)
class RotationPlan:
    """Resolved per-layer, per-qubit angle triples of one map.

    ``layers[i]`` holds layer ``i+1``: the in-loop layers are ``layers[:m]``
    and ``layers[m]`` closes a map of ``m`` iterations.  ``distinct_triples``
    counts the independent draws the schedule consumed.
    """

    layers: tuple[tuple[RotationAngles, ...], ...]
    distinct_triples: int


def rotation_plan(config: MapConfig, layer_count: int | None = None) -> RotationPlan:
    """Draw the rotation schedule of ``config`` (layers 1..m plus the closer)."""
    n = config.n
    mode = config.rotations.mode
    measure = config.rotations.angle_measure
    m = config.iterations if layer_count is None else layer_count
    seed = config.seed

    def draw(layer: int, entity: int) -> RotationAngles:
        gen = rng.angle_stream(seed, layer, entity)
        return RotationAngles(*rng.sample_rotation_angles(gen, measure))

    layers: list[tuple[RotationAngles, ...]] = []
    if mode == SPECIES_MODE:
        k = config.rotations.species_count
        assign = species_assignment(n, k)
        for layer in range(1, m + 2):
            per_species = [draw(layer, s) for s in range(k)]
            layers.append(tuple(per_species[s] for s in assign))
        distinct = (m + 1) * k
    elif mode == PER_QUBIT_MODE:
        for layer in range(1, m + 2):
            layers.append(tuple(draw(layer, q) for q in range(n)))
        distinct = (m + 1) * n
    elif mode == REPEAT_MODE:
        fixed = tuple(draw(0, q) for q in range(n))
        layers = [fixed] * (m + 1)
        distinct = n
    else:  # homogeneous
        triple = draw(0, 0)
        layers = [(triple,) * n] * (m + 1)
        distinct = 1
    return RotationPlan(tuple(layers), distinct)


def map_iteration_snapshots(
    config: MapConfig,
    m_values: Iterable[int],
    *,
    max_qubits: int = MAX_QUBITS,
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(m, U)`` for each requested iteration count, in one pass.

    Each snapshot is the complete map at that ``m`` (closing rotation layer
    included) and is bit-identical to ``build_map`` with ``iterations=m``:
    layer angles are keyed by layer index alone, so shorter maps are prefixes
    of longer ones.
    """
    wanted = sorted(set(int(m) for m in m_values))
    if not wanted:
        raise ValueError("need at least one iteration count")
    if wanted[0] < 0:
        raise ValueError("iteration counts must be >= 0")
    if wanted[-1] > config.iterations:
        raise ValueError(
            f"snapshot at m={wanted[-1]} exceeds the configured {config.iterations} iterations"
        )
    _check_capacity(config.n, max_qubits)

    n = config.n
    dim = 2**n
    plan = rotation_plan(config, layer_count=wanted[-1])
    phases = coupling_phases(config.topology, config.couplings).reshape([2] * n)

    remaining = list(wanted)
    tensor = np.eye(dim, dtype=np.complex128).reshape([2] * n + [dim])
    for m in range(wanted[-1] + 1):
        if remaining and remaining[0] == m:
            remaining.pop(0)
            closed = _apply_rotation_layer(tensor.copy(), plan.layers[m])
            yield m, closed.reshape(dim, dim)
        if m < wanted[-1]:
            tensor = _apply_rotation_layer(tensor, plan.layers[m])
            tensor = tensor * phases[..., None]


def build_map(config: MapConfig, *, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Dense unitary of the configured map; deterministic in the seed."""
    for _, unitary in map_iteration_snapshots(
        config, [config.iterations], max_qubits=max_qubits
    ):
        return unitary
    raise AssertionError("unreachable")


def mirror_permutation(n: int) -> np.ndarray:
    """Permutation matrix reversing qubit order (bit reversal of basis states)."""
    if n < 2:
        raise ValueError("need at least 2 qubits")
    dim = 2**n
    idx = np.arange(dim)
    rev = np.zeros(dim, dtype=np.intp)
    for bit in range(n):
        rev |= ((idx >> bit) & 1) << (n - 1 - bit)
    return np.eye(dim)[rev]


def mirror_block_dims(n: int) -> tuple[int, int]:
    """(symmetric, antisymmetric) eigenspace dimensions of the qubit reversal."""
    dim = 2**n
    palindromes = 2 ** math.ceil(n / 2)
    return (dim + palindromes) // 2, (dim - palindromes) // 2


def mirror_block_fractions(n: int) -> tuple[float, float]:
    """Hilbert-space fractions of the two reversal eigenspaces, smaller first."""
    plus, minus = mirror_block_dims(n)
    dim = 2**n
    return minus / dim, plus / dim


def unitarity_defect(matrix: np.ndarray) -> float:
    """Max absolute element of U U^dag - I."""
    matrix = np.asarray(matrix)
    eye = np.eye(matrix.shape[0])
    return float(np.max(np.abs(matrix @ matrix.conj().T - eye)))


def commutator_maxnorm(a: np.ndarray, b: np.ndarray) -> float:
    """Max absolute element of the commutator [a, b]."""
    return float(np.max(np.abs(a @ b - b @ a)))

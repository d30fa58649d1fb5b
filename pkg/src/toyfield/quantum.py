"""Exact complex state-vector engine for the quantum reference predictions.

Two descriptions are supported.  In the first-quantized description the
system is a single photon with a two-dimensional which-way degree of freedom
spanned by |L> and |R>.  In the second-quantized description the systems are
field modes, each with a two-dimensional occupation space spanned by |0> and
|1>, plus optional ancilla qubits.  Registers are ordered modes first, then
ancillas; basis index bit i is subsystem i's bit (little-endian).

Dimensions never exceed 8, so matrices are dense tuples and the arithmetic
is plain Python complex.  No numerical library is involved: results are
bit-for-bit deterministic across platforms.

The 50-50 splitter acts on the single-excitation block as

    |1>|0>  ->  (|0>|1> - |1>|0>) / sqrt(2)
    |0>|1>  ->  (|0>|1> + |1>|0>) / sqrt(2)

and as the identity on |0>|0> and |1>|1>: a passive element does nothing to
a pair of unoccupied (or doubly occupied) inputs.  This matches the
classical engine's treatment of the same situation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

__all__ = [
    "MeasurementBasis",
    "QuantumGate",
    "StateVector",
    "ANCILLA_P_BASIS",
    "ANCILLA_Q_BASIS",
    "OCCUPATION_BASIS",
    "WHICHWAY_BASIS",
    "apply_gate",
    "bs_unitary",
    "cnot_unitary",
    "measure_subsystem",
    "phase_unitary",
    "reset_to_zero",
    "swap_unitary",
    "translate_1q_to_2q",
]

_TOL = 1e-12
_INV_SQRT2 = 1.0 / math.sqrt(2.0)

Matrix = tuple[tuple[complex, ...], ...]


def _is_unitary(matrix: Matrix) -> bool:
    dim = len(matrix)
    for i in range(dim):
        for j in range(dim):
            acc = 0j
            for k in range(dim):
                acc += matrix[k][i].conjugate() * matrix[k][j]
            want = 1.0 if i == j else 0.0
            if abs(acc - want) > _TOL:
                return False
    return True


@dataclass(frozen=True)
class QuantumGate:
    """A dense unitary together with the number of qubits it acts on."""

    name: str
    matrix: Matrix

    def __post_init__(self) -> None:
        dim = len(self.matrix)
        if dim not in (2, 4) or any(len(row) != dim for row in self.matrix):
            raise ValueError("gate matrix must be 2x2 or 4x4")
        if not _is_unitary(self.matrix):
            raise ValueError(f"gate {self.name!r} is not unitary within 1e-12")

    @property
    def arity(self) -> int:
        return 1 if len(self.matrix) == 2 else 2


@dataclass(frozen=True)
class StateVector:
    """Amplitudes over the computational basis of a qubit register."""

    amps: tuple[complex, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        dim = len(self.amps)
        if dim not in (2, 4, 8):
            raise ValueError("supported dimensions are 2, 4 and 8")
        if self.labels and len(self.labels) != dim:
            raise ValueError("labels must match the dimension")
        if abs(self.norm() - 1.0) > 1e-9:
            raise ValueError("state vector must be normalized")

    @property
    def dim(self) -> int:
        return len(self.amps)

    @property
    def qubits(self) -> int:
        return self.dim.bit_length() - 1

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amps))

    def probability(self, index: int) -> float:
        return abs(self.amps[index]) ** 2

    def canonicalized(self) -> "StateVector":
        """Fix the global phase: first nonzero amplitude real and positive."""
        for a in self.amps:
            if abs(a) > _TOL:
                factor = a.conjugate() / abs(a)
                return StateVector(tuple(x * factor for x in self.amps), self.labels)
        return self


def basis_state(index: int, qubits: int, labels: tuple[str, ...] = ()) -> StateVector:
    amps = [0j] * (1 << qubits)
    amps[index] = 1.0 + 0j
    return StateVector(tuple(amps), labels)


def states_close(a: StateVector, b: StateVector, tol: float = 1e-12) -> bool:
    """Equality up to a global phase."""
    if a.dim != b.dim:
        return False
    overlap = sum(x.conjugate() * y for x, y in zip(a.amps, b.amps))
    return abs(abs(overlap) - 1.0) <= tol


def bs_unitary(description: str = "second") -> QuantumGate:
    """The 50-50 splitter: a Hadamard-like self-inverse map.

    "first": acts on the photon qubit, |L> -> (|R> - |L>)/sqrt(2) and
    |R> -> (|R> + |L>)/sqrt(2), with basis order (|L>, |R>).
    "second": acts on a pair of mode qubits within the single-excitation
    block, identity outside it; basis order (|n_a n_b>) = 00, 10, 01, 11
    with bit 0 = mode a.
    """
    s = _INV_SQRT2
    if description == "first":
        matrix = (
            (-s + 0j, s + 0j),
            (s + 0j, s + 0j),
        )
        return QuantumGate("bs1q", matrix)
    if description == "second":
        # Index = n_a + 2 * n_b. |10> is index 1, |01> is index 2.
        matrix = (
            (1 + 0j, 0j, 0j, 0j),
            (0j, -s + 0j, s + 0j, 0j),
            (0j, s + 0j, s + 0j, 0j),
            (0j, 0j, 0j, 1 + 0j),
        )
        return QuantumGate("bs2q", matrix)
    raise ValueError(f"unknown description {description!r}")


def phase_unitary(phi: float, description: str = "second") -> QuantumGate:
    """Phase shift: |R> (or |1>) picks up e^{i phi}; the other state is fixed.

    Arbitrary angles are accepted here; the classical engine only has
    counterparts for phi in {0, pi}.
    """
    factor = cmath.exp(1j * phi)
    name = "phase1q" if description == "first" else "phase2q"
    if description not in ("first", "second"):
        raise ValueError(f"unknown description {description!r}")
    return QuantumGate(name, ((1 + 0j, 0j), (0j, factor)))


def cnot_unitary(description: str = "second") -> QuantumGate:
    """CNOT with the photon (|R>) or the mode occupation (|1>) as control.

    Basis order (control bit, target bit) with index = control + 2 * target.
    """
    if description not in ("first", "second"):
        raise ValueError(f"unknown description {description!r}")
    name = "cnot1q" if description == "first" else "cnot2q"
    matrix = (
        (1 + 0j, 0j, 0j, 0j),
        (0j, 0j, 0j, 1 + 0j),
        (0j, 0j, 1 + 0j, 0j),
        (0j, 1 + 0j, 0j, 0j),
    )
    return QuantumGate(name, matrix)


def swap_unitary() -> QuantumGate:
    matrix = (
        (1 + 0j, 0j, 0j, 0j),
        (0j, 0j, 1 + 0j, 0j),
        (0j, 1 + 0j, 0j, 0j),
        (0j, 0j, 0j, 1 + 0j),
    )
    return QuantumGate("swap", matrix)


def _apply_one(amps: Sequence[complex], matrix: Matrix, target: int, qubits: int) -> list[complex]:
    out = list(amps)
    bit = 1 << target
    for index in range(1 << qubits):
        if index & bit:
            continue
        a0 = amps[index]
        a1 = amps[index | bit]
        out[index] = matrix[0][0] * a0 + matrix[0][1] * a1
        out[index | bit] = matrix[1][0] * a0 + matrix[1][1] * a1
    return out


def _apply_two(
    amps: Sequence[complex], matrix: Matrix, t0: int, t1: int, qubits: int
) -> list[complex]:
    out = list(amps)
    b0, b1 = 1 << t0, 1 << t1
    for index in range(1 << qubits):
        if index & (b0 | b1):
            continue
        block = (index, index | b0, index | b1, index | b0 | b1)
        old = tuple(amps[i] for i in block)
        for row in range(4):
            out[block[row]] = sum(matrix[row][col] * old[col] for col in range(4))
    return out


def apply_gate(state: StateVector, gate: QuantumGate, targets: Sequence[int]) -> StateVector:
    """Apply the gate to the listed subsystems (bit positions)."""
    if len(targets) != gate.arity:
        raise ValueError(f"gate {gate.name!r} expects {gate.arity} targets")
    if gate.arity == 1:
        amps = _apply_one(state.amps, gate.matrix, targets[0], state.qubits)
    else:
        amps = _apply_two(state.amps, gate.matrix, targets[0], targets[1], state.qubits)
    norm = math.sqrt(sum(abs(a) ** 2 for a in amps))
    if abs(norm - 1.0) > _TOL:
        raise AssertionError(f"norm drifted to {norm} after {gate.name}")
    return StateVector(tuple(amps), state.labels)


@dataclass(frozen=True)
class MeasurementBasis:
    """A labeled orthonormal basis of a single subsystem."""

    labels: tuple[str, str]
    vectors: tuple[tuple[complex, complex], tuple[complex, complex]]

    def __post_init__(self) -> None:
        v0, v1 = self.vectors
        n0 = abs(v0[0]) ** 2 + abs(v0[1]) ** 2
        n1 = abs(v1[0]) ** 2 + abs(v1[1]) ** 2
        overlap = v0[0].conjugate() * v1[0] + v0[1].conjugate() * v1[1]
        if abs(n0 - 1) > _TOL or abs(n1 - 1) > _TOL or abs(overlap) > _TOL:
            raise ValueError("measurement basis must be orthonormal")


OCCUPATION_BASIS = MeasurementBasis(("0", "1"), ((1 + 0j, 0j), (0j, 1 + 0j)))
WHICHWAY_BASIS = MeasurementBasis(("L", "R"), ((1 + 0j, 0j), (0j, 1 + 0j)))
ANCILLA_Q_BASIS = MeasurementBasis(("a0", "a1"), ((1 + 0j, 0j), (0j, 1 + 0j)))
ANCILLA_P_BASIS = MeasurementBasis(
    ("a+", "a-"),
    (
        (_INV_SQRT2 + 0j, _INV_SQRT2 + 0j),
        (_INV_SQRT2 + 0j, -_INV_SQRT2 + 0j),
    ),
)


def measure_subsystem(
    state: StateVector,
    subsystem: int,
    basis: MeasurementBasis = OCCUPATION_BASIS,
    tol: float = _TOL,
) -> list[tuple[int, float, StateVector]]:
    """Projective measurement of one subsystem in a labeled basis.

    Returns (outcome k, Born probability, collapsed state) for outcomes of
    nonzero probability.  The collapsed state is renormalized and its global
    phase canonicalized so collapsed states compare exactly in golden files.
    """
    bit = 1 << subsystem
    outcomes: list[tuple[int, float, StateVector]] = []
    for k, vector in enumerate(basis.vectors):
        projected = list(state.amps)
        for index in range(state.dim):
            if index & bit:
                continue
            a0 = state.amps[index]
            a1 = state.amps[index | bit]
            overlap = vector[0].conjugate() * a0 + vector[1].conjugate() * a1
            projected[index] = overlap * vector[0]
            projected[index | bit] = overlap * vector[1]
        prob = sum(abs(a) ** 2 for a in projected)
        if prob <= tol:
            continue
        scale = 1.0 / math.sqrt(prob)
        collapsed = StateVector(tuple(a * scale for a in projected), state.labels)
        outcomes.append((k, prob, collapsed.canonicalized()))
    return outcomes


def reset_to_zero(state: StateVector, subsystem: int) -> StateVector:
    """Relabel a subsystem known to be in a definite bit state down to |0>.

    Models absorption by a destructive detector: the excitation is removed
    and the mode returns to the vacuum.  Requires the subsystem to be
    disentangled onto one bit value (as it is right after a projective
    occupation measurement).
    """
    bit = 1 << subsystem
    weight_one = sum(abs(a) ** 2 for i, a in enumerate(state.amps) if i & bit)
    if weight_one <= _TOL:
        return state
    if weight_one < 1.0 - _TOL:
        raise ValueError("subsystem is not in a definite state; cannot reset")
    amps = [0j] * state.dim
    for index, a in enumerate(state.amps):
        if index & bit:
            amps[index & ~bit] = a
    return StateVector(tuple(amps), state.labels)


def translate_1q_to_2q(state: StateVector) -> StateVector:
    """Map the photon description onto a pair of modes.

    |L> becomes |1>_L |0>_R and |R> becomes |0>_L |1>_R; extended linearly.
    The result lives in the total-occupation-1 subspace of two mode qubits
    (bit 0 = mode L, bit 1 = mode R).
    """
    if state.dim != 2:
        raise ValueError("translation expects a 2-dimensional state")
    amps = [0j] * 4
    amps[1] = state.amps[0]
    amps[2] = state.amps[1]
    return StateVector(tuple(amps))


def total_occupation_weights(state: StateVector, mode_bits: Sequence[int]) -> dict[int, float]:
    """Probability mass per total occupation over the given mode subsystems."""
    weights: dict[int, float] = {}
    for index, amp in enumerate(state.amps):
        total = sum((index >> b) & 1 for b in mode_bits)
        weights[total] = weights.get(total, 0.0) + abs(amp) ** 2
    return weights

"""Cross-check the hand-rolled state-vector engine against numpy algebra.

The production engine applies small dense matrices with explicit index
arithmetic and branches over measurement outcomes.  Here the same circuits
are evaluated by an independent route: full-register operators built with
Kronecker products, outcome probabilities by projector algebra, no shared
code.  Joint distributions must agree to float precision and, after dyadic
snapping, exactly.
"""

from fractions import Fraction

import numpy as np
import pytest

from toyfield.circuits import compile_quantum, run_quantum_exact
from toyfield.scenarios import (
    bomb_tester,
    mirror_removed,
    mzi_phase,
    mzi_whichway,
    quantum_eraser,
)
from toyfield.toy_measurement import DisturbanceKind

S = 1 / np.sqrt(2)

BS4 = np.array(
    [
        [1, 0, 0, 0],
        [0, -S, S, 0],
        [0, S, S, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)
CNOT4 = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
    ],
    dtype=complex,
)
SWAP4 = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)
I2 = np.eye(2, dtype=complex)


def embed_adjacent(gate4: np.ndarray, low_bit: int, qubits: int) -> np.ndarray:
    """Operator on bits (low_bit, low_bit + 1) of a little-endian register."""
    op = gate4
    for _ in range(low_bit):
        op = np.kron(op, I2)
    for _ in range(qubits - low_bit - 2):
        op = np.kron(I2, op)
    return op


def embed_single(gate2: np.ndarray, bit: int, qubits: int) -> np.ndarray:
    op = gate2
    for _ in range(bit):
        op = np.kron(op, I2)
    for _ in range(qubits - bit - 1):
        op = np.kron(I2, op)
    return op


def projector(bit: int, value: int, qubits: int) -> np.ndarray:
    p = np.zeros((2, 2), dtype=complex)
    p[value, value] = 1
    return embed_single(p, bit, qubits)


def hadamard_projector(bit: int, value: int, qubits: int) -> np.ndarray:
    v = np.array([1, 1 - 2 * value], dtype=complex) / np.sqrt(2)
    return embed_single(np.outer(v, v.conj()), bit, qubits)


def _joint(psi: np.ndarray, measurements) -> dict[tuple, float]:
    """Sequential projector measurements; collapse between steps."""
    results: dict[tuple, float] = {}
    stack = [(psi, 1.0, ())]
    for label, proj_fn in measurements:
        new_stack = []
        for state, weight, record in stack:
            for value in (0, 1):
                projected = proj_fn(value) @ state
                p = float(np.vdot(projected, projected).real)
                if p < 1e-12:
                    continue
                new_stack.append(
                    (projected / np.sqrt(p), weight * p, record + ((label, value),))
                )
        stack = new_stack
    for _, weight, record in stack:
        key = tuple(sorted(record))
        results[key] = results.get(key, 0.0) + weight
    return results


def _compare(scenario, psi, operators, measurements):
    for op in operators:
        psi = op @ psi
    oracle = _joint(psi, measurements)
    mine = run_quantum_exact(compile_quantum(scenario.program))
    converted = {key: Fraction(round(w * 64), 64) for key, w in oracle.items()}
    for key, w in oracle.items():
        assert abs(w - float(converted[key])) < 1e-9
    assert mine == converted, (mine, converted)


class TestAgainstKroneckerOracle:
    def test_mzi_phase(self):
        for s in (0, 1):
            psi = np.zeros(4, dtype=complex)
            psi[1] = 1  # |1>_L |0>_R
            z = embed_single(np.diag([1, (-1) ** s]).astype(complex), 1, 2)
            ops = [BS4, z, BS4]
            measurements = [
                ("detector_L", lambda v: projector(0, v, 2)),
                ("detector_R", lambda v: projector(1, v, 2)),
            ]
            _compare(mzi_phase(s), psi, ops, measurements)

    def test_whichway_nondestructive(self):
        psi = np.zeros(4, dtype=complex)
        psi[1] = 1
        # Measurement happens mid-circuit: fold it into the oracle by
        # branching before the second splitter.
        after_first = BS4 @ psi
        results: dict[tuple, float] = {}
        for ww in (0, 1):
            projected = projector(1, ww, 2) @ after_first
            p = float(np.vdot(projected, projected).real)
            branch = BS4 @ (projected / np.sqrt(p))
            for dl in (0, 1):
                for dr in (0, 1):
                    amp = projector(1, dr, 2) @ projector(0, dl, 2) @ branch
                    q = float(np.vdot(amp, amp).real)
                    if q < 1e-12:
                        continue
                    key = tuple(
                        sorted(
                            (("which_way", ww), ("detector_L", dl), ("detector_R", dr))
                        )
                    )
                    results[key] = results.get(key, 0.0) + p * q
        mine = run_quantum_exact(
            compile_quantum(mzi_whichway(DisturbanceKind.NONDESTRUCTIVE).program)
        )
        assert {k: Fraction(round(w * 64), 64) for k, w in results.items()} == mine

    def test_eraser_both_bases(self):
        for basis, proj_fn in (
            ("Q", lambda v: projector(2, v, 3)),
            ("P", lambda v: hadamard_projector(2, v, 3)),
        ):
            psi = np.zeros(8, dtype=complex)
            psi[1] = 1  # |1>_L |0>_R |a0>
            ops = [
                embed_adjacent(BS4, 0, 3),
                embed_adjacent(CNOT4, 1, 3),
                embed_adjacent(BS4, 0, 3),
            ]
            measurements = [
                ("detector_L", lambda v: projector(0, v, 3)),
                ("detector_R", lambda v: projector(1, v, 3)),
                ("anc", proj_fn),
            ]
            _compare(quantum_eraser(basis), psi, ops, measurements)

    def test_mirror_removed(self):
        psi = np.zeros(8, dtype=complex)
        psi[1] = 1  # |1>_L |0>_R |0>_E
        ops = [
            embed_adjacent(BS4, 0, 3),
            embed_adjacent(SWAP4, 1, 3),
            embed_adjacent(BS4, 0, 3),
        ]
        measurements = [
            ("detector_L", lambda v: projector(0, v, 3)),
            ("detector_R", lambda v: projector(1, v, 3)),
        ]
        _compare(mirror_removed(), psi, ops, measurements)

    def test_bomb_functional(self):
        # Destructive trigger: project on the R occupation mid-circuit, then
        # relabel an absorbed excitation down to the vacuum before going on.
        psi = np.zeros(4, dtype=complex)
        psi[1] = 1
        after_first = BS4 @ psi
        results: dict[tuple, float] = {}
        for trigger in (0, 1):
            projected = projector(1, trigger, 2) @ after_first
            p = float(np.vdot(projected, projected).real)
            state = projected / np.sqrt(p)
            if trigger == 1:
                reset = np.zeros_like(state)
                for idx in range(4):
                    if idx & 2:
                        reset[idx & ~2] += state[idx]
                state = reset
            state = BS4 @ state
            for dl in (0, 1):
                for dr in (0, 1):
                    amp = projector(1, dr, 2) @ projector(0, dl, 2) @ state
                    q = float(np.vdot(amp, amp).real)
                    if q < 1e-12:
                        continue
                    key = tuple(
                        sorted((("trigger", trigger), ("detector_L", dl), ("detector_R", dr)))
                    )
                    results[key] = results.get(key, 0.0) + p * q
        mine = run_quantum_exact(compile_quantum(bomb_tester(True).program))
        assert {k: Fraction(round(w * 64), 64) for k, w in results.items()} == mine

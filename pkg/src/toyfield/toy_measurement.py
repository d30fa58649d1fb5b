"""Measurement semantics: outcome probabilities, update rules, sampling.

A measurement of a register variable proceeds in two steps: condition the
support on the observed value, then disturb the conjugate degree of freedom.
The intermediate (conditioned-only) distribution can violate the knowledge
restriction, so the two steps are exposed only as atomic operations here.

Two disturbance repertoires are supported for occupation measurements.  A
nondestructive detector applies, with equal probability, the identity or the
flip to the measured mode's phase; its occupation is preserved.  A
destructive detector (a brick, an absorbing photodetector) leaves its output
mode unoccupied with a phase sampled uniformly, independent of the input
phase: the disturbance is reset-to-0 or reset-to-1 with equal probability.
Both repertoires average to the same stochastic map (complete phase
randomization), so they are indistinguishable at the distribution level.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Protocol

from toyfield.phase_space import (
    EpistemicState,
    Functional,
    PhysicalState,
    condition,
    occupation,
    coordinate,
    momentum,
    randomize,
)

__all__ = [
    "DisturbanceKind",
    "MeasurementOutcome",
    "measure_ancilla",
    "measure_occupation",
    "outcome_distribution",
    "sample_ancilla_measurement",
    "sample_measurement",
]


class DisturbanceKind(enum.Enum):
    NONDESTRUCTIVE = "nondestructive"
    DESTRUCTIVE = "destructive"


class BitSource(Protocol):
    """Anything that yields fair bits; satisfied by random.Random.getrandbits."""

    def getrandbits(self, k: int) -> int: ...


@dataclass(frozen=True)
class MeasurementOutcome:
    variable: str
    value: int
    probability: Fraction
    posterior: EpistemicState


def outcome_distribution(
    state: EpistemicState, variable: Functional
) -> list[tuple[int, Fraction]]:
    """Probability of each value: the fraction of the support attaining it."""
    total = len(state.support)
    ones = sum(1 for x in state.support if ((x & variable.mask).bit_count() & 1))
    return [(0, Fraction(total - ones, total)), (1, Fraction(ones, total))]


def _reset_mode(state: EpistemicState, mode: int) -> EpistemicState:
    """Replace the mode factor by the unoccupied, uniform-phase state."""
    n_slot = state.shape.occupation_slot(mode)
    phi_bit = 1 << state.shape.phase_slot(mode)
    cleared = frozenset(x & ~((0b11) << n_slot) for x in state.support)
    return EpistemicState(state.shape, cleared | frozenset(x ^ phi_bit for x in cleared))


def measure_occupation(
    state: EpistemicState,
    mode: int,
    kind: DisturbanceKind = DisturbanceKind.NONDESTRUCTIVE,
    include_zero_probability: bool = False,
) -> list[MeasurementOutcome]:
    """Occupation measurement on one mode: condition, then disturb the phase.

    Nondestructive: the posterior keeps the observed occupation and has the
    mode's phase randomized.  Destructive: the posterior has the mode reset
    to the unoccupied uniform-phase state regardless of the outcome.

    Zero-probability outcomes are listed only on request; no update is
    defined for them, so their posterior field carries the unchanged prior.
    """
    variable = occupation(state.shape, mode)
    outcomes = []
    for value, prob in outcome_distribution(state, variable):
        if prob == 0 and not include_zero_probability:
            continue
        if prob == 0:
            outcomes.append(MeasurementOutcome(variable.label, value, prob, state))
            continue
        conditioned = condition(state, variable, value)
        if kind is DisturbanceKind.NONDESTRUCTIVE:
            posterior = randomize(conditioned, state.shape.phase_slot(mode))
        else:
            posterior = _reset_mode(conditioned, mode)
        outcomes.append(MeasurementOutcome(variable.label, value, prob, posterior))
    return outcomes


def measure_ancilla(
    state: EpistemicState,
    ancilla: int,
    basis: str,
    include_zero_probability: bool = False,
) -> list[MeasurementOutcome]:
    """Measure an ancilla's coordinate (basis "Q") or momentum (basis "P").

    Conditioning on the chosen bit is followed by randomization of its
    conjugate.  Q outcomes 0/1 are the a0/a1 labels; P outcomes 0/1 are
    a+/a-.
    """
    if basis == "Q":
        variable = coordinate(state.shape, ancilla)
        conjugate_slot = state.shape.momentum_slot(ancilla)
    elif basis == "P":
        variable = momentum(state.shape, ancilla)
        conjugate_slot = state.shape.coordinate_slot(ancilla)
    else:
        raise ValueError(f"basis must be 'Q' or 'P', got {basis!r}")
    outcomes = []
    for value, prob in outcome_distribution(state, variable):
        if prob == 0 and not include_zero_probability:
            continue
        if prob == 0:
            outcomes.append(MeasurementOutcome(variable.label, value, prob, state))
            continue
        posterior = randomize(condition(state, variable, value), conjugate_slot)
        outcomes.append(MeasurementOutcome(variable.label, value, prob, posterior))
    return outcomes


def sample_measurement(
    state: PhysicalState,
    mode: int,
    kind: DisturbanceKind,
    rng: BitSource,
) -> tuple[int, PhysicalState]:
    """Single-run occupation measurement on a physical state.

    The outcome is the mode's actual occupation bit.  The disturbance
    function is sampled uniformly from {identity, flip} (nondestructive) or
    {reset-to-0, reset-to-1} (destructive); destructive also clears the
    occupation bit.  Only the measured mode's bits can change.
    """
    index = state.index()
    value, new_index = sample_measurement_index(
        index, state.shape, mode, kind, rng.getrandbits(1)
    )
    return value, PhysicalState.from_index(new_index, state.shape)


def sample_measurement_index(
    index: int,
    shape,
    mode: int,
    kind: DisturbanceKind,
    coin: int,
) -> tuple[int, int]:
    """Coin-explicit single-run occupation measurement on a packed state.

    ``coin`` selects the disturbance function: identity/flip for
    nondestructive, reset-to-0/reset-to-1 for destructive.
    """
    n_slot = shape.occupation_slot(mode)
    phi_slot = shape.phase_slot(mode)
    value = (index >> n_slot) & 1
    if kind is DisturbanceKind.NONDESTRUCTIVE:
        index ^= coin << phi_slot
    else:
        index &= ~(1 << n_slot)
        index &= ~(1 << phi_slot)
        index |= coin << phi_slot
    return value, index


def sample_ancilla_measurement(
    state: PhysicalState,
    ancilla: int,
    basis: str,
    rng: BitSource,
) -> tuple[int, PhysicalState]:
    """Single-run ancilla measurement; flips the conjugate bit on a fair coin."""
    index = state.index()
    value, new_index = sample_ancilla_measurement_index(
        index, state.shape, ancilla, basis, rng.getrandbits(1)
    )
    return value, PhysicalState.from_index(new_index, state.shape)


def sample_ancilla_measurement_index(
    index: int,
    shape,
    ancilla: int,
    basis: str,
    coin: int,
) -> tuple[int, int]:
    """Coin-explicit ancilla measurement; the coin decides the conjugate flip."""
    if basis == "Q":
        read_slot = shape.coordinate_slot(ancilla)
        conjugate_slot = shape.momentum_slot(ancilla)
    elif basis == "P":
        read_slot = shape.momentum_slot(ancilla)
        conjugate_slot = shape.coordinate_slot(ancilla)
    else:
        raise ValueError(f"basis must be 'Q' or 'P', got {basis!r}")
    value = (index >> read_slot) & 1
    index ^= coin << conjugate_slot
    return value, index

"""Dual-engine simulator for a classical statistical theory of discrete field modes.

The package pairs an epistemically restricted classical engine (binary
occupation and phase bits per mode, flat distributions over supports) with an
exact complex state-vector reference, and demonstrates that the two produce
identical outcome statistics for the Mach-Zehnder interferometer and its
classic variants: the bomb tester, the delayed-choice experiment, and the
quantum eraser.  A spatially localized cellular-automaton engine and a Monte
Carlo frequency estimator round out the set.
"""

from toyfield.phase_space import (
    AncillaState,
    EpistemicState,
    ModeState,
    PhysicalState,
    RegisterShape,
    make_occupied,
    make_vacuum,
)

__all__ = [
    "AncillaState",
    "EpistemicState",
    "ModeState",
    "PhysicalState",
    "RegisterShape",
    "make_occupied",
    "make_vacuum",
]

__version__ = "0.1.0"

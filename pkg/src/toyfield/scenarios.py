"""Scripted interferometer experiments, runnable on every engine.

Each scenario is a program in the circuit language plus a labeling function
that maps the raw joint measurement record onto a fixed outcome vocabulary
(``detector_L``, ``fired & detector_R``, ``exploded``, ``a+ & detector_L``,
``no_click``, ...).  The vocabulary is stable across engines so exact
distributions can be diffed verbatim.

Scenario catalog:

* ``mzi_phase`` -- interferometer with a phase shifter (0 or pi) in the R
  arm; the lit output port is a deterministic function of the shift.
* ``mzi_whichway`` -- a detector in the R arm (nondestructive or
  destructive); the in-arm record and the ports are each uniform.
* ``bomb_tester`` -- a trigger in the R arm treated as a which-way detector
  whose firing is an explosion; a quarter of runs certify a live trigger
  without setting it off.
* ``delayed_choice`` -- same circuits as the two above with the device
  choice made early or late; the timing flag never changes a distribution.
* ``quantum_eraser`` -- a CNOT copies the R occupation onto an ancilla;
  measuring the ancilla coordinate reveals the path (no interference),
  measuring its momentum reveals the phase kick instead (interference per
  outcome).  The ancilla can be read before or after the ports.
* ``mirror_removed`` -- the R-arm mirror is replaced by a swap with an
  unoccupied environment mode; half the runs leave the interferometer dark.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

from toyfield import circuits
from toyfield.circuits import (
    Program,
    compile_quantum,
    compile_toy,
    joint_to_labeled,
    parse,
)
from toyfield.toy_measurement import DisturbanceKind

__all__ = [
    "OutcomeDistribution",
    "Scenario",
    "all_variants",
    "bomb_tester",
    "delayed_choice",
    "mirror_removed",
    "mzi_phase",
    "mzi_whichway",
    "quantum_eraser",
    "run_scenario",
    "scenario_by_name",
]

ENGINES = ("toy", "quantum", "ca", "montecarlo")


@dataclass(frozen=True)
class OutcomeDistribution:
    """Labeled outcome probabilities; exact engines carry rationals.

    Sampled engines also carry shot counts; ``probs`` then holds empirical
    frequencies as Fractions of the shot count.
    """

    probs: dict[str, Fraction]
    shots: int | None = None
    counts: dict[str, int] | None = None

    def __post_init__(self) -> None:
        total = sum(self.probs.values())
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        if self.counts is not None and sum(self.counts.values()) != self.shots:
            raise ValueError("counts must sum to the shot count")

    def as_floats(self) -> dict[str, float]:
        return {k: float(v) for k, v in sorted(self.probs.items())}


Labeler = Callable[[dict[str, int]], str]


@dataclass(frozen=True)
class Scenario:
    name: str
    params: tuple[tuple[str, str], ...]
    program: Program
    labeler: Labeler

    @property
    def key(self) -> str:
        if not self.params:
            return self.name
        return self.name + "[" + ",".join(f"{k}={v}" for k, v in self.params) + "]"

    def program_text(self) -> str:
        return circuits.render(self.program)


def _port_label(events: dict[str, int]) -> str:
    left = events.get("detector_L", 0)
    right = events.get("detector_R", 0)
    if left and right:
        return "both_ports"
    if left:
        return "detector_L"
    if right:
        return "detector_R"
    return "no_click"


def _mzi_text(device: str) -> str:
    return (
        "mode L R;\n"
        "source L;\n"
        "vacuum R;\n"
        "bs L R;\n"
        f"{device}"
        "bs L R;\n"
        "detect L as detector_L;\n"
        "detect R as detector_R;\n"
    )


def mzi_phase(s: int) -> Scenario:
    """Interferometer with a phase shifter; s = 1 means a pi shift."""
    if s not in (0, 1):
        raise ValueError("phase bit must be 0 or 1")
    program = parse(_mzi_text(f"phase R {'pi' if s else '0'};\n"))
    return Scenario(
        "mzi_phase", (("phase", "pi" if s else "0"),), program, _port_label
    )


def _whichway_labeler(kind: DisturbanceKind) -> Labeler:
    def labeler(events: dict[str, int]) -> str:
        port = _port_label(events)
        if events["which_way"]:
            if kind is DisturbanceKind.DESTRUCTIVE:
                return "absorbed"
            return f"fired & {port}"
        return f"silent & {port}"

    return labeler


def mzi_whichway(kind: DisturbanceKind = DisturbanceKind.NONDESTRUCTIVE) -> Scenario:
    """Interferometer with an occupation detector in the R arm."""
    program = parse(_mzi_text(f"measure N R {kind.value} as which_way;\n"))
    return Scenario(
        "mzi_whichway", (("kind", kind.value),), program, _whichway_labeler(kind)
    )


def bomb_tester(functional: bool) -> Scenario:
    """A trigger-armed device in the R arm, or a dud with no coupling at all.

    A live trigger is exactly an absorbing which-way detector whose firing
    is an explosion.  A dud leaves the plain interferometer, so the photon
    always exits at the L port.
    """
    if functional:
        program = parse(_mzi_text("measure N R destructive as trigger;\n"))

        def labeler(events: dict[str, int]) -> str:
            if events["trigger"]:
                return "exploded"
            return f"safe & {_port_label(events)}"

        return Scenario("bomb_tester", (("bomb", "functional"),), program, labeler)
    program = parse(_mzi_text(""))
    return Scenario("bomb_tester", (("bomb", "faulty"),), program, _port_label)


def delayed_choice(choice: str, timing: str = "after") -> Scenario:
    """Insert a phase shifter or a detector, deciding early or late.

    ``choice`` is "phase0", "phasepi" or "detector".  The timing flag is
    metadata: free propagation commutes with the insertion point, so the
    compiled circuit and every distribution are independent of it.
    """
    if timing not in ("before", "after"):
        raise ValueError("timing must be 'before' or 'after'")
    if choice == "detector":
        base = mzi_whichway(DisturbanceKind.NONDESTRUCTIVE)
    elif choice in ("phase0", "phasepi"):
        base = mzi_phase(0 if choice == "phase0" else 1)
    else:
        raise ValueError(f"unknown choice {choice!r}")
    return Scenario(
        "delayed_choice",
        (("choice", choice), ("timing", timing)),
        base.program,
        base.labeler,
    )


def quantum_eraser(basis: str, ancilla_timing: str = "after") -> Scenario:
    """Which-way marking onto an ancilla, read out in the Q or P basis.

    With ``ancilla_timing`` "before" the ancilla is measured before the
    ports, "after" only after both port detections: the joint distribution
    is the same either way.
    """
    if basis not in ("Q", "P"):
        raise ValueError("basis must be 'Q' or 'P'")
    if ancilla_timing not in ("before", "after"):
        raise ValueError("ancilla_timing must be 'before' or 'after'")
    measure = f"measure {basis} A as anc;\n"
    body = (
        "mode L R;\n"
        "ancilla A;\n"
        "source L;\n"
        "vacuum R;\n"
        "bs L R;\n"
        "cnot R A;\n"
        "bs L R;\n"
    )
    if ancilla_timing == "before":
        text = body + measure + "detect L as detector_L;\ndetect R as detector_R;\n"
    else:
        text = body + "detect L as detector_L;\ndetect R as detector_R;\n" + measure
    program = parse(text)
    names = ("a0", "a1") if basis == "Q" else ("a+", "a-")

    def labeler(events: dict[str, int]) -> str:
        return f"{names[events['anc']]} & {_port_label(events)}"

    return Scenario(
        "quantum_eraser",
        (("basis", basis), ("ancilla_timing", ancilla_timing)),
        program,
        labeler,
    )


def mirror_removed() -> Scenario:
    """The R-arm mirror is gone: the splitter's R input tracks a fresh
    unoccupied mode and the excitation can leave the interferometer."""
    text = (
        "mode L R E;\n"
        "source L;\n"
        "vacuum R;\n"
        "vacuum E;\n"
        "bs L R;\n"
        "swap R E;\n"
        "bs L R;\n"
        "detect L as detector_L;\n"
        "detect R as detector_R;\n"
    )
    return Scenario("mirror_removed", (), parse(text), _port_label)


def scenario_by_name(name: str, **params) -> Scenario:
    if name == "mzi_phase":
        phase = params.get("phase", "0")
        return mzi_phase(1 if phase in (1, "1", "pi") else 0)
    if name == "mzi_whichway":
        return mzi_whichway(DisturbanceKind(params.get("kind", "nondestructive")))
    if name == "bomb_tester":
        return bomb_tester(bool(params.get("functional", True)))
    if name == "delayed_choice":
        return delayed_choice(params.get("choice", "detector"), params.get("timing", "after"))
    if name == "quantum_eraser":
        return quantum_eraser(
            params.get("basis", "P"), params.get("ancilla_timing", "after")
        )
    if name == "mirror_removed":
        return mirror_removed()
    raise KeyError(f"unknown scenario {name!r}")


SCENARIO_NAMES = (
    "mzi_phase",
    "mzi_whichway",
    "bomb_tester",
    "delayed_choice",
    "quantum_eraser",
    "mirror_removed",
)


def all_variants() -> Iterator[Scenario]:
    """Every scenario at every parameter setting; the equivalence sweep."""
    yield mzi_phase(0)
    yield mzi_phase(1)
    yield mzi_whichway(DisturbanceKind.NONDESTRUCTIVE)
    yield mzi_whichway(DisturbanceKind.DESTRUCTIVE)
    yield bomb_tester(functional=True)
    yield bomb_tester(functional=False)
    for choice in ("phase0", "phasepi", "detector"):
        for timing in ("before", "after"):
            yield delayed_choice(choice, timing)
    for basis in ("Q", "P"):
        for timing in ("before", "after"):
            yield quantum_eraser(basis, timing)
    yield mirror_removed()


def run_scenario(
    scenario: Scenario,
    engine: str = "toy",
    shots: int | None = None,
    seed: int | None = None,
) -> OutcomeDistribution:
    """Run a scenario on the chosen engine.

    The exact engines ("toy", "quantum") need no shots; "montecarlo" and
    "ca" require both a shot count and a seed.
    """
    if engine == "toy":
        joint = circuits.run_toy_exact(compile_toy(scenario.program))
        return OutcomeDistribution(joint_to_labeled(joint, scenario.labeler))
    if engine == "quantum":
        joint = circuits.run_quantum_exact(compile_quantum(scenario.program))
        return OutcomeDistribution(joint_to_labeled(joint, scenario.labeler))
    if engine in ("montecarlo", "ca"):
        if shots is None or seed is None:
            raise ValueError(f"engine {engine!r} requires shots and seed")
        if engine == "montecarlo":
            from toyfield.montecarlo import estimate

            report = estimate(
                compile_toy(scenario.program),
                shots,
                seed,
                labeler=scenario.labeler,
                scenario=scenario.key,
            )
            counts = report.counts
        else:
            from toyfield.automaton import run_scenario_ca

            counts = run_scenario_ca(scenario, shots, seed)
        probs = {label: Fraction(c, shots) for label, c in counts.items()}
        return OutcomeDistribution(probs, shots=shots, counts=dict(counts))
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def equivalence_sweep() -> list[tuple[str, OutcomeDistribution, OutcomeDistribution, bool]]:
    """Exact toy vs quantum distribution for every scenario variant."""
    rows = []
    for scenario in all_variants():
        toy = run_scenario(scenario, "toy")
        quantum_dist = run_scenario(scenario, "quantum")
        rows.append((scenario.key, toy, quantum_dist, toy.probs == quantum_dist.probs))
    return rows

"""Spatially localized realization: wires as 1-D cell arrays.

Each interferometer wire is an array of 16 cells; a cell holds one mode's
physical state (an occupation bit and a phase bit).  Free propagation is a
partitioned block rule that alternates pairings between even and odd time
steps: on a transition from even t, cells labeled (2,3), (4,5), ..., (14,15)
swap states and the boundary cells 1 and 16 talk to a source or detector;
on a transition from odd t, cells (1,2), (3,4), ..., (15,16) swap.  An
excitation injected at cell 1 therefore sits at cell j at step j and meets
every device group on an even step.

Devices replace the free rule of their cell group at even steps only:

* splitter across the wires at cells (4,5) and (12,13): the interferometric
  update on the two input cells when exactly one is occupied, plain
  transfer otherwise, identically in both travel directions;
* phase shifter or detector on the R wire at cells (8,9); a nondestructive
  detector passes the occupation and draws both boundary phases fresh, a
  destructive one (a trigger, a brick) leaves both cells as vacuum with
  fresh phases;
* the source at L1 emits the excitation at a chosen even step and vacuum
  with a uniformly sampled phase otherwise; R1 is a vacuum source; cells 16
  are read by the port detectors and resupplied as vacuum.

Every group's next state depends only on the group's own current state, so
the dynamics is local by construction, and each deterministic map is its
own time reverse.  The module offers a readable cell-by-cell stepper (used
for traces and property tests) and a NumPy batch runner that evolves every
shot of a frequency estimate at once.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from toyfield.circuits import (
    Bs,
    CapabilityError,
    Detect,
    MeasureN,
    Phase,
    Program,
    Source,
    Vacuum,
)
from toyfield.phase_space import ModeState
from toyfield.toy_dynamics import beamsplitter_formula
from toyfield.toy_measurement import DisturbanceKind

__all__ = [
    "CaPlan",
    "Cell",
    "CellGrid",
    "RuleBinding",
    "WIRE_LENGTH",
    "check_time_reversal",
    "layout_bindings",
    "new_grid",
    "plan_from_program",
    "run_experiment",
    "run_scenario_ca",
    "step",
    "trace_line",
]

WIRE_LENGTH = 16
_BS_POSITIONS = (4, 12)  # labels of the splitter input cells
_DEVICE_POSITION = 8  # label of the R-arm device input cell


@dataclass(frozen=True)
class Cell:
    """A named cell and its current mode state, e.g. L8."""

    wire: str
    index: int  # 1-based label
    state: ModeState

    @property
    def label(self) -> str:
        return f"{self.wire}{self.index}"


@dataclass(frozen=True)
class RuleBinding:
    """Assignment of an update map to a cell group at one step parity."""

    kind: str  # free_swap | beamsplitter | phase | detector | source | vacuum_source | sink
    cells: tuple[str, ...]
    parity: str = "even"
    parameter: object = None


def layout_bindings(plan: CaPlan) -> tuple[RuleBinding, ...]:
    """The full rule table: every cell sits in exactly one group per parity."""
    bindings: list[RuleBinding] = [
        RuleBinding("source", ("L1",), "even", plan.inject_step),
        RuleBinding("vacuum_source", ("R1",), "even"),
        RuleBinding("sink", ("L16",), "even"),
        RuleBinding("sink", ("R16",), "even"),
    ]
    for position in _BS_POSITIONS:
        cells = (
            f"L{position}",
            f"R{position}",
            f"L{position + 1}",
            f"R{position + 1}",
        )
        bindings.append(RuleBinding("beamsplitter", cells, "even"))
    for i in range(2, WIRE_LENGTH - 1, 2):
        for wire in ("L", "R"):
            if i in _BS_POSITIONS:
                continue
            if wire == "R" and i == _DEVICE_POSITION and plan.device is not None:
                kind = "phase" if plan.device[0] == "phase" else "detector"
                bindings.append(
                    RuleBinding(kind, (f"R{i}", f"R{i + 1}"), "even", plan.device)
                )
                continue
            bindings.append(RuleBinding("free_swap", (f"{wire}{i}", f"{wire}{i + 1}"), "even"))
    for i in range(1, WIRE_LENGTH, 2):
        for wire in ("L", "R"):
            bindings.append(RuleBinding("free_swap", (f"{wire}{i}", f"{wire}{i + 1}"), "odd"))
    return tuple(bindings)


@dataclass(frozen=True)
class CaPlan:
    """A circuit the wire layout can host."""

    device: tuple | None  # None | ("phase", s) | ("detector", DisturbanceKind, label)
    port_labels: dict[str, str]  # wire -> detect label
    inject_step: int = 0

    def arrival_step(self, position: int) -> int:
        """Step at which the excitation reaches the given cell label."""
        return self.inject_step + position

    def validate_schedule(self) -> None:
        if self.inject_step % 2:
            raise CapabilityError("the source fires on even steps only")
        for position in (*_BS_POSITIONS, _DEVICE_POSITION, WIRE_LENGTH):
            if self.arrival_step(position) % 2:
                raise CapabilityError(
                    f"excitation reaches cell {position} on an odd step"
                )


def plan_from_program(program: Program) -> CaPlan:
    """Check a program against the fixed layout and extract its bindings.

    The layout hosts exactly the two-wire interferometer: one sourced mode,
    one vacuum mode, a splitter, at most one R-arm device (phase shifter or
    occupation detector), a second splitter, and a port detector per wire.
    """
    if program.ancillas:
        raise CapabilityError("the wire layout has no ancilla systems")
    if len(program.modes) != 2:
        raise CapabilityError("the wire layout hosts exactly two modes")
    sourced = [s.mode for s in program.statements if isinstance(s, Source)]
    if len(sourced) != 1 or sourced[0] != program.modes[0]:
        raise CapabilityError("the layout sources the first mode only")
    left, right = program.modes

    body = [
        s for s in program.statements if not isinstance(s, (Source, Vacuum))
    ]
    if len(body) < 4:
        raise CapabilityError("expected two splitters and two port detections")
    if body[0] != Bs(left, right):
        raise CapabilityError("the layout starts with a splitter oriented L R")
    rest = body[1:]
    device: tuple | None = None
    if isinstance(rest[0], Phase):
        if rest[0].mode != right:
            raise CapabilityError("the layout's device sits on the R wire")
        device = ("phase", rest[0].s)
        rest = rest[1:]
    elif isinstance(rest[0], MeasureN):
        if rest[0].mode != right:
            raise CapabilityError("the layout's device sits on the R wire")
        device = ("detector", rest[0].kind, rest[0].label)
        rest = rest[1:]
    if not rest or rest[0] != Bs(left, right):
        raise CapabilityError("expected the second splitter oriented L R")
    rest = rest[1:]
    ports: dict[str, str] = {}
    for stmt in rest:
        if not isinstance(stmt, Detect):
            raise CapabilityError(f"statement {stmt!r} is not hosted by the layout")
        wire = "L" if stmt.mode == left else "R"
        if wire in ports:
            raise CapabilityError(f"duplicate port detection on wire {wire}")
        ports[wire] = stmt.label
    if set(ports) != {"L", "R"}:
        raise CapabilityError("both output ports must be detected")
    plan = CaPlan(device, ports)
    plan.validate_schedule()
    return plan


# ---------------------------------------------------------------------------
# Scalar grid and stepper

Pair = tuple[int, int]  # (n, phi)


@dataclass(frozen=True)
class CellGrid:
    """State of both wires at one time step, plus the device firing log."""

    t: int
    wires: dict[str, tuple[Pair, ...]]
    plan: CaPlan
    device_fired: tuple[int, ...] = ()  # steps at which the R-arm detector fired

    def cell(self, wire: str, index: int) -> Cell:
        n, phi = self.wires[wire][index - 1]
        return Cell(wire, index, ModeState(n, phi))

    def occupied_cells(self) -> list[str]:
        return [
            f"{wire}{i + 1}"
            for wire in ("L", "R")
            for i, (n, _) in enumerate(self.wires[wire])
            if n
        ]


def new_grid(plan: CaPlan, rng: random.Random) -> CellGrid:
    """All cells unoccupied with independently sampled phases."""
    wires = {
        wire: tuple((0, rng.getrandbits(1)) for _ in range(WIRE_LENGTH))
        for wire in ("L", "R")
    }
    return CellGrid(0, wires, plan)


def _bs_pair(left: Pair, right: Pair) -> tuple[Pair, Pair]:
    """Splitter transfer across the wires; passive without an excitation."""
    n_l, phi_l = left
    n_r, phi_r = right
    if n_l ^ n_r == 0:
        return left, right
    n_l, phi_l, n_r, phi_r = beamsplitter_formula(n_l, phi_l, n_r, phi_r)
    return (n_l, phi_l), (n_r, phi_r)


def _phase_transfer(cell: Pair, s: int) -> Pair:
    return (cell[0], cell[1] ^ s)


def step(grid: CellGrid, rng: random.Random) -> CellGrid:
    """Advance one transition; the rule used depends on the parity of t."""
    t = grid.t
    old_l = grid.wires["L"]
    old_r = grid.wires["R"]
    fired = grid.device_fired

    if t % 2 == 1:
        # Pairs (1,2), (3,4), ..., (15,16): plain swaps on both wires.
        def odd_swap(cells: tuple[Pair, ...]) -> tuple[Pair, ...]:
            out = list(cells)
            for i in range(0, WIRE_LENGTH, 2):
                out[i], out[i + 1] = cells[i + 1], cells[i]
            return tuple(out)

        wires = {"L": odd_swap(old_l), "R": odd_swap(old_r)}
        return CellGrid(t + 1, wires, grid.plan, fired)

    new_l = list(old_l)
    new_r = list(old_r)

    # Interior pairs (2,3), (4,5), ..., (14,15); 0-based (1,2), (3,4), ...
    gate_positions = {p - 1 for p in _BS_POSITIONS}
    device_position = _DEVICE_POSITION - 1
    for i in range(1, WIRE_LENGTH - 1, 2):
        if i in gate_positions:
            (new_l[i + 1], new_r[i + 1]) = _bs_pair(old_l[i], old_r[i])
            (new_l[i], new_r[i]) = _bs_pair(old_l[i + 1], old_r[i + 1])
            continue
        new_l[i], new_l[i + 1] = old_l[i + 1], old_l[i]
        if i == device_position and grid.plan.device is not None:
            device = grid.plan.device
            if device[0] == "phase":
                new_r[i + 1] = _phase_transfer(old_r[i], device[1])
                new_r[i] = _phase_transfer(old_r[i + 1], device[1])
            else:
                if old_r[i][0]:
                    fired = fired + (t,)
                if device[1] is DisturbanceKind.NONDESTRUCTIVE:
                    new_r[i + 1] = (old_r[i][0], rng.getrandbits(1))
                    new_r[i] = (old_r[i + 1][0], rng.getrandbits(1))
                else:
                    new_r[i + 1] = (0, rng.getrandbits(1))
                    new_r[i] = (0, rng.getrandbits(1))
            continue
        new_r[i], new_r[i + 1] = old_r[i + 1], old_r[i]

    # Boundaries: sources at cell 1, sinks behind the port detectors at 16.
    inject = 1 if t == grid.plan.inject_step else 0
    new_l[0] = (inject, rng.getrandbits(1))
    new_r[0] = (0, rng.getrandbits(1))
    new_l[-1] = (0, rng.getrandbits(1))
    new_r[-1] = (0, rng.getrandbits(1))

    wires = {"L": tuple(new_l), "R": tuple(new_r)}
    return CellGrid(t + 1, wires, grid.plan, fired)


def trace_line(grid: CellGrid) -> str:
    """One debug line: step, occupied cells, phase rows."""
    phases = {
        wire: "".join(str(phi) for _, phi in grid.wires[wire]) for wire in ("L", "R")
    }
    occupied = ",".join(grid.occupied_cells()) or "-"
    return f"t={grid.t:2d} occupied=[{occupied}] phases L={phases['L']} R={phases['R']}"


def run_single(plan: CaPlan, rng: random.Random, trace: list[str] | None = None) -> dict[str, int]:
    """One shot on the scalar stepper; returns the labeled event record."""
    grid = new_grid(plan, rng)
    read_step = plan.arrival_step(WIRE_LENGTH)
    if trace is not None:
        trace.append(trace_line(grid))
    while grid.t < read_step:
        grid = step(grid, rng)
        if trace is not None:
            trace.append(trace_line(grid))
    events: dict[str, int] = {}
    if plan.device is not None and plan.device[0] == "detector":
        events[plan.device[2]] = 1 if grid.device_fired else 0
    events[plan.port_labels["L"]] = grid.wires["L"][-1][0]
    events[plan.port_labels["R"]] = grid.wires["R"][-1][0]
    return events


# ---------------------------------------------------------------------------
# Vectorized batch runner


def _batch_events(plan: CaPlan, shots: int, seed: int) -> dict[str, np.ndarray]:
    """Evolve every shot at once; returns per-shot event bits."""
    rng = np.random.Generator(np.random.PCG64(seed))

    def coins(n: int) -> np.ndarray:
        return rng.integers(0, 2, size=n, dtype=np.uint8)

    n = {w: np.zeros((shots, WIRE_LENGTH), dtype=np.uint8) for w in ("L", "R")}
    p = {
        w: rng.integers(0, 2, size=(shots, WIRE_LENGTH), dtype=np.uint8)
        for w in ("L", "R")
    }
    fired = np.zeros(shots, dtype=np.uint8)

    gate_positions = {pos - 1 for pos in _BS_POSITIONS}
    device_position = _DEVICE_POSITION - 1
    read_step = plan.arrival_step(WIRE_LENGTH)

    for t in range(read_step):
        if t % 2 == 1:
            for w in ("L", "R"):
                n[w] = n[w].reshape(shots, -1, 2)[:, :, ::-1].reshape(shots, WIRE_LENGTH)
                p[w] = p[w].reshape(shots, -1, 2)[:, :, ::-1].reshape(shots, WIRE_LENGTH)
            continue
        new_n = {w: n[w].copy() for w in ("L", "R")}
        new_p = {w: p[w].copy() for w in ("L", "R")}
        for i in range(1, WIRE_LENGTH - 1, 2):
            if i in gate_positions:
                for src, dst in ((i, i + 1), (i + 1, i)):
                    occ = n["L"][:, src] ^ n["R"][:, src]
                    dphi = p["L"][:, src] ^ p["R"][:, src]
                    new_n["L"][:, dst] = np.where(occ, dphi, n["L"][:, src])
                    new_p["L"][:, dst] = np.where(
                        occ, n["L"][:, src] ^ p["R"][:, src], p["L"][:, src]
                    )
                    new_n["R"][:, dst] = np.where(
                        occ, n["L"][:, src] ^ n["R"][:, src] ^ dphi, n["R"][:, src]
                    )
                    new_p["R"][:, dst] = p["R"][:, src]
                continue
            new_n["L"][:, i], new_n["L"][:, i + 1] = n["L"][:, i + 1], n["L"][:, i].copy()
            new_p["L"][:, i], new_p["L"][:, i + 1] = p["L"][:, i + 1], p["L"][:, i].copy()
            if i == device_position and plan.device is not None:
                device = plan.device
                if device[0] == "phase":
                    new_n["R"][:, i + 1] = n["R"][:, i]
                    new_p["R"][:, i + 1] = p["R"][:, i] ^ device[1]
                    new_n["R"][:, i] = n["R"][:, i + 1]
                    new_p["R"][:, i] = p["R"][:, i + 1] ^ device[1]
                else:
                    fired |= n["R"][:, i]
                    keep = device[1] is DisturbanceKind.NONDESTRUCTIVE
                    new_n["R"][:, i + 1] = n["R"][:, i] if keep else 0
                    new_n["R"][:, i] = n["R"][:, i + 1] if keep else 0
                    new_p["R"][:, i + 1] = coins(shots)
                    new_p["R"][:, i] = coins(shots)
                continue
            new_n["R"][:, i], new_n["R"][:, i + 1] = n["R"][:, i + 1], n["R"][:, i].copy()
            new_p["R"][:, i], new_p["R"][:, i + 1] = p["R"][:, i + 1], p["R"][:, i].copy()

        new_n["L"][:, 0] = 1 if t == plan.inject_step else 0
        new_p["L"][:, 0] = coins(shots)
        new_n["R"][:, 0] = 0
        new_p["R"][:, 0] = coins(shots)
        for w in ("L", "R"):
            new_n[w][:, -1] = 0
            new_p[w][:, -1] = coins(shots)
        n, p = new_n, new_p

    events = {
        plan.port_labels["L"]: n["L"][:, -1],
        plan.port_labels["R"]: n["R"][:, -1],
    }
    if plan.device is not None and plan.device[0] == "detector":
        events[plan.device[2]] = fired
    return events


def run_experiment(
    plan: CaPlan,
    shots: int,
    seed: int,
    labeler: Callable[[dict[str, int]], str],
) -> dict[str, int]:
    """Empirical outcome counts over seeded shots of the batch runner."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    events = _batch_events(plan, shots, seed)
    labels = sorted(events)
    columns = [events[k].astype(np.int64) for k in labels]
    code = np.zeros(shots, dtype=np.int64)
    for column in columns:
        code = code * 2 + column
    tallies = np.bincount(code, minlength=1 << len(labels))
    counts: dict[str, int] = {}
    for value, tally in enumerate(tallies):
        if not tally:
            continue
        bits = [(value >> k) & 1 for k in range(len(labels) - 1, -1, -1)]
        record = dict(zip(labels, bits))
        label = labeler(record)
        counts[label] = counts.get(label, 0) + int(tally)
    return counts


def run_scenario_ca(scenario, shots: int, seed: int) -> dict[str, int]:
    """Compile a scenario for the wire layout and count outcomes."""
    plan = plan_from_program(scenario.program)
    return run_experiment(plan, shots, seed, scenario.labeler)


# ---------------------------------------------------------------------------
# Time-reversal checks


@dataclass(frozen=True)
class _TransferRule:
    """A gate's transfer functions in both travel directions."""

    name: str
    states: int  # input-state count for exhaustive checking
    forward: Callable
    backward: Callable


def _rules() -> dict[str, _TransferRule]:
    def free(x):
        return x

    def phase_flip(x: Pair) -> Pair:
        return (x[0], x[1] ^ 1)

    def bs(x: tuple[Pair, Pair]) -> tuple[Pair, Pair]:
        return _bs_pair(*x)

    def broken_forward(x: Pair) -> Pair:
        return (x[0], x[1] ^ 1)

    return {
        "free_swap": _TransferRule("free_swap", 4, free, free),
        "phase": _TransferRule("phase", 4, phase_flip, phase_flip),
        "beamsplitter": _TransferRule("beamsplitter", 16, bs, bs),
        "broken_oneway": _TransferRule("broken_oneway", 4, broken_forward, free),
    }


def _enumerate_states(rule: _TransferRule) -> Iterator:
    if rule.states == 4:
        for value in range(4):
            yield (value & 1, (value >> 1) & 1)
    else:
        for value in range(16):
            yield (
                (value & 1, (value >> 1) & 1),
                ((value >> 2) & 1, (value >> 3) & 1),
            )


def check_time_reversal(kind: str) -> bool:
    """True iff the map's j -> j+1 transfer equals its j+1 -> j transfer.

    Checked exhaustively over the group's state space; the full splitter
    quadruple has 256 joint states, which reduce to the 16 per-direction
    pair states since the two directions never mix.
    """
    rule = _rules()[kind]
    return all(rule.forward(x) == rule.backward(x) for x in _enumerate_states(rule))

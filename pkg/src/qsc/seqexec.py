"""Clocked execution of sequential circuits.

The IR is a flat node list over named transistors, ebit links, loops,
combinational gates, input preparations, measurement signals, refreshes,
and readouts.  Execution is cycle by cycle with a fixed phase order inside
each cycle: refresh (re-injecting looped data), hybrid feeds, combinational
gates, signals, link transfers, readouts.  Byproduct frames are resolved
physically right after each activation, so data handed between transistors
is always frame-free; deferred frames are exercised separately by the
pipeline runner below.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core.errors import QscError, SimulationError, ValidationError
from .core.gates import UnitarySpec, named_gate
from .core.measure import Basis, MeasurementRecord, RngPolicy, Z_BASIS
from .core.pauli import PauliOperator
from .core.state import MAX_QUBITS, StateVector, single_qubit
from .core.workspace import Workspace
from .transistor import (
    ActivationRecipe,
    ChoiStored,
    GateKind,
    MagicT,
    SChain,
    Transistor,
    Wire,
    activate,
    build_transistor,
    conjugate_variant,
    inject_input_by_measurement,
    inject_input_by_teleport,
    inject_magic_T,
    input_recipe,
    refresh,
    resolve_frame,
    take_frame,
    wire_count,
)

__all__ = [
    "ModeRef", "QubitRef", "TransistorDecl", "EbitLink", "Loop",
    "CombinationalGate", "InputPrep", "Signal", "RefreshNode", "Readout",
    "CircuitIR", "Schedule", "ExecutionResult", "execute", "build_schedule",
    "iterate_gate", "ShiftRegisterSpec", "ShiftRegister",
    "QFSMSpec", "QfsmResult", "run_qfsm", "connect_hybrid",
    "PipelinePlan", "CliffordBlock", "TLayer", "plan_pipeline",
    "propagate_pauli", "run_gate_sequence", "PIPELINE_GATES",
]


# -- references ---

@dataclass(frozen=True)
class ModeRef:
    transistor: str
    side: str  # "in" | "out"
    index: int = 0

    def __str__(self):
        return f"{self.transistor}.{self.side}[{self.index}]"


@dataclass(frozen=True)
class QubitRef:
    name: str

    def __str__(self):
        return self.name


Ref = ModeRef | QubitRef


# -- IR nodes ---

@dataclass(frozen=True)
class TransistorDecl:
    name: str
    kind: GateKind


@dataclass(frozen=True)
class EbitLink:
    """Teleport data from a source (out-mode or combinational qubit) to a
    fresh transistor's input mode through an explicit ebit."""

    name: str
    source: Ref
    dest: ModeRef


@dataclass(frozen=True)
class Loop:
    """Self-link: the transistor's output re-enters its own input after a
    refresh.  Operationally unrolled into ebit + Bell measurement."""

    transistor: str


@dataclass(frozen=True)
class CombinationalGate:
    gate: str
    param: float | None
    targets: tuple[Ref, ...]
    cycle: int


@dataclass(frozen=True)
class InputPrep:
    dest: ModeRef
    state: str | StateVector  # '0','1','+','-' or an explicit block
    mode: str = "measure"  # "measure" | "teleport"


@dataclass(frozen=True)
class Signal:
    transistor: str
    cycle: int


@dataclass(frozen=True)
class RefreshNode:
    transistor: str
    cycle: int


@dataclass(frozen=True)
class Readout:
    ref: Ref
    basis: str  # "Z" | "X"
    cycle: int
    name: str = ""


@dataclass
class CircuitIR:
    nodes: list = field(default_factory=list)

    def transistors(self) -> dict[str, TransistorDecl]:
        return {n.name: n for n in self.nodes if isinstance(n, TransistorDecl)}

    def of_type(self, cls) -> list:
        return [n for n in self.nodes if isinstance(n, cls)]

    def cycle_count(self) -> int:
        cycles = [n.cycle for n in self.nodes if hasattr(n, "cycle")]
        return max(cycles, default=0)

    def qubit_budget(self) -> int:
        decls = self.transistors()
        total = 0
        for decl in decls.values():
            kind = decl.kind
            if isinstance(kind, Wire):
                total += kind.length + 2
            elif isinstance(kind, SChain):
                total += 4
            elif isinstance(kind, MagicT):
                total += 3
            else:
                total += 2 * kind.u.arity
        qubits = set()
        for node in self.nodes:
            for ref in _refs_of(node):
                if isinstance(ref, QubitRef):
                    qubits.add(ref.name)
        return total + len(qubits)


def _refs_of(node) -> list[Ref]:
    if isinstance(node, CombinationalGate):
        return list(node.targets)
    if isinstance(node, EbitLink):
        return [node.source, node.dest]
    if isinstance(node, (InputPrep,)):
        return [node.dest]
    if isinstance(node, Readout):
        return [node.ref]
    return []


def validate(ir: CircuitIR):
    decls = ir.transistors()
    names = set()
    for decl in decls.values():
        if decl.name in names:
            raise ValidationError(f"duplicate transistor '{decl.name}'", code="E_DUP")
        names.add(decl.name)

    def check_mode(ref: ModeRef, want_side: str | None = None):
        if ref.transistor not in decls:
            raise ValidationError(f"unknown transistor '{ref.transistor}'", code="E_REF")
        if want_side and ref.side != want_side:
            raise ValidationError(f"{ref} must be an {want_side}-mode", code="E_SIDE")
        wires = wire_count(decls[ref.transistor].kind)
        if not 0 <= ref.index < wires:
            raise ValidationError(f"{ref} outside {wires} wires", code="E_IDX")

    signals: dict[str, list[int]] = {}
    refreshes: dict[str, list[int]] = {}
    for node in ir.nodes:
        if isinstance(node, Signal):
            if node.cycle < 1:
                raise ValidationError("signal cycle must be >= 1", code="E_CYCLE")
            if node.transistor not in decls:
                raise ValidationError(
                    f"signal targets unknown transistor '{node.transistor}'", code="E_REF")
            signals.setdefault(node.transistor, []).append(node.cycle)
        elif isinstance(node, RefreshNode):
            if node.transistor not in decls:
                raise ValidationError(
                    f"refresh targets unknown transistor '{node.transistor}'", code="E_REF")
            refreshes.setdefault(node.transistor, []).append(node.cycle)
        elif isinstance(node, EbitLink):
            if isinstance(node.source, ModeRef):
                check_mode(node.source, "out")
                if isinstance(node.dest, ModeRef) and node.source.transistor == node.dest.transistor:
                    raise ValidationError(
                        "intra-transistor ebit must be declared as a loop", code="E_LOOP")
            check_mode(node.dest, "in")
        elif isinstance(node, Loop):
            if node.transistor not in decls:
                raise ValidationError(
                    f"loop on unknown transistor '{node.transistor}'", code="E_REF")
        elif isinstance(node, InputPrep):
            check_mode(node.dest, "in")
            if node.mode not in ("measure", "teleport"):
                raise ValidationError(f"unknown input mode '{node.mode}'", code="E_MODE")
            if node.mode == "measure" and not isinstance(node.state, str):
                raise ValidationError(
                    "measurement injection prepares only 0/1/+/- states", code="E_PREP")
        elif isinstance(node, CombinationalGate):
            if node.cycle < 1:
                raise ValidationError("gate cycle must be >= 1", code="E_CYCLE")
            for ref in node.targets:
                if isinstance(ref, ModeRef):
                    check_mode(ref, "out")
        elif isinstance(node, Readout):
            if node.cycle < 1:
                raise ValidationError("readout cycle must be >= 1", code="E_CYCLE")
            if isinstance(node.ref, ModeRef):
                check_mode(node.ref, "out")

    for name, cycles in signals.items():
        if len(cycles) != len(set(cycles)):
            raise ValidationError(
                f"transistor '{name}' signaled twice in one cycle", code="E_CLASH")
        ordered = sorted(cycles)
        refr = sorted(refreshes.get(name, []))
        for c1, c2 in zip(ordered, ordered[1:]):
            if not any(c1 < r <= c2 for r in refr):
                raise ValidationError(
                    f"transistor '{name}' signaled at cycles {c1} and {c2} "
                    "without an intervening refresh", code="E_REUSE")

    # combinational gates and readouts on out-modes must come at or after
    # the activation: the dense oracle's dataflow is defined post-signal
    for node in ir.nodes:
        if isinstance(node, CombinationalGate):
            for ref in node.targets:
                if isinstance(ref, ModeRef):
                    sig = signals.get(ref.transistor, [])
                    if not sig or node.cycle < min(sig):
                        raise ValidationError(
                            f"gate touches {ref} before its signal", code="E_ORDER")
        if isinstance(node, Readout) and isinstance(node.ref, ModeRef):
            sig = signals.get(node.ref.transistor, [])
            if not sig or node.cycle < min(sig):
                raise ValidationError(
                    f"readout of {node.ref} before its signal", code="E_ORDER")

    for node in ir.of_type(EbitLink):
        if isinstance(node.source, ModeRef):
            src_cycles = signals.get(node.source.transistor, [])
            if not src_cycles:
                raise ValidationError(
                    f"dangling ebit link '{node.name}': source never signaled",
                    code="E_DANGLE")
            dst_cycles = signals.get(node.dest.transistor, [])
            if dst_cycles and min(dst_cycles) <= min(src_cycles):
                raise ValidationError(
                    f"ebit link '{node.name}' consumes data before it exists",
                    code="E_CAUSAL")

    budget = ir.qubit_budget()
    if budget > MAX_QUBITS:
        raise ValidationError(
            f"qubit budget {budget} exceeds {MAX_QUBITS}", code="E_BUDGET")


# -- schedule ---

@dataclass(frozen=True)
class Schedule:
    """Per-cycle phase-ordered actions derived deterministically from the IR."""

    cycles: tuple[tuple[int, tuple], ...]  # (cycle, nodes in phase order)

    @classmethod
    def phases(cls):
        return ("refresh", "feed", "gate", "signal", "readout")


_PHASE_OF = {
    RefreshNode: 0,
    EbitLink: 1,  # qubit-sourced feeds only; mode-sourced links fire at signals
    CombinationalGate: 2,
    Signal: 3,
    Readout: 4,
}


def build_schedule(ir: CircuitIR) -> Schedule:
    validate(ir)
    signals = {}
    for node in ir.of_type(Signal):
        signals.setdefault(node.transistor, []).append(node.cycle)
    per_cycle: dict[int, list] = {}
    for idx, node in enumerate(ir.nodes):
        cls = type(node)
        if cls not in _PHASE_OF:
            continue
        if isinstance(node, EbitLink):
            if not isinstance(node.source, QubitRef):
                continue  # mode-sourced links fire with their source signal
            cycle = min(signals.get(node.dest.transistor, [ir.cycle_count() or 1]))
        else:
            cycle = node.cycle
        per_cycle.setdefault(cycle, []).append((_PHASE_OF[cls], idx, node))
    ordered = []
    for cycle in sorted(per_cycle):
        nodes = tuple(n for _, _, n in sorted(per_cycle[cycle], key=lambda t: (t[0], t[1])))
        ordered.append((cycle, nodes))
    return Schedule(tuple(ordered))


# -- execution ---

@dataclass
class ReadoutCapture:
    """Pre-measurement snapshot over all staged readout wires, in node order.

    ``state`` is the joint pure state when the readout wires are separable
    from the leftovers (None otherwise); ``density`` is always the reduced
    density matrix, and ``marginals`` maps each readout node to its own
    outcome distribution.
    """

    names: list[str]
    labels: list[int]
    state: StateVector | None
    density: np.ndarray
    distribution: dict[str, float]
    marginals: dict[str, dict[str, float]]


@dataclass
class ExecutionResult:
    records: list[MeasurementRecord]
    readouts: list[MeasurementRecord]
    final_state: StateVector
    frame_log: list[dict]
    capture: ReadoutCapture | None
    action_log: list[dict]


def _transfer_qubit(ws: Workspace, data: int, policy: RngPolicy) -> int:
    """Move a qubit through an explicit ebit; hop byproduct resolved eagerly."""
    e1, e2 = ws.alloc_ebit()
    a, b = ws.bell_measure(data, e1, policy)
    corr = PauliOperator.identity()
    if b:
        corr = PauliOperator.single(e2, "Z").compose(corr)
    if a:
        corr = corr.compose(PauliOperator.single(e2, "X"))
    ws.apply_pauli(corr.inverse())
    return e2


class _Executor:
    def __init__(self, ir: CircuitIR, policy: RngPolicy, corrupt_frames: bool = False):
        self.ir = ir
        self.policy = policy
        self.ws = Workspace()
        self.instances: dict[str, Transistor] = {}
        self.qubits: dict[str, int] = {}
        self.loop_data: dict[str, list[int]] = {}
        self.looped: set[str] = set()
        self.frame_log: list[dict] = []
        self.action_log: list[dict] = []
        self.readout_records: list[MeasurementRecord] = []
        self.staged: list[tuple[Readout, list[int]]] = []
        self.corrupt_frames = corrupt_frames
        self.links_by_source: dict[str, list[EbitLink]] = {}

    def log(self, cycle: int, action: str, **info):
        entry = {"cycle": cycle, "action": action}
        entry.update(info)
        self.action_log.append(entry)

    def qubit_label(self, ref: QubitRef) -> int:
        if ref.name not in self.qubits:
            (label,) = self.ws.alloc(1, "0")
            self.qubits[ref.name] = label
        return self.qubits[ref.name]

    def mode_labels(self, ref: ModeRef) -> list[int]:
        t = self.instances[ref.transistor]
        modes = t.left_modes if ref.side == "in" else t.right_modes
        return [modes[ref.index]]

    def run(self) -> ExecutionResult:
        schedule = build_schedule(self.ir)
        for node in self.ir.of_type(Loop):
            self.looped.add(node.transistor)
        for link in self.ir.of_type(EbitLink):
            if isinstance(link.source, ModeRef):
                self.links_by_source.setdefault(link.source.transistor, []).append(link)
        for decl in self.ir.transistors().values():
            self.instances[decl.name] = build_transistor(decl.kind, self.ws)
            self.log(0, "build", transistor=decl.name, kind=type(decl.kind).__name__)
        for prep in self.ir.of_type(InputPrep):
            self._input_prep(prep)
        for cycle, nodes in schedule.cycles:
            for node in nodes:
                self._dispatch(cycle, node)
        capture = self._capture_and_measure()
        return ExecutionResult(
            records=list(self.ws.measurements),
            readouts=self.readout_records,
            final_state=self.ws.state,
            frame_log=self.frame_log,
            capture=capture,
            action_log=self.action_log,
        )

    def _input_prep(self, prep: InputPrep):
        t = self.instances[prep.dest.transistor]
        wire = prep.dest.index
        if prep.mode == "measure":
            basis, target = input_recipe(t, str(prep.state))
            recs = inject_input_by_measurement(t, basis, self.policy, self.ws, wires=[wire])
            if target == 1:
                # pending tracks the outcome-0 canonical input; shift the
                # reference to the flipped target state
                flip = _prep_flip(t, basis, wire)
                t.pending = t.pending.compose(flip)
            self.log(1, "input", dest=str(prep.dest), mode="measure",
                     outcome=recs[0].outcomes[0], probability=recs[0].probability)
        else:
            block = prep.state if isinstance(prep.state, StateVector) else single_qubit(str(prep.state))
            labels = self.ws.alloc_state(block)
            outcomes = inject_input_by_teleport(t, labels, self.policy, self.ws,
                                                wires=[wire] if block.qubit_count == 1 else None)
            self.log(1, "input", dest=str(prep.dest), mode="teleport",
                     outcomes=[list(o) for o in outcomes])

    def _dispatch(self, cycle: int, node):
        if isinstance(node, RefreshNode):
            self._refresh(cycle, node)
        elif isinstance(node, EbitLink):
            self._feed(cycle, node)
        elif isinstance(node, CombinationalGate):
            self._gate(cycle, node)
        elif isinstance(node, Signal):
            self._signal(cycle, node)
        elif isinstance(node, Readout):
            self._readout(cycle, node)
        else:
            raise SimulationError(f"unschedulable node {node!r}")

    def _refresh(self, cycle: int, node: RefreshNode):
        t = self.instances[node.transistor]
        refresh(t, self.ws)
        self.log(cycle, "refresh", transistor=node.transistor)
        if node.transistor in self.loop_data:
            data = self.loop_data.pop(node.transistor)
            carried = [_transfer_qubit(self.ws, d, self.policy) for d in data]
            outcomes = inject_input_by_teleport(t, carried, self.policy, self.ws)
            self.log(cycle, "loop", transistor=node.transistor,
                     outcomes=[list(o) for o in outcomes])

    def _feed(self, cycle: int, link: EbitLink):
        src = self.qubit_label(link.source)
        carried = _transfer_qubit(self.ws, src, self.policy)
        del self.qubits[link.source.name]
        t = self.instances[link.dest.transistor]
        outcomes = inject_input_by_teleport(t, [carried], self.policy, self.ws,
                                            wires=[link.dest.index])
        self.log(cycle, "feed", link=link.name, dest=str(link.dest),
                 outcomes=[list(o) for o in outcomes])

    def _gate(self, cycle: int, node: CombinationalGate):
        u = named_gate(node.gate, node.param)
        labels = []
        for ref in node.targets:
            if isinstance(ref, QubitRef):
                labels.append(self.qubit_label(ref))
            else:
                labels.extend(self.mode_labels(ref))
        self.ws.apply(u, labels)
        self.log(cycle, "gate", gate=node.gate, targets=[str(r) for r in node.targets])

    def _signal(self, cycle: int, node: Signal):
        t = self.instances[node.transistor]
        outcome = activate(t, self.policy, self.ws)
        frame = take_frame(t)
        self.frame_log.append({
            "cycle": cycle, "transistor": node.transistor,
            "outcome": list(outcome.bits), "frame": str(frame),
        })
        if not self.corrupt_frames:
            self.ws.apply_pauli(frame.inverse())
        self.log(cycle, "signal", transistor=node.transistor, outcome=list(outcome.bits))
        if node.transistor in self.looped:
            self.loop_data[node.transistor] = list(t.right_modes)
        for link in self.links_by_source.get(node.transistor, []):
            src_label = t.right_modes[link.source.index]
            carried = _transfer_qubit(self.ws, src_label, self.policy)
            dest = self.instances[link.dest.transistor]
            outcomes = inject_input_by_teleport(dest, [carried], self.policy, self.ws,
                                                wires=[link.dest.index])
            self.log(cycle, "link", link=link.name, dest=str(link.dest),
                     outcomes=[list(o) for o in outcomes])

    def _readout(self, cycle: int, node: Readout):
        if isinstance(node.ref, QubitRef):
            labels = [self.qubit_label(node.ref)]
        else:
            labels = self.mode_labels(node.ref)
        if node.basis == "X":
            for lab in labels:
                self.ws.apply(named_gate("h"), [lab])
        self.staged.append((node, labels))
        self.log(cycle, "readout_staged", ref=str(node.ref), basis=node.basis)

    def _capture_and_measure(self) -> ReadoutCapture | None:
        """Snapshot every staged readout jointly, then sample the outcomes.

        Staging rotated each wire into its measurement basis at its own
        cycle; the destructive measurements commute past everything that
        follows, so sampling once at the end is observationally identical
        and gives the verifier one joint pre-measurement object.
        """
        if not self.staged:
            return None
        names, labels = [], []
        for node, labs in self.staged:
            names.append(node.name or str(node.ref))
            labels.extend(labs)
        try:
            state = self.ws.extract_state(labels)
        except SimulationError:
            state = None
        density = self.ws.reduced_density(labels)
        distribution = self.ws.distribution(labels)
        marginals = {}
        for node, labs in self.staged:
            name = node.name or str(node.ref)
            marginals[name] = self.ws.distribution(labs)
        capture = ReadoutCapture(names, labels, state, density, distribution, marginals)
        for node, labs in self.staged:
            for lab in labs:
                rec = self.ws.measure(lab, Z_BASIS, self.policy)
                rec = MeasurementRecord((lab,), node.basis, rec.outcomes, rec.probability)
                self.readout_records.append(rec)
        return capture


def _prep_flip(t: Transistor, basis: Basis, wire: int) -> PauliOperator:
    """Pending flip turning the measured complementary branch into the target."""
    from .transistor import _injection_byproduct  # internal reuse

    return _injection_byproduct(t, basis, 1, wire)


def execute(ir: CircuitIR, policy: RngPolicy,
            corrupt_frames: bool = False) -> ExecutionResult:
    """Run a validated IR cycle by cycle.

    ``corrupt_frames`` skips the byproduct corrections after activation; it
    exists as a negative control for the verifier.
    """
    return _Executor(ir, policy, corrupt_frames=corrupt_frames).run()


# -- the reusable-gate loop ---

def iterate_gate(kind: GateKind, input_state: StateVector, k: int,
                 policy: RngPolicy,
                 recipe: ActivationRecipe | None = None) -> StateVector:
    """Apply the stored gate k times through the measure/refresh/ebit loop.

    One round is: inject (Bell measurement), activate (bulk measurement),
    resolve the frame; between rounds the output teleports through a fresh
    ebit back into the rebuilt transistor.
    """
    if k < 0:
        raise QscError("iteration count must be >= 0")
    if k == 0:
        return input_state
    ws = Workspace()
    data = ws.alloc_state(input_state)
    t = build_transistor(kind, ws)
    inject_input_by_teleport(t, data, policy, ws)
    for round_no in range(k):
        activate(t, policy, ws, recipe=recipe)
        resolve_frame(t, ws)
        if round_no + 1 < k:
            saved = list(t.right_modes)
            refresh(t, ws)
            carried = [_transfer_qubit(ws, d, policy) for d in saved]
            inject_input_by_teleport(t, carried, policy, ws)
    return ws.extract_state(t.right_modes)


# -- quantum shift register ---

@dataclass(frozen=True)
class ShiftRegisterSpec:
    stages: int
    stage_kinds: tuple[str, ...] | None = None  # per-stage: identity|h|s

    def __post_init__(self):
        if self.stages < 1:
            raise QscError("shift register needs at least one stage")
        if self.stage_kinds is not None and len(self.stage_kinds) != self.stages:
            raise QscError("one kind per stage required")

    def kind_of(self, stage: int) -> GateKind:
        name = "identity" if self.stage_kinds is None else self.stage_kinds[stage]
        if name in ("identity", "i", "id"):
            return ChoiStored(named_gate("i"))
        if name == "h":
            return Wire(1)
        if name == "s":
            return SChain()
        raise QscError(f"unsupported register stage kind '{name}'")


class ShiftRegister:
    """m data cells advanced by teleportation through per-stage transistors."""

    def __init__(self, spec: ShiftRegisterSpec, ws: Workspace,
                 initial: list[int] | None = None):
        self.spec = spec
        self.ws = ws
        if initial is None:
            self.cells = ws.alloc(spec.stages, "0")
        else:
            if len(initial) != spec.stages:
                raise QscError("one initial cell label per stage required")
            self.cells = list(initial)

    def _through(self, stage: int, datum: int, policy: RngPolicy) -> int:
        t = build_transistor(self.spec.kind_of(stage), self.ws)
        inject_input_by_teleport(t, [datum], policy, self.ws)
        activate(t, policy, self.ws)
        resolve_frame(t, self.ws)
        return t.right_modes[0]

    def shift(self, new_datum: int, policy: RngPolicy) -> int:
        """Advance every cell one stage; returns the evicted last cell."""
        evicted = self.cells[-1]
        for stage in range(self.spec.stages - 1, 0, -1):
            self.cells[stage] = self._through(stage, self.cells[stage - 1], policy)
        self.cells[0] = self._through(0, new_datum, policy)
        return evicted


def shift(register: ShiftRegister, new_datum: int, policy: RngPolicy) -> int:
    return register.shift(new_datum, policy)


# -- quantum finite state machine ---

@dataclass(frozen=True)
class QFSMSpec:
    register_qubits: int
    input_qubits: int
    output_qubits: int
    transition: UnitarySpec
    output_map: UnitarySpec
    style: str = "moore"
    initial: StateVector | None = None

    def __post_init__(self):
        if self.style not in ("moore", "mealy"):
            raise QscError("style must be moore or mealy")
        if self.transition.arity != self.register_qubits + self.input_qubits:
            raise QscError("transition arity must be register + input qubits")
        want = self.register_qubits if self.style == "moore" else \
            self.register_qubits + self.input_qubits
        if self.output_map.arity != want:
            raise QscError(f"output map arity must be {want} for {self.style} style")
        limit = self.register_qubits if self.style == "moore" else self.input_qubits
        if not 1 <= self.output_qubits <= limit:
            raise QscError("output qubits must fit the tapped block")


@dataclass
class QfsmResult:
    outputs: list[MeasurementRecord]
    register_states: list[np.ndarray]  # reduced density per cycle
    ws: Workspace
    register_labels: list[int]


_CX1 = named_gate("cnot")


def run_qfsm(spec: QFSMSpec, inputs: list[StateVector], policy: RngPolicy,
             measure_outputs: bool = True,
             register_transport: str = "keep") -> QfsmResult:
    """Clock the machine over the input blocks.

    Per cycle: load the input block, apply the transition to (register,
    input), emit the output, keep the register for the next cycle.  Moore
    emission rotates the register by the output map, copies the tapped
    qubits onto fresh ancillas (quantum non-demolition readout), and undoes
    the rotation; Mealy emission rotates (register, input) and reads the
    tapped input qubits directly.  ``measure_outputs=False`` skips emission
    entirely, exposing the raw sequentially-generated state whose bond is
    the register.  ``register_transport='teleport'`` moves the register
    through identity transistors between cycles.
    """
    if not inputs:
        raise QscError("qfsm needs at least one input block")
    ws = Workspace()
    reg = ws.alloc_state(spec.initial) if spec.initial is not None \
        else ws.alloc(spec.register_qubits, "0")
    if len(reg) != spec.register_qubits:
        raise QscError("initial register state has the wrong size")
    outputs: list[MeasurementRecord] = []
    register_states: list[np.ndarray] = []
    for block in inputs:
        if block.qubit_count != spec.input_qubits:
            raise QscError("input block arity mismatch")
        inp = ws.alloc_state(block)
        ws.apply(spec.transition, reg + inp)
        if measure_outputs:
            # emission: Moore taps the rotated register through ancilla
            # copies (non-demolition readout); Mealy reads the rotated
            # spent-input block directly
            if spec.style == "moore":
                ws.apply(spec.output_map, reg)
                anc = ws.alloc(spec.output_qubits, "0")
                for i in range(spec.output_qubits):
                    ws.apply(_CX1, [reg[i], anc[i]])
                ws.apply(spec.output_map.dagger(), reg)
                tapped = anc
            else:
                ws.apply(spec.output_map, reg + inp)
                tapped = inp[: spec.output_qubits]
            bits, prob = [], 1.0
            for lab in tapped:
                rec = ws.measure(lab, Z_BASIS, policy)
                bits.append(rec.outcomes[0])
                prob *= rec.probability
            outputs.append(MeasurementRecord(tuple(tapped), "Z", tuple(bits), prob))
        if register_transport == "teleport":
            reg = [_teleport_through_identity(ws, lab, policy) for lab in reg]
        register_states.append(ws.reduced_density(reg))
    return QfsmResult(outputs, register_states, ws, reg)


def _teleport_through_identity(ws: Workspace, label: int, policy: RngPolicy) -> int:
    t = build_transistor(ChoiStored(named_gate("i")), ws)
    inject_input_by_teleport(t, [label], policy, ws)
    activate(t, policy, ws)
    resolve_frame(t, ws)
    return t.right_modes[0]


# -- hybrid wiring ---

def connect_hybrid(ir: CircuitIR, qubit_names: list[str],
                   modes: list[ModeRef]) -> CircuitIR:
    """Wire combinational qubits into transistor inputs via ebit feeds."""
    if len(qubit_names) != len(modes):
        raise QscError("one qubit per input mode required")
    if len(set(qubit_names)) != len(qubit_names):
        raise QscError("feed qubits must be distinct")
    nodes = list(ir.nodes)
    for i, (name, mode) in enumerate(zip(qubit_names, modes)):
        nodes.append(EbitLink(f"feed{i}_{name}", QubitRef(name), mode))
    return CircuitIR(nodes)


# -- Clifford/T pipeline ---

PIPELINE_GATES = ("h", "s", "sdg", "x", "y", "z", "cz", "cx", "cnot", "swap", "t", "tdg")
_CLIFFORD = set(PIPELINE_GATES) - {"t", "tdg"}
_PAULI_NAMES = {"x", "y", "z"}


@dataclass(frozen=True)
class CliffordBlock:
    gates: tuple[tuple[str, tuple[int, ...]], ...]


@dataclass(frozen=True)
class TLayer:
    gates: tuple[tuple[str, tuple[int, ...]], ...]  # t / tdg only


@dataclass(frozen=True)
class PipelinePlan:
    blocks: tuple[CliffordBlock | TLayer, ...]

    def flattened(self) -> list[tuple[str, tuple[int, ...]]]:
        out = []
        for block in self.blocks:
            out.extend(block.gates)
        return out


def plan_pipeline(circuit: list[tuple[str, tuple[int, ...]]]) -> PipelinePlan:
    """Partition into maximal Clifford blocks separated by T layers."""
    blocks: list[CliffordBlock | TLayer] = []
    clifford: list = []
    tlayer: list = []
    t_targets: set[int] = set()

    def flush_clifford():
        nonlocal clifford
        if clifford:
            blocks.append(CliffordBlock(tuple(clifford)))
            clifford = []

    def flush_t():
        nonlocal tlayer, t_targets
        if tlayer:
            blocks.append(TLayer(tuple(tlayer)))
            tlayer, t_targets = [], set()

    for name, targets in circuit:
        key = name.lower()
        if key not in PIPELINE_GATES:
            raise QscError(f"unsupported pipeline gate '{name}'")
        if key in ("t", "tdg"):
            flush_clifford()
            if set(targets) & t_targets:
                flush_t()
            tlayer.append((key, tuple(targets)))
            t_targets.update(targets)
        else:
            flush_t()
            clifford.append((key, tuple(targets)))
    flush_clifford()
    flush_t()
    return PipelinePlan(tuple(blocks))


def propagate_pauli(block: CliffordBlock, p: PauliOperator) -> PauliOperator:
    """Conjugate the byproduct through the block: C p C^dagger, symbolically."""
    out = p
    for name, targets in block.gates:
        out = out.conjugate_gate(name, list(targets))
    return out


def run_gate_sequence(circuit: list[tuple[str, tuple[int, ...]]], n_qubits: int,
                      input_state: StateVector, policy: RngPolicy,
                      mode: str = "eager") -> StateVector:
    """Execute a Clifford(+T) circuit gate by gate through transistors.

    ``eager`` resolves every activation's byproduct immediately; ``deferred``
    carries the net Pauli symbolically through Clifford gates and resolves
    it only before T gates and at the end.
    """
    if mode not in ("eager", "deferred"):
        raise QscError("mode must be eager or deferred")
    if input_state.qubit_count != n_qubits:
        raise QscError("input state arity mismatch")
    ws = Workspace()
    labels = ws.alloc_state(input_state)
    net = PauliOperator.identity()  # physical = net * logical (label-indexed)

    def resolve(targets: list[int]):
        nonlocal net
        sub_bits = {q: net.bits[q] for q in targets if q in net.bits}
        if not sub_bits:
            return
        part = PauliOperator(0, sub_bits)
        ws.apply_pauli(part.inverse())
        rest = {q: xz for q, xz in net.bits.items() if q not in sub_bits}
        net = PauliOperator(net.phase_power, rest)

    for name, targets in circuit:
        key = name.lower()
        if key not in PIPELINE_GATES:
            raise QscError(f"unsupported pipeline gate '{key}'")
        labs = [labels[q] for q in targets]
        if key in _PAULI_NAMES:
            ws.apply(named_gate(key), labs)
            if mode == "deferred":
                net = net.conjugate_gate(key, labs)
            continue
        if key in ("t", "tdg"):
            resolve(labs)
            inject_magic_T(ws, labs[0], policy, dagger=(key == "tdg"))
            continue
        # Clifford via a stored transistor
        if key == "h":
            t = build_transistor(Wire(1), ws)
            recipe = None
        elif key in ("s", "sdg"):
            t = build_transistor(SChain(), ws)
            recipe = conjugate_variant(SChain()) if key == "sdg" else None
        else:
            t = build_transistor(ChoiStored(named_gate(key)), ws)
            recipe = None
        inject_input_by_teleport(t, labs, policy, ws)
        activate(t, policy, ws, recipe=recipe)
        frame = take_frame(t)
        for pos, q in enumerate(targets):
            labels[q] = t.right_modes[pos]
        if mode == "eager":
            ws.apply_pauli(frame.inverse())
        else:
            relabel = {labs[pos]: t.right_modes[pos] for pos in range(len(labs))}
            net = net.remap(relabel).conjugate_gate(key, list(t.right_modes))
            net = frame.compose(net)
    resolve(list(labels))
    return ws.extract_state(labels)

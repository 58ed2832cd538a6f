"""Stored gates with edge modes and a measurable bulk.

A transistor keeps a gate as a resource state: a linear cluster chain
(identity/H wires and the S chain), the Choi state of an arbitrary one- or
two-qubit unitary, or an ebit plus a magic ancilla for T.  Activation
measures the bulk; teleportation byproducts are tracked per logical wire
and either pushed through Clifford stored gates symbolically or compensated
physically when the stored gate is not Clifford.

Wire-basis bookkeeping: bulk site 1 is adjacent to the left mode and sites
are measured left to right.  Measuring site k in the X basis contributes
X^{i_k} H to the induced gate, so the raw chain action factors as
(Pauli byproduct) * H^N; the S chain measures its first site in the
equatorial basis at angle -pi/2, contributing X^{i_1} H S.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .core.errors import QscError, SimulationError
from .core.gates import CZ, H, S, SDG, UnitarySpec
from .core.measure import Basis, MeasurementRecord, RngPolicy, X_BASIS, Z_BASIS, rotated
from .core.pauli import PauliOperator, pauli_from_dense
from .core.state import from_amplitudes
from .core.channels import choi_of_unitary
from .core.workspace import Workspace

S_CHAIN_ANGLE = -math.pi / 2  # site-1 angle that induces S under our projector sign


# -- gate kinds ---

@dataclass(frozen=True)
class Wire:
    """Identity (even length) or H (odd length) cluster chain."""

    length: int

    def __post_init__(self):
        if self.length < 1:
            raise QscError("wire length must be >= 1")


@dataclass(frozen=True)
class SChain:
    """Two-site cluster chain activated in a rotated basis: the S gate."""


@dataclass(frozen=True)
class ChoiStored:
    """An arbitrary gate of arity <= 2 held as its Choi state."""

    u: UnitarySpec

    def __post_init__(self):
        if self.u.arity > 2:
            raise QscError("Choi-stored transistors support arity <= 2")


@dataclass(frozen=True)
class MagicT:
    """Ebit edge pair plus a magic ancilla; activation injects T."""


GateKind = Wire | SChain | ChoiStored | MagicT


def wire_count(kind: GateKind) -> int:
    return kind.u.arity if isinstance(kind, ChoiStored) else 1


def logical_gate(kind: GateKind, reverse: bool = False) -> UnitarySpec:
    """The gate a fresh transistor of this kind induces (before byproducts)."""
    if isinstance(kind, Wire):
        return UnitarySpec(1, H if kind.length % 2 else np.eye(2, dtype=complex))
    if isinstance(kind, SChain):
        return UnitarySpec(1, S)
    if isinstance(kind, MagicT):
        return UnitarySpec(1, np.diag([1, cmath.exp(1j * math.pi / 4)]))
    return kind.u.transpose() if reverse else kind.u


@dataclass(frozen=True)
class WireBasisOutcome:
    bits: tuple[int, ...]


@dataclass
class Transistor:
    kind: GateKind
    left_modes: list[int]
    right_modes: list[int]
    bulk: list[int]
    status: str = "fresh"
    reverse: bool = False
    injected_wires: set[int] = field(default_factory=set)
    pending: PauliOperator = field(default_factory=PauliOperator.identity)
    frame: PauliOperator = field(default_factory=PauliOperator.identity)

    @property
    def wires(self) -> int:
        return len(self.left_modes)

    @property
    def input_injected(self) -> bool:
        return len(self.injected_wires) == self.wires

    def require_fresh(self, action: str):
        if self.status != "fresh":
            raise SimulationError(f"cannot {action}: transistor already consumed")


# -- builders ---

_CZ = UnitarySpec(2, CZ)
_MAGIC = from_amplitudes([1.0, cmath.exp(1j * math.pi / 4)])


def build_chain_transistor(kind: Wire | SChain, ws: Workspace) -> Transistor:
    """Linear cluster L - 1 - ... - N - R of |+> qubits with CZ edges."""
    n_bulk = kind.length if isinstance(kind, Wire) else 2
    labels = ws.alloc(n_bulk + 2, "+")
    for a, b in zip(labels, labels[1:]):
        ws.apply(_CZ, [a, b])
    return Transistor(kind, [labels[0]], [labels[-1]], labels[1:-1])


def build_choi_transistor(u: UnitarySpec, ws: Workspace) -> Transistor:
    kind = ChoiStored(u)
    labels = ws.alloc_state(choi_of_unitary(u).state)
    k = u.arity
    return Transistor(kind, labels[:k], labels[k:], [])


def build_magic_t_transistor(ws: Workspace) -> Transistor:
    left, right = ws.alloc_ebit()
    (anc,) = ws.alloc_state(_MAGIC)
    return Transistor(MagicT(), [left], [right], [anc])


def build_transistor(kind: GateKind, ws: Workspace) -> Transistor:
    if isinstance(kind, (Wire, SChain)):
        return build_chain_transistor(kind, ws)
    if isinstance(kind, ChoiStored):
        return build_choi_transistor(kind.u, ws)
    if isinstance(kind, MagicT):
        return build_magic_t_transistor(ws)
    raise QscError(f"unknown gate kind {kind!r}")


# -- input injection ---

def _chain_like(t: Transistor) -> bool:
    return isinstance(t.kind, (Wire, SChain))


def input_recipe(t: Transistor, target: str) -> tuple[Basis, int]:
    """Measurement basis and outcome that make the logical input ``target``.

    A measured chain end injects H * conj(basis ket); a measured Choi input
    leg injects conj(basis ket).  The non-target outcome differs by a Pauli
    that lands in the pending byproduct, so either outcome prepares the
    requested state up to frame.
    """
    chain = _chain_like(t)
    table_chain = {"0": (X_BASIS, 0), "1": (X_BASIS, 1), "+": (Z_BASIS, 0), "-": (Z_BASIS, 1)}
    table_choi = {"0": (Z_BASIS, 0), "1": (Z_BASIS, 1), "+": (X_BASIS, 0), "-": (X_BASIS, 1)}
    table = table_chain if chain else table_choi
    if target not in table:
        raise QscError(f"unknown input target {target!r}")
    return table[target]


def _injection_byproduct(t: Transistor, basis: Basis, outcome: int, wire: int) -> PauliOperator:
    """Pending Pauli on the bond for a left-mode measurement outcome.

    Relative to the outcome-0 logical input: chain ends flip by X under Z
    measurement is not possible -- the chain maps basis kets through an H,
    so a Z-basis flip becomes a Z byproduct and an X/rotated flip becomes X;
    Choi legs inject the conjugated ket directly, giving the transposed map.
    """
    if outcome == 0:
        return PauliOperator.identity()
    if _chain_like(t):
        name = "Z" if basis.name == "Z" else "X"
    else:
        name = "X" if basis.name == "Z" else "Z"
    return PauliOperator.single(wire, name)


def inject_input_by_measurement(t: Transistor, basis: Basis, policy: RngPolicy,
                                ws: Workspace,
                                wires: list[int] | None = None) -> list[MeasurementRecord]:
    """Measure the left modes to prepare the logical input."""
    t.require_fresh("inject input")
    wires = list(range(t.wires)) if wires is None else wires
    records = []
    for wire in wires:
        if wire in t.injected_wires:
            raise SimulationError(f"input already injected on wire {wire}")
        rec = ws.measure(t.left_modes[wire], basis, policy)
        records.append(rec)
        t.pending = _injection_byproduct(t, basis, rec.outcomes[0], wire).compose(t.pending)
        t.injected_wires.add(wire)
    return records


_H1 = UnitarySpec(1, H)


def inject_input_by_teleport(t: Transistor, data_labels: list[int], policy: RngPolicy,
                             ws: Workspace,
                             wires: list[int] | None = None) -> list[tuple[int, int]]:
    """Bell-measure each data qubit with the matching left mode.

    Outcome (a, b) leaves Z^b X^a |psi> on the bond of that wire; the Pauli
    is recorded in the pending byproduct and handled at activation.  A
    chain-end left mode sits one teleport step away from the bond, so for
    chain kinds the Bell measurement is taken in the H-twisted basis (H on
    the left mode first); that local rotation puts the data on the bond
    exactly.
    """
    t.require_fresh("inject input")
    wires = list(range(t.wires)) if wires is None else wires
    if len(data_labels) != len(wires):
        raise QscError(
            f"{len(data_labels)} data qubits for {len(wires)} left modes"
        )
    outcomes = []
    for wire, data in zip(wires, data_labels):
        if wire in t.injected_wires:
            raise SimulationError(f"input already injected on wire {wire}")
        left = t.left_modes[wire]
        if _chain_like(t):
            ws.apply(_H1, [left])
        a, b = ws.bell_measure(data, left, policy)
        outcomes.append((a, b))
        pauli = PauliOperator.single(wire, "Z") if b else PauliOperator.identity()
        if a:
            pauli = pauli.compose(PauliOperator.single(wire, "X"))
        t.pending = pauli.compose(t.pending)
        t.injected_wires.add(wire)
    return outcomes


# -- activation ---

@dataclass(frozen=True)
class ActivationRecipe:
    """How to activate: the plain gate or its conjugate variant.

    For the S chain the conjugate appends a Pauli Z to the frame (Z S = S+);
    for magic T it swaps the classical feedforward (correct on outcome 0
    with S+ instead of outcome 1 with S).
    """

    dagger: bool = False


def conjugate_variant(kind: GateKind) -> ActivationRecipe:
    if isinstance(kind, (SChain, MagicT)):
        return ActivationRecipe(dagger=True)
    raise QscError("conjugate variants exist only for the S chain and magic T")


def _push_through_unitary(u: UnitarySpec, p: PauliOperator,
                          wires: list[int]) -> PauliOperator | None:
    """U p U^dagger as a Pauli when U is Clifford, else None."""
    if p.is_identity():
        return PauliOperator.identity()
    mat = u.matrix @ p.dense(wires) @ u.matrix.conj().T
    return pauli_from_dense(mat, wires)


def activate(t: Transistor, policy: RngPolicy, ws: Workspace,
             recipe: ActivationRecipe | None = None) -> WireBasisOutcome:
    """Measure the bulk left to right, consuming the transistor.

    Afterwards ``t.frame`` holds the net Pauli byproduct on the right modes
    (wire-indexed): resolving it recovers the stored gate's action on the
    injected input.
    """
    if t.status == "consumed":
        raise SimulationError("double activation without refresh")
    if not t.input_injected:
        raise SimulationError("activate requires an injected input")
    recipe = recipe or ActivationRecipe()
    if recipe.dagger and not isinstance(t.kind, (SChain, MagicT)):
        raise QscError("conjugate recipe applies only to the S chain and magic T")
    kind = t.kind
    bits: list[int] = []
    if isinstance(kind, Wire):
        byproduct = PauliOperator.identity()
        for label in t.bulk:
            rec = ws.measure(label, X_BASIS, policy)
            bits.append(rec.outcomes[0])
            byproduct = _wire_step(byproduct, bits[-1])
        carried = t.pending
        for _ in range(kind.length % 2):
            carried = carried.conjugate_h(0)
        t.frame = byproduct.compose(carried)
    elif isinstance(kind, SChain):
        site1, site2 = t.bulk
        rec1 = ws.measure(site1, rotated(S_CHAIN_ANGLE), policy)
        rec2 = ws.measure(site2, X_BASIS, policy)
        bits = [rec1.outcomes[0], rec2.outcomes[0]]
        byproduct = _wire_step(PauliOperator.identity(), bits[0])
        byproduct = _wire_step(byproduct, bits[1])
        t.frame = byproduct.compose(t.pending.conjugate_s(0))
        if recipe.dagger:
            # raw action is (byproduct) S P; S = Z S+ puts a Z in the frame
            t.frame = t.frame.compose(PauliOperator.single(0, "Z"))
    elif isinstance(kind, ChoiStored):
        u = logical_gate(kind, t.reverse)
        wires = list(range(t.wires))
        pushed = _push_through_unitary(u, t.pending, wires)
        if pushed is None:
            # non-Clifford stored gate: compensate physically, frame stays trivial
            comp = u.matrix @ t.pending.inverse().dense(wires) @ u.matrix.conj().T
            ws.apply(UnitarySpec(t.wires, comp), list(t.right_modes))
            t.frame = PauliOperator.identity()
        else:
            t.frame = pushed
    elif isinstance(kind, MagicT):
        ws.apply_pauli(t.pending.inverse().remap({0: t.right_modes[0]}))
        t.pending = PauliOperator.identity()
        recs = inject_magic_T(ws, t.right_modes[0], policy, dagger=recipe.dagger,
                              ancilla=t.bulk[0])
        bits = [recs[0].outcomes[0]]
        t.frame = PauliOperator.identity()
    else:
        raise QscError(f"unknown gate kind {kind!r}")
    t.status = "consumed"
    return WireBasisOutcome(tuple(bits))


def _wire_step(byproduct: PauliOperator, bit: int) -> PauliOperator:
    """Absorb one X-basis chain site: new = X^bit * (H old H)."""
    out = byproduct.conjugate_h(0)
    if bit:
        out = PauliOperator.single(0, "X").compose(out)
    return out


def induced_gate(outcome: WireBasisOutcome, kind: GateKind) -> tuple[UnitarySpec, PauliOperator]:
    """Factor the raw measurement-induced chain gate as byproduct * normal form.

    Classical computation only; wire chains of length N give (H if N odd
    else I) and the alternating X/Z byproduct, the S chain gives S.
    """
    if isinstance(kind, Wire):
        if len(outcome.bits) != kind.length:
            raise QscError("outcome length does not match bulk length")
        byproduct = PauliOperator.identity()
        for bit in outcome.bits:
            byproduct = _wire_step(byproduct, bit)
        return logical_gate(kind), byproduct
    if isinstance(kind, SChain):
        i1, i2 = outcome.bits
        byproduct = _wire_step(_wire_step(PauliOperator.identity(), i1), i2)
        return logical_gate(kind), byproduct
    if isinstance(kind, (ChoiStored, MagicT)):
        return logical_gate(kind), PauliOperator.identity()
    raise QscError(f"unknown gate kind {kind!r}")


# -- magic-state injection ---

_CX_LOW_CONTROL = UnitarySpec(2, np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex))
_S1 = UnitarySpec(1, S)
_SDG1 = UnitarySpec(1, SDG)


def inject_magic_T(ws: Workspace, target: int, policy: RngPolicy,
                   dagger: bool = False, ancilla: int | None = None) -> list[MeasurementRecord]:
    """Consume a magic ancilla to apply T (or T+) to ``target``.

    The ancilla (|0> + e^{i pi/4}|1>)/sqrt(2) is entangled by a CNOT from
    the target and measured in Z; outcome 1 leaves T+|psi> which the S
    feedforward corrects.  The conjugate variant swaps the feedforward.
    """
    if ancilla is None:
        (ancilla,) = ws.alloc_state(_MAGIC)
    ws.apply(_CX_LOW_CONTROL, [target, ancilla])
    rec = ws.measure(ancilla, Z_BASIS, policy)
    m = rec.outcomes[0]
    if not dagger and m == 1:
        ws.apply(_S1, [target])
    if dagger and m == 0:
        ws.apply(_SDG1, [target])
    return [rec]


# -- lifecycle ---

def run_backward(t: Transistor) -> Transistor:
    """Exchange input and output roles; activation now induces the transpose."""
    t.require_fresh("run backward")
    if t.injected_wires:
        raise SimulationError("cannot reverse after input injection")
    return Transistor(
        kind=t.kind,
        left_modes=list(t.right_modes),
        right_modes=list(t.left_modes),
        bulk=list(reversed(t.bulk)),
        reverse=not t.reverse,
    )


def refresh(t: Transistor, ws: Workspace) -> Transistor:
    """Rebuild a consumed transistor's resource state; frame resets."""
    if t.status == "fresh":
        raise SimulationError("refreshing a fresh transistor (scheduling bug)")
    rebuilt = build_transistor(t.kind, ws)
    if t.reverse:
        rebuilt = run_backward(rebuilt)
    t.left_modes = rebuilt.left_modes
    t.right_modes = rebuilt.right_modes
    t.bulk = rebuilt.bulk
    t.status = "fresh"
    t.injected_wires = set()
    t.pending = PauliOperator.identity()
    t.frame = PauliOperator.identity()
    return t


def take_frame(t: Transistor) -> PauliOperator:
    """Frame as a label-indexed Pauli on the right modes; clears the record."""
    frame = t.frame.remap({w: lab for w, lab in enumerate(t.right_modes)})
    t.frame = PauliOperator.identity()
    return frame


def resolve_frame(t: Transistor, ws: Workspace):
    """Apply the accumulated byproduct correction physically."""
    ws.apply_pauli(take_frame(t).inverse())

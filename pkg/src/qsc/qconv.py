"""Streaming (n, k, m) convolutional encoder.

Per clock cycle the cycle map takes the k fresh input qubits, the m*k
memory qubits, and n-k ancillas in |0>, and produces n emitted qubits plus
the m*k memory carried to the next cycle.  Leg positions are a fixed
convention shared with the unrolled oracle: on entry the targets are
[inputs, memory, ancillas]; on exit positions 0..n-1 are emitted and the
rest are memory.  Emitted qubits stay in the global state so end-to-end
fidelity checks are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core.errors import QscError, SimulationError
from .core.gates import UnitarySpec, embed, named_gate
from .core.measure import RngPolicy
from .core.pauli import PauliOperator
from .core.state import MAX_QUBITS, StateVector, append_state, zero_state
from .core.workspace import Workspace

__all__ = ["ConvCodeSpec", "EncodeTrace", "encode_stream", "unroll",
           "apply_unrolled", "memory_loop_variant"]


@dataclass(frozen=True)
class ConvCodeSpec:
    n: int
    k: int
    m: int
    cycle_unitary: UnitarySpec
    cycle_gates: tuple[tuple[str, tuple[int, ...], float | None], ...] | None = None

    def __post_init__(self):
        if not (self.n >= self.k >= 1) or self.m < 0:
            raise QscError("need n >= k >= 1 and m >= 0")
        if self.cycle_unitary.arity != self.wires:
            raise QscError(
                f"cycle unitary must act on {self.wires} qubits "
                f"(k inputs + m*k memory + n-k ancillas)")

    @property
    def memory_qubits(self) -> int:
        return self.m * self.k

    @property
    def wires(self) -> int:
        return self.n + self.memory_qubits

    @classmethod
    def from_gates(cls, n: int, k: int, m: int,
                   gates: list[tuple[str, tuple[int, ...], float | None]]) -> "ConvCodeSpec":
        wires = n + m * k
        mat = np.eye(1 << wires, dtype=complex)
        for name, targets, param in gates:
            u = named_gate(name, param)
            mat = embed(u, list(targets), wires) @ mat
        return cls(n, k, m, UnitarySpec(wires, mat), tuple(gates))


@dataclass
class EncodeTrace:
    emitted: list[list[int]] = field(default_factory=list)  # labels per cycle
    memory: list[int] = field(default_factory=list)
    cycles: int = 0

    def check_disjoint(self):
        seen: set[int] = set()
        for block in self.emitted:
            if seen & set(block):
                raise SimulationError("emitted blocks overlap across cycles")
            seen.update(block)


def _budget_check(spec: ConvCodeSpec, cycles: int):
    total = cycles * spec.n + spec.memory_qubits
    if total > MAX_QUBITS:
        raise SimulationError(
            f"encoding needs {total} qubits, exceeding {MAX_QUBITS}")


def _run_cycles(spec: ConvCodeSpec, input_state: StateVector, cycles: int,
                hop=None) -> tuple[Workspace, EncodeTrace]:
    if cycles < 1:
        raise QscError("need at least one cycle")
    if input_state.qubit_count != cycles * spec.k:
        raise QscError(
            f"input must cover {cycles * spec.k} qubits ({spec.k} per cycle)")
    _budget_check(spec, cycles)
    ws = Workspace()
    inputs = ws.alloc_state(input_state)
    memory = ws.alloc(spec.memory_qubits, "0")
    trace = EncodeTrace(cycles=cycles)
    for c in range(cycles):
        block = inputs[c * spec.k:(c + 1) * spec.k]
        ancillas = ws.alloc(spec.n - spec.k, "0")
        targets = block + memory + ancillas
        ws.apply(spec.cycle_unitary, targets)
        trace.emitted.append(targets[: spec.n])
        memory = targets[spec.n:]
        if hop is not None and c + 1 < cycles:
            memory = [hop(ws, lab) for lab in memory]
    trace.memory = memory
    trace.check_disjoint()
    return ws, trace


def _extract(ws: Workspace, trace: EncodeTrace) -> StateVector:
    order = [lab for block in trace.emitted for lab in block] + trace.memory
    return ws.extract_state(order)


def encode_stream(spec: ConvCodeSpec, input_state: StateVector, cycles: int,
                  policy: RngPolicy) -> tuple[StateVector, EncodeTrace]:
    """Stream the input through the encoder; memory qubits persist in place.

    The returned state orders qubits as (emitted cycle 1, ..., emitted
    cycle C, final memory).
    """
    ws, trace = _run_cycles(spec, input_state, cycles)
    return _extract(ws, trace), trace


def memory_loop_variant(spec: ConvCodeSpec, input_state: StateVector, cycles: int,
                        policy: RngPolicy) -> StateVector:
    """Carry the memory between cycles through explicit ebit loops.

    Each boundary Bell-measures the memory qubit against half of a fresh
    ebit and corrects the byproduct on the surviving half, so every forced
    branch agrees with the persistent-memory encoder.
    """
    def hop(ws: Workspace, label: int) -> int:
        e1, e2 = ws.alloc_ebit()
        a, b = ws.bell_measure(label, e1, policy)
        corr = PauliOperator.identity()
        if b:
            corr = PauliOperator.single(e2, "Z").compose(corr)
        if a:
            corr = corr.compose(PauliOperator.single(e2, "X"))
        ws.apply_pauli(corr.inverse())
        return e2

    ws, trace = _run_cycles(spec, input_state, cycles, hop=hop)
    return _extract(ws, trace)


def unroll(spec: ConvCodeSpec, cycles: int) -> list[tuple[UnitarySpec, list[int]]]:
    """Monolithic combinational layout of the streamed encoder.

    Wire plan: inputs for cycle c at [c*k, (c+1)*k), initial memory after
    all inputs, then one ancilla block per cycle.  Returns per-cycle gate
    applications; memory wires are re-routed cycle to cycle exactly as the
    streaming encoder re-labels them.
    """
    if cycles < 1:
        raise QscError("need at least one cycle")
    _budget_check(spec, cycles)
    k, n, mk = spec.k, spec.n, spec.memory_qubits
    mem = list(range(cycles * k, cycles * k + mk))
    anc_base = cycles * k + mk
    gates: list[tuple[UnitarySpec, list[int]]] = []
    for c in range(cycles):
        block = list(range(c * k, (c + 1) * k))
        anc = list(range(anc_base + c * (n - k), anc_base + (c + 1) * (n - k)))
        targets = block + mem + anc
        if spec.cycle_gates is not None:
            for name, local, param in spec.cycle_gates:
                gates.append((named_gate(name, param), [targets[i] for i in local]))
        else:
            gates.append((spec.cycle_unitary, targets))
        mem = targets[n:]
    return gates


def apply_unrolled(spec: ConvCodeSpec, input_state: StateVector,
                   cycles: int) -> StateVector:
    """Dense oracle: run the unrolled circuit and reorder to match
    encode_stream's (emitted..., memory) layout."""
    from .core.state import apply_gate, permute_qubits

    k, n, mk = spec.k, spec.n, spec.memory_qubits
    total = cycles * n + mk
    state = input_state
    state = append_state(state, zero_state(mk + cycles * (n - k)))
    gates = unroll(spec, cycles)
    for u, targets in gates:
        state = apply_gate(state, u, targets)
    # reconstruct the emitted/memory wire order the streaming pass produces
    mem = list(range(cycles * k, cycles * k + mk))
    anc_base = cycles * k + mk
    order: list[int] = []
    for c in range(cycles):
        block = list(range(c * k, (c + 1) * k))
        anc = list(range(anc_base + c * (n - k), anc_base + (c + 1) * (n - k)))
        targets = block + mem + anc
        order.extend(targets[:n])
        mem = targets[n:]
    order.extend(mem)
    return permute_qubits(state, order)

"""Dense combinational equivalent of a sequential IR.

Every stored gate collapses to its logical unitary, links and loops become
wire renames, and inputs become their prepared states: the space-time
converse of the clocked execution.  The result is the same joint
pre-measurement readout object the executor captures, computed without any
transistor, teleportation, or measurement machinery, so the two paths
verify each other.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core.errors import SimulationError
from .core.gates import UnitarySpec, named_gate
from .core.state import StateVector, append_state, single_qubit, zero_state
from .core.state import apply_gate, permute_qubits, from_amplitudes
from .seqexec import (
    CircuitIR,
    CombinationalGate,
    EbitLink,
    InputPrep,
    Loop,
    ModeRef,
    QubitRef,
    Readout,
    RefreshNode,
    Signal,
    build_schedule,
)
from .transistor import logical_gate, wire_count


@dataclass
class OracleResult:
    names: list[str]
    state: StateVector | None
    density: np.ndarray
    distribution: dict[str, float]
    marginals: dict[str, dict[str, float]]


class _WireSim:
    """Dense state over named logical wires."""

    def __init__(self):
        self.state = zero_state(0)
        self.order: list = []  # wire ids by qubit position

    def ensure_block(self, wires: list, block: StateVector):
        if block.qubit_count != len(wires):
            raise SimulationError("block size mismatch")
        for w in wires:
            if w in self.order:
                raise SimulationError(f"wire {w} already exists")
        self.state = append_state(self.state, block)
        self.order.extend(wires)

    def has(self, wire) -> bool:
        return wire in self.order

    def pos(self, wire) -> int:
        try:
            return self.order.index(wire)
        except ValueError:
            raise SimulationError(f"logical wire {wire} does not exist") from None

    def apply(self, u: UnitarySpec, wires: list):
        self.state = apply_gate(self.state, u, [self.pos(w) for w in wires])

    def rename(self, old, new):
        self.order[self.pos(old)] = new

    def joint(self, wires: list) -> tuple[StateVector | None, np.ndarray, dict[str, float]]:
        positions = [self.pos(w) for w in wires]
        n = self.state.qubit_count
        rest = [p for p in range(n) if p not in positions]
        full = permute_qubits(self.state, positions + rest)
        k = len(wires)
        grid = full.amplitudes.reshape(1 << (n - k), 1 << k)
        density = grid.T @ grid.conj()
        probs = np.real(np.diag(density)).clip(min=0.0)
        dist = {format(v, f"0{k}b")[::-1]: float(probs[v]) for v in range(1 << k)}
        gram = grid.conj() @ grid.T
        vals, vecs = np.linalg.eigh(gram)
        state = None
        if vals[-1] >= 1.0 - 1e-9:
            state = from_amplitudes(grid.T @ vecs[:, -1])
        return state, density, dist


def combinational_oracle(ir: CircuitIR) -> OracleResult:
    """Logical dataflow of the IR, evaluated densely."""
    schedule = build_schedule(ir)
    decls = ir.transistors()
    sim = _WireSim()
    inputs_of: dict[str, dict[int, object]] = {name: {} for name in decls}
    outputs_of: dict[str, dict[int, object]] = {name: {} for name in decls}
    loop_saved: dict[str, dict[int, object]] = {}
    looped = {n.transistor for n in ir.of_type(Loop)}
    links_by_source: dict[str, list[EbitLink]] = {}
    for link in ir.of_type(EbitLink):
        if isinstance(link.source, ModeRef):
            links_by_source.setdefault(link.source.transistor, []).append(link)
    generation = {name: 0 for name in decls}
    staged: list[tuple[Readout, list]] = []

    def qubit_wire(ref: QubitRef):
        wire = ("q", ref.name, 0)
        if not sim.has(wire):
            sim.ensure_block([wire], single_qubit("0"))
        return wire

    def target_wire(ref):
        if isinstance(ref, QubitRef):
            return qubit_wire(ref)
        if ref.side != "out":
            raise SimulationError(f"{ref} is not a readable wire")
        out = outputs_of[ref.transistor]
        if ref.index not in out:
            raise SimulationError(f"{ref} has no data yet")
        return out[ref.index]

    for prep in ir.of_type(InputPrep):
        t_name = prep.dest.transistor
        if isinstance(prep.state, StateVector):
            wires = [("in", t_name, i) for i in range(prep.state.qubit_count)]
            sim.ensure_block(wires, prep.state)
            for i, w in enumerate(wires):
                inputs_of[t_name][i] = w
        else:
            wire = ("in", t_name, prep.dest.index)
            sim.ensure_block([wire], single_qubit(str(prep.state)))
            inputs_of[t_name][prep.dest.index] = wire

    for cycle, nodes in schedule.cycles:
        for node in nodes:
            if isinstance(node, RefreshNode):
                name = node.transistor
                generation[name] += 1
                inputs_of[name] = {}
                if name in loop_saved:
                    saved = loop_saved.pop(name)
                    for idx, w in saved.items():
                        fresh = ("in", f"{name}@{generation[name]}", idx)
                        sim.rename(w, fresh)
                        inputs_of[name][idx] = fresh
            elif isinstance(node, EbitLink):  # qubit-sourced feed
                src = qubit_wire(node.source)
                fresh = ("in", node.dest.transistor, node.dest.index)
                sim.rename(src, fresh)
                inputs_of[node.dest.transistor][node.dest.index] = fresh
            elif isinstance(node, CombinationalGate):
                u = named_gate(node.gate, node.param)
                sim.apply(u, [target_wire(r) for r in node.targets])
            elif isinstance(node, Signal):
                name = node.transistor
                kind = decls[name].kind
                wires = wire_count(kind)
                missing = [i for i in range(wires) if i not in inputs_of[name]]
                if missing:
                    raise SimulationError(
                        f"signal '{name}': no input on wire(s) {missing}")
                in_wires = [inputs_of[name][i] for i in range(wires)]
                sim.apply(logical_gate(kind), in_wires)
                gen = generation[name]
                out_wires = [("out", f"{name}@{gen}", i) for i in range(wires)]
                for old, new in zip(in_wires, out_wires):
                    sim.rename(old, new)
                outputs_of[name] = dict(enumerate(out_wires))
                if name in looped:
                    loop_saved[name] = dict(enumerate(out_wires))
                for link in links_by_source.get(name, []):
                    src_wire = outputs_of[name][link.source.index]
                    fresh = ("in", link.dest.transistor, link.dest.index)
                    sim.rename(src_wire, fresh)
                    inputs_of[link.dest.transistor][link.dest.index] = fresh
            elif isinstance(node, Readout):
                if isinstance(node.ref, QubitRef):
                    wires = [qubit_wire(node.ref)]
                else:
                    wires = [target_wire(node.ref)]
                if node.basis == "X":
                    for w in wires:
                        sim.apply(named_gate("h"), [w])
                staged.append((node, wires))

    if not staged:
        return OracleResult([], None, np.zeros((1, 1), dtype=complex), {}, {})
    names = [node.name or str(node.ref) for node, _ in staged]
    wires = [w for _, ws in staged for w in ws]
    state, density, dist = sim.joint(wires)
    marginals = {}
    for node, ws in staged:
        name = node.name or str(node.ref)
        _, _, marginals[name] = sim.joint(ws)
    return OracleResult(names, state, density, dist, marginals)


def compare(ir: CircuitIR, policy_seeds: list[int],
            corrupt_frames: bool = False) -> dict:
    """Run the sequential executor against the dense oracle.

    Returns max state-fidelity deficit and max total-variation distance over
    the given seeds.
    """
    from .core.measure import RngPolicy
    from .core.state import fidelity
    from .core.channels import trace_distance
    from .seqexec import execute

    want = combinational_oracle(ir)
    max_deficit = 0.0
    max_tvd = 0.0
    for seed in policy_seeds:
        got = execute(ir, RngPolicy.seeded(seed), corrupt_frames=corrupt_frames)
        if want.names and got.capture is None:
            raise SimulationError("executor produced no readout capture")
        if got.capture is None:
            continue
        cap = got.capture
        if want.state is not None and cap.state is not None:
            deficit = 1.0 - fidelity(want.state, cap.state)
        else:
            deficit = trace_distance(want.density, cap.density)
        tvd = 0.5 * sum(abs(want.distribution.get(k, 0.0) - cap.distribution.get(k, 0.0))
                        for k in set(want.distribution) | set(cap.distribution))
        max_deficit = max(max_deficit, deficit)
        max_tvd = max(max_tvd, tvd)
    return {"state_deficit": max_deficit, "tvd": max_tvd}

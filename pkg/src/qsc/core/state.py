"""Statevector engine: the single source of quantum truth.

A :class:`StateVector` is immutable at the interface level; every operation
returns a fresh value.  Qubit 0 is the least-significant bit of the basis
index.  Registers are capped at 20 qubits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from .errors import QscError, SimulationError
from .gates import UnitarySpec

MAX_QUBITS = 20
NORM_ATOL = 1e-12

_SQ2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class StateVector:
    qubit_count: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        object.__setattr__(self, "amplitudes", amps)
        if self.qubit_count < 0 or self.qubit_count > MAX_QUBITS:
            raise QscError(f"qubit count {self.qubit_count} outside 0..{MAX_QUBITS}")
        if amps.shape != (1 << self.qubit_count,):
            raise QscError(
                f"amplitude length {amps.shape} does not match {self.qubit_count} qubits"
            )
        n = float(np.linalg.norm(amps))
        if abs(n - 1.0) > 1e-9:
            raise QscError(f"state norm {n} is not 1")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def zero_state(qubit_count: int) -> StateVector:
    if qubit_count > MAX_QUBITS:
        raise SimulationError(f"register capacity exceeded: {qubit_count} > {MAX_QUBITS}")
    amps = np.zeros(1 << qubit_count, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(qubit_count, amps)


def from_amplitudes(values) -> StateVector:
    amps = np.asarray(values, dtype=np.complex128)
    n = float(np.linalg.norm(amps))
    if n < 1e-12:
        raise QscError("cannot build a state from a zero vector")
    amps = amps / n
    count = amps.shape[0].bit_length() - 1
    if amps.shape[0] != (1 << count):
        raise QscError(f"amplitude length {amps.shape[0]} is not a power of two")
    return StateVector(count, amps)


_BASIS_1Q = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([_SQ2, _SQ2], dtype=complex),
    "-": np.array([_SQ2, -_SQ2], dtype=complex),
}


def single_qubit(label: str) -> StateVector:
    """One of |0>, |1>, |+>, |-> by its text label."""
    if label not in _BASIS_1Q:
        raise QscError(f"unknown single-qubit state label '{label}'")
    return StateVector(1, _BASIS_1Q[label].copy())


def _check_targets(state: StateVector, targets, arity: int):
    if len(targets) != arity:
        raise QscError(f"gate arity {arity} does not match {len(targets)} targets")
    if len(set(targets)) != len(targets):
        raise QscError(f"duplicate targets {targets}")
    for q in targets:
        if not 0 <= q < state.qubit_count:
            raise QscError(f"target {q} out of range for {state.qubit_count} qubits")


def apply_gate(state: StateVector, u: UnitarySpec, targets: list[int]) -> StateVector:
    """Apply ``u`` to the target qubits; targets[a] is bit a of the gate index."""
    _check_targets(state, targets, u.arity)
    if u.arity == 1:
        amps = kernels.apply_1q(state.amplitudes, u.matrix, targets[0])
    else:
        amps = kernels.apply_kq(
            state.amplitudes, u.matrix, np.asarray(targets, dtype=np.int64)
        )
    return StateVector(state.qubit_count, amps)


def append_state(state: StateVector, block: StateVector) -> StateVector:
    """Adjoin ``block`` as new high-index qubits (tensor on the left)."""
    total = state.qubit_count + block.qubit_count
    if total > MAX_QUBITS:
        raise SimulationError(f"register capacity exceeded: {total} > {MAX_QUBITS}")
    if state.qubit_count == 0:
        return block
    amps = np.kron(block.amplitudes, state.amplitudes)
    return StateVector(total, amps)


def make_ebit(state: StateVector) -> StateVector:
    """Append two qubits in the Bell pair (|00> + |11>)/sqrt(2)."""
    pair = np.array([_SQ2, 0, 0, _SQ2], dtype=complex)
    return append_state(state, StateVector(2, pair))


def make_cluster(state: StateVector, edges: list[tuple[int, int]],
                 vertex_count: int | None = None) -> StateVector:
    """Append a graph state: new qubits in |+>, CZ on every edge.

    Vertices are numbered 0.. within the new block; returns the grown state.
    """
    from .gates import CZ as _CZ  # local to avoid cycles in docs tooling

    if vertex_count is None:
        vertex_count = 1 + max((max(e) for e in edges), default=-1)
    for a, b in edges:
        if a == b:
            raise QscError(f"self-loop edge ({a}, {b}) in cluster graph")
        if not (0 <= a < vertex_count and 0 <= b < vertex_count):
            raise QscError(f"edge ({a}, {b}) outside vertex range")
    plus = np.full(1 << vertex_count, (0.5) ** (vertex_count / 2), dtype=complex)
    grown = append_state(state, StateVector(vertex_count, plus))
    base = state.qubit_count
    cz = UnitarySpec(2, _CZ)
    for a, b in edges:
        grown = apply_gate(grown, cz, [base + a, base + b])
    return grown


def remove_qubit(state: StateVector, qubit: int, outcome: int, prob: float) -> StateVector:
    """Collapse ``qubit`` to ``outcome`` (known probability) and drop it."""
    if prob <= 0.0:
        raise SimulationError("cannot collapse onto a zero-probability branch")
    amps = kernels.collapse_remove(
        state.amplitudes, qubit, outcome, 1.0 / math.sqrt(prob)
    )
    return StateVector(state.qubit_count - 1, amps)


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2."""
    if a.qubit_count != b.qubit_count:
        raise QscError(
            f"fidelity of {a.qubit_count}- vs {b.qubit_count}-qubit states"
        )
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def permute_qubits(state: StateVector, order: list[int]) -> StateVector:
    """Reorder qubits so that new qubit i is old qubit ``order[i]``."""
    n = state.qubit_count
    if sorted(order) != list(range(n)):
        raise QscError(f"order {order} is not a permutation of 0..{n - 1}")
    tensor = state.amplitudes.reshape([2] * n)
    # axis of old qubit q is n-1-q; new axis layout must put order[i] at n-1-i
    axes = [n - 1 - order[n - 1 - ax] for ax in range(n)]
    tensor = np.transpose(tensor, axes)
    return StateVector(n, np.ascontiguousarray(tensor).reshape(1 << n))


def states_equal_up_to_phase(a: StateVector, b: StateVector, atol: float = 1e-10) -> bool:
    if a.qubit_count != b.qubit_count:
        return False
    return bool(abs(abs(np.vdot(a.amplitudes, b.amplitudes)) - 1.0) <= atol)

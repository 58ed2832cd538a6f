"""Label-addressed register on top of the statevector engine.

Destructive measurement shifts positional indices, so every layer above
qcore addresses qubits through stable integer labels.  A workspace owns one
global state; labels map to current positions and are retired on
measurement.
"""
from __future__ import annotations

import numpy as np

from .errors import SimulationError
from .gates import UnitarySpec
from .measure import Basis, MeasurementRecord, RngPolicy, bell_measure, measure
from .pauli import PauliOperator
from .state import (
    MAX_QUBITS,
    StateVector,
    append_state,
    apply_gate,
    fidelity,
    from_amplitudes,
    make_ebit,
    permute_qubits,
    single_qubit,
    zero_state,
)


class Workspace:
    def __init__(self):
        self.state = zero_state(0)
        self._labels: list[int] = []  # position -> label
        self._next_label = 0
        self.measurements: list[MeasurementRecord] = []

    # -- allocation ---

    @property
    def qubit_count(self) -> int:
        return self.state.qubit_count

    def live_labels(self) -> list[int]:
        return list(self._labels)

    def alloc_state(self, block: StateVector) -> list[int]:
        """Append an arbitrary pure block; returns its labels in block order."""
        if self.qubit_count + block.qubit_count > MAX_QUBITS:
            raise SimulationError(
                f"register capacity exceeded: "
                f"{self.qubit_count + block.qubit_count} > {MAX_QUBITS}"
            )
        self.state = append_state(self.state, block)
        labels = list(range(self._next_label, self._next_label + block.qubit_count))
        self._next_label += block.qubit_count
        self._labels.extend(labels)
        return labels

    def alloc(self, count: int, label_state: str = "0") -> list[int]:
        block = single_qubit(label_state)
        out = []
        for _ in range(count):
            out.extend(self.alloc_state(block))
        return out

    def alloc_ebit(self) -> tuple[int, int]:
        grown = make_ebit(self.state)
        self.state = grown
        l1, l2 = self._next_label, self._next_label + 1
        self._next_label += 2
        self._labels.extend([l1, l2])
        return l1, l2

    # -- addressing ---

    def position(self, label: int) -> int:
        try:
            return self._labels.index(label)
        except ValueError:
            raise SimulationError(f"qubit label {label} is not live") from None

    def positions(self, labels: list[int]) -> list[int]:
        return [self.position(l) for l in labels]

    # -- operations ---

    def apply(self, u: UnitarySpec, labels: list[int]):
        self.state = apply_gate(self.state, u, self.positions(labels))

    def apply_pauli(self, p: PauliOperator):
        if not p.bits:
            return
        labels = p.support()
        mat = p.dense(labels)
        self.state = apply_gate(
            self.state, UnitarySpec(len(labels), mat), self.positions(labels)
        )

    def measure(self, label: int, basis: Basis, policy: RngPolicy) -> MeasurementRecord:
        pos = self.position(label)
        rec, self.state = measure(self.state, pos, basis, policy)
        self._labels.pop(pos)
        rec = MeasurementRecord((label,), rec.basis, rec.outcomes, rec.probability)
        self.measurements.append(rec)
        return rec

    def bell_measure(self, l1: int, l2: int, policy: RngPolicy) -> tuple[int, int]:
        p1, p2 = self.position(l1), self.position(l2)
        (a, b), prob, self.state = bell_measure(self.state, p1, p2, policy)
        for pos in sorted((p1, p2), reverse=True):
            self._labels.pop(pos)
        rec = MeasurementRecord((l1, l2), "bell", (a, b), prob)
        self.measurements.append(rec)
        return a, b

    # -- inspection ---

    def prob_of_outcome(self, labels: list[int], bits: list[int]) -> float:
        """Born probability of a joint Z outcome, computed without collapse."""
        positions = self.positions(labels)
        amps = self.state.amplitudes
        mask = np.ones(amps.shape[0], dtype=bool)
        idx = np.arange(amps.shape[0])
        for pos, bit in zip(positions, bits):
            mask &= ((idx >> pos) & 1) == bit
        return float(np.sum(np.abs(amps[mask]) ** 2))

    def distribution(self, labels: list[int]) -> dict[str, float]:
        """Exact Z-basis marginal over ``labels`` (bitstrings in label order)."""
        positions = self.positions(labels)
        amps = self.state.amplitudes
        probs = np.abs(amps) ** 2
        idx = np.arange(amps.shape[0])
        out: dict[str, float] = {}
        for value in range(1 << len(labels)):
            mask = np.ones(amps.shape[0], dtype=bool)
            for a, pos in enumerate(positions):
                mask &= ((idx >> pos) & 1) == ((value >> a) & 1)
            p = float(np.sum(probs[mask]))
            key = "".join(str((value >> a) & 1) for a in range(len(labels)))
            out[key] = p
        return out

    def reduced_density(self, labels: list[int]) -> np.ndarray:
        """Reduced density matrix of ``labels`` (label[0] = low index bit)."""
        positions = self.positions(labels)
        n = self.qubit_count
        rest = [p for p in range(n) if p not in positions]
        full = permute_qubits(self.state, positions + rest)
        k = len(labels)
        grid = full.amplitudes.reshape(1 << (n - k), 1 << k)
        return grid.T @ grid.conj()

    def extract_state(self, labels: list[int], atol: float = 1e-9) -> StateVector:
        """Pure state of ``labels`` (label[0] = qubit 0), requiring that they
        are unentangled with the rest of the workspace."""
        positions = self.positions(labels)
        n = self.qubit_count
        rest = [p for p in range(n) if p not in positions]
        perm = positions + rest
        full = permute_qubits(self.state, perm)
        k = len(labels)
        grid = full.amplitudes.reshape(1 << (n - k), 1 << k)
        gram = grid.conj() @ grid.T  # (rest x rest) overlap matrix
        vals, vecs = np.linalg.eigh(gram)
        if vals[-1] < 1.0 - atol:
            raise SimulationError(
                f"labels {labels} are entangled with the rest "
                f"(purity {vals[-1]:.6f})"
            )
        lead = vecs[:, -1]  # = conj(rest-part) up to a phase
        state = grid.T @ lead
        return from_amplitudes(state)

    def fidelity_with(self, labels: list[int], target: StateVector) -> float:
        return fidelity(self.extract_state(labels), target)

"""Projective and Bell measurement, outcome policies, and records.

All measurements are destructive: the measured qubit leaves the register
and indices above it shift down.  The equatorial family rotated(theta)
projects onto (|0> +- e^{i theta}|1>)/sqrt(2); Z and X are the special
cases handled exactly.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from .errors import QscError, SimulationError
from .gates import H, UnitarySpec
from .state import StateVector, apply_gate, remove_qubit

FORCED_MIN_PROB = 1e-12


@dataclass(frozen=True)
class Basis:
    """Measurement basis label: 'Z', 'X', or equatorial rotated(theta)."""

    name: str
    angle: float = 0.0

    def __str__(self):
        if self.name == "rotated":
            return f"rotated({self.angle:.6g})"
        return self.name


Z_BASIS = Basis("Z")
X_BASIS = Basis("X")


def rotated(theta: float) -> Basis:
    return Basis("rotated", theta)


def basis_change(basis: Basis) -> UnitarySpec | None:
    """Unitary B^dagger mapping the basis vectors onto |0>, |1> (None for Z)."""
    if basis.name == "Z":
        return None
    if basis.name == "X":
        return UnitarySpec(1, H)
    if basis.name == "rotated":
        b = np.array(
            [[1, 1], [cmath.exp(1j * basis.angle), -cmath.exp(1j * basis.angle)]],
            dtype=complex,
        ) / math.sqrt(2.0)
        return UnitarySpec(1, b.conj().T)
    raise QscError(f"unknown basis {basis.name!r}")


@dataclass(frozen=True)
class MeasurementRecord:
    qubits: tuple[int, ...]
    basis: str
    outcomes: tuple[int, ...]
    probability: float


class RngPolicy:
    """Outcome source: seeded PRNG or a forced outcome list.

    Forced outcomes are consumed one bit per single-qubit projection, in
    execution order; forcing a branch with probability < 1e-12 raises.
    """

    def __init__(self, mode: str, seed: int | None = None,
                 outcomes: list[int] | None = None):
        if mode not in ("seeded", "forced"):
            raise QscError(f"unknown rng mode {mode!r}")
        self.mode = mode
        self.seed = seed
        if mode == "seeded":
            self._rng = np.random.default_rng(seed)
        else:
            self._queue = list(outcomes or [])
            self._cursor = 0

    @classmethod
    def seeded(cls, seed: int) -> "RngPolicy":
        return cls("seeded", seed=seed)

    @classmethod
    def forced(cls, outcomes: list[int]) -> "RngPolicy":
        return cls("forced", outcomes=list(outcomes))

    def draw(self, prob_zero: float, context: str = "") -> int:
        if self.mode == "seeded":
            return 0 if self._rng.random() < prob_zero else 1
        if self._cursor >= len(self._queue):
            raise SimulationError(f"forced outcome list exhausted at {context or 'measurement'}")
        outcome = int(self._queue[self._cursor])
        self._cursor += 1
        p = prob_zero if outcome == 0 else 1.0 - prob_zero
        if p < FORCED_MIN_PROB:
            raise SimulationError(
                f"forced outcome {outcome} has probability {p:.3e} at "
                f"{context or 'measurement'}"
            )
        return outcome

    def remaining(self) -> int:
        if self.mode == "forced":
            return len(self._queue) - self._cursor
        return -1


def measure(state: StateVector, qubit: int, basis: Basis,
            policy: RngPolicy) -> tuple[MeasurementRecord, StateVector]:
    """Measure one qubit; returns the record and the shrunken state."""
    if not 0 <= qubit < state.qubit_count:
        raise QscError(f"measured qubit {qubit} out of range")
    rot = basis_change(basis)
    work = apply_gate(state, rot, [qubit]) if rot is not None else state
    p1 = kernels.prob_one(work.amplitudes, qubit)
    p0 = min(max(1.0 - p1, 0.0), 1.0)
    outcome = policy.draw(p0, context=f"qubit {qubit} basis {basis}")
    prob = p0 if outcome == 0 else 1.0 - p0
    post = remove_qubit(work, qubit, outcome, prob)
    record = MeasurementRecord((qubit,), str(basis), (outcome,), prob)
    return record, post


_CX = UnitarySpec(2, np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex))
# CX with control = first target (low bit), written out to keep this module
# independent of gates.controlled ordering.
_H1 = UnitarySpec(1, H)


def bell_measure(state: StateVector, q1: int, q2: int,
                 policy: RngPolicy) -> tuple[tuple[int, int], float, StateVector]:
    """Project (q1, q2) onto the Bell basis {(X^a Z^b x I)|omega>}.

    Returns ((a, b), joint probability, state minus both qubits).  Forced
    policies consume the outcome bits in (a, b) order.
    """
    if q1 == q2:
        raise QscError("bell_measure requires two distinct qubits")
    work = apply_gate(state, _CX, [q1, q2])
    work = apply_gate(work, _H1, [q1])
    # outcome of q2 is a, outcome of q1 is b; measure a first
    p1 = kernels.prob_one(work.amplitudes, q2)
    p0 = min(max(1.0 - p1, 0.0), 1.0)
    a = policy.draw(p0, context=f"bell({q1},{q2}) bit a")
    pa = p0 if a == 0 else 1.0 - p0
    work = remove_qubit(work, q2, a, pa)
    q1_now = q1 if q1 < q2 else q1 - 1
    p1 = kernels.prob_one(work.amplitudes, q1_now)
    p0 = min(max(1.0 - p1, 0.0), 1.0)
    b = policy.draw(p0, context=f"bell({q1},{q2}) bit b")
    pb = p0 if b == 0 else 1.0 - p0
    work = remove_qubit(work, q1_now, b, pb)
    return (a, b), pa * pb, work

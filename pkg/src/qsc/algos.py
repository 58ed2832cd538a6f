"""Algorithms on stored gates: quantum control, QMUX, Fourier, amplitude
amplification, phase estimation, unitary combinations, brickwork evolution,
history states and clock synthesis, parallel queries.

Controlled gates follow the hybrid eigenstate construction: controlled-swap
into an ancilla register held in an eigenstate of the stored gate, activate
the transistor, swap back.  The eigenvalue phase picked up by the idle
branch is compensated by a diagonal gate on the control register, so the
result equals diag(I, U) up to a global phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core.errors import QscError, SimulationError
from .core.gates import UnitarySpec, controlled, embed, named_gate, ry
from .core.measure import RngPolicy, Z_BASIS
from .core.state import StateVector, append_state, apply_gate, from_amplitudes, zero_state
from .core.workspace import Workspace
from .transistor import (
    ChoiStored,
    Transistor,
    activate,
    build_choi_transistor,
    inject_input_by_teleport,
    resolve_frame,
    run_backward,
)
from .seqexec import iterate_gate

EIGENSTATE_ATOL = 1e-8

__all__ = [
    "QmuxSpec", "QaaSpec", "HistorySpec", "QpeRecord",
    "eigenphase", "controlled_u_via_transistor", "qmux", "qft", "qaa",
    "qpe", "lcu", "complete_lcu_matrix", "gradient_step",
    "trotter_brickwork", "history_state", "clock_angles",
    "derived_clock_angles", "clock_state", "qram_query",
]


# -- specs ---

@dataclass(frozen=True)
class QmuxSpec:
    coefficients: tuple[complex, ...]
    unitaries: tuple[UnitarySpec, ...]

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        d_c = len(coeffs)
        if d_c < 1 or d_c & (d_c - 1):
            raise QscError("control dimension must be a power of two")
        if len(self.unitaries) != d_c:
            raise QscError("one unitary per control value required")
        arities = {u.arity for u in self.unitaries}
        if len(arities) != 1:
            raise QscError("all multiplexed unitaries must share an arity")
        if abs(sum(abs(c) ** 2 for c in coeffs) - 1.0) > 1e-12:
            raise QscError("control coefficients must be normalized")

    @property
    def control_qubits(self) -> int:
        return (len(self.coefficients) - 1).bit_length()

    @property
    def data_qubits(self) -> int:
        return self.unitaries[0].arity


@dataclass(frozen=True)
class QaaSpec:
    """Amplitude amplification setup: flag qubit 0, good subspace flag = |0>."""

    prep: UnitarySpec  # A on (flag, data)
    psi: StateVector  # data register input

    def __post_init__(self):
        if self.prep.arity != self.psi.qubit_count + 1:
            raise QscError("prep arity must be data qubits + 1 flag")

    def initial(self) -> StateVector:
        start = append_state(zero_state(1), self.psi)  # flag is qubit 0
        return apply_gate(start, self.prep, list(range(self.prep.arity)))

    def good_probability(self, state: StateVector) -> float:
        amps = state.amplitudes.reshape(-1, 2)  # low bit = flag
        return float(np.sum(np.abs(amps[:, 0]) ** 2))

    @property
    def p(self) -> float:
        return self.good_probability(self.initial())

    @property
    def theta(self) -> float:
        return math.asin(math.sqrt(self.p))


@dataclass(frozen=True)
class HistorySpec:
    depth: int
    gates: tuple[UnitarySpec, ...]
    psi0: StateVector

    def __post_init__(self):
        if self.depth < 0:
            raise QscError("depth must be >= 0")
        if len(self.gates) != self.depth:
            raise QscError("one gate per time step required")
        for u in self.gates:
            if u.arity != self.psi0.qubit_count:
                raise QscError("history gates must act on the data register")


# -- quantum control ---

def eigenphase(u: UnitarySpec, lam: StateVector, atol: float = EIGENSTATE_ATOL) -> float:
    """arg of the eigenvalue; raises if lam is not an eigenstate of u."""
    if lam.qubit_count != u.arity:
        raise QscError("eigenstate arity mismatch")
    image = u.matrix @ lam.amplitudes
    value = np.vdot(lam.amplitudes, image)
    if np.linalg.norm(image - value * lam.amplitudes) > atol:
        raise QscError("state is not an eigenstate of the gate within 1e-8")
    return float(np.angle(value))


def _select_swap(control_qubits: int, value: int) -> UnitarySpec:
    """Swap two extra qubits iff the control register equals ``value``.

    Targets: [controls..., a, b] with the controls as the low matrix bits.
    """
    k = control_qubits
    dim = 1 << (k + 2)
    mat = np.eye(dim, dtype=complex)
    for idx in range(dim):
        if (idx & ((1 << k) - 1)) != value:
            continue
        a_bit = (idx >> k) & 1
        b_bit = (idx >> (k + 1)) & 1
        if a_bit != b_bit:
            swapped = idx ^ (1 << k) ^ (1 << (k + 1))
            mat[idx, idx] = 0.0
            mat[idx, swapped] = 1.0
    return UnitarySpec(k + 2, mat)


def _principal_eigenstate(u: UnitarySpec) -> tuple[StateVector, float]:
    vals, vecs = np.linalg.eig(u.matrix)
    return from_amplitudes(vecs[:, 0]), float(np.angle(vals[0]))


def _apply_stored_controlled(ws: Workspace, controls: list[int], value: int,
                             data: list[int], u: UnitarySpec, policy: RngPolicy,
                             backward: bool = False,
                             lam: StateVector | None = None) -> float:
    """Apply U to ``data`` iff the control register equals ``value``.

    Hybrid realization: select-controlled swaps into an eigenstate ancilla,
    one activation of the stored gate, swaps back (the data stays in its
    own registers; the spent ancilla keeps the eigenstate).  Returns the
    eigenvalue phase the idle branches picked up.
    """
    effective = u.transpose() if backward else u
    if lam is None:
        lam, phi = _principal_eigenstate(effective)
    else:
        phi = eigenphase(effective, lam)
    anc = ws.alloc_state(lam)
    cswap = _select_swap(len(controls), value)
    for d, a in zip(data, anc):
        ws.apply(cswap, controls + [d, a])
    t = build_choi_transistor(u, ws)
    if backward:
        t = run_backward(t)
    inject_input_by_teleport(t, anc, policy, ws)
    activate(t, policy, ws)
    resolve_frame(t, ws)
    for d, a in zip(data, t.right_modes):
        ws.apply(cswap, controls + [d, a])
    return phi


def controlled_u_via_transistor(u: UnitarySpec, lam: StateVector,
                                state: StateVector, policy: RngPolicy) -> StateVector:
    """Exact controlled-U on (control = qubit 0, data = the rest).

    ``lam`` must be an eigenstate of ``u``; its eigenvalue phase is
    compensated on the control so the action equals diag(I, U) modulo a
    global phase.
    """
    if state.qubit_count != u.arity + 1:
        raise QscError("state must hold one control qubit plus the data register")
    ws = Workspace()
    labels = ws.alloc_state(state)
    control, data = labels[0], labels[1:]
    phi = _apply_stored_controlled(ws, [control], 1, data, u, policy, lam=lam)
    # idle branch (control = 0) carried e^{i phi}; shift it onto a global phase
    ws.apply(UnitarySpec(1, np.diag([1.0, np.exp(1j * phi)])), [control])
    return ws.extract_state([control] + data)


# -- multiplexer and parallel query ---

def qmux(spec: QmuxSpec, psi: StateVector, policy: RngPolicy,
         backward: bool = False) -> StateVector:
    """Coherent gate load: sum_i c_i |i> U_i |psi>.

    Control register low, data high; ``backward`` runs every stored gate in
    reverse, realizing diag(U_i^t).
    """
    if psi.qubit_count != spec.data_qubits:
        raise QscError("data state arity mismatch")
    k = spec.control_qubits
    ws = Workspace()
    control = ws.alloc_state(from_amplitudes(np.asarray(spec.coefficients)))
    data = ws.alloc_state(psi)
    phases = np.zeros(len(spec.coefficients))
    for value, u in enumerate(spec.unitaries):
        phases[value] = _apply_stored_controlled(ws, control, value, data, u,
                                                 policy, backward=backward)
    if k:
        # branch j collected every phase but its own; restore with diag(e^{i phi_j})
        ws.apply(UnitarySpec(k, np.diag(np.exp(1j * phases))), control)
    return ws.extract_state(control + data)


def qram_query(addresses, items, psi: StateVector, policy: RngPolicy) -> StateVector:
    """Parallel query: sum_i c_i |i> |D_i> with |D_i> = U_i |psi>."""
    spec = QmuxSpec(tuple(addresses), tuple(items))
    return qmux(spec, psi, policy)


# -- Fourier transform ---

def qft(n: int) -> UnitarySpec:
    """Fourier transform on n qubits via the H / controlled-phase circuit."""
    if not 1 <= n <= 6:
        raise QscError("qft supports 1..6 qubits")
    dim = 1 << n
    mat = np.eye(dim, dtype=complex)
    for j in range(n - 1, -1, -1):
        mat = embed(named_gate("h"), [j], n) @ mat
        for k in range(j - 1, -1, -1):
            gate = UnitarySpec(2, controlled(named_gate("rk", j - k + 1).matrix))
            mat = embed(gate, [k, j], n) @ mat
    for q in range(n // 2):
        mat = embed(named_gate("swap"), [q, n - 1 - q], n) @ mat
    return UnitarySpec(n, mat)


# -- amplitude amplification ---

def _walk_operator(spec: QaaSpec) -> UnitarySpec:
    n = spec.prep.arity
    dim = 1 << n
    s_good = np.eye(dim, dtype=complex)
    for idx in range(dim):
        if idx & 1 == 0:  # flag (qubit 0) = |0>
            s_good[idx, idx] = -1.0
    s_zero = np.eye(dim, dtype=complex)
    s_zero[0, 0] = -1.0
    a = spec.prep.matrix
    return UnitarySpec(n, -(a @ s_zero @ a.conj().T @ s_good))


def qaa(spec: QaaSpec, n: int, policy: RngPolicy) -> tuple[StateVector, float]:
    """Iterate the walk operator n times; returns (state, flag-|0> probability).

    The walk operator is stored as a transistor and iterated through the
    refreshable-gate loop, so this covers the ebit-loop machinery end to end.
    """
    p = spec.p
    if not 0.0 < p < 1.0:
        raise QscError(f"initial success probability {p} outside (0, 1)")
    q = _walk_operator(spec)
    initial = spec.initial()
    if q.arity <= 2:
        final = iterate_gate(ChoiStored(q), initial, n, policy)
    else:
        raise QscError("stored walk operators support up to two qubits")
    return final, spec.good_probability(final)


# -- phase estimation ---

@dataclass(frozen=True)
class QpeRecord:
    bits: tuple[int, ...]  # bits[r] = register qubit r outcome (weight 2^r)
    estimate_index: int
    phase: float
    probability: float
    distribution: dict[str, float]


def qpe(u: UnitarySpec, eigenstate: StateVector, t_bits: int,
        policy: RngPolicy) -> QpeRecord:
    """Phase estimation with stored controlled powers.

    Register qubit r controls U^{2^r} (one Choi transistor per power); the
    inverse Fourier transform exposes the binary phase, and the bulk
    measurement outcome is the result.
    """
    if not 1 <= t_bits <= 4:
        raise QscError("qpe supports 1..4 register bits")
    eigenphase(u, eigenstate)  # validates
    ws = Workspace()
    register = ws.alloc(t_bits, "+")
    data = ws.alloc_state(eigenstate)
    for r in range(t_bits):
        power = UnitarySpec(u.arity, np.linalg.matrix_power(u.matrix, 1 << r))
        phi = _apply_stored_controlled(ws, [register[r]], 1, data, power, policy)
        ws.apply(UnitarySpec(1, np.diag([1.0, np.exp(1j * phi)])), [register[r]])
    ws.apply(qft(t_bits).dagger(), register)
    distribution = ws.distribution(register)
    bits = []
    prob = 1.0
    for lab in register:
        rec = ws.measure(lab, Z_BASIS, policy)
        bits.append(rec.outcomes[0])
        prob *= rec.probability
    index = sum(b << r for r, b in enumerate(bits))
    return QpeRecord(tuple(bits), index, index / (1 << t_bits), prob, distribution)


# -- linear combination of unitaries ---

def complete_lcu_matrix(coefficients) -> UnitarySpec:
    """Unitary whose first column carries the normalized coefficients."""
    c = np.asarray(coefficients, dtype=complex)
    if np.any(c.real < -1e-12) or np.any(np.abs(c.imag) > 1e-12):
        raise QscError("combination coefficients must be real and nonnegative")
    norm = np.linalg.norm(c)
    if norm < 1e-12:
        raise QscError("coefficients must not all vanish")
    d = len(c)
    if d & (d - 1):
        raise QscError("coefficient count must be a power of two")
    cols = [c / norm]
    for e in range(d):
        basis = np.zeros(d, dtype=complex)
        basis[e] = 1.0
        for prev in cols:
            basis = basis - prev * np.vdot(prev, basis)
        nrm = np.linalg.norm(basis)
        if nrm > 1e-9:
            cols.append(basis / nrm)
        if len(cols) == d:
            break
    mat = np.stack(cols, axis=1)
    return UnitarySpec((d - 1).bit_length(), mat)


def lcu(coefficients, unitaries, psi: StateVector, policy: RngPolicy,
        w: UnitarySpec | None = None) -> tuple[StateVector, float]:
    """Post-selected combination: state ~ sum_i w_{i0} U_i |psi>.

    The select stage is the multiplexer over a uniform control register; the
    transpose of ``w`` recombines the branches so the all-zero control block
    carries the combination.  Returns the normalized data state and the
    exact post-selection probability.
    """
    coefficients = tuple(coefficients)
    unitaries = tuple(unitaries)
    d_c = len(unitaries)
    if d_c > 1:
        if w is None:
            w = complete_lcu_matrix(coefficients)
        col = w.matrix[:, 0]
        c = np.asarray(coefficients, dtype=complex)
        overlap = abs(np.vdot(col, c))
        if overlap < (1.0 - 1e-9) * np.linalg.norm(c):
            raise QscError("first column of w must be proportional to the coefficients")
    uniform = tuple(1.0 / math.sqrt(d_c) for _ in range(d_c))
    branched = qmux(QmuxSpec(uniform, unitaries), psi, policy)
    k = (d_c - 1).bit_length()
    full = branched if k == 0 else apply_gate(
        branched, UnitarySpec(k, w.matrix.T), list(range(k)))
    m = psi.qubit_count
    block = full.amplitudes.reshape(1 << m, 1 << k)[:, 0]  # control = |0...0>
    success = float(np.sum(np.abs(block) ** 2))
    if success < 1e-24:
        raise SimulationError("post-selection branch has zero norm (terms annihilate)")
    return from_amplitudes(block), success


def gradient_step(terms, psi: StateVector, policy: RngPolicy
                  ) -> tuple[StateVector, float, float]:
    """Direction and norm of H|psi> for H = sum_i c_i U_i with real c_i.

    Returns (normalized direction, ||H psi||, post-selection probability).
    Negative coefficients fold their sign into the unitary.
    """
    coeffs, gates = [], []
    for c, u in terms:
        c = float(c)
        if c < 0:
            c, u = -c, UnitarySpec(u.arity, -u.matrix)
        coeffs.append(c)
        gates.append(u)
    d_c = 1 << (max(1, (len(gates) - 1).bit_length()) if len(gates) > 1 else 0)
    while len(gates) < d_c:
        gates.append(UnitarySpec(gates[0].arity, np.eye(gates[0].dim)))
        coeffs.append(0.0)
    direction, success = lcu(coeffs, gates, psi, policy)
    norm_c = float(np.linalg.norm(coeffs))
    h_norm = math.sqrt(success * d_c) * norm_c
    return direction, h_norm, success


# -- brickwork evolution ---

def trotter_brickwork(even_terms, odd_terms, layers: int, state: StateVector,
                      policy: RngPolicy) -> StateVector:
    """L layers of (tensor of even gates) then (tensor of odd gates).

    Each brick is one reusable stored gate: layer after layer the data
    teleports through it, and between layers the brick refreshes while its
    output loops back through an ebit.
    """
    from .transistor import refresh as refresh_t
    from .seqexec import _transfer_qubit

    bricks = []
    for layer_terms in (even_terms, odd_terms):
        seen: set[int] = set()
        for u, pair in layer_terms:
            if u.arity != len(pair):
                raise QscError("brick arity mismatch")
            if seen & set(pair):
                raise QscError(f"overlapping targets {pair} within a layer")
            seen.update(pair)
    if layers == 0:
        return state
    ws = Workspace()
    labels = ws.alloc_state(state)
    instances: dict[tuple[str, int], Transistor] = {}
    for layer_no in range(layers):
        for parity, terms in (("even", even_terms), ("odd", odd_terms)):
            for slot, (u, pair) in enumerate(terms):
                key = (parity, slot)
                data = [labels[q] for q in pair]
                if key not in instances:
                    t = build_choi_transistor(u, ws)
                    instances[key] = t
                else:
                    t = refresh_t(instances[key], ws)
                    data = [_transfer_qubit(ws, d, policy) for d in data]
                inject_input_by_teleport(t, data, policy, ws)
                activate(t, policy, ws)
                resolve_frame(t, ws)
                for q, lab in zip(pair, t.right_modes):
                    labels[q] = lab
    return ws.extract_state(labels)


# -- history states and clock synthesis ---

def clock_angles(depth: int) -> list[float]:
    """Published cascade angles: 2 arccos(1 / sqrt(T - l + 2))."""
    return [2.0 * math.acos(1.0 / math.sqrt(depth - el + 2)) for el in range(depth)]


def derived_clock_angles(depth: int) -> list[float]:
    """Angles derived from the uniform-clock target: the wall advances past
    position l with amplitude sqrt((T - l) / (T - l + 1))."""
    return [2.0 * math.acos(math.sqrt((depth - el) / (depth - el + 1.0)))
            for el in range(depth)]


def clock_state(depth: int, angles: list[float]) -> StateVector:
    """Domain-wall clock register from the conditional rotation cascade.

    Starts at |1...1> (t = 0); the rotation on qubit l, conditioned on
    qubit l-1 still being |0>, decides whether the wall advances.  Y-axis
    rotations map |1> to cos(theta/2)|0> + sin(theta/2)|1>.
    """
    if depth == 0:
        return zero_state(0)
    if len(angles) != depth:
        raise QscError("one angle per clock qubit required")
    ones = np.zeros(1 << depth, dtype=complex)
    ones[-1] = 1.0
    state = StateVector(depth, ones)

    def rot(theta: float) -> UnitarySpec:
        return UnitarySpec(1, ry(theta - math.pi))

    state = apply_gate(state, rot(angles[0]), [0])
    for el in range(1, depth):
        gate = UnitarySpec(2, controlled(rot(angles[el]).matrix, on=0))
        state = apply_gate(state, gate, [el - 1, el])
    return state


def history_state(spec: HistorySpec) -> StateVector:
    """(T+1)^{-1/2} sum_t |t> U_t ... U_1 |psi_0> with domain-wall clock.

    Data qubits low, clock qubits above; clock qubit l is |0> once the wall
    has passed, so gate t fires conditioned on clock qubit t-1 being |0>.
    """
    t_depth = spec.depth
    if t_depth == 0:
        return spec.psi0
    clock = clock_state(t_depth, derived_clock_angles(t_depth))
    state = append_state(spec.psi0, clock)
    d = spec.psi0.qubit_count
    for step, u in enumerate(spec.gates, start=1):
        gate = UnitarySpec(u.arity + 1, controlled(u.matrix, on=0))
        state = apply_gate(state, gate, [d + step - 1] + list(range(d)))
    return state

"""Channel-state duality and superchannels.

A unitary U on k qubits is stored as the pure Choi state on 2k qubits with
input legs first (qubits 0..k-1) and output legs after (k..2k-1):
amp[j + o * 2^k] = U[o, j] / sqrt(2^k).  General channels are Kraus sets;
the density-matrix helpers here exist only to support the superchannel map.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import QscError
from .gates import UnitarySpec
from .state import StateVector

MARGINAL_ATOL = 1e-8


@dataclass(frozen=True)
class ChannelSpec:
    """A quantum channel as a Kraus set, trace preserving within 1e-10."""

    input_arity: int
    output_arity: int
    kraus_ops: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        object.__setattr__(self, "kraus_ops", ops)
        din, dout = 1 << self.input_arity, 1 << self.output_arity
        for op in ops:
            if op.shape != (dout, din):
                raise QscError(f"Kraus shape {op.shape}, expected {(dout, din)}")
        total = sum(op.conj().T @ op for op in ops)
        if not np.allclose(total, np.eye(din), atol=1e-10):
            raise QscError("Kraus set is not trace preserving within 1e-10")

    @classmethod
    def from_unitary(cls, u: UnitarySpec) -> "ChannelSpec":
        return cls(u.arity, u.arity, (u.matrix,))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)


@dataclass(frozen=True)
class ChoiState:
    """Choi state of a unitary: a pure state on input + output legs."""

    arity: int
    state: StateVector

    def __post_init__(self):
        if self.state.qubit_count != 2 * self.arity:
            raise QscError("Choi state must live on 2 * arity qubits")


def choi_of_unitary(u: UnitarySpec) -> ChoiState:
    k = u.arity
    dim = 1 << k
    amps = np.zeros(dim * dim, dtype=complex)
    scale = 1.0 / math.sqrt(dim)
    for j in range(dim):
        for o in range(dim):
            amps[j + (o << k)] = u.matrix[o, j] * scale
    return ChoiState(k, StateVector(2 * k, amps))


def unitary_of_choi(c: ChoiState) -> UnitarySpec:
    k = c.arity
    dim = 1 << k
    grid = c.state.amplitudes.reshape(dim, dim)  # grid[o, j] = amp[j + o*dim]
    marginal = grid.conj().T @ grid  # reduced state on the input legs
    if not np.allclose(marginal, np.eye(dim) / dim, atol=MARGINAL_ATOL):
        raise QscError("input marginal is not maximally mixed: not a unitary Choi state")
    mat = grid * math.sqrt(dim)
    if not np.allclose(mat.conj().T @ mat, np.eye(dim), atol=1e-8):
        raise QscError("Choi state does not reconstruct a unitary")
    return UnitarySpec(k, _unitarize(mat))


def _unitarize(mat: np.ndarray) -> np.ndarray:
    """Snap an almost-unitary matrix onto the unitary manifold (polar part)."""
    w, s, vh = np.linalg.svd(mat)
    return w @ vh


def density_of(state: StateVector) -> np.ndarray:
    v = state.amplitudes
    return np.outer(v, v.conj())


def apply_unitary_to_density(rho: np.ndarray, u: UnitarySpec) -> np.ndarray:
    return u.matrix @ rho @ u.matrix.conj().T


def partial_trace(rho: np.ndarray, total_qubits: int, traced: list[int]) -> np.ndarray:
    """Trace out the listed qubits of a density matrix."""
    keep = [q for q in range(total_qubits) if q not in traced]
    n = total_qubits
    tensor = rho.reshape([2] * (2 * n))
    # row axis of qubit q is n-1-q; the column axes follow after all rows
    trace_pairs = [(n - 1 - q, 2 * n - 1 - q) for q in traced]
    out = tensor
    removed: list[int] = []
    for ar, ac in trace_pairs:
        ar2 = ar - sum(1 for r in removed if r < ar)
        ac2 = ac - sum(1 for r in removed if r < ac)
        out = np.trace(out, axis1=ar2, axis2=ac2)
        removed.extend([ar, ac])
    dim = 1 << len(keep)
    return out.reshape(dim, dim)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = a - b
    vals = np.linalg.eigvalsh(diff)
    return float(0.5 * np.sum(np.abs(vals)))


def apply_superchannel(pre: UnitarySpec, post: UnitarySpec, phi: ChannelSpec,
                       rho: np.ndarray) -> np.ndarray:
    """Higher-order map: rho -> tr_ancilla[ V Phi( U (rho x |0><0|) U^t* ) V^t* ].

    The data register is the low qubits of rho; the ancilla (initialized
    |0>) occupies the remaining high qubits implied by the pre/post arity.
    Phi acts on the low ``phi.input_arity`` qubits of the joint register.
    """
    data_qubits = int(round(math.log2(rho.shape[0])))
    if rho.shape != (1 << data_qubits, 1 << data_qubits):
        raise QscError("rho must be a square density matrix on whole qubits")
    if pre.arity != post.arity:
        raise QscError("pre and post unitaries must share an arity")
    total = pre.arity
    anc = total - data_qubits
    if anc < 0:
        raise QscError("unitary arity smaller than the data register")
    if phi.input_arity != phi.output_arity or phi.input_arity > total:
        raise QscError("channel dimensions incompatible with the unitaries")
    anc_rho = np.zeros((1 << anc, 1 << anc), dtype=complex)
    anc_rho[0, 0] = 1.0
    joint = np.kron(anc_rho, rho) if anc else rho.astype(complex)
    joint = apply_unitary_to_density(joint, pre)
    joint = _apply_channel_on_low(joint, phi, total)
    joint = apply_unitary_to_density(joint, post)
    if anc:
        joint = partial_trace(joint, total, list(range(data_qubits, total)))
    return joint


def _apply_channel_on_low(rho: np.ndarray, phi: ChannelSpec, total: int) -> np.ndarray:
    k = phi.input_arity
    if k == total:
        return phi.apply(rho)
    rest = total - k
    out = np.zeros_like(rho)
    for op in phi.kraus_ops:
        big = np.kron(np.eye(1 << rest, dtype=complex), op)
        out += big @ rho @ big.conj().T
    return out

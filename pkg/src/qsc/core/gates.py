"""Dense gate matrices and the unitary wrapper type.

Matrix index convention: for a gate applied to ``targets``, bit ``a`` of a
row/column index is the basis value of ``targets[a]``.  Two-qubit gate
matrices below therefore read "first target = low bit".
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import QscError

_SQ2 = 1.0 / math.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2
S = np.array([[1, 0], [0, 1j]], dtype=complex)
SDG = S.conj().T
T = np.array([[1, 0], [0, cmath.exp(1j * math.pi / 4)]], dtype=complex)
TDG = T.conj().T

CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def controlled(mat: np.ndarray, on: int = 1) -> np.ndarray:
    """Control the gate on one extra qubit (the new low bit of the index).

    ``on=0`` activates when the control is |0>, used by domain-wall clocks.
    """
    d = mat.shape[0]
    out = np.eye(2 * d, dtype=complex)
    # control is the low bit: indices with bit0 == on form the active block
    sel = [2 * j + on for j in range(d)]
    for r, rr in enumerate(sel):
        for c, cc in enumerate(sel):
            out[rr, cc] = mat[r, c]
    return out


CX = controlled(X)  # control = target 0, flips target 1


def rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array(
        [[cmath.exp(-0.5j * theta), 0], [0, cmath.exp(0.5j * theta)]], dtype=complex
    )


def phase(theta: float) -> np.ndarray:
    return np.array([[1, 0], [0, cmath.exp(1j * theta)]], dtype=complex)


def rk(k: int) -> np.ndarray:
    """diag(1, e^{2 pi i / 2^k}) phase-rotation used by the Fourier circuit."""
    return phase(2.0 * math.pi / (1 << k))


@dataclass(frozen=True)
class UnitarySpec:
    """A dense unitary on ``arity`` qubits, validated at construction."""

    arity: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", mat)
        dim = 1 << self.arity
        if self.arity < 1 or mat.shape != (dim, dim):
            raise QscError(f"matrix shape {mat.shape} does not match arity {self.arity}")
        if not np.allclose(mat.conj().T @ mat, np.eye(dim), atol=1e-10):
            raise QscError("matrix is not unitary within 1e-10")

    @property
    def dim(self) -> int:
        return 1 << self.arity

    def dagger(self) -> "UnitarySpec":
        return UnitarySpec(self.arity, self.matrix.conj().T)

    def transpose(self) -> "UnitarySpec":
        return UnitarySpec(self.arity, self.matrix.T)


_FIXED = {
    "i": I2, "id": I2, "x": X, "y": Y, "z": Z, "h": H,
    "s": S, "sdg": SDG, "t": T, "tdg": TDG,
    "cz": CZ, "cx": CX, "cnot": CX, "swap": SWAP,
}
_PARAM = {"rx": rx, "ry": ry, "rz": rz, "p": phase, "phase": phase}


def named_gate(name: str, param: float | None = None) -> UnitarySpec:
    """Look up a gate by its lower-case name, e.g. ``h``, ``cz``, ``rz``."""
    key = name.lower()
    if key in _FIXED:
        if param is not None:
            raise QscError(f"gate '{name}' takes no parameter")
        mat = _FIXED[key]
    elif key in _PARAM:
        if param is None:
            raise QscError(f"gate '{name}' requires a parameter")
        mat = _PARAM[key](param)
    elif key == "rk":
        if param is None:
            raise QscError("gate 'rk' requires a parameter")
        mat = rk(int(param))
    elif key in ("ccx", "toffoli"):
        mat = controlled(CX)
    elif key in ("ccz",):
        mat = controlled(CZ)
    elif key in ("cswap", "fredkin"):
        mat = controlled(SWAP)
    else:
        raise QscError(f"unknown gate name '{name}'")
    arity = mat.shape[0].bit_length() - 1
    return UnitarySpec(arity, mat)


def gates_equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    """Compare two matrices modulo a global phase chosen to maximize overlap."""
    tr = np.trace(a.conj().T @ b)
    if abs(tr) < 1e-14:
        return bool(np.allclose(a, b, atol=atol) or np.allclose(a, -b, atol=atol))
    ph = tr / abs(tr)
    return bool(np.allclose(a * ph, b, atol=atol))


def embed(u: UnitarySpec, targets: list[int], n: int) -> np.ndarray:
    """Dense n-qubit matrix of ``u`` acting on ``targets`` (bit a = targets[a])."""
    from .. import kernels

    dim = 1 << n
    out = np.empty((dim, dim), dtype=complex)
    tgt = np.asarray(targets, dtype=np.int64)
    for col in range(dim):
        vec = np.zeros(dim, dtype=complex)
        vec[col] = 1.0
        if u.arity == 1:
            out[:, col] = kernels.apply_1q(vec, u.matrix, targets[0])
        else:
            out[:, col] = kernels.apply_kq(vec, u.matrix, tgt)
    return out

"""Pure-numpy amplitude kernels (fallback path, vectorized).

Index convention: qubit ``q`` is bit ``q`` of the basis index, so in the
``[2] * n`` tensor view qubit ``q`` lives on axis ``n - 1 - q``.  For a
``k``-qubit gate matrix, bit ``a`` of the matrix index corresponds to
``targets[a]``.
"""
from __future__ import annotations

import numpy as np

NAME = "numpy"


def apply_1q(amps: np.ndarray, mat: np.ndarray, target: int) -> np.ndarray:
    n = amps.shape[0]
    view = amps.reshape(n >> (target + 1), 2, 1 << target)
    out = np.empty_like(view)
    out[:, 0, :] = mat[0, 0] * view[:, 0, :] + mat[0, 1] * view[:, 1, :]
    out[:, 1, :] = mat[1, 0] * view[:, 0, :] + mat[1, 1] * view[:, 1, :]
    return out.reshape(n)


def apply_kq(amps: np.ndarray, mat: np.ndarray, targets: np.ndarray) -> np.ndarray:
    n_qubits = amps.shape[0].bit_length() - 1
    k = len(targets)
    tensor = amps.reshape([2] * n_qubits)
    # axis of qubit q is n-1-q; matrix bit a (weight 2^a) pairs with targets[a],
    # so after moveaxis the first k axes are targets[k-1], ..., targets[0].
    axes = [n_qubits - 1 - int(q) for q in targets[::-1]]
    tensor = np.moveaxis(tensor, axes, range(k))
    shaped = tensor.reshape(1 << k, -1)
    shaped = mat @ shaped
    tensor = shaped.reshape([2] * n_qubits)
    tensor = np.moveaxis(tensor, range(k), axes)
    return np.ascontiguousarray(tensor).reshape(amps.shape[0])


def prob_one(amps: np.ndarray, target: int) -> float:
    n = amps.shape[0]
    view = amps.reshape(n >> (target + 1), 2, 1 << target)
    block = view[:, 1, :]
    return float(np.sum(block.real**2 + block.imag**2))


def collapse_remove(amps: np.ndarray, target: int, outcome: int, inv_norm: float) -> np.ndarray:
    n = amps.shape[0]
    view = amps.reshape(n >> (target + 1), 2, 1 << target)
    kept = view[:, outcome, :] * inv_norm
    return np.ascontiguousarray(kept).reshape(n >> 1)

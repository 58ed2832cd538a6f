import numpy as np
import pytest

from qsc.core import UnitarySpec, from_amplitudes


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger JIT compilation once so timed tests measure algorithm work."""
    from qsc import kernels

    amps = np.zeros(8, dtype=np.complex128)
    amps[0] = 1.0
    mat1 = np.eye(2, dtype=complex)
    mat2 = np.eye(4, dtype=complex)
    kernels.apply_1q(amps, mat1, 1)
    kernels.apply_kq(amps, mat2, np.array([0, 2], dtype=np.int64))
    kernels.prob_one(amps, 0)
    kernels.collapse_remove(amps, 1, 0, 1.0)


def random_state(rng, qubits):
    vec = rng.normal(size=1 << qubits) + 1j * rng.normal(size=1 << qubits)
    return from_amplitudes(vec)


def random_unitary(rng, qubits):
    dim = 1 << qubits
    mat = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return UnitarySpec(qubits, np.linalg.qr(mat)[0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

import numpy as np
import pytest

from qsc.core import PauliOperator, QscError, named_gate, pauli_from_dense

NAMES = ["I", "X", "Z", "Y"]


def all_single_paulis():
    return [PauliOperator.single(0, n) for n in NAMES]


def all_two_paulis():
    return [PauliOperator.single(0, a).compose(PauliOperator.single(1, b))
            for a in NAMES for b in NAMES]


class TestAlgebra:
    def test_composition_closed_and_squares(self):
        for p in all_single_paulis():
            sq = p.compose(p)
            assert not sq.bits
            assert sq.phase in (1, -1)

    def test_inverse(self):
        for p in all_two_paulis():
            ident = p.compose(p.inverse())
            assert ident.is_identity()

    def test_composition_vs_dense(self, rng):
        for _ in range(30):
            a = PauliOperator(int(rng.integers(0, 4)),
                              {q: (int(rng.integers(0, 2)), int(rng.integers(0, 2)))
                               for q in range(2)})
            b = PauliOperator(int(rng.integers(0, 4)),
                              {q: (int(rng.integers(0, 2)), int(rng.integers(0, 2)))
                               for q in range(2)})
            got = a.compose(b).dense([0, 1])
            want = a.dense([0, 1]) @ b.dense([0, 1])
            np.testing.assert_allclose(got, want, atol=1e-13)


class TestConjugation:
    @pytest.mark.parametrize("gate", ["h", "s", "sdg", "x", "y", "z"])
    def test_single_qubit_rules_vs_dense(self, gate):
        mat = named_gate(gate).matrix
        for p in all_single_paulis():
            want = mat @ p.dense([0]) @ mat.conj().T
            got = p.conjugate_gate(gate, [0]).dense([0])
            np.testing.assert_allclose(got, want, atol=1e-13)

    @pytest.mark.parametrize("gate", ["cz", "cnot", "swap"])
    def test_two_qubit_rules_vs_dense(self, gate):
        mat = named_gate(gate).matrix
        for p in all_two_paulis():
            want = mat @ p.dense([0, 1]) @ mat.conj().T
            got = p.conjugate_gate(gate, [0, 1]).dense([0, 1])
            np.testing.assert_allclose(got, want, atol=1e-13)

    def test_textbook_propagations(self):
        x = PauliOperator.single(0, "X")
        assert str(x.conjugate_gate("h", [0])) == "+Z0"
        y = x.conjugate_gate("s", [0])
        assert y.xz(0) == (1, 1) and y.phase == 1j  # S X S+ = Y, phase tracked

    def test_non_clifford_rejected(self):
        with pytest.raises(QscError):
            PauliOperator.single(0, "X").conjugate_gate("t", [0])


class TestDenseRecognition:
    def test_round_trip(self, rng):
        for _ in range(20):
            p = PauliOperator(int(rng.integers(0, 4)),
                              {q: (int(rng.integers(0, 2)), int(rng.integers(0, 2)))
                               for q in range(2)})
            back = pauli_from_dense(p.dense([0, 1]), [0, 1])
            assert back is not None
            np.testing.assert_allclose(back.dense([0, 1]), p.dense([0, 1]), atol=1e-12)

    def test_rejects_non_pauli(self):
        assert pauli_from_dense(named_gate("h").matrix, [0]) is None

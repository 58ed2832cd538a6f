import math

import numpy as np
import pytest

from qsc.core import (
    ChannelSpec,
    ChoiState,
    QscError,
    UnitarySpec,
    apply_superchannel,
    choi_of_unitary,
    density_of,
    from_amplitudes,
    gates_equal_up_to_phase,
    make_ebit,
    named_gate,
    partial_trace,
    trace_distance,
    unitary_of_choi,
    zero_state,
)

from conftest import random_state, random_unitary

SQ2 = 1.0 / math.sqrt(2.0)


def random_channel(rng, qubits, kraus_count=2):
    dim = 1 << qubits
    iso = np.linalg.qr(rng.normal(size=(kraus_count * dim, dim))
                       + 1j * rng.normal(size=(kraus_count * dim, dim)))[0]
    ops = tuple(iso[i * dim:(i + 1) * dim, :] for i in range(kraus_count))
    return ChannelSpec(qubits, qubits, ops)


class TestChoi:
    def test_identity_is_ebit(self):
        choi = choi_of_unitary(named_gate("i"))
        np.testing.assert_allclose(choi.state.amplitudes,
                                   make_ebit(zero_state(0)).amplitudes)

    def test_x_choi(self):
        choi = choi_of_unitary(named_gate("x"))
        np.testing.assert_allclose(choi.state.amplitudes, [0, SQ2, SQ2, 0])

    def test_h_choi(self):
        choi = choi_of_unitary(named_gate("h"))
        np.testing.assert_allclose(choi.state.amplitudes, [0.5, 0.5, 0.5, -0.5])

    @pytest.mark.parametrize("arity", [1, 2])
    def test_round_trip(self, rng, arity):
        u = random_unitary(rng, arity)
        back = unitary_of_choi(choi_of_unitary(u))
        assert gates_equal_up_to_phase(u.matrix, back.matrix, atol=1e-10)

    def test_rejects_non_choi(self):
        bad = ChoiState(1, zero_state(2))  # |00> has a pure input marginal
        with pytest.raises(QscError):
            unitary_of_choi(bad)


class TestChannels:
    def test_trace_preservation_enforced(self):
        with pytest.raises(QscError):
            ChannelSpec(1, 1, (0.5 * np.eye(2),))

    def test_superchannel_identity(self, rng):
        rho = density_of(random_state(rng, 1))
        ident = ChannelSpec.from_unitary(named_gate("i"))
        out = apply_superchannel(named_gate("i"), named_gate("i"), ident, rho)
        assert trace_distance(out, rho) < 1e-12

    def test_superchannel_swap_discards_data(self, rng):
        rho = density_of(random_state(rng, 1))
        eye2 = UnitarySpec(2, np.eye(4))
        out = apply_superchannel(eye2, named_gate("swap"),
                                 ChannelSpec.from_unitary(eye2), rho)
        want = np.zeros((2, 2), dtype=complex)
        want[0, 0] = 1.0
        assert trace_distance(out, want) < 1e-12

    def test_superchannel_vs_dense_chain(self, rng):
        worst = 0.0
        for _ in range(20):
            pre = random_unitary(rng, 2)
            post = random_unitary(rng, 2)
            phi = random_channel(rng, 2)
            rho = density_of(random_state(rng, 1))
            got = apply_superchannel(pre, post, phi, rho)
            anc = np.zeros((2, 2), dtype=complex)
            anc[0, 0] = 1.0
            joint = np.kron(anc, rho)
            joint = pre.matrix @ joint @ pre.matrix.conj().T
            joint = sum(k @ joint @ k.conj().T for k in phi.kraus_ops)
            joint = post.matrix @ joint @ post.matrix.conj().T
            want = partial_trace(joint, 2, [1])
            worst = max(worst, trace_distance(got, want))
        assert worst <= 1e-10

    def test_dimension_mismatch(self, rng):
        rho = density_of(random_state(rng, 1))
        with pytest.raises(QscError):
            apply_superchannel(named_gate("i"), random_unitary(rng, 2),
                               ChannelSpec.from_unitary(named_gate("i")), rho)

    def test_partial_trace_of_product(self, rng):
        a = random_state(rng, 1)
        b = random_state(rng, 1)
        joint = np.kron(density_of(b), density_of(a))  # qubit0 = a
        np.testing.assert_allclose(partial_trace(joint, 2, [1]), density_of(a),
                                   atol=1e-12)
        np.testing.assert_allclose(partial_trace(joint, 2, [0]), density_of(b),
                                   atol=1e-12)

import itertools
import math

import numpy as np
import pytest

from qsc.core import (
    RngPolicy,
    SimulationError,
    UnitarySpec,
    X_BASIS,
    Z_BASIS,
    apply_gate,
    fidelity,
    from_amplitudes,
    named_gate,
    single_qubit,
)
from qsc.core.gates import H, S, SDG, T, X, Z
from qsc.core.workspace import Workspace
from qsc.transistor import (
    ChoiStored,
    MagicT,
    SChain,
    Wire,
    WireBasisOutcome,
    activate,
    build_chain_transistor,
    build_choi_transistor,
    build_magic_t_transistor,
    build_transistor,
    conjugate_variant,
    induced_gate,
    inject_input_by_measurement,
    inject_input_by_teleport,
    inject_magic_T,
    logical_gate,
    refresh,
    resolve_frame,
    run_backward,
)

from conftest import random_state, random_unitary


def run_through(kind, psi, policy, recipe=None, backward=False):
    ws = Workspace()
    data = ws.alloc_state(psi)
    t = build_transistor(kind, ws)
    if backward:
        t = run_backward(t)
    inject_input_by_teleport(t, data, policy, ws)
    activate(t, policy, ws, recipe=recipe)
    resolve_frame(t, ws)
    return ws.extract_state(t.right_modes)


class TestBuilders:
    def test_wire1_is_path_cluster(self):
        ws = Workspace()
        t = build_chain_transistor(Wire(1), ws)
        state = ws.state
        eye = np.eye(2)
        for ops in ([X, Z, eye], [Z, X, Z], [eye, Z, X]):
            stab = np.kron(ops[2], np.kron(ops[1], ops[0]))
            assert np.vdot(state.amplitudes, stab @ state.amplitudes) == \
                pytest.approx(1.0, abs=1e-12)
        assert t.status == "fresh" and t.bulk and t.left_modes and t.right_modes

    def test_schain_state_equals_wire2(self):
        ws1, ws2 = Workspace(), Workspace()
        build_chain_transistor(Wire(2), ws1)
        build_chain_transistor(SChain(), ws2)
        np.testing.assert_allclose(ws1.state.amplitudes, ws2.state.amplitudes)

    def test_choi_identity_is_ebit(self):
        ws = Workspace()
        t = build_choi_transistor(named_gate("i"), ws)
        np.testing.assert_allclose(ws.state.amplitudes,
                                   [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])

    def test_choi_cz_structure(self):
        from qsc.core import make_ebit, zero_state, apply_gate as ag

        ws = Workspace()
        t = build_choi_transistor(named_gate("cz"), ws)
        # (I x I x CZ)(|omega> x |omega>) with legs ordered in1,in2,out1,out2
        ref = make_ebit(make_ebit(zero_state(0)))
        from qsc.core import permute_qubits
        ref = permute_qubits(ref, [0, 2, 1, 3])  # pairs (0,1),(2,3) -> legs
        ref = ag(ref, named_gate("cz"), [2, 3])
        assert fidelity(ws.state, ref) == pytest.approx(1.0, abs=1e-12)

    def test_choi_arity_cap(self):
        ws = Workspace()
        with pytest.raises(Exception):
            build_choi_transistor(UnitarySpec(3, np.eye(8)), ws)


class TestInjection:
    def test_wire_z_basis_injects_plus(self):
        for outcome in (0, 1):
            ws = Workspace()
            t = build_chain_transistor(Wire(1), ws)
            pol = RngPolicy.forced([outcome, 0])
            recs = inject_input_by_measurement(t, Z_BASIS, pol, ws)
            assert recs[0].probability == pytest.approx(0.5, abs=1e-12)
            activate(t, pol, ws)
            resolve_frame(t, ws)
            want = apply_gate(single_qubit("+"), UnitarySpec(1, H), [0])
            assert ws.fidelity_with(t.right_modes, want) >= 1 - 1e-10

    def test_choi_z_basis_collapses_output(self):
        ws = Workspace()
        t = build_choi_transistor(named_gate("i"), ws)
        inject_input_by_measurement(t, Z_BASIS, RngPolicy.forced([0]), ws)
        assert ws.fidelity_with(t.right_modes, single_qubit("0")) >= 1 - 1e-12

    @pytest.mark.parametrize("a,b", [(0, 0), (0, 1), (1, 0), (1, 1)])
    def test_teleport_into_identity(self, rng, a, b):
        psi = random_state(rng, 1)
        out = run_through(ChoiStored(named_gate("i")), psi,
                          RngPolicy.forced([a, b]))
        assert fidelity(out, psi) >= 1 - 1e-10

    def test_teleport_examples(self):
        out = run_through(ChoiStored(named_gate("x")), single_qubit("0"),
                          RngPolicy.forced([0, 0]))
        assert fidelity(out, single_qubit("1")) >= 1 - 1e-12
        out = run_through(ChoiStored(named_gate("z")), single_qubit("+"),
                          RngPolicy.forced([0, 0]))
        assert fidelity(out, single_qubit("-")) >= 1 - 1e-12

    def test_double_injection_rejected(self):
        ws = Workspace()
        t = build_chain_transistor(Wire(1), ws)
        pol = RngPolicy.seeded(0)
        inject_input_by_measurement(t, Z_BASIS, pol, ws)
        with pytest.raises(SimulationError):
            inject_input_by_measurement(t, Z_BASIS, pol, ws)


class TestActivation:
    def test_wire_examples(self, rng):
        # input |0>, outcome 0 -> H|0> = |+>
        ws = Workspace()
        data = ws.alloc_state(single_qubit("0"))
        t = build_chain_transistor(Wire(1), ws)
        pol = RngPolicy.forced([0, 0, 0])
        inject_input_by_teleport(t, data, pol, ws)
        activate(t, pol, ws)
        resolve_frame(t, ws)
        assert ws.fidelity_with(t.right_modes, single_qubit("+")) >= 1 - 1e-10

    def test_wire2_identity(self, rng):
        psi = random_state(rng, 1)
        out = run_through(Wire(2), psi, RngPolicy.forced([0, 0, 0, 0]))
        assert fidelity(out, psi) >= 1 - 1e-10

    def test_chain_length_parity_rule(self, rng):
        for length in range(1, 7):
            psi = random_state(rng, 1)
            want = apply_gate(psi, UnitarySpec(1, np.linalg.matrix_power(H, length)), [0])
            for _ in range(10):
                force = [int(b) for b in rng.integers(0, 2, size=length + 2)]
                out = run_through(Wire(length), psi, RngPolicy.forced(force))
                assert fidelity(out, want) >= 1 - 1e-10

    def test_outcome_independence_exhaustive(self, rng):
        for length in (1, 2, 3, 4):
            psi = random_state(rng, 1)
            want = apply_gate(psi, UnitarySpec(1, np.linalg.matrix_power(H, length)), [0])
            for force in itertools.product([0, 1], repeat=length + 2):
                out = run_through(Wire(length), psi, RngPolicy.forced(list(force)))
                assert fidelity(out, want) >= 1 - 1e-10

    def test_schain_is_s(self, rng):
        psi = random_state(rng, 1)
        want = apply_gate(psi, UnitarySpec(1, S), [0])
        for force in itertools.product([0, 1], repeat=4):
            out = run_through(SChain(), psi, RngPolicy.forced(list(force)))
            assert fidelity(out, want) >= 1 - 1e-10

    def test_schain_on_plus(self):
        out = run_through(SChain(), single_qubit("+"), RngPolicy.forced([0, 0, 0, 0]))
        assert fidelity(out, from_amplitudes([1.0, 1.0j])) >= 1 - 1e-10

    def test_double_activation_rejected(self):
        ws = Workspace()
        t = build_chain_transistor(Wire(1), ws)
        pol = RngPolicy.seeded(1)
        inject_input_by_measurement(t, Z_BASIS, pol, ws)
        activate(t, pol, ws)
        with pytest.raises(SimulationError):
            activate(t, pol, ws)

    def test_activation_requires_input(self):
        ws = Workspace()
        t = build_chain_transistor(Wire(1), ws)
        with pytest.raises(SimulationError):
            activate(t, RngPolicy.seeded(0), ws)


class TestInducedGate:
    def test_examples(self):
        u, b = induced_gate(WireBasisOutcome((0, 0)), Wire(2))
        assert np.allclose(u.matrix, np.eye(2)) and b.is_identity()
        u, b = induced_gate(WireBasisOutcome((0,)), Wire(1))
        assert np.allclose(u.matrix, H) and b.is_identity()
        u, b = induced_gate(WireBasisOutcome((1, 0)), Wire(2))
        assert np.allclose(u.matrix, np.eye(2))
        np.testing.assert_allclose(b.dense([0]), Z, atol=1e-12)

    def test_matches_raw_product(self, rng):
        # byproduct * normal form reproduces H Z^{i_n} ... H Z^{i_1}
        for length in range(1, 6):
            bits = [int(x) for x in rng.integers(0, 2, size=length)]
            u, b = induced_gate(WireBasisOutcome(tuple(bits)), Wire(length))
            raw = np.eye(2, dtype=complex)
            for bit in bits:
                raw = H @ np.linalg.matrix_power(Z, bit) @ raw
            got = b.dense([0]) @ u.matrix
            from qsc.core import gates_equal_up_to_phase
            assert gates_equal_up_to_phase(got, raw, atol=1e-12)


class TestMagicT:
    def test_t_on_basis_states(self):
        for label in ("0", "1"):
            ws = Workspace()
            (target,) = ws.alloc_state(single_qubit(label))
            inject_magic_T(ws, target, RngPolicy.seeded(0))
            assert ws.fidelity_with([target], single_qubit(label)) >= 1 - 1e-12

    @pytest.mark.parametrize("branch", [0, 1])
    def test_t_on_plus_both_branches(self, branch):
        ws = Workspace()
        (target,) = ws.alloc_state(single_qubit("+"))
        recs = inject_magic_T(ws, target, RngPolicy.forced([branch]))
        assert recs[0].probability == pytest.approx(0.5, abs=1e-12)
        want = from_amplitudes([1.0, np.exp(1j * math.pi / 4)])
        assert ws.fidelity_with([target], want) >= 1 - 1e-12

    @pytest.mark.parametrize("branch", [0, 1])
    def test_t_dagger_feedforward(self, rng, branch):
        psi = random_state(rng, 1)
        ws = Workspace()
        (target,) = ws.alloc_state(psi)
        inject_magic_T(ws, target, RngPolicy.forced([branch]), dagger=True)
        want = apply_gate(psi, UnitarySpec(1, T.conj().T), [0])
        assert ws.fidelity_with([target], want) >= 1 - 1e-12

    def test_magic_transistor_kind(self, rng):
        psi = random_state(rng, 1)
        want = apply_gate(psi, UnitarySpec(1, T), [0])
        for force in itertools.product([0, 1], repeat=3):
            out = run_through(MagicT(), psi, RngPolicy.forced(list(force)))
            assert fidelity(out, want) >= 1 - 1e-10


class TestVariantsAndLifecycle:
    def test_sdg_recipe(self, rng):
        psi = single_qubit("+")
        out = run_through(SChain(), psi, RngPolicy.forced([0, 0, 0, 0]),
                          recipe=conjugate_variant(SChain()))
        assert fidelity(out, from_amplitudes([1.0, -1.0j])) >= 1 - 1e-10

    def test_tdg_then_t_is_identity(self, rng):
        psi = random_state(rng, 1)
        pol = RngPolicy.seeded(5)
        mid = run_through(MagicT(), psi, pol, recipe=conjugate_variant(MagicT()))
        out = run_through(MagicT(), mid, RngPolicy.seeded(6))
        assert fidelity(out, psi) >= 1 - 1e-10

    def test_sdg_matrix_identity(self):
        np.testing.assert_allclose(Z @ S, SDG, atol=1e-12)

    def test_backward_symmetric_gate(self):
        out = run_through(ChoiStored(named_gate("h")), single_qubit("0"),
                          RngPolicy.forced([0, 0]), backward=True)
        assert fidelity(out, single_qubit("+")) >= 1 - 1e-10

    def test_backward_transpose_law(self, rng):
        for _ in range(20):
            arity = int(rng.integers(1, 3))
            u = random_unitary(rng, arity)
            psi = random_state(rng, arity)
            force = [int(b) for b in rng.integers(0, 2, size=2 * arity)]
            out = run_through(ChoiStored(u), psi, RngPolicy.forced(force),
                              backward=True)
            want = apply_gate(psi, u.transpose(), list(range(arity)))
            assert fidelity(out, want) >= 1 - 1e-10

    def test_double_reversal(self):
        ws = Workspace()
        t = build_choi_transistor(named_gate("h"), ws)
        again = run_backward(run_backward(t))
        assert again.left_modes == t.left_modes
        assert again.right_modes == t.right_modes
        assert not again.reverse

    def test_refresh_lifecycle(self, rng):
        ws = Workspace()
        psi = random_state(rng, 1)
        data = ws.alloc_state(psi)
        t = build_chain_transistor(Wire(1), ws)
        pol = RngPolicy.seeded(9)
        with pytest.raises(SimulationError):
            refresh(t, ws)  # refreshing a fresh transistor is a bug
        inject_input_by_teleport(t, data, pol, ws)
        activate(t, pol, ws)
        resolve_frame(t, ws)
        first = ws.extract_state(t.right_modes)
        old_right = list(t.right_modes)
        refresh(t, ws)
        assert t.status == "fresh"
        assert len(t.left_modes) == 1 and len(t.bulk) == 1
        inject_input_by_teleport(t, old_right, pol, ws)
        activate(t, pol, ws)
        resolve_frame(t, ws)
        second = ws.extract_state(t.right_modes)
        # two H's in sequence return the input
        assert fidelity(second, psi) >= 1 - 1e-10
        assert fidelity(first, apply_gate(psi, UnitarySpec(1, H), [0])) >= 1 - 1e-10

"""Embeddings, ansatz construction, and the Hadamard-test executor."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vqlsgp import sim
from vqlsgp.circuits import (
    AnsatzSpec,
    HadamardTestSpec,
    StatePrep,
    amplitude_embedding,
    basis_embedding,
    build_ansatz,
    cz_pairs,
    hadamard_test,
    op_to_matrix,
    op_to_text,
)
from vqlsgp.errors import (
    IndexOutOfRange,
    MissingReuploadVector,
    ParamCountMismatch,
    ZeroVector,
)
from vqlsgp.sim import CircuitOp, apply_op, zero_state


def state_of(op, n):
    return apply_op(zero_state(n), op)


class TestBasisEmbedding:
    def test_zero_index_is_empty_circuit(self):
        op = basis_embedding(0, 4)
        assert op.gates == ()
        np.testing.assert_array_equal(state_of(op, 4), zero_state(4))

    def test_least_significant_bit(self):
        op = basis_embedding(1, 4)
        assert len(op.gates) == 1 and op.gates[0].targets == (3,)
        state = state_of(op, 4)
        assert state[1] == 1.0

    @pytest.mark.parametrize("index", range(16))
    def test_every_basis_state_is_exact(self, index):
        state = state_of(basis_embedding(index, 4), 4)
        expected = np.zeros(16)
        expected[index] = 1.0
        np.testing.assert_array_equal(state.real, expected)

    def test_gate_budget(self):
        for index in range(16):
            assert len(basis_embedding(index, 4).gates) <= 4

    def test_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            basis_embedding(16, 4)


class TestAmplitudeEmbedding:
    def test_first_basis_vector(self):
        op = amplitude_embedding(np.array([1.0, 0.0, 0.0, 0.0]))
        np.testing.assert_allclose(state_of(op, 2), zero_state(2), atol=1e-12)

    def test_uniform_pair_is_single_rotation(self):
        op = amplitude_embedding(np.array([1.0, 1.0]) / np.sqrt(2))
        assert len(op.gates) == 1
        assert op.gates[0].kind == "ry"
        assert op.gates[0].angle == pytest.approx(np.pi / 2)
        np.testing.assert_allclose(state_of(op, 1).real,
                                   [1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-12)

    def test_benchmark_labels_round_trip(self):
        x = np.linspace(-1.0, 2.2, 16)
        y = np.sin(2 * x) + np.cos(5 * x)
        y += np.random.default_rng(0).normal(0, 0.1, 16)
        state = state_of(amplitude_embedding(y), 4)
        np.testing.assert_allclose(state.real, y / np.linalg.norm(y), atol=1e-10)
        np.testing.assert_allclose(state.imag, 0.0, atol=1e-12)

    @given(st.integers(1, 4), st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_random_signed_vectors(self, n, seed):
        rng = np.random.default_rng(seed)
        vec = rng.normal(size=2**n)
        state = state_of(amplitude_embedding(vec), n)
        np.testing.assert_allclose(state.real, vec / np.linalg.norm(vec), atol=1e-10)

    def test_sparse_vector_with_signs(self):
        vec = np.array([0.0, -3.0, 0.0, 4.0])
        state = state_of(amplitude_embedding(vec), 2)
        np.testing.assert_allclose(state.real, [0.0, -0.6, 0.0, 0.8], atol=1e-12)

    def test_scaling_recovers_input(self):
        rng = np.random.default_rng(3)
        vec = rng.normal(size=8) * 7.3
        state = state_of(amplitude_embedding(vec), 3)
        np.testing.assert_allclose(state.real * np.linalg.norm(vec), vec, atol=1e-9)

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVector):
            amplitude_embedding(np.zeros(4))


class TestStatePrep:
    def test_basis_state_vector(self):
        prep = StatePrep.basis(5)
        state = prep.state(3)
        assert state[5] == 1.0 and np.sum(state != 0) == 1

    def test_amplitude_matches_op(self):
        rng = np.random.default_rng(8)
        vec = rng.normal(size=8)
        prep = StatePrep.amplitude(vec)
        np.testing.assert_allclose(
            state_of(prep.op(3), 3).real, prep.state(3), atol=1e-10
        )


class TestAnsatz:
    def test_parameter_count_formula(self):
        for n, p in [(2, 0), (4, 3), (3, 5)]:
            spec = AnsatzSpec(kind="hea", n_qubits=n, layers=p)
            assert spec.param_count == n * (p + 1)

    def test_hea_single_column(self):
        spec = AnsatzSpec(kind="hea", n_qubits=2, layers=0)
        state = state_of(build_ansatz(spec, [np.pi, 0.0]), 2)
        expected = np.zeros(4)
        expected[2] = 1.0  # |10>
        np.testing.assert_allclose(state.real, expected, atol=1e-12)

    @pytest.mark.parametrize("layers", [0, 1, 3])
    def test_hea_zero_angles_fix_the_zero_state(self, layers):
        spec = AnsatzSpec(kind="hea", n_qubits=3, layers=layers)
        state = state_of(build_ansatz(spec, np.zeros(spec.param_count)), 3)
        np.testing.assert_allclose(state, zero_state(3), atol=1e-14)

    def test_hea_structure_matches_manual_composition(self):
        spec = AnsatzSpec(kind="hea", n_qubits=3, layers=2)
        rng = np.random.default_rng(0)
        theta = rng.uniform(0, 2 * np.pi, spec.param_count)
        state = state_of(build_ansatz(spec, theta), 3)
        manual = zero_state(3)
        for q in range(3):
            manual = sim.apply_gate(manual, sim.ry(q, theta[q]))
        for layer in (1, 2):
            for a, b in ((0, 1), (1, 2)):
                manual = sim.apply_gate(manual, sim.cz(a, b))
            for q in range(3):
                manual = sim.apply_gate(manual, sim.ry(q, theta[3 * layer + q]))
        np.testing.assert_allclose(state, manual, atol=1e-13)

    def test_uhea_zero_angles_is_cz_of_embedded_state(self):
        rng = np.random.default_rng(1)
        vec = rng.normal(size=8)
        spec = AnsatzSpec(kind="uhea", n_qubits=3, layers=1, reupload=vec)
        state = state_of(build_ansatz(spec, np.zeros(6)), 3)
        expected = state_of(amplitude_embedding(vec), 3)
        expected = sim.apply_gate(expected, sim.cz(0, 1))
        expected = sim.apply_gate(expected, sim.cz(1, 2))
        np.testing.assert_allclose(state, expected, atol=1e-12)

    def test_muhea_layout(self):
        # initial rotation column, then per layer [embedding, cz chain, column]
        rng = np.random.default_rng(2)
        vec = rng.normal(size=4)
        spec = AnsatzSpec(kind="muhea", n_qubits=2, layers=2, reupload=vec)
        theta = rng.uniform(0, 2 * np.pi, 6)
        state = state_of(build_ansatz(spec, theta), 2)
        manual = zero_state(2)
        emb = amplitude_embedding(vec)
        for q in range(2):
            manual = sim.apply_gate(manual, sim.ry(q, theta[q]))
        for layer in (1, 2):
            manual = apply_op(manual, emb)
            manual = sim.apply_gate(manual, sim.cz(0, 1))
            for q in range(2):
                manual = sim.apply_gate(manual, sim.ry(q, theta[2 * layer + q]))
        np.testing.assert_allclose(state, manual, atol=1e-13)

    @pytest.mark.parametrize("kind", ["hea", "uhea", "muhea"])
    def test_output_is_normalized(self, kind):
        rng = np.random.default_rng(7)
        reupload = rng.normal(size=8) if kind != "hea" else None
        spec = AnsatzSpec(kind=kind, n_qubits=3, layers=2, reupload=reupload)
        for _ in range(5):
            theta = rng.uniform(0, 2 * np.pi, spec.param_count)
            state = state_of(build_ansatz(spec, theta), 3)
            assert abs(np.linalg.norm(state) - 1.0) <= 1e-10

    def test_wrong_parameter_count(self):
        spec = AnsatzSpec(kind="hea", n_qubits=2, layers=1)
        with pytest.raises(ParamCountMismatch):
            build_ansatz(spec, np.zeros(3))

    def test_reupload_required(self):
        with pytest.raises(MissingReuploadVector):
            AnsatzSpec(kind="uhea", n_qubits=2, layers=1)

    def test_cz_patterns(self):
        assert cz_pairs(4, "chain") == [(0, 1), (1, 2), (2, 3)]
        assert cz_pairs(4, "alternating") == [(0, 1), (2, 3), (1, 2)]
        spec = AnsatzSpec(kind="hea", n_qubits=3, layers=1,
                          cz_pattern="alternating")
        state = state_of(build_ansatz(spec, np.zeros(6)), 3)
        np.testing.assert_allclose(state, zero_state(3), atol=1e-14)


class TestHadamardTest:
    def test_identity_operator(self):
        spec = HadamardTestSpec(n_system=2, operator=(CircuitOp(()),), part="re")
        assert hadamard_test(spec) == pytest.approx(1.0)

    def test_z_between_hadamards_has_zero_expectation(self):
        op = CircuitOp((sim.h(0), sim.z(0), sim.h(0)))
        spec = HadamardTestSpec(n_system=1, operator=(op,), part="re")
        assert hadamard_test(spec) == pytest.approx(0.0, abs=1e-12)

    def test_imaginary_part_of_sdg_like_phase(self):
        # W = X Y on one qubit has <0|XY|0> = i ... check the imaginary reader.
        op = CircuitOp((sim.y(0), sim.x(0)))
        w = op_to_matrix(op, 1)
        expected = w[0, 0]
        re = hadamard_test(HadamardTestSpec(1, (op,), part="re"))
        im = hadamard_test(HadamardTestSpec(1, (op,), part="im"))
        assert re + 1j * im == pytest.approx(expected, abs=1e-12)

    def test_random_operators_match_matrix_element(self):
        rng = np.random.default_rng(33)
        for _ in range(200):
            n = int(rng.integers(1, 4))
            gates = []
            for _ in range(int(rng.integers(1, 6))):
                kind = str(rng.choice(["ry", "h", "x", "y", "z", "cz"]))
                if kind == "cz" and n > 1:
                    q = int(rng.integers(0, n - 1))
                    gates.append(sim.cz(q, q + 1))
                elif kind != "cz":
                    q = int(rng.integers(0, n))
                    gates.append(sim.Gate(kind, (q,), float(rng.uniform(0, 2 * np.pi))))
            op = CircuitOp(tuple(gates))
            expected = op_to_matrix(op, n)[0, 0]
            part = str(rng.choice(["re", "im"]))
            value = hadamard_test(HadamardTestSpec(n, (op,), part=part))
            target = expected.real if part == "re" else expected.imag
            assert value == pytest.approx(target, abs=1e-10)

    def test_shots_mode_reproducible(self):
        op = CircuitOp((sim.ry(0, 1.23),))
        spec = HadamardTestSpec(n_system=1, operator=(op,), part="re")
        a = hadamard_test(spec, mode="shots", shots=4000,
                          rng=np.random.default_rng(5))
        b = hadamard_test(spec, mode="shots", shots=4000,
                          rng=np.random.default_rng(5))
        assert a == b
        exact = hadamard_test(spec)
        assert abs(a - exact) < 0.05


def test_op_to_text_dump():
    op = CircuitOp((sim.ry(0, 0.5), sim.cz(0, 1), sim.h(1)))
    text = op_to_text(op)
    assert text == "ry(0,0.5) cz(0,1) h(1)"

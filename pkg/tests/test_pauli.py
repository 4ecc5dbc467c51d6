"""Pauli decomposition: round trips, coefficient formulas, and padding."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_spd
from vqlsgp import pauli
from vqlsgp.errors import DimensionMismatch, NonRealInput, NotPowerOfTwo
from vqlsgp.pauli import (
    PauliString,
    decompose,
    pad_system,
    pauli_to_matrix,
    reconstruct,
    reconstruct_real,
)


def random_symmetric(rng, dim):
    m = rng.normal(size=(dim, dim))
    return m + m.T


class TestPauliToMatrix:
    def test_identity(self):
        np.testing.assert_array_equal(pauli_to_matrix(PauliString("I")), np.eye(2))

    def test_z(self):
        np.testing.assert_array_equal(
            pauli_to_matrix(PauliString("Z")), np.diag([1.0, -1.0])
        )

    def test_two_qubit_kronecker(self):
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        z = np.diag([1.0, -1.0]).astype(complex)
        np.testing.assert_array_equal(pauli_to_matrix(PauliString("XZ")), np.kron(x, z))

    def test_rejects_bad_letters(self):
        with pytest.raises(ValueError):
            PauliString("AB")

    @given(st.integers(1, 3), st.integers(0, 10**6))
    @settings(max_examples=30, deadline=None)
    def test_strings_are_unitary(self, n, seed):
        rng = np.random.default_rng(seed)
        letters = "".join(rng.choice(list("IXYZ")) for _ in range(n))
        mat = pauli_to_matrix(PauliString(letters))
        np.testing.assert_allclose(mat @ mat.conj().T, np.eye(2**n), atol=1e-14)


class TestDecompose:
    def test_identity_single_term(self):
        d = decompose(np.eye(4))
        assert d.terms == ((1.0, PauliString("II")),)

    def test_symmetric_2x2_by_hand(self):
        d = decompose(np.array([[2.0, 1.0], [1.0, 0.0]]))
        assert dict((str(s), c) for c, s in d.terms) == {"I": 1.0, "X": 1.0, "Z": 1.0}

    def test_terms_sorted_lexicographically(self):
        rng = np.random.default_rng(1)
        d = decompose(random_symmetric(rng, 8))
        strings = [str(s) for _, s in d.terms]
        assert strings == sorted(strings)

    def test_coefficient_trace_formula(self):
        rng = np.random.default_rng(2)
        a = random_symmetric(rng, 8)
        for coeff, s in decompose(a).terms:
            recomputed = np.trace(pauli_to_matrix(s) @ a) / 8.0
            assert abs(recomputed.imag) < 1e-12
            assert coeff == pytest.approx(recomputed.real, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_round_trip(self, n):
        rng = np.random.default_rng(n)
        a = random_symmetric(rng, 2**n)
        again = reconstruct(decompose(a, cutoff=0.0))
        np.testing.assert_allclose(again, a, atol=1e-12)
        assert np.abs(again.imag).max() < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_symmetric_term_count_bound(self, n):
        rng = np.random.default_rng(10 + n)
        a = random_symmetric(rng, 2**n)
        d = decompose(a, cutoff=0.0)
        assert len(d) <= (4**n + 2**n) // 2
        assert all(s.y_count() % 2 == 0 for _, s in d.terms)

    def test_cutoff_drops_small_terms(self):
        a = np.eye(4) + 1e-13 * np.diag([1.0, -1.0, 1.0, -1.0])
        assert len(decompose(a, cutoff=1e-10)) == 1
        assert len(decompose(a, cutoff=0.0)) > 1

    def test_rejects_nonsymmetric_real(self):
        with pytest.raises(NonRealInput):
            decompose(np.array([[0.0, 1.0], [-1.0, 0.0]]))

    def test_rejects_complex(self):
        with pytest.raises(NonRealInput):
            decompose(np.array([[1.0, 1j], [-1j, 1.0]]))

    def test_rejects_non_power_of_two(self):
        with pytest.raises(NotPowerOfTwo):
            decompose(np.eye(3))

    def test_benchmark_grid_counts(self, k_hat_rbf, k_hat_mt):
        assert len(decompose(k_hat_rbf)) == 41
        assert len(decompose(k_hat_mt)) == 23


class TestReconstruct:
    def test_single_identity_term(self):
        d = pauli.DecomposedOperator(n_qubits=2, terms=((1.0, PauliString("II")),))
        np.testing.assert_array_equal(reconstruct(d), np.eye(4))

    def test_empty_terms_give_zero(self):
        d = pauli.DecomposedOperator(n_qubits=2, terms=())
        np.testing.assert_array_equal(reconstruct(d), np.zeros((4, 4)))

    def test_reconstruct_real_validates(self):
        d = pauli.DecomposedOperator(n_qubits=1, terms=((1.0, PauliString("Y")),))
        with pytest.raises(NonRealInput):
            reconstruct_real(d)

    def test_matches_kronecker_sum(self):
        rng = np.random.default_rng(5)
        d = decompose(random_symmetric(rng, 8))
        expected = sum(c * pauli_to_matrix(s) for c, s in d.terms)
        np.testing.assert_allclose(reconstruct(d), expected, atol=1e-12)


class TestPadSystem:
    def test_power_of_two_unchanged(self):
        a = np.eye(16)
        b = np.arange(16.0)
        a_pad, b_pad, original = pad_system(a, b)
        assert original == 16
        np.testing.assert_array_equal(a_pad, a)
        np.testing.assert_array_equal(b_pad, b)

    def test_three_to_four(self):
        a_pad, b_pad, original = pad_system(np.eye(3), np.array([1.0, 0.0, 0.0]))
        assert original == 3
        np.testing.assert_array_equal(a_pad, np.eye(4))
        np.testing.assert_array_equal(b_pad, [1.0, 0.0, 0.0, 0.0])

    def test_padded_solution_matches_direct_solve(self):
        rng = np.random.default_rng(9)
        a = random_spd(rng, 5)
        b = rng.normal(size=5)
        a_pad, b_pad, original = pad_system(a, b)
        x_pad = np.linalg.solve(a_pad, b_pad)
        np.testing.assert_allclose(x_pad[:original], np.linalg.solve(a, b), rtol=1e-10)
        np.testing.assert_allclose(x_pad[original:], 0.0, atol=1e-12)

    @pytest.mark.parametrize("dim", [2, 3, 5, 6, 7, 8])
    def test_padding_adds_unit_eigenvalues(self, dim):
        rng = np.random.default_rng(dim)
        a = random_spd(rng, dim)
        a_pad, _, original = pad_system(a, np.zeros(dim))
        expected = np.sort(np.concatenate([
            np.linalg.eigvalsh(a), np.ones(a_pad.shape[0] - original)
        ]))
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(a_pad)), expected,
                                   rtol=1e-10)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            pad_system(np.eye(3), np.zeros(4))

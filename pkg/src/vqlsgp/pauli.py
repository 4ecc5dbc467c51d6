"""Pauli strings, weighted-Pauli decomposition of real matrices, and padding.

A Pauli string acts on basis states as a signed (possibly imaginary)
permutation, which keeps the trace inner products cheap: every coefficient is
a single gather-and-sum over the matrix diagonal band hit by the permutation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonRealInput, NotPowerOfTwo

PAULI_LETTERS = "IXYZ"

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

DEFAULT_CUTOFF = 1e-10
_IMAG_TOL = 1e-10


@dataclass(frozen=True, order=True)
class PauliString:
    """A tensor product of single-qubit Paulis, e.g. "IXZZ"."""

    letters: str

    def __post_init__(self):
        if not self.letters or any(c not in PAULI_LETTERS for c in self.letters):
            raise ValueError(f"invalid Pauli string {self.letters!r}")

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.letters

    def y_count(self) -> int:
        return self.letters.count("Y")


def pauli_to_matrix(s: PauliString) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the string (Kronecker product, qubit 0 first)."""
    mat = PAULI_MATRICES[s.letters[0]]
    for c in s.letters[1:]:
        mat = np.kron(mat, PAULI_MATRICES[c])
    return mat


def _permutation_phase(letters: str) -> tuple[np.ndarray, np.ndarray]:
    """Action on basis states: P|j> = phase[j] |perm[j]>."""
    n = len(letters)
    dim = 1 << n
    j = np.arange(dim)
    flip = 0
    phase = np.ones(dim, dtype=complex)
    for q, c in enumerate(letters):
        bit = 1 << (n - 1 - q)
        if c in "XY":
            flip |= bit
        if c == "Y":
            phase = phase * np.where(j & bit, -1j, 1j)
        elif c == "Z":
            phase = phase * np.where(j & bit, -1.0, 1.0)
    return j ^ flip, phase


@dataclass(frozen=True)
class DecomposedOperator:
    """Weighted Pauli-string expansion of a real matrix: sum_l c_l P_l."""

    n_qubits: int
    terms: tuple[tuple[float, PauliString], ...]

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms])

    def strings(self) -> list[PauliString]:
        return [s for _, s in self.terms]


def _require_power_of_two(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim <= 0 or (1 << n) != dim:
        raise NotPowerOfTwo(f"dimension {dim} is not a power of two")
    return n


def decompose(a, cutoff: float = DEFAULT_CUTOFF) -> DecomposedOperator:
    """Expand a real square matrix over Pauli strings via trace inner products.

    Coefficients are Tr(P_l A) / 2^n; terms with |c_l| <= cutoff are dropped
    and the rest are returned in lexicographic string order. Real inputs whose
    expansion would need imaginary coefficients (non-symmetric matrices) are
    rejected.
    """
    a = np.asarray(a)
    if np.iscomplexobj(a):
        if np.abs(a.imag).max() > _IMAG_TOL * max(np.abs(a.real).max(), 1.0):
            raise NonRealInput("input matrix has a non-negligible imaginary part")
        a = a.real
    a = a.astype(float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotPowerOfTwo(f"expected a square matrix, got shape {a.shape}")
    n = _require_power_of_two(a.shape[0])
    dim = a.shape[0]
    scale = max(np.abs(a).max(), 1.0)

    terms = []
    rows = np.arange(dim)
    for letters in itertools.product(PAULI_LETTERS, repeat=n):
        s = "".join(letters)
        perm, phase = _permutation_phase(s)
        # Tr(P A) = sum_j phase[j] * A[j, perm[j]]
        coeff = complex(np.sum(phase * a[rows, perm])) / dim
        if abs(coeff.imag) > _IMAG_TOL * scale:
            raise NonRealInput(
                f"string {s} has imaginary coefficient {coeff.imag:.3e}; "
                "only symmetric real matrices decompose with real weights"
            )
        if abs(coeff.real) > cutoff:
            terms.append((float(coeff.real), PauliString(s)))
    return DecomposedOperator(n_qubits=n, terms=tuple(terms))


def reconstruct(d: DecomposedOperator) -> np.ndarray:
    """Dense matrix sum_l c_l P_l (complex; real-valued for symmetric inputs)."""
    dim = d.dim
    out = np.zeros((dim, dim), dtype=complex)
    rows = np.arange(dim)
    for coeff, s in d.terms:
        perm, phase = _permutation_phase(s.letters)
        out[perm, rows] += coeff * phase
    return out


def reconstruct_real(d: DecomposedOperator) -> np.ndarray:
    """Like reconstruct, but validated real (symmetric decompositions)."""
    mat = reconstruct(d)
    if np.abs(mat.imag).max() > _IMAG_TOL * max(np.abs(mat.real).max(), 1.0):
        raise NonRealInput("reconstruction is not numerically real")
    return np.ascontiguousarray(mat.real)


def pad_system(a, b) -> tuple[np.ndarray, np.ndarray, int]:
    """Pad (A, b) to the next power-of-two dimension.

    The padded matrix carries A in the top-left block and ones on the
    remaining diagonal; b is zero-padded. Returns (A_padded, b_padded, N).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotPowerOfTwo(f"expected a square matrix, got shape {a.shape}")
    if b.shape != (a.shape[0],):
        raise DimensionMismatch(
            f"rhs shape {b.shape} does not match matrix dimension {a.shape[0]}"
        )
    n_orig = a.shape[0]
    dim = 1
    while dim < n_orig:
        dim *= 2
    if dim == n_orig:
        return a.copy(), b.copy(), n_orig
    a_pad = np.eye(dim)
    a_pad[:n_orig, :n_orig] = a
    b_pad = np.zeros(dim)
    b_pad[:n_orig] = b
    return a_pad, b_pad, n_orig

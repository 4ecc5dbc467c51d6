"""Dense statevector simulator for a small fixed gate set.

Conventions: qubit 0 is the most significant bit of the basis-state index,
states are complex128 arrays of length 2**n, and every operation returns a
new array (states are treated as immutable values).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ControlTargetOverlap,
    DimensionMismatch,
    InvalidTarget,
    QubitCountOutOfRange,
)

MAX_QUBITS = 16

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

# 2x2 matrices for the fixed-kind single-qubit gates.
_FIXED_1Q = {
    "h": np.array([[_INV_SQRT2, _INV_SQRT2], [_INV_SQRT2, -_INV_SQRT2]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "id": np.eye(2, dtype=complex),
}

GATE_KINDS = ("ry", "h", "x", "y", "z", "cz", "sdg", "id")


@dataclass(frozen=True)
class Gate:
    """A single gate: kind, target qubit(s), and an angle for rotations."""

    kind: str
    targets: tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise InvalidTarget(f"unknown gate kind {self.kind!r}")
        if len(set(self.targets)) != len(self.targets):
            raise InvalidTarget("gate targets must be distinct")
        if self.kind == "cz" and len(self.targets) != 2:
            raise InvalidTarget("cz takes exactly two targets")
        if self.kind != "cz" and len(self.targets) != 1:
            raise InvalidTarget(f"{self.kind} takes exactly one target")
        if self.kind == "ry" and not math.isfinite(self.angle):
            raise InvalidTarget("rotation angle must be finite")

    def inverse(self) -> "Gate":
        if self.kind == "ry":
            return Gate("ry", self.targets, -self.angle)
        if self.kind == "sdg":
            raise InvalidTarget("sdg inverse (S) is outside the gate set")
        return self  # h, x, y, z, cz, id are self-inverse


def ry(qubit: int, angle: float) -> Gate:
    return Gate("ry", (qubit,), angle)


def h(qubit: int) -> Gate:
    return Gate("h", (qubit,))


def x(qubit: int) -> Gate:
    return Gate("x", (qubit,))


def y(qubit: int) -> Gate:
    return Gate("y", (qubit,))


def z(qubit: int) -> Gate:
    return Gate("z", (qubit,))


def cz(q0: int, q1: int) -> Gate:
    return Gate("cz", (q0, q1))


def sdg(qubit: int) -> Gate:
    return Gate("sdg", (qubit,))


@dataclass(frozen=True)
class CircuitOp:
    """An ordered gate sequence, optionally controlled on one extra qubit."""

    gates: tuple[Gate, ...]
    control: int | None = None

    def __post_init__(self):
        if self.control is not None:
            for g in self.gates:
                if self.control in g.targets:
                    raise ControlTargetOverlap(
                        f"control qubit {self.control} overlaps gate targets"
                    )

    def inverse(self) -> "CircuitOp":
        return CircuitOp(tuple(g.inverse() for g in reversed(self.gates)), self.control)

    def gate_count(self) -> int:
        return len(self.gates)


def zero_state(n: int) -> np.ndarray:
    """The all-zeros computational basis state on n qubits."""
    if not 1 <= n <= MAX_QUBITS:
        raise QubitCountOutOfRange(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")
    state = np.zeros(2**n, dtype=complex)
    state[0] = 1.0
    return state


def num_qubits(state: np.ndarray) -> int:
    n = int(math.log2(state.shape[0]))
    if 2**n != state.shape[0]:
        raise DimensionMismatch("state length is not a power of two")
    return n


def _check_targets(n: int, gate: Gate, control: int | None):
    for q in gate.targets:
        if not 0 <= q < n:
            raise InvalidTarget(f"target {q} outside register of {n} qubits")
    if control is not None:
        if not 0 <= control < n:
            raise InvalidTarget(f"control {control} outside register of {n} qubits")
        if control in gate.targets:
            raise ControlTargetOverlap(f"control {control} overlaps targets {gate.targets}")


def apply_gate(state: np.ndarray, gate: Gate, control: int | None = None) -> np.ndarray:
    """Apply one gate (optionally controlled on ``control`` = |1>) to a state."""
    n = num_qubits(state)
    _check_targets(n, gate, control)
    psi = state.reshape((2,) * n).copy()

    if gate.kind == "id":
        return psi.reshape(-1)

    if gate.kind == "cz":
        q0, q1 = gate.targets
        idx = [slice(None)] * n
        idx[q0] = 1
        idx[q1] = 1
        if control is not None:
            idx[control] = 1
        psi[tuple(idx)] *= -1.0
        return psi.reshape(-1)

    if gate.kind == "ry":
        c, s = math.cos(gate.angle / 2.0), math.sin(gate.angle / 2.0)
        mat = np.array([[c, -s], [s, c]], dtype=complex)
    else:
        mat = _FIXED_1Q[gate.kind]

    (q,) = gate.targets
    idx0 = [slice(None)] * n
    idx1 = [slice(None)] * n
    idx0[q] = 0
    idx1[q] = 1
    if control is not None:
        idx0[control] = 1
        idx1[control] = 1
    a = psi[tuple(idx0)].copy()
    b = psi[tuple(idx1)].copy()
    psi[tuple(idx0)] = mat[0, 0] * a + mat[0, 1] * b
    psi[tuple(idx1)] = mat[1, 0] * a + mat[1, 1] * b
    return psi.reshape(-1)


def apply_op(state: np.ndarray, op: CircuitOp) -> np.ndarray:
    """Apply a circuit op, honoring its own control qubit if present."""
    for g in op.gates:
        state = apply_gate(state, g, op.control)
    return state


def apply_controlled(state: np.ndarray, op: CircuitOp, control: int) -> np.ndarray:
    """Apply ``op`` on the subspace where ``control`` is |1>."""
    if op.control is not None:
        raise ControlTargetOverlap("op already carries a control qubit")
    for g in op.gates:
        state = apply_gate(state, g, control)
    return state


def prob_zero(state: np.ndarray, qubit: int) -> float:
    """Probability of measuring |0> on one qubit."""
    n = num_qubits(state)
    if not 0 <= qubit < n:
        raise InvalidTarget(f"qubit {qubit} outside register of {n} qubits")
    psi = state.reshape((2,) * n)
    idx = [slice(None)] * n
    idx[qubit] = 0
    return float(np.sum(np.abs(psi[tuple(idx)]) ** 2))


def sample_prob_zero(state: np.ndarray, qubit: int, shots: int,
                     rng: np.random.Generator) -> float:
    """Estimate prob_zero from ``shots`` Bernoulli draws (deterministic per rng)."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p0 = min(max(prob_zero(state, qubit), 0.0), 1.0)
    return float(rng.binomial(shots, p0)) / shots


def inner_product(a: np.ndarray, b: np.ndarray) -> complex:
    """The Hermitian inner product <a|b>."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"state shapes differ: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))

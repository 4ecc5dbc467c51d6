"""State-preparation embeddings, the layered RY/CZ ansätze, and Hadamard tests.

The amplitude embedding is a uniformly-controlled RY scheme for real vectors:
interior tree levels rotate by arctangents of subtree norms, the leaf level by
arctangents of the signed amplitude pairs, so the prepared state reproduces
the normalized input exactly, signs included. Multi-controlled rotations are
expanded recursively into RY and CNOT (itself compiled as H-CZ-H) to stay
inside the simulator's gate set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import sim
from .errors import (
    IndexOutOfRange,
    MissingReuploadVector,
    ParamCountMismatch,
    ZeroVector,
)
from .sim import CircuitOp, Gate, cz, h, ry, x

ANSATZ_KINDS = ("hea", "uhea", "muhea")
CZ_PATTERNS = ("chain", "alternating")


def cz_pairs(n: int, pattern: str = "chain") -> list[tuple[int, int]]:
    """Entangling-layer qubit pairs for one layer."""
    if pattern == "chain":
        return [(q, q + 1) for q in range(n - 1)]
    if pattern == "alternating":
        return [(q, q + 1) for q in range(0, n - 1, 2)] + [
            (q, q + 1) for q in range(1, n - 1, 2)
        ]
    raise ValueError(f"unknown cz pattern {pattern!r}")


def basis_embedding(index: int, n: int) -> CircuitOp:
    """Prepare |index> from |0...0> with at most n X gates."""
    if not 0 <= index < (1 << n):
        raise IndexOutOfRange(f"basis index {index} does not fit in {n} qubits")
    gates = [x(q) for q in range(n) if (index >> (n - 1 - q)) & 1]
    return CircuitOp(tuple(gates))


def _cnot(control: int, target: int) -> list[Gate]:
    return [h(target), cz(control, target), h(target)]


def _multiplexed_ry(controls: list[int], target: int, angles: np.ndarray,
                    gates: list[Gate]):
    """RY(angles[s]) on ``target``, selected by the controls' bit pattern s."""
    if not controls:
        gates.append(ry(target, float(angles[0])))
        return
    half = angles.shape[0] // 2
    left, right = angles[:half], angles[half:]
    _multiplexed_ry(controls[1:], target, (left + right) / 2.0, gates)
    gates.extend(_cnot(controls[0], target))
    _multiplexed_ry(controls[1:], target, (left - right) / 2.0, gates)
    gates.extend(_cnot(controls[0], target))


def embedding_angles(vec: np.ndarray) -> list[np.ndarray]:
    """Per-level rotation angles preparing vec/||vec|| (signs at the leaves)."""
    dim = vec.shape[0]
    n = dim.bit_length() - 1
    if (1 << n) != dim:
        raise ZeroVector(f"amplitude vector length {dim} is not a power of two")
    weights = vec / np.linalg.norm(vec)
    levels: list[np.ndarray] = []
    for _ in range(n):
        pairs = weights.reshape(-1, 2)
        levels.append(2.0 * np.arctan2(pairs[:, 1], pairs[:, 0]))
        weights = np.sqrt(pairs[:, 0] ** 2 + pairs[:, 1] ** 2)
    levels.reverse()
    return levels


def amplitude_embedding(vec) -> CircuitOp:
    """Prepare the normalized real vector as state amplitudes, signs preserved."""
    vec = np.asarray(vec, dtype=float)
    if vec.ndim != 1 or np.linalg.norm(vec) == 0.0:
        raise ZeroVector("amplitude embedding needs a nonzero 1-D real vector")
    levels = embedding_angles(vec)
    gates: list[Gate] = []
    for level, angles in enumerate(levels):
        _multiplexed_ry(list(range(level)), level, angles, gates)
    return CircuitOp(tuple(gates))


@dataclass(frozen=True)
class StatePrep:
    """Right-hand-side preparation: a basis state or an amplitude-embedded vector."""

    kind: str
    index: int = 0
    vector: np.ndarray | None = None

    @classmethod
    def basis(cls, index: int) -> "StatePrep":
        return cls(kind="basis", index=index)

    @classmethod
    def amplitude(cls, vector) -> "StatePrep":
        vector = np.asarray(vector, dtype=float)
        if np.linalg.norm(vector) == 0.0:
            raise ZeroVector("amplitude state prep needs a nonzero vector")
        return cls(kind="amplitude", vector=vector)

    def op(self, n: int) -> CircuitOp:
        if self.kind == "basis":
            return basis_embedding(self.index, n)
        return amplitude_embedding(self.vector)

    def state(self, n: int) -> np.ndarray:
        """The prepared state as a plain real vector (no circuit involved)."""
        out = np.zeros(1 << n)
        if self.kind == "basis":
            if not 0 <= self.index < (1 << n):
                raise IndexOutOfRange(f"basis index {self.index} outside {n} qubits")
            out[self.index] = 1.0
            return out
        vec = self.vector
        if vec.shape[0] != (1 << n):
            raise IndexOutOfRange(f"vector length {vec.shape[0]} != 2^{n}")
        return vec / np.linalg.norm(vec)


@dataclass(frozen=True)
class AnsatzSpec:
    """Which circuit family to use, its width/depth, and the reupload vector."""

    kind: str
    n_qubits: int
    layers: int
    reupload: np.ndarray | None = None
    cz_pattern: str = "chain"

    def __post_init__(self):
        if self.kind not in ANSATZ_KINDS:
            raise ValueError(f"unknown ansatz kind {self.kind!r}")
        if self.cz_pattern not in CZ_PATTERNS:
            raise ValueError(f"unknown cz pattern {self.cz_pattern!r}")
        if self.kind in ("uhea", "muhea"):
            if self.reupload is None:
                raise MissingReuploadVector(f"{self.kind} requires a reupload vector")
            if self.reupload.shape != (1 << self.n_qubits,):
                raise ParamCountMismatch(
                    f"reupload vector length {self.reupload.shape} != 2^{self.n_qubits}"
                )

    @property
    def param_count(self) -> int:
        return self.n_qubits * (self.layers + 1)


def build_ansatz(spec: AnsatzSpec, theta) -> CircuitOp:
    """Assemble the parameterized circuit for one setting of the angles.

    hea:    RY column, then per layer [CZ layer; RY column].
    uhea:   the reupload embedding once, then the hea structure.
    muhea:  RY column, then per layer [embedding; CZ layer; RY column].
    """
    theta = np.asarray(theta, dtype=float)
    n = spec.n_qubits
    if theta.shape != (spec.param_count,):
        raise ParamCountMismatch(
            f"expected {spec.param_count} parameters, got {theta.shape}"
        )
    embed = (
        amplitude_embedding(spec.reupload).gates if spec.reupload is not None else ()
    )
    pairs = cz_pairs(n, spec.cz_pattern)
    gates: list[Gate] = []
    if spec.kind == "uhea":
        gates.extend(embed)
    gates.extend(ry(q, theta[q]) for q in range(n))
    for layer in range(1, spec.layers + 1):
        if spec.kind == "muhea":
            gates.extend(embed)
        gates.extend(cz(a, b) for a, b in pairs)
        gates.extend(ry(q, theta[layer * n + q]) for q in range(n))
    return CircuitOp(tuple(gates))


@dataclass(frozen=True)
class HadamardTestSpec:
    """One Hadamard test: Re or Im of <0|W|0> for W given as a gate sequence."""

    n_system: int
    operator: tuple[CircuitOp, ...]
    part: str = "re"
    ancilla: int | None = None

    def __post_init__(self):
        if self.part not in ("re", "im"):
            raise ValueError(f"part must be 're' or 'im', got {self.part!r}")

    @property
    def ancilla_index(self) -> int:
        return self.n_system if self.ancilla is None else self.ancilla


def hadamard_test(spec: HadamardTestSpec, mode: str = "analytic",
                  shots: int | None = None,
                  rng: np.random.Generator | None = None) -> float:
    """Run one Hadamard test and return 2 P(0) - 1.

    Every gate of the operator is wrapped with the ancilla control; analytic
    mode uses the exact ancilla probability, shots mode samples it.
    """
    anc = spec.ancilla_index
    state = sim.zero_state(spec.n_system + 1)
    state = sim.apply_gate(state, h(anc))
    if spec.part == "im":
        state = sim.apply_gate(state, sim.sdg(anc))
    for op in spec.operator:
        state = sim.apply_controlled(state, op, anc)
    state = sim.apply_gate(state, h(anc))
    if mode == "analytic":
        p0 = sim.prob_zero(state, anc)
    elif mode == "shots":
        if shots is None or rng is None:
            raise ValueError("shots mode needs a shot count and rng")
        p0 = sim.sample_prob_zero(state, anc, shots, rng)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return 2.0 * p0 - 1.0


def op_to_matrix(op: CircuitOp, n: int) -> np.ndarray:
    """Dense unitary of a gate sequence via Kronecker products (test oracle)."""
    dim = 1 << n
    total = np.eye(dim, dtype=complex)
    eye = np.eye(2, dtype=complex)
    for g in op.gates:
        if g.kind == "cz":
            full = np.eye(dim, dtype=complex)
            q0, q1 = g.targets
            b0, b1 = 1 << (n - 1 - q0), 1 << (n - 1 - q1)
            for j in range(dim):
                if (j & b0) and (j & b1):
                    full[j, j] = -1.0
        else:
            if g.kind == "ry":
                c, s = math.cos(g.angle / 2.0), math.sin(g.angle / 2.0)
                mat = np.array([[c, -s], [s, c]], dtype=complex)
            else:
                mat = sim._FIXED_1Q[g.kind]
            (q,) = g.targets
            full = np.ones((1, 1), dtype=complex)
            for pos in range(n):
                full = np.kron(full, mat if pos == q else eye)
        total = full @ total
    if op.control is not None:
        raise ValueError("op_to_matrix expects an uncontrolled op")
    return total


def op_to_text(op: CircuitOp) -> str:
    """Plain-text gate list for debug dumps."""
    parts = []
    for g in op.gates:
        if g.kind == "ry":
            parts.append(f"ry({g.targets[0]},{g.angle:.6g})")
        elif g.kind == "cz":
            parts.append(f"cz({g.targets[0]},{g.targets[1]})")
        else:
            parts.append(f"{g.kind}({g.targets[0]})")
    prefix = f"ctrl[{op.control}] " if op.control is not None else ""
    return prefix + " ".join(parts)

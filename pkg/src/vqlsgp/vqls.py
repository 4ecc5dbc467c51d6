"""Variational quantum linear solver: cost functions, gradients, and the loop.

Two interchangeable evaluation engines compute the cost components
(numerator, denominator of the normalized costs):

* ``DirectEngine`` -- analytic mode. Propagates the real ansatz state and
  contracts it with precomputed quadratic forms. Numerically identical (to
  float precision) to Hadamard tests with exact ancilla probabilities, and
  fast enough to drive the full benchmark.
* ``HadamardTestEngine`` -- circuit mode. Issues one ancilla-controlled
  Hadamard-test circuit per reduced expectation term, with an instrumented
  test counter; set ``shots`` for sampled probabilities.

``direct_cost_oracle`` is a third, deliberately separate dense-algebra path
(projector Hamiltonians, dense unitaries) used to cross-check both engines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend, circuits, sim
from .circuits import AnsatzSpec, CircuitOp, HadamardTestSpec, StatePrep
from .errors import (
    DimensionMismatch,
    NonPositiveNorm,
    ParamCountMismatch,
    SingularMatrix,
)
from .numerics import AdamState, adam_step, finite_difference_gradient
from .pauli import DecomposedOperator, PauliString, reconstruct_real

COST_KINDS = ("local", "global")
EVAL_MODES = ("analytic", "circuit", "shots")
GRADIENT_METHODS = ("parameter-shift", "finite-difference")


@dataclass(frozen=True)
class VqlsProblem:
    """One linear system in solver form: decomposed matrix, prepared rhs, ansatz."""

    decomposition: DecomposedOperator
    rhs_prep: StatePrep
    rhs_norm: float
    ansatz: AnsatzSpec

    def __post_init__(self):
        if self.ansatz.n_qubits != self.decomposition.n_qubits:
            raise DimensionMismatch(
                f"ansatz width {self.ansatz.n_qubits} != operator width "
                f"{self.decomposition.n_qubits}"
            )

    @property
    def n_qubits(self) -> int:
        return self.decomposition.n_qubits

    @property
    def dim(self) -> int:
        return self.decomposition.dim


@dataclass(frozen=True)
class VqlsConfig:
    """Optimization settings for one solver run."""

    cost: str = "local"
    tol: float = 1e-4
    max_iters: int = 1500
    restarts: int = 2
    learning_rate: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.99
    adam_eps: float = 1e-8
    eval_mode: str = "analytic"
    shots: int = 10_000
    gradient: str = "parameter-shift"
    fd_step: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if self.cost not in COST_KINDS:
            raise ValueError(f"unknown cost kind {self.cost!r}")
        if self.eval_mode not in EVAL_MODES:
            raise ValueError(f"unknown eval mode {self.eval_mode!r}")
        if self.gradient not in GRADIENT_METHODS:
            raise ValueError(f"unknown gradient method {self.gradient!r}")
        if self.tol <= 0 or self.max_iters < 1 or self.restarts < 0:
            raise ValueError("tol must be > 0, max_iters >= 1, restarts >= 0")


@dataclass
class VqlsSolution:
    """Rescaled classical solution plus convergence diagnostics."""

    x: np.ndarray
    theta: np.ndarray
    cost_trace: list[tuple[int, float]]
    converged: bool
    iterations_used: int  # summed over all restart passes
    best_run_iterations: int  # iterations of the pass that produced x
    restarts_used: int
    final_cost: float


def _local_observable(problem: VqlsProblem) -> np.ndarray:
    """Dense U (sum_q Z_q) U^T for the problem's rhs preparation."""
    n = problem.n_qubits
    dim = problem.dim
    idx = np.arange(dim)
    z_sum = np.zeros(dim)
    for q in range(n):
        bit = 1 << (n - 1 - q)
        z_sum += np.where(idx & bit, -1.0, 1.0)
    prep = problem.rhs_prep
    if prep.kind == "basis":
        # U is a product of X gates: conjugation only flips the sign of Z_q
        # on qubits where the prepared bit is one.
        signed = np.zeros(dim)
        for q in range(n):
            bit = 1 << (n - 1 - q)
            zq = np.where(idx & bit, -1.0, 1.0)
            sign = -1.0 if (prep.index >> (n - 1 - q)) & 1 else 1.0
            signed += sign * zq
        return np.diag(signed)
    u_mat = circuits.op_to_matrix(prep.op(n), n)
    if np.abs(u_mat.imag).max() > 1e-12:
        raise NonPositiveNorm("embedding unitary unexpectedly complex")
    u_real = u_mat.real
    return u_real @ np.diag(z_sum) @ u_real.T


def ansatz_program(spec: AnsatzSpec) -> tuple[np.ndarray, np.ndarray | None]:
    """Encode an ansatz for the backend kernels: op rows plus dense embedding."""
    n = spec.n_qubits
    rows: list[tuple[int, int, int]] = []
    uy = None
    if spec.kind in ("uhea", "muhea"):
        uy_c = circuits.op_to_matrix(circuits.amplitude_embedding(spec.reupload), n)
        uy = np.ascontiguousarray(uy_c.real)
    pairs = circuits.cz_pairs(n, spec.cz_pattern)
    if spec.kind == "uhea":
        rows.append((backend.OP_UY, 0, 0))
    rows.extend((backend.OP_RY, q, q) for q in range(n))
    for layer in range(1, spec.layers + 1):
        if spec.kind == "muhea":
            rows.append((backend.OP_UY, 0, 0))
        rows.extend((backend.OP_CZ, a, b) for a, b in pairs)
        rows.extend((backend.OP_RY, q, layer * n + q) for q in range(n))
    return np.array(rows, dtype=np.int64).reshape(-1, 3), uy


class DirectEngine:
    """Analytic cost components from the dense truncated operator."""

    def __init__(self, problem: VqlsProblem):
        self.problem = problem
        n = problem.n_qubits
        self.n = n
        a = reconstruct_real(problem.decomposition)
        self.a_dense = a
        b_state = problem.rhs_prep.state(n)
        m_local = _local_observable(problem)
        self.q_den = np.ascontiguousarray(a.T @ a)
        self.q_num_local = np.ascontiguousarray(a.T @ m_local @ a)
        self.w_global = np.ascontiguousarray(a.T @ b_state)
        self.ops, self.uy = ansatz_program(problem.ansatz)

    def _theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        expected = self.problem.ansatz.param_count
        if theta.shape != (expected,):
            raise ParamCountMismatch(
                f"expected {expected} parameters, got {theta.shape}"
            )
        return theta

    def ansatz_state(self, theta) -> np.ndarray:
        return backend.ansatz_state(self.ops, self._theta(theta), self.uy, self.n)

    def components(self, theta, kind: str) -> tuple[float, float]:
        num, den = backend.cost_components(
            self.ops,
            self._theta(theta),
            self.uy,
            self.q_num_local if kind == "local" else None,
            self.w_global if kind == "global" else None,
            self.q_den,
            self.n,
            backend.COST_LOCAL if kind == "local" else backend.COST_GLOBAL,
        )
        if den <= 0.0:
            raise NonPositiveNorm(f"state norm evaluated to {den}")
        return num, den

    def cost(self, theta, kind: str) -> float:
        num, den = self.components(theta, kind)
        if kind == "local":
            return 0.5 - num / (2.0 * self.n * den)
        return 1.0 - num / den

    def cost_and_grad(self, theta, kind: str) -> tuple[float, np.ndarray]:
        grad = np.empty(self.problem.ansatz.param_count)
        cost = backend.cost_and_grad(
            self.ops,
            self._theta(theta),
            self.uy,
            self.q_num_local if kind == "local" else None,
            self.w_global if kind == "global" else None,
            self.q_den,
            self.n,
            backend.COST_LOCAL if kind == "local" else backend.COST_GLOBAL,
            grad,
        )
        return cost, grad


class HadamardTestEngine:
    """Circuit-mode cost components from reduced Hadamard-test sums.

    ``tests_issued`` counts every Hadamard test since construction (or the
    last ``reset_counter``); per cost evaluation the counts are
    L(L-1)/2 + n L(L-1)/2 + n L for the local cost and L(L-1)/2 + 2L for the
    global cost.
    """

    def __init__(self, problem: VqlsProblem, mode: str = "analytic",
                 shots: int = 10_000, seed: int = 0):
        if mode not in ("analytic", "shots"):
            raise ValueError(f"unknown circuit mode {mode!r}")
        self.problem = problem
        self.mode = mode
        self.shots = shots
        self.seed = seed
        self.tests_issued = 0
        n = problem.n_qubits
        self.n = n
        self.coeffs = problem.decomposition.coefficients()
        self.pauli_ops = [
            _pauli_op(s, n) for s in problem.decomposition.strings()
        ]
        self.u_op = problem.rhs_prep.op(n)
        self.u_op_inv = self.u_op.inverse()
        self.z_ops = [CircuitOp((sim.z(q),)) for q in range(n)]

    def reset_counter(self):
        self.tests_issued = 0

    def _test(self, operator: tuple[CircuitOp, ...], part: str) -> float:
        spec = HadamardTestSpec(n_system=self.n, operator=operator, part=part)
        index = self.tests_issued
        self.tests_issued += 1
        if self.mode == "analytic":
            return circuits.hadamard_test(spec)
        rng = np.random.default_rng(np.random.SeedSequence((self.seed, index)))
        return circuits.hadamard_test(spec, mode="shots", shots=self.shots, rng=rng)

    def _ansatz_ops(self, theta) -> tuple[CircuitOp, CircuitOp]:
        v = circuits.build_ansatz(self.problem.ansatz, theta)
        return v, v.inverse()

    def norm_term(self, theta) -> float:
        """<psi|psi> from L(L-1)/2 real-part tests plus the diagonal weights."""
        c = self.coeffs
        v_op, v_inv = self._ansatz_ops(theta)
        total = float(np.sum(c * c))
        for l in range(len(c)):
            for lp in range(l + 1, len(c)):
                w = (v_op, self.pauli_ops[lp], self.pauli_ops[l], v_inv)
                total += 2.0 * c[l] * c[lp] * self._test(w, "re")
        return total

    def local_numerator(self, theta) -> float:
        """sum_q <psi| U Z_q U^dag |psi> via n L(L-1)/2 + n L tests."""
        c = self.coeffs
        v_op, v_inv = self._ansatz_ops(theta)
        total = 0.0
        for q in range(self.n):
            mid = (self.u_op_inv, self.z_ops[q], self.u_op)
            for l in range(len(c)):
                w = (v_op, self.pauli_ops[l]) + mid + (self.pauli_ops[l], v_inv)
                total += c[l] * c[l] * self._test(w, "re")
                for lp in range(l + 1, len(c)):
                    w = (v_op, self.pauli_ops[lp]) + mid + (self.pauli_ops[l], v_inv)
                    total += 2.0 * c[l] * c[lp] * self._test(w, "re")
        return total

    def global_numerator(self, theta) -> float:
        """|<b|psi>|^2 from 2L tests (one real, one imaginary part per term)."""
        c = self.coeffs
        v_op, _ = self._ansatz_ops(theta)
        re = np.empty(len(c))
        im = np.empty(len(c))
        for l in range(len(c)):
            w = (v_op, self.pauli_ops[l], self.u_op_inv)
            re[l] = self._test(w, "re")
            im[l] = self._test(w, "im")
        total = float(np.sum(c * c * (re * re + im * im)))
        for l in range(len(c)):
            for lp in range(l + 1, len(c)):
                total += 2.0 * c[l] * c[lp] * (re[l] * re[lp] + im[l] * im[lp])
        return total

    def components(self, theta, kind: str) -> tuple[float, float]:
        den = self.norm_term(theta)
        if den <= 0.0:
            raise NonPositiveNorm(f"state norm evaluated to {den}")
        num = self.local_numerator(theta) if kind == "local" else self.global_numerator(theta)
        return num, den

    def cost(self, theta, kind: str) -> float:
        num, den = self.components(theta, kind)
        if kind == "local":
            return 0.5 - num / (2.0 * self.n * den)
        return 1.0 - num / den

    def ansatz_state(self, theta) -> np.ndarray:
        state = sim.zero_state(self.n)
        state = sim.apply_op(state, circuits.build_ansatz(self.problem.ansatz, theta))
        return state.real.copy()

    def cost_and_grad(self, theta, kind: str) -> tuple[float, np.ndarray]:
        theta = np.array(theta, dtype=float)
        num, den = self.components(theta, kind)
        scale = 2.0 * self.n if kind == "local" else 1.0
        cost = (0.5 - num / (scale * den)) if kind == "local" else (1.0 - num / den)
        grad = np.empty(theta.shape[0])
        for j in range(theta.shape[0]):
            theta[j] += math.pi / 2
            num_p, den_p = self.components(theta, kind)
            theta[j] -= math.pi
            num_m, den_m = self.components(theta, kind)
            theta[j] += math.pi / 2
            d_num = 0.5 * (num_p - num_m)
            d_den = 0.5 * (den_p - den_m)
            grad[j] = -(d_num * den - num * d_den) / (scale * den * den)
        return cost, grad


def _pauli_op(s: PauliString, n: int) -> CircuitOp:
    gates = []
    for q, letter in enumerate(s.letters):
        if letter == "X":
            gates.append(sim.x(q))
        elif letter == "Y":
            gates.append(sim.y(q))
        elif letter == "Z":
            gates.append(sim.z(q))
    return CircuitOp(tuple(gates))


def make_engine(problem: VqlsProblem, config: VqlsConfig):
    if config.eval_mode == "analytic":
        return DirectEngine(problem)
    mode = "shots" if config.eval_mode == "shots" else "analytic"
    return HadamardTestEngine(problem, mode=mode, shots=config.shots, seed=config.seed)


# Thin spec-level wrappers; tests and callers that need a single value use
# these, the solver keeps one engine alive across iterations.

def norm_term(theta, problem: VqlsProblem, mode: str = "analytic") -> float:
    engine = make_engine(problem, VqlsConfig(eval_mode=mode))
    if isinstance(engine, DirectEngine):
        v = engine.ansatz_state(theta)
        value = float(v @ (engine.q_den @ v))
        if value <= 0.0:
            raise NonPositiveNorm(f"state norm evaluated to {value}")
        return value
    return engine.norm_term(theta)


def global_overlap_term(theta, problem: VqlsProblem, mode: str = "analytic") -> float:
    engine = make_engine(problem, VqlsConfig(eval_mode=mode))
    if isinstance(engine, DirectEngine):
        v = engine.ansatz_state(theta)
        overlap = float(engine.w_global @ v)
        return overlap * overlap
    return engine.global_numerator(theta)


def global_cost(theta, problem: VqlsProblem, mode: str = "analytic") -> float:
    return make_engine(problem, VqlsConfig(eval_mode=mode, cost="global")).cost(
        theta, "global"
    )


def local_cost(theta, problem: VqlsProblem, mode: str = "analytic") -> float:
    return make_engine(problem, VqlsConfig(eval_mode=mode)).cost(theta, "local")


def direct_cost_oracle(theta, problem: VqlsProblem, kind: str = "local") -> float:
    """Dense-algebra cost evaluation from first principles (test oracle).

    Builds the ansatz unitary as an explicit matrix, forms |psi> = A V|0>,
    and evaluates the projector-Hamiltonian definition of the chosen cost.
    """
    n = problem.n_qubits
    dim = problem.dim
    a = pauli_sum_matrix(problem.decomposition)
    v_mat = circuits.op_to_matrix(circuits.build_ansatz(problem.ansatz, theta), n)
    x_state = v_mat[:, 0]
    psi = a @ x_state
    den = float(np.real(np.vdot(psi, psi)))
    if kind == "global":
        b_state = problem.rhs_prep.state(n).astype(complex)
        overlap = np.vdot(b_state, psi)
        return 1.0 - float(abs(overlap) ** 2) / den
    u_mat = circuits.op_to_matrix(problem.rhs_prep.op(n), n)
    phi = u_mat.conj().T @ psi
    idx = np.arange(dim)
    zero_bits = np.zeros(dim)
    for q in range(n):
        bit = 1 << (n - 1 - q)
        zero_bits += np.where(idx & bit, 0.0, 1.0)
    projector_weight = float(np.sum(np.abs(phi) ** 2 * zero_bits))
    unnormalized = den - projector_weight / n
    return unnormalized / den


def pauli_sum_matrix(decomposition: DecomposedOperator) -> np.ndarray:
    """Independent dense reassembly used by the oracle (Kronecker route)."""
    from .pauli import pauli_to_matrix

    dim = decomposition.dim
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, s in decomposition.terms:
        out += coeff * pauli_to_matrix(s)
    return out


def cost_gradient(theta, problem: VqlsProblem, config: VqlsConfig) -> np.ndarray:
    """Gradient of the configured cost at theta, by the configured method."""
    engine = make_engine(problem, config)
    if config.gradient == "finite-difference":
        return finite_difference_gradient(
            lambda t: engine.cost(t, config.cost), np.asarray(theta, float),
            h=config.fd_step,
        )
    _, grad = engine.cost_and_grad(theta, config.cost)
    return grad


def solve(problem: VqlsProblem, config: VqlsConfig) -> VqlsSolution:
    """Run the optimization loop with restarts and classical rescaling.

    Each pass draws fresh uniform angles in [0, 2pi) from successor seeds;
    the pass with the lowest final cost provides the returned solution. The
    solution vector is the ansatz state rescaled by ||b|| / ||A x|| with the
    sign chosen to minimize the residual against b.
    """
    a_dense = reconstruct_real(problem.decomposition)
    sign, _ = np.linalg.slogdet(a_dense)
    if sign == 0.0:
        raise SingularMatrix("decomposed operator has zero determinant")

    engine = make_engine(problem, config)
    n_params = problem.ansatz.param_count

    best = None
    total_iterations = 0
    passes = 0
    for restart in range(config.restarts + 1):
        passes += 1
        rng = np.random.default_rng(config.seed + restart)
        theta = rng.uniform(0.0, 2.0 * math.pi, n_params)
        adam = AdamState.initial(
            n_params,
            learning_rate=config.learning_rate,
            beta1=config.adam_beta1,
            beta2=config.adam_beta2,
            eps=config.adam_eps,
        )
        trace: list[tuple[int, float]] = []
        converged = False
        if config.gradient == "finite-difference":
            def fd_cost(t, _engine=engine):
                return _engine.cost(t, config.cost)

        for iteration in range(1, config.max_iters + 1):
            if config.gradient == "parameter-shift":
                cost, grad = engine.cost_and_grad(theta, config.cost)
            else:
                cost = engine.cost(theta, config.cost)
                grad = finite_difference_gradient(fd_cost, theta, h=config.fd_step)
            trace.append((iteration, float(cost)))
            if cost < config.tol:
                converged = True
                break
            theta, adam = adam_step(adam, theta, grad)

        iterations = len(trace)
        total_iterations += iterations
        final_cost = trace[-1][1]
        candidate = (final_cost, theta, trace, converged, iterations)
        if best is None or final_cost < best[0]:
            best = candidate
        if converged:
            break

    final_cost, theta, trace, converged, best_iterations = best
    v = np.asarray(engine.ansatz_state(theta), dtype=float)
    ax = a_dense @ v
    ax_norm = float(np.linalg.norm(ax))
    if ax_norm <= 0.0:
        raise NonPositiveNorm("||A x|| vanished at the returned parameters")
    x = v * (problem.rhs_norm / ax_norm)
    b_full = problem.rhs_norm * problem.rhs_prep.state(problem.n_qubits)
    if float(ax @ b_full) < 0.0:
        x = -x
    return VqlsSolution(
        x=x,
        theta=theta,
        cost_trace=trace,
        converged=converged,
        iterations_used=total_iterations,
        best_run_iterations=best_iterations,
        restarts_used=passes - 1,
        final_cost=final_cost,
    )

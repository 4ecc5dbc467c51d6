"""Benchmark harness: dataset generation, model comparisons, and reports.

Every quantity is derived from per-task seeds (base seed, repetition, model,
system), so repeated runs of the same configuration produce byte-identical
CSV output regardless of worker count.
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import backend, gp
from .errors import ConfigError, DimensionMismatch
from .vqls import VqlsConfig
from .vqls_gp import VqlsGpConfig, VqlsGpReport, vqls_gp_regress

EXPERIMENTS = ("kernels", "ansaetze", "single")
KERNEL_CHOICES = ("rbf", "mt", "matern52")
ANSATZ_CHOICES = ("hea", "uhea", "muhea")


def snelson(x):
    """The benchmark latent function sin(2x) + cos(5x)."""
    x = np.asarray(x, dtype=float)
    value = np.sin(2.0 * x) + np.cos(5.0 * x)
    return value if value.ndim else float(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full experiment description; JSON file fields map 1:1 onto these."""

    experiment: str = "kernels"
    seed: int = 0
    repetitions: int = 10
    n_train: int = 16
    m_test: int = 1000
    train_interval: tuple[float, float] = (-1.0, 2.2)
    test_interval: tuple[float, float] = (-3.0, 4.0)
    noise_std: float = 0.1
    kernels: tuple[str, ...] = ("rbf", "mt")
    ansaetze: tuple[str, ...] = ("hea", "uhea", "muhea")
    layers: int = 3
    learning_rate: float = 0.01
    tol: float = 1e-4
    max_iters: int = 1500
    restarts: int = 2
    taper_range: float = 0.64
    noise_variance: float = 0.01
    hyper_restarts: int = 4
    cutoff: float = 1e-10
    mse_target: str = "latent"
    option: str = "inverse-columns"
    reupload_source: str = "labels"
    eval_mode: str = "analytic"
    threads: int = 0  # 0 = machine parallelism
    output_dir: str = "results"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.train_interval[0] >= self.train_interval[1] or (
            self.test_interval[0] >= self.test_interval[1]
        ):
            raise ConfigError("intervals must be ordered (low, high)")
        if self.mse_target not in ("latent", "noisy"):
            raise ConfigError(f"unknown mse target {self.mse_target!r}")
        for k in self.kernels:
            if k not in KERNEL_CHOICES:
                raise ConfigError(f"unknown kernel {k!r}")
        for a in self.ansaetze:
            if a not in ANSATZ_CHOICES:
                raise ConfigError(f"unknown ansatz {a!r}")

    @classmethod
    def from_json(cls, path: str, **overrides) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        for key in ("train_interval", "test_interval", "kernels", "ansaetze"):
            if key in raw and isinstance(raw[key], list):
                raw[key] = tuple(raw[key])
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def kernel_spec(self, family: str,
                    hyper: gp.Hyperparameters | None = None) -> gp.KernelSpec:
        base = gp.Hyperparameters(
            taper_range=self.taper_range, noise_variance=self.noise_variance
        )
        return gp.KernelSpec(family=family, hyper=hyper or base)

    def vqls_config(self, seed: int) -> VqlsConfig:
        return VqlsConfig(
            tol=self.tol,
            max_iters=self.max_iters,
            restarts=self.restarts,
            learning_rate=self.learning_rate,
            eval_mode=self.eval_mode,
            seed=seed,
        )


def _derived_seed(*keys: int) -> int:
    return int(np.random.SeedSequence(keys).generate_state(1)[0])


def generate_dataset(config: ExperimentConfig, repetition: int
                     ) -> tuple[gp.Dataset, np.ndarray, np.ndarray]:
    """Equidistant train/test grids plus seeded observation noise.

    Returns (training set, test inputs, test truths); truths are the latent
    function values unless the config asks for noisy targets.
    """
    x_train = np.linspace(*config.train_interval, config.n_train)
    x_test = np.linspace(*config.test_interval, config.m_test)
    rng = np.random.default_rng(np.random.SeedSequence((config.seed, repetition)))
    y_train = snelson(x_train) + rng.normal(0.0, config.noise_std, config.n_train)
    truths = snelson(x_test)
    if config.mse_target == "noisy":
        truths = truths + rng.normal(0.0, config.noise_std, config.m_test)
    return gp.Dataset(x=x_train, y=y_train), x_test, truths


def mse(predictions, truths) -> float:
    """Mean squared error between two equal-length vectors."""
    predictions = np.asarray(predictions, dtype=float)
    truths = np.asarray(truths, dtype=float)
    if predictions.shape != truths.shape:
        raise DimensionMismatch(
            f"prediction/truth shapes differ: {predictions.shape} vs {truths.shape}"
        )
    return float(np.mean((predictions - truths) ** 2))


@dataclass
class ModelOutcome:
    """One model evaluated on one repetition."""

    repetition: int
    mse: float
    iterations: int
    converged_fraction: float
    pauli_strings: int
    negative_variances: int
    mse_unsymmetrized: float | None
    mean: np.ndarray
    variance: np.ndarray
    traces: list[list[tuple[int, float]]]


@dataclass
class RunRecord:
    """Aggregated table row for one model configuration."""

    model: str
    kernel: str
    ansatz: str
    pauli_strings: int | None
    iterations_mean: float | None
    iterations_std: float | None
    mse_mean: float
    mse_std: float
    converged_fraction: float | None
    outcomes: list[ModelOutcome] = field(default_factory=list)

    def label(self) -> str:
        parts = [self.model.lower().replace("-", "")]
        parts.append(self.kernel.lower())
        if self.ansatz != "-":
            parts.append(self.ansatz.lower())
        return "_".join(parts)


def _sample_std(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.std(values, ddof=1)) if values.size > 1 else 0.0


def _classical_outcome(rep: int, train, x_test, truths, spec) -> ModelOutcome:
    post = gp.posterior(train, x_test, spec)
    return ModelOutcome(
        repetition=rep,
        mse=mse(post.mean, truths),
        iterations=0,
        converged_fraction=1.0,
        pauli_strings=0,
        negative_variances=int(np.sum(np.diag(post.covariance) < 0)),
        mse_unsymmetrized=None,
        mean=post.mean,
        variance=np.diag(post.covariance).copy(),
        traces=[],
    )


def _vqls_outcome(rep: int, train, x_test, truths, spec, config: ExperimentConfig,
                  ansatz: str, model_index: int) -> ModelOutcome:
    run_seed = _derived_seed(config.seed, rep, model_index)
    gp_config = VqlsGpConfig(
        option=config.option,
        vqls=config.vqls_config(run_seed),
        ansatz_kind=ansatz,
        layers=config.layers,
        reupload_source=config.reupload_source,
        cutoff=config.cutoff,
    )
    report: VqlsGpReport = vqls_gp_regress(train, x_test, spec, gp_config)
    post_raw = report.posterior_unsymmetrized
    return ModelOutcome(
        repetition=rep,
        mse=mse(report.posterior.mean, truths),
        iterations=report.total_iterations,
        converged_fraction=report.converged_fraction,
        pauli_strings=report.pauli_strings,
        negative_variances=report.negative_variance_count,
        mse_unsymmetrized=mse(post_raw.mean, truths) if post_raw is not None else None,
        mean=report.posterior.mean,
        variance=np.diag(report.posterior.covariance).copy(),
        traces=report.cost_traces,
    )


def _aggregate(model: str, kernel: str, ansatz: str,
               outcomes: list[ModelOutcome]) -> RunRecord:
    mses = [o.mse for o in outcomes]
    iters = [o.iterations for o in outcomes]
    classical = model == "GP"
    return RunRecord(
        model=model,
        kernel=kernel,
        ansatz=ansatz if not classical else "-",
        pauli_strings=None if classical else outcomes[0].pauli_strings,
        iterations_mean=None if classical else float(np.mean(iters)),
        iterations_std=None if classical else _sample_std(iters),
        mse_mean=float(np.mean(mses)),
        mse_std=_sample_std(mses),
        converged_fraction=None if classical else float(
            np.mean([o.converged_fraction for o in outcomes])
        ),
        outcomes=outcomes,
    )


def _optimized_specs(config: ExperimentConfig, train, rep: int
                     ) -> dict[str, gp.KernelSpec]:
    """Per-repetition hyperparameter fits, reused by the solver-backed models."""
    specs = {}
    for k_idx, family in enumerate(sorted(set(config.kernels))):
        base = config.kernel_spec(family)
        hyper = gp.optimize_hyperparameters(
            train, base, restarts=config.hyper_restarts,
            seed=_derived_seed(config.seed, rep, 1000 + k_idx),
        )
        specs[family] = replace(base, hyper=hyper)
    return specs


def _pool_map(fn, items: list, threads: int) -> list:
    """Ordered map over a worker pool; serial when one worker suffices."""
    n_workers = threads if threads > 0 else (os.cpu_count() or 1)
    n_workers = min(n_workers, len(items))
    if n_workers <= 1:
        return [fn(item) for item in items]
    import multiprocessing as mp

    with mp.get_context("fork").Pool(n_workers) as pool:
        return pool.map(fn, items)


def _kernel_family_label(family: str) -> str:
    return family.upper() if family != "matern52" else "Matern52"


def _kernel_rep_task(args) -> dict[tuple[str, str], ModelOutcome]:
    config, rep = args
    families = [k for k in ("rbf", "mt", "matern52") if k in config.kernels]
    train, x_test, truths = generate_dataset(config, rep)
    specs = _optimized_specs(config, train, rep)
    outcomes: dict[tuple[str, str], ModelOutcome] = {}
    for m_idx, family in enumerate(families):
        spec = specs[family]
        outcomes[("GP", family)] = _classical_outcome(rep, train, x_test, truths, spec)
        outcomes[("VQLS-GP", family)] = _vqls_outcome(
            rep, train, x_test, truths, spec, config, ansatz="hea",
            model_index=m_idx,
        )
    return outcomes


def run_kernel_comparison(config: ExperimentConfig, progress=None
                          ) -> list[RunRecord]:
    """GP and VQLS-GP rows for each configured kernel (fixed hea ansatz)."""
    families = [k for k in ("rbf", "mt", "matern52") if k in config.kernels]
    tasks = [(config, rep) for rep in range(config.repetitions)]
    per_rep = _pool_map(_kernel_rep_task, tasks, config.threads)
    if progress:
        progress(f"{len(per_rep)} repetitions finished")
    records = [
        _aggregate("GP", _kernel_family_label(f), "-",
                   [rep_out[("GP", f)] for rep_out in per_rep])
        for f in families
    ]
    records += [
        _aggregate("VQLS-GP", _kernel_family_label(f), "HEA",
                   [rep_out[("VQLS-GP", f)] for rep_out in per_rep])
        for f in families
    ]
    return records


def _ansatz_rep_task(args) -> dict[str, ModelOutcome]:
    config, rep = args
    ansaetze = [a for a in ("hea", "uhea", "muhea") if a in config.ansaetze]
    train, x_test, truths = generate_dataset(config, rep)
    base = config.kernel_spec("mt")
    hyper = gp.optimize_hyperparameters(
        train, base, restarts=config.hyper_restarts,
        seed=_derived_seed(config.seed, rep, 1000),
    )
    spec = replace(base, hyper=hyper)
    outcomes = {"gp": _classical_outcome(rep, train, x_test, truths, spec)}
    for a_idx, ansatz in enumerate(ansaetze):
        outcomes[ansatz] = _vqls_outcome(
            rep, train, x_test, truths, spec, config, ansatz=ansatz,
            model_index=10 + a_idx,
        )
    return outcomes


def run_ansatz_comparison(config: ExperimentConfig, progress=None
                          ) -> list[RunRecord]:
    """GP baseline plus one VQLS-GP row per ansatz family, all on the MT kernel."""
    ansaetze = [a for a in ("hea", "uhea", "muhea") if a in config.ansaetze]
    tasks = [(config, rep) for rep in range(config.repetitions)]
    per_rep = _pool_map(_ansatz_rep_task, tasks, config.threads)
    if progress:
        progress(f"{len(per_rep)} repetitions finished")
    records = [
        _aggregate("GP", "MT", "-", [rep_out["gp"] for rep_out in per_rep])
    ]
    records += [
        _aggregate("VQLS-GP", "MT", a.upper(),
                   [rep_out[a] for rep_out in per_rep])
        for a in ansaetze
    ]
    return records


def aggregate_loss_curve(outcomes: list[ModelOutcome]
                         ) -> list[tuple[int, float, float]]:
    """Mean and std of log10(cost) per iteration over every solve loop."""
    by_iteration: dict[int, list[float]] = {}
    for outcome in outcomes:
        for trace in outcome.traces:
            for iteration, cost in trace:
                by_iteration.setdefault(iteration, []).append(
                    math.log10(max(cost, 1e-300))
                )
    rows = []
    for iteration in sorted(by_iteration):
        vals = np.array(by_iteration[iteration])
        rows.append((iteration, float(vals.mean()), _sample_std(vals)))
    return rows


def _format_value(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_results_csv(records: list[RunRecord], path: str):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["model", "kernel", "ansatz", "pauli_strings", "iterations_mean",
             "iterations_std", "mse_mean", "mse_std", "converged_fraction"]
        )
        for r in records:
            writer.writerow([
                r.model, r.kernel, r.ansatz, _format_value(r.pauli_strings),
                _format_value(r.iterations_mean), _format_value(r.iterations_std),
                _format_value(r.mse_mean), _format_value(r.mse_std),
                _format_value(r.converged_fraction),
            ])


def write_loss_csv(rows: list[tuple[int, float, float]], path: str):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "mean_log10_cost", "std_log10_cost"])
        for iteration, mean_val, std_val in rows:
            writer.writerow([iteration, f"{mean_val:.6g}", f"{std_val:.6g}"])


def _best_outcome(record: RunRecord) -> ModelOutcome:
    return min(record.outcomes, key=lambda o: o.mse)


def plot_regression(record: RunRecord, config: ExperimentConfig, path: str):
    """Training points, predictive mean, +-2 sigma band, and the latent curve."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outcome = _best_outcome(record)
    train, x_test, _ = generate_dataset(config, outcome.repetition)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(x_test, snelson(x_test), "k-", lw=1.2, label="latent function")
    ax.plot(x_test, outcome.mean, lw=1.5, label="predictive mean")
    var = outcome.variance
    valid = var >= 0
    if np.any(valid):
        std = np.sqrt(np.where(valid, var, 0.0))
        lo = np.where(valid, outcome.mean - 2 * std, np.nan)
        hi = np.where(valid, outcome.mean + 2 * std, np.nan)
        ax.fill_between(x_test, lo, hi, alpha=0.25, label="+-2 std")
    ax.plot(train.x, train.y, "ko", ms=4, label="training samples")
    ax.set_xlabel("x")
    ax.set_ylabel("f(x)")
    title = f"{record.model} {record.kernel}"
    if record.ansatz != "-":
        title += f" {record.ansatz}"
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_losses(curves: dict[str, list[tuple[int, float, float]]], path: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    for label, rows in curves.items():
        if not rows:
            continue
        iters = [r[0] for r in rows]
        means = [r[1] for r in rows]
        ax.plot(iters, means, lw=1.2, label=label)
    ax.set_xlabel("iteration")
    ax.set_ylabel("mean log10 cost")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def emit_reports(records: list[RunRecord], config: ExperimentConfig,
                 output_dir: str) -> list[str]:
    """Write results.csv, per-model loss CSVs, and the SVG figures."""
    os.makedirs(output_dir, exist_ok=True)
    written = []
    results_path = os.path.join(output_dir, "results.csv")
    write_results_csv(records, results_path)
    written.append(results_path)
    curves = {}
    for record in records:
        if not record.outcomes:
            continue
        if record.model != "GP":
            rows = aggregate_loss_curve(record.outcomes)
            loss_path = os.path.join(output_dir, f"loss_{record.label()}.csv")
            write_loss_csv(rows, loss_path)
            written.append(loss_path)
            curves[record.label()] = rows
        svg_path = os.path.join(output_dir, f"regression_{record.label()}.svg")
        plot_regression(record, config, svg_path)
        written.append(svg_path)
    if curves:
        loss_svg = os.path.join(output_dir, "loss.svg")
        plot_losses(curves, loss_svg)
        written.append(loss_svg)
    return written


def render_from_csv(output_dir: str) -> list[str]:
    """Re-render the loss SVG from previously written CSVs."""
    curves = {}
    for name in sorted(os.listdir(output_dir)):
        if name.startswith("loss_") and name.endswith(".csv"):
            rows = []
            with open(os.path.join(output_dir, name)) as fh:
                reader = csv.reader(fh)
                next(reader)
                for iteration, mean_val, std_val in reader:
                    rows.append((int(iteration), float(mean_val), float(std_val)))
            curves[name[len("loss_"):-len(".csv")]] = rows
    if not curves:
        return []
    path = os.path.join(output_dir, "loss.svg")
    plot_losses(curves, path)
    return [path]


def benchmark_backends(n_qubits: int = 4, layers: int = 3,
                       iterations: int = 50) -> dict[str, float]:
    """Time the fused cost/gradient kernel for every available backend."""
    from .circuits import AnsatzSpec
    from .vqls import ansatz_program

    rng = np.random.default_rng(0)
    dim = 1 << n_qubits
    a = rng.normal(size=(dim, dim))
    a = a @ a.T + dim * np.eye(dim)
    spec = AnsatzSpec(kind="hea", n_qubits=n_qubits, layers=layers)
    ops, uy = ansatz_program(spec)
    q_den = np.ascontiguousarray(a.T @ a)
    q_num = np.ascontiguousarray(a.T @ np.diag(rng.normal(size=dim)) @ a)
    theta = rng.uniform(0, 2 * np.pi, spec.param_count)
    grad = np.empty(spec.param_count)

    timings = {}
    for name, impl in backend.implementations().items():
        impl.cost_and_grad(ops, theta, uy, q_num, None, q_den, n_qubits, 0, grad)
        start = time.perf_counter()
        for _ in range(iterations):
            impl.cost_and_grad(ops, theta, uy, q_num, None, q_den, n_qubits, 0, grad)
        timings[name] = (time.perf_counter() - start) / iterations
    return timings

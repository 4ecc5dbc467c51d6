"""Command-line interface.

Exit codes: 0 on success, 2 for configuration/usage errors, 3 for numerical
failures (singular or non-positive-definite systems and the like).
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import backend, bench, gp
from .circuits import AnsatzSpec, StatePrep
from .errors import ConfigError, VqlsGpError
from .pauli import decompose, pad_system
from .vqls import VqlsConfig, VqlsProblem, solve
from .vqls_gp import VqlsGpConfig, vqls_gp_regress

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load_system(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Read a linear system: N matrix rows followed by one row holding b."""
    rows = np.loadtxt(path, delimiter=",", ndmin=2)
    if rows.shape[0] != rows.shape[1] + 1:
        raise ConfigError(
            f"expected N matrix rows plus one rhs row, got shape {rows.shape}"
        )
    return rows[:-1], rows[-1]


def _add_vqls_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--cost", choices=("local", "global"), default="local")
    parser.add_argument("--tol", type=float, default=1e-4)
    parser.add_argument("--max-iters", type=int, default=1500)
    parser.add_argument("--restarts", type=int, default=2)
    parser.add_argument("--learning-rate", type=float, default=0.01)
    parser.add_argument("--eval-mode", choices=("analytic", "circuit", "shots"),
                        default="analytic")
    parser.add_argument("--shots", type=int, default=10_000)
    parser.add_argument("--gradient", choices=("parameter-shift", "finite-difference"),
                        default="parameter-shift")
    parser.add_argument("--ansatz", choices=("hea", "uhea", "muhea"), default="hea")
    parser.add_argument("--layers", type=int, default=3)


def _vqls_config_from_args(args, seed: int) -> VqlsConfig:
    return VqlsConfig(
        cost=args.cost,
        tol=args.tol,
        max_iters=args.max_iters,
        restarts=args.restarts,
        learning_rate=args.learning_rate,
        eval_mode=args.eval_mode,
        shots=args.shots,
        gradient=args.gradient,
        seed=seed,
    )


def cmd_decompose(args) -> int:
    matrix = np.loadtxt(args.input, delimiter=",", ndmin=2)
    padded, _, original = pad_system(matrix, np.zeros(matrix.shape[0]))
    decomposition = decompose(padded, cutoff=args.cutoff)
    lines = [f"{coeff:.12g},{string}" for coeff, string in decomposition.terms]
    body = "coefficient,string\n" + "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    print(f"# {len(decomposition)} Pauli strings "
          f"({original}x{original} matrix, cutoff {args.cutoff:g})",
          file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    matrix, rhs = _load_system(args.input)
    padded, rhs_pad, original = pad_system(matrix, rhs)
    decomposition = decompose(padded, cutoff=args.cutoff)
    n = decomposition.n_qubits
    nonzero = np.nonzero(rhs_pad)[0]
    if nonzero.shape[0] == 1:
        prep = StatePrep.basis(int(nonzero[0]))
        rhs_norm = float(abs(rhs_pad[nonzero[0]]))
    else:
        prep = StatePrep.amplitude(rhs_pad)
        rhs_norm = float(np.linalg.norm(rhs_pad))
    reupload = rhs_pad / np.linalg.norm(rhs_pad) if args.ansatz != "hea" else None
    ansatz = AnsatzSpec(kind=args.ansatz, n_qubits=n, layers=args.layers,
                        reupload=reupload)
    problem = VqlsProblem(decomposition=decomposition, rhs_prep=prep,
                          rhs_norm=rhs_norm, ansatz=ansatz)
    solution = solve(problem, _vqls_config_from_args(args, args.seed))
    x = solution.x[:original]
    residual = float(np.linalg.norm(matrix @ x - rhs))
    print("solution:", " ".join(f"{v:.8g}" for v in x))
    print(f"converged: {solution.converged}  final_cost: {solution.final_cost:.3e}")
    print(f"iterations: {solution.best_run_iterations} (best pass), "
          f"{solution.iterations_used} (all passes), "
          f"restarts: {solution.restarts_used}")
    print(f"residual ||Ax-b||: {residual:.3e}  pauli_strings: {len(decomposition)}")
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("iteration,cost,restart\n")
            for iteration, cost in solution.cost_trace:
                fh.write(f"{iteration},{cost:.10g},{solution.restarts_used}\n")
    return EXIT_OK


def _dataset_from_args(args) -> tuple[gp.Dataset, np.ndarray, np.ndarray]:
    if args.data:
        raw = np.loadtxt(args.data, delimiter=",", ndmin=2)
        train = gp.Dataset(x=raw[:, 0], y=raw[:, 1])
        x_test = np.linspace(raw[:, 0].min(), raw[:, 0].max(), args.m_test)
        return train, x_test, np.full(args.m_test, np.nan)
    config = bench.ExperimentConfig(seed=args.seed, m_test=args.m_test)
    return bench.generate_dataset(config, 0)


def _kernel_spec_from_args(args) -> gp.KernelSpec:
    hyper = gp.Hyperparameters(
        amplitude=args.sigma,
        length_scale=args.length_scale,
        taper_range=args.taper_range,
        noise_variance=args.noise_variance,
    )
    return gp.KernelSpec(family=args.kernel, hyper=hyper)


def cmd_gp_fit(args) -> int:
    train, x_test, truths = _dataset_from_args(args)
    spec = _kernel_spec_from_args(args)
    if args.optimize:
        hyper = gp.optimize_hyperparameters(train, spec, restarts=args.hyper_restarts,
                                            seed=args.seed)
        spec = gp.KernelSpec(family=spec.family, hyper=hyper)
        print(f"optimized: sigma={hyper.amplitude:.6g} "
              f"length_scale={hyper.length_scale:.6g}")
    post = gp.posterior(train, x_test, spec)
    print(f"lml: {post.lml:.8g}")
    if np.all(np.isfinite(truths)):
        print(f"mse_vs_latent: {bench.mse(post.mean, truths):.6g}")
    if args.output:
        with open(args.output, "w") as fh:
            fh.write("x,mean,variance\n")
            for xv, mv, vv in zip(x_test, post.mean, np.diag(post.covariance)):
                fh.write(f"{xv:.10g},{mv:.10g},{vv:.10g}\n")
    return EXIT_OK


def cmd_vqls_gp(args) -> int:
    train, x_test, truths = _dataset_from_args(args)
    spec = _kernel_spec_from_args(args)
    if args.optimize:
        hyper = gp.optimize_hyperparameters(train, spec, restarts=args.hyper_restarts,
                                            seed=args.seed)
        spec = gp.KernelSpec(family=spec.family, hyper=hyper)
        print(f"optimized: sigma={hyper.amplitude:.6g} "
              f"length_scale={hyper.length_scale:.6g}")
    config = VqlsGpConfig(
        option=args.option,
        vqls=_vqls_config_from_args(args, args.seed),
        ansatz_kind=args.ansatz,
        layers=args.layers,
        cutoff=args.cutoff,
    )
    report = vqls_gp_regress(train, x_test, spec, config)
    print(f"pauli_strings: {report.pauli_strings}")
    print(f"iterations: {report.total_iterations} (best passes), "
          f"{report.total_iterations_all_restarts} (all passes)")
    print(f"converged_fraction: {report.converged_fraction:.4g}")
    print(f"asymmetry ||B - B^T||_F: {report.asymmetry:.3e}")
    print(f"negative_variances: {report.negative_variance_count}")
    print(f"lml (classical log-determinant): {report.posterior.lml:.8g}")
    if np.all(np.isfinite(truths)):
        print(f"mse_vs_latent: {bench.mse(report.posterior.mean, truths):.6g}")
        if report.posterior_unsymmetrized is not None:
            raw = bench.mse(report.posterior_unsymmetrized.mean, truths)
            print(f"mse_vs_latent_unsymmetrized: {raw:.6g}")
    return EXIT_OK


def _bench_config(args) -> bench.ExperimentConfig:
    overrides = dict(
        seed=args.seed,
        repetitions=args.repetitions,
        threads=args.threads,
        output_dir=args.output_dir,
    )
    if args.config:
        return bench.ExperimentConfig.from_json(args.config, **overrides)
    return bench.ExperimentConfig(
        **{k: v for k, v in overrides.items() if v is not None}
    )


def cmd_bench(args) -> int:
    if args.target == "backends":
        timings = bench.benchmark_backends(iterations=args.bench_iterations)
        print(f"active backend: {backend.NAME}")
        for name, seconds in sorted(timings.items()):
            print(f"{name}: {seconds * 1e6:.1f} us per fused cost+gradient call")
        if len(timings) == 2:
            ratio = timings["pure-python"] / timings["compiled"]
            print(f"speedup compiled vs pure-python: {ratio:.1f}x")
        return EXIT_OK
    if args.seed is None and not args.config:
        raise ConfigError("--seed is required for benchmark report runs")
    config = _bench_config(args)
    progress = print if args.verbose else None
    if args.target == "kernels":
        records = bench.run_kernel_comparison(config, progress=progress)
    else:
        records = bench.run_ansatz_comparison(config, progress=progress)
    written = bench.emit_reports(records, config, config.output_dir)
    for record in records:
        print(f"{record.model:8s} {record.kernel:9s} {record.ansatz:6s} "
              f"strings={record.pauli_strings if record.pauli_strings else '-':>4} "
              f"iters={record.iterations_mean if record.iterations_mean is not None else '-'} "
              f"mse={record.mse_mean:.4f} +- {record.mse_std:.4f}")
    print("wrote:", ", ".join(written))
    return EXIT_OK


def cmd_report(args) -> int:
    written = bench.render_from_csv(args.output_dir)
    if not written:
        raise ConfigError(f"no loss CSVs found under {args.output_dir}")
    print("wrote:", ", ".join(written))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vqlsgp",
        description="Gaussian process regression with a simulated variational "
                    "quantum linear solver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="expand a matrix into Pauli strings")
    p.add_argument("--input", required=True, help="CSV with the matrix rows")
    p.add_argument("--cutoff", type=float, default=1e-10)
    p.add_argument("--output")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("solve", help="run the variational solver on one system")
    p.add_argument("--input", required=True,
                   help="CSV with N matrix rows followed by one rhs row")
    p.add_argument("--cutoff", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write the cost trace CSV here")
    _add_vqls_flags(p)
    p.set_defaults(func=cmd_solve)

    for name, func in (("gp-fit", cmd_gp_fit), ("vqls-gp", cmd_vqls_gp)):
        p = sub.add_parser(name, help=f"{name} on a dataset (default: benchmark data)")
        p.add_argument("--data", help="CSV of x,y training rows")
        p.add_argument("--kernel", choices=("rbf", "matern52", "mt"), default="mt")
        p.add_argument("--sigma", type=float, default=1.0)
        p.add_argument("--length-scale", type=float, default=1.0)
        p.add_argument("--taper-range", type=float, default=0.64)
        p.add_argument("--noise-variance", type=float, default=0.01)
        p.add_argument("--optimize", action="store_true",
                       help="fit sigma and length scale by maximum likelihood")
        p.add_argument("--hyper-restarts", type=int, default=4)
        p.add_argument("--m-test", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", help="write x,mean,variance CSV here")
        if name == "vqls-gp":
            p.add_argument("--option",
                           choices=("inverse-columns", "direct-products"),
                           default="inverse-columns")
            p.add_argument("--cutoff", type=float, default=1e-10)
            _add_vqls_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("bench", help="benchmark experiments and backend timing")
    p.add_argument("target", choices=("kernels", "ansaetze", "backends"))
    p.add_argument("--config", help="JSON experiment configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--output-dir", default="results")
    p.add_argument("--bench-iterations", type=int, default=200)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="re-render figures from written CSVs")
    p.add_argument("--output-dir", default="results")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VqlsGpError as exc:
        print(f"numerical failure: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Solver-backed GP pipeline: inverse assembly, direct products, injection."""
import numpy as np
import pytest

from conftest import MT_FIT, random_spd
from vqlsgp import gp
from vqlsgp.gp import Dataset, Hyperparameters, KernelSpec
from vqlsgp.vqls import VqlsConfig
from vqlsgp.vqls_gp import (
    VqlsGpConfig,
    invert_covariance,
    posterior_direct,
    vqls_gp_regress,
)

EXACT = VqlsGpConfig(solver_override=lambda a, b: np.linalg.solve(a, b))


def small_dataset(seed=0, n=8):
    x = np.linspace(-1.0, 2.2, n)
    rng = np.random.default_rng(seed)
    y = np.sin(2 * x) + np.cos(5 * x) + rng.normal(0, 0.1, n)
    return Dataset(x=x, y=y)


def fast_vqls_config(seed=0):
    return VqlsConfig(seed=seed, max_iters=600, restarts=1, tol=1e-6)


class TestInvertCovariance:
    def test_identity_is_its_own_inverse(self):
        config = VqlsGpConfig(vqls=fast_vqls_config(), layers=2)
        inverse, diagnostics, traces, n_strings = invert_covariance(np.eye(4), config)
        assert n_strings == 1
        assert len(diagnostics) == 4
        for column in range(4):
            residual = np.linalg.norm(
                np.eye(4) @ inverse[:, column] - np.eye(4)[:, column]
            )
            assert residual < 1e-3

    def test_diagonal_matrix(self):
        config = VqlsGpConfig(vqls=VqlsConfig(seed=2, max_iters=1500, restarts=2,
                                              tol=1e-7), layers=3)
        k = np.diag([1.0, 2.0, 4.0, 8.0])
        inverse, diagnostics, _, _ = invert_covariance(k, config)
        expected = np.diag([1.0, 0.5, 0.25, 0.125])
        assert all(d.converged for d in diagnostics)
        np.testing.assert_allclose(np.diag(inverse), np.diag(expected), rtol=1e-2)

    def test_exact_injection_reproduces_inverse(self):
        rng = np.random.default_rng(3)
        k = random_spd(rng, 8)
        inverse, diagnostics, traces, _ = invert_covariance(k, EXACT)
        np.testing.assert_allclose(inverse, np.linalg.inv(k), atol=1e-8)
        assert all(d.converged and d.iterations == 0 for d in diagnostics)
        assert traces == [[]] * 8

    def test_multiply_back_error_tracks_column_residuals(self):
        config = VqlsGpConfig(vqls=fast_vqls_config(5), layers=3)
        rng = np.random.default_rng(4)
        k = random_spd(rng, 4, shift=6.0)
        inverse, diagnostics, _, _ = invert_covariance(k, config)
        frobenius = np.linalg.norm(k @ inverse - np.eye(4))
        residual_bound = np.sqrt(sum(d.residual**2 for d in diagnostics))
        assert frobenius <= residual_bound + 1e-12

    def test_padding_of_odd_dimension(self):
        rng = np.random.default_rng(5)
        k = random_spd(rng, 3)
        inverse, diagnostics, _, _ = invert_covariance(k, EXACT)
        assert inverse.shape == (3, 3)
        np.testing.assert_allclose(inverse, np.linalg.inv(k), atol=1e-8)

    def test_singular_matrix_rejected(self):
        from vqlsgp.errors import SingularMatrix

        with pytest.raises(SingularMatrix):
            invert_covariance(np.zeros((4, 4)), EXACT)


class TestPosteriorDirect:
    def test_exact_injection_matches_classical_posterior(self):
        train = small_dataset(1)
        spec = KernelSpec("mt", MT_FIT)
        x_test = np.linspace(-2.0, 3.0, 5)
        post, diagnostics, traces, n_strings = posterior_direct(
            train, x_test, spec, EXACT
        )
        classical = gp.posterior(train, x_test, spec)
        np.testing.assert_allclose(post.mean, classical.mean, atol=1e-8)
        np.testing.assert_allclose(post.covariance, classical.covariance, atol=1e-8)
        assert len(diagnostics) == len(x_test) + 1

    def test_fully_tapered_column_short_circuits(self):
        train = small_dataset(2)
        spec = KernelSpec("mt", MT_FIT)
        x_test = np.array([0.0, 50.0])  # second point beyond every taper range
        post, diagnostics, _, _ = posterior_direct(train, x_test, spec, EXACT)
        assert diagnostics[2].iterations == 0
        assert post.mean[1] == 0.0
        k_ss = gp.covariance_matrix(x_test, x_test, spec)
        assert post.covariance[1, 1] == pytest.approx(k_ss[1, 1])

    def test_solver_backed_small_problem(self):
        train = small_dataset(3, n=4)
        spec = KernelSpec(
            "rbf", Hyperparameters(amplitude=1.0, length_scale=0.8,
                                   noise_variance=0.1),
        )
        config = VqlsGpConfig(
            option="direct-products",
            vqls=VqlsConfig(seed=11, max_iters=1500, restarts=2, tol=1e-7),
            layers=3,
        )
        post, diagnostics, _, _ = posterior_direct(train, np.array([0.3, 1.1, 9.0]),
                                                   spec, config)
        classical = gp.posterior(train, np.array([0.3, 1.1, 9.0]), spec)
        residual_scale = max(d.residual for d in diagnostics)
        np.testing.assert_allclose(post.mean, classical.mean,
                                   atol=max(20 * residual_scale, 5e-2))


class TestRegress:
    def test_exact_injection_end_to_end(self):
        train = small_dataset(4, n=8)
        spec = KernelSpec("mt", MT_FIT)
        x_test = np.linspace(-3.0, 4.0, 30)
        report = vqls_gp_regress(train, x_test, spec, EXACT)
        classical = gp.posterior(train, x_test, spec)
        np.testing.assert_allclose(report.posterior.mean, classical.mean, atol=1e-8)
        np.testing.assert_allclose(report.posterior.covariance,
                                   classical.covariance, atol=1e-8)
        assert report.posterior.lml == pytest.approx(classical.lml, abs=1e-9)
        assert report.lml_classical
        assert report.asymmetry < 1e-10
        assert report.negative_variance_count == 0
        assert report.converged_fraction == 1.0
        assert report.total_iterations == 0

    def test_exact_injection_options_agree(self):
        train = small_dataset(6, n=8)
        spec = KernelSpec("mt", MT_FIT)
        x_test = np.linspace(-2.0, 3.0, 7)
        opt1 = vqls_gp_regress(train, x_test, spec, EXACT)
        opt2_config = VqlsGpConfig(option="direct-products",
                                   solver_override=EXACT.solver_override)
        opt2 = vqls_gp_regress(train, x_test, spec, opt2_config)
        np.testing.assert_allclose(opt1.posterior.mean, opt2.posterior.mean,
                                   atol=1e-8)
        np.testing.assert_allclose(opt1.posterior.covariance,
                                   opt2.posterior.covariance, atol=1e-8)

    def test_solver_options_agree_within_residual_budget(self):
        train = small_dataset(7, n=4)
        spec = KernelSpec(
            "rbf", Hyperparameters(amplitude=0.9, length_scale=0.9,
                                   noise_variance=0.1),
        )
        x_test = np.array([0.1, 0.9])
        cfg1 = VqlsGpConfig(vqls=VqlsConfig(seed=21, max_iters=1500, restarts=2,
                                            tol=1e-7), layers=3)
        cfg2 = VqlsGpConfig(option="direct-products", vqls=cfg1.vqls, layers=3)
        rep1 = vqls_gp_regress(train, x_test, spec, cfg1)
        rep2 = vqls_gp_regress(train, x_test, spec, cfg2)
        budget = sum(d.residual for d in rep1.diagnostics)
        budget += sum(d.residual for d in rep2.diagnostics)
        np.testing.assert_allclose(rep1.posterior.mean, rep2.posterior.mean,
                                   atol=max(10 * budget, 1e-3))

    def test_report_bookkeeping(self):
        train = small_dataset(8, n=4)
        spec = KernelSpec(
            "rbf", Hyperparameters(amplitude=1.1, length_scale=0.7,
                                   noise_variance=0.1),
        )
        config = VqlsGpConfig(vqls=VqlsConfig(seed=9, max_iters=40, restarts=1,
                                              tol=1e-12), layers=2)
        report = vqls_gp_regress(train, np.array([0.5]), spec, config)
        assert len(report.diagnostics) == 4
        assert report.total_iterations == sum(d.iterations for d in report.diagnostics)
        assert report.total_iterations <= 4 * 40 * 2
        assert report.total_iterations_all_restarts == 4 * 40 * 2  # tol unreachable
        assert all(len(trace) == 40 for trace in report.cost_traces)
        assert report.converged_fraction == 0.0
        # raw and symmetrized posteriors both reported
        assert report.posterior_unsymmetrized is not None
        assert report.asymmetry >= 0.0

    def test_seeds_differ_per_system(self):
        train = small_dataset(10, n=4)
        spec = KernelSpec(
            "rbf", Hyperparameters(amplitude=1.0, length_scale=0.8,
                                   noise_variance=0.1),
        )
        config = VqlsGpConfig(vqls=VqlsConfig(seed=0, max_iters=10, restarts=0,
                                              tol=1e-12), layers=2)
        report = vqls_gp_regress(train, np.array([0.5]), spec, config)
        first_costs = [trace[0][1] for trace in report.cost_traces]
        assert len(set(first_costs)) == len(first_costs)

    def test_negative_variances_preserved_not_clamped(self):
        # a deliberately wrong inverse produces negative predictive variances
        train = small_dataset(11, n=4)
        spec = KernelSpec(
            "rbf", Hyperparameters(amplitude=1.0, length_scale=0.5,
                                   noise_variance=0.01),
        )
        bad = VqlsGpConfig(
            solver_override=lambda a, b: np.linalg.solve(a, b) * 3.0
        )
        report = vqls_gp_regress(train, train.x, spec, bad)
        variances = np.diag(report.posterior.covariance)
        assert report.negative_variance_count == int(np.sum(variances < 0))
        assert report.negative_variance_count > 0


class TestReuploadWiring:
    @pytest.mark.parametrize("kind", ["uhea", "muhea"])
    def test_label_vector_reaches_the_ansatz(self, kind):
        train = small_dataset(12, n=4)
        spec = KernelSpec(
            "rbf", Hyperparameters(amplitude=1.0, length_scale=0.8,
                                   noise_variance=0.1),
        )
        config = VqlsGpConfig(
            ansatz_kind=kind,
            vqls=VqlsConfig(seed=1, max_iters=5, restarts=0, tol=1e-12),
            layers=2,
        )
        report = vqls_gp_regress(train, np.array([0.5]), spec, config)
        assert len(report.diagnostics) == 4

    def test_rhs_source_option(self):
        train = small_dataset(13, n=4)
        spec = KernelSpec(
            "rbf", Hyperparameters(amplitude=1.0, length_scale=0.8,
                                   noise_variance=0.1),
        )
        config = VqlsGpConfig(
            ansatz_kind="muhea",
            reupload_source="rhs",
            vqls=VqlsConfig(seed=1, max_iters=5, restarts=0, tol=1e-12),
            layers=2,
        )
        report = vqls_gp_regress(train, np.array([0.5]), spec, config)
        assert len(report.diagnostics) == 4

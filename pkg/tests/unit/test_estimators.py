"""
Unit tests for the parametric, nonparametric, combined and smoothed estimators.
"""

import unittest

import numpy as np

from rkhs_gof.errors import ContractError, InputError
from rkhs_gof.estimators.benchmark import benchmark_summary, run_benchmark
from rkhs_gof.estimators.objective import TikhonovObjective
from rkhs_gof.estimators.parametric import fit_parametric
from rkhs_gof.estimators.results import COMBINED, PARAMETRIC, SMOOTHED, FitResult
from rkhs_gof.estimators.tikhonov import (
    fit_combined,
    fit_nonparametric,
    fit_smoothed_parametric,
)
from rkhs_gof.inverse.linear import direct_problem, solve_linear_tikhonov
from rkhs_gof.kernels.operators import KernelSpec, assemble_mixed_operators, rkhs_norm_sq
from rkhs_gof.optimize.derivatives import finite_diff_gradient
from rkhs_gof.optimize.options import SolverOptions
from rkhs_gof.pk.covariates import AFFINE_LINEAR, SATURABLE_EXPONENTIAL, ParametricFamily
from rkhs_gof.pk.scenarios import ScenarioSpec, get_scenario, simulate_dataset


class TestParametricFit(unittest.TestCase):
    """
    Levenberg-Marquardt least squares over the family parameters.
    """

    def test_recovers_truth_from_noise_free_data(self) -> None:
        """A perturbed start converges to the data-generating parameters."""
        truth = ParametricFamily.reference()
        scenario = ScenarioSpec("noise_free", 30, 0.0, get_scenario("rich").times)
        dataset = simulate_dataset(scenario, truth, 5)
        fit = fit_parametric(
            SATURABLE_EXPONENTIAL, dataset, tau0=(0.5, 0.1, 180.0, 3800.0, 950.0, 2000.0)
        )
        self.assertEqual(fit.method, PARAMETRIC)
        np.testing.assert_allclose(fit.family.vector, truth.vector, rtol=1e-3)
        self.assertLess(fit.mse, 1e-10)
        self.assertEqual([stage.name for stage in fit.stages], ["par"])
        np.testing.assert_allclose(
            fit.clearance_curve([0.0, 10.0]), fit.family.clearance([0.0, 10.0])
        )

    def test_inadmissible_start_rejected(self) -> None:
        """A starting point outside the family domain raises InputError."""
        dataset = simulate_dataset(get_scenario("sparse"), ParametricFamily.reference(), 0)
        with self.assertRaises(InputError):
            fit_parametric(AFFINE_LINEAR, dataset, tau0=(10.0, -5.0, 4090.0, 879.0, 2230.0))

    def test_result_needs_a_function(self) -> None:
        """A fit result without parametric and RKHS parts violates the contract."""
        with self.assertRaises(ContractError):
            FitResult(PARAMETRIC)


class TestTikhonovFits(unittest.TestCase):
    """
    The staged Tikhonov algorithms on a small sparse dataset.
    """

    @classmethod
    def setUpClass(cls) -> None:
        cls.dataset = simulate_dataset(get_scenario("sparse"), ParametricFamily.reference(), 11)
        cls.opts = SolverOptions(max_iterations=300)
        cls.affine = fit_parametric(AFFINE_LINEAR, cls.dataset, opts=cls.opts)

    def test_stage_objectives_never_increase(self) -> None:
        """Dir, AlyLin and Nonlin form a nonincreasing objective sequence."""
        fit = fit_nonparametric(
            self.dataset, lam=1e-3, niter=5, opts=self.opts, parametric_fit=self.affine
        )
        names = [stage.name for stage in fit.stages]
        self.assertEqual(names, ["par", "dir", "alylin", "nonlin"])
        values = {stage.name: stage.objective for stage in fit.stages}
        self.assertLessEqual(values["alylin"], values["dir"] * (1.0 + 1e-12))
        self.assertLessEqual(values["nonlin"], values["alylin"] * (1.0 + 1e-12))
        self.assertEqual(fit.initial_family, self.affine.family)
        self.assertTrue(np.isfinite(fit.objective))

    def test_parametric_fit_of_wrong_family_rejected(self) -> None:
        """Reusing a step-1 fit of another family raises ContractError."""
        wrong = FitResult(PARAMETRIC, family=ParametricFamily.reference())
        with self.assertRaises(ContractError):
            fit_nonparametric(self.dataset, parametric_fit=wrong)
        with self.assertRaises(ContractError):
            fit_combined(self.dataset, AFFINE_LINEAR, parametric_fit=wrong)

    def test_invalid_lambda_and_stages_rejected(self) -> None:
        """Nonpositive lambda and unknown stage names raise InputError."""
        with self.assertRaises(InputError):
            fit_nonparametric(self.dataset, lam=0.0, parametric_fit=self.affine)
        with self.assertRaises(InputError):
            fit_nonparametric(self.dataset, stages=("newton",), parametric_fit=self.affine)

    def test_combined_fit_on_parametric_data_has_zero_correction(self) -> None:
        """Data generated by the fixed parametric part need no RKHS correction."""
        model = self.dataset.model()
        artificial = self.dataset.with_observations(
            self.affine.predictions(model, self.dataset.covariates)
        )
        fit = fit_combined(
            artificial, AFFINE_LINEAR, niter=3, opts=self.opts, parametric_fit=self.affine
        )
        ops = assemble_mixed_operators(fit.coefficients.spec, artificial.ages)
        self.assertEqual(fit.method, COMBINED)
        self.assertLessEqual(rkhs_norm_sq(fit.coefficients, ops), 1e-6)
        np.testing.assert_allclose(
            fit.parameters(artificial.covariates),
            self.affine.parameters(artificial.covariates),
            atol=1e-6,
        )

    def test_objective_gradient_matches_finite_differences(self) -> None:
        """The analytic gradient of the functional agrees with central differences."""
        dataset = self.dataset.subset(np.arange(6))
        kernel = KernelSpec.nonparametric()
        ops = assemble_mixed_operators(kernel, dataset.ages)
        targets = ParametricFamily.reference().theta(dataset.ages)
        gamma = solve_linear_tikhonov(direct_problem(ops, targets, 1e-2)).gamma
        objective = TikhonovObjective(dataset.model(), dataset, ops, 1e-2)
        analytic = objective.gradient(gamma)
        numeric = finite_diff_gradient(objective.value, gamma)
        scale = 1.0 + np.max(np.abs(analytic))
        np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-6 * scale)

    def test_smoothed_parametric_fit(self) -> None:
        """The smoothed estimator starts from the supplied parametric fit."""
        fit = fit_smoothed_parametric(
            self.dataset, self.affine.family.tau, AFFINE_LINEAR, niter=2, opts=self.opts
        )
        self.assertEqual(fit.method, SMOOTHED)
        self.assertEqual(fit.initial_family, self.affine.family)
        self.assertIsNone(fit.family)
        self.assertEqual(fit.stages[0].name, "dir")


class TestBenchmark(unittest.TestCase):
    """
    A miniature algorithm benchmark.
    """

    def test_rows_and_summary(self) -> None:
        """One row per algorithm and dataset, summarized per algorithm."""
        algorithms = ("simulated_annealing", "pardir_alylin", "par_alylin")
        frame = run_benchmark(
            get_scenario("sparse").with_n(8),
            n_datasets=1,
            master_seed=3,
            algorithms=algorithms,
            opts=SolverOptions(max_iterations=30),
        )
        self.assertEqual(len(frame), 3)
        for column in ("algorithm", "runtime_s", "mse", "sigma2", "success"):
            self.assertIn(column, frame.columns)
        self.assertTrue(np.allclose(frame["sigma2"], 0.01))
        summary = benchmark_summary(frame)
        self.assertEqual(list(summary["algorithm"]), list(algorithms))
        self.assertTrue(summary["success_fraction"].between(0.0, 1.0).all())

    def test_invalid_requests_rejected(self) -> None:
        """Unknown algorithms and empty benchmarks raise InputError."""
        scenario = get_scenario("sparse")
        with self.assertRaises(InputError):
            run_benchmark(scenario, n_datasets=1, algorithms=("newton",))
        with self.assertRaises(InputError):
            run_benchmark(scenario, n_datasets=0)


if __name__ == "__main__":
    unittest.main()

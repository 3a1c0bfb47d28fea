"""
Desk-scale acceptance runs of the simulation study and the algorithm benchmark.

These take hours on a laptop; set RKHS_GOF_RUN_SLOW=1 to enable them.
"""

import unittest

from scipy import stats

from rkhs_gof import config
from rkhs_gof.estimators.benchmark import benchmark_summary, run_benchmark
from rkhs_gof.gof.testing import power_study
from rkhs_gof.pk.covariates import (
    AFFINE_LINEAR,
    MICHAELIS_MENTEN,
    SATURABLE_EXPONENTIAL,
    ParametricFamily,
)
from rkhs_gof.pk.scenarios import get_scenario

N_DATASETS = config.DESK_SCALE["n_datasets"]
M = config.DESK_SCALE["monte_carlo"]
TYPE_ONE_INDIVIDUALS = 50
BENCH_DATASETS = 10


@unittest.skipUnless(config.RUN_SLOW_TESTS, "desk-scale study; set RKHS_GOF_RUN_SLOW=1")
class TestDeskScaleStudy(unittest.TestCase):
    """
    Type I error, power and p-value calibration at desk scale.
    """

    @classmethod
    def setUpClass(cls) -> None:
        truth = ParametricFamily.reference()
        rich, sparse = get_scenario("rich"), get_scenario("sparse")
        jobs = config.DEFAULT_JOBS
        cls.rich_affine = power_study(
            rich, truth, AFFINE_LINEAR, ["T1", "S1"], N_DATASETS, M, jobs=jobs
        )
        cls.rich_michaelis_menten = power_study(
            rich, truth, MICHAELIS_MENTEN, ["T1"], N_DATASETS, M, jobs=jobs
        )
        cls.sparse_affine = power_study(
            sparse, truth, AFFINE_LINEAR, ["T1"], N_DATASETS, M, jobs=jobs
        )
        cls.rich_true = power_study(
            rich.with_n(TYPE_ONE_INDIVIDUALS),
            truth,
            SATURABLE_EXPONENTIAL,
            ["T1"],
            N_DATASETS,
            M,
            jobs=jobs,
        )

    def test_power_against_affine_null(self) -> None:
        """The affine null is rejected on at least 80% of rich datasets."""
        self.assertGreaterEqual(self.rich_affine.rejection_rate("T1"), 0.80)

    def test_power_against_michaelis_menten_null(self) -> None:
        """The Michaelis-Menten null is rejected on at least 85% of rich datasets."""
        self.assertGreaterEqual(self.rich_michaelis_menten.rejection_rate("T1"), 0.85)

    def test_sparse_design_has_lower_power(self) -> None:
        """Fewer individuals and timepoints lower the power."""
        self.assertLess(
            self.sparse_affine.rejection_rate("T1"), self.rich_affine.rejection_rate("T1")
        )

    def test_observation_space_statistic_is_more_powerful(self) -> None:
        """S1 does not reject more often than T1."""
        self.assertLessEqual(
            self.rich_affine.rejection_rate("S1"), self.rich_affine.rejection_rate("T1")
        )

    def test_type_one_error_near_level(self) -> None:
        """With 50 individuals under the true family, T1 rejects 2% to 9% of the datasets."""
        rate = self.rich_true.rejection_rate("T1")
        self.assertGreaterEqual(rate, 0.02)
        self.assertLessEqual(rate, 0.09)

    def test_null_p_values_are_uniform(self) -> None:
        """p-values under the true family pass a Kolmogorov-Smirnov test at level 0.01."""
        p_values = self.rich_true.p_values("T1")
        self.assertGreater(stats.kstest(p_values, "uniform").pvalue, 0.01)


@unittest.skipUnless(config.RUN_SLOW_TESTS, "rich-scenario benchmark; set RKHS_GOF_RUN_SLOW=1")
class TestBenchmarkContract(unittest.TestCase):
    """
    Accuracy and runtime ordering of the nonparametric algorithms on rich data.
    """

    @classmethod
    def setUpClass(cls) -> None:
        cls.frame = run_benchmark(
            get_scenario("rich"),
            n_datasets=BENCH_DATASETS,
            algorithms=("quasi_newton", "pardir_alylin_nonlin", "pardir_alylin", "pardir_nonlin"),
            jobs=config.DEFAULT_JOBS,
        )
        cls.summary = benchmark_summary(cls.frame).set_index("algorithm")

    def _successes(self, algorithm: str) -> int:
        rows = self.frame[self.frame["algorithm"] == algorithm]
        self.assertEqual(len(rows), BENCH_DATASETS)
        return int(rows["success"].sum())

    def test_staged_algorithm_reaches_noise_level(self) -> None:
        """ParDir-AlyLin-Nonlin reaches MSE <= 1.2 sigma^2 on at least 8 of 10 datasets."""
        self.assertGreaterEqual(self._successes("pardir_alylin_nonlin"), 8)

    def test_random_start_quasi_newton_rarely_converges(self) -> None:
        """Quasi-Newton from random coefficients succeeds on at most 4 of 10 datasets."""
        self.assertLessEqual(self._successes("quasi_newton"), 4)

    def test_linearization_is_faster_than_nonlinear_refinement(self) -> None:
        """ParDir-AlyLin has a smaller median runtime than ParDir-Nonlin."""
        runtime = self.summary["median_runtime_s"]
        self.assertLess(runtime["pardir_alylin"], runtime["pardir_nonlin"])

    def test_staged_algorithm_beats_random_start(self) -> None:
        """The staged algorithm's median MSE is at most that of random-start quasi-Newton."""
        mse = self.summary["median_mse"]
        self.assertLessEqual(mse["pardir_alylin_nonlin"], mse["quasi_newton"])


if __name__ == "__main__":
    unittest.main()

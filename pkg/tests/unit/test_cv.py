"""
Unit tests for k-fold cross-validation of the regularization parameter.
"""

import unittest

import numpy as np

from rkhs_gof.cv.crossval import check_grid, cross_validate_lambda, parse_estimator
from rkhs_gof.errors import InputError
from rkhs_gof.estimators.results import COMBINED, NONPARAMETRIC
from rkhs_gof.optimize.options import SolverOptions
from rkhs_gof.pk.covariates import AFFINE_LINEAR, ParametricFamily
from rkhs_gof.pk.scenarios import get_scenario, simulate_dataset


class TestCrossValidation(unittest.TestCase):
    """
    Fold construction, lambda selection and argument checks.
    """

    @classmethod
    def setUpClass(cls) -> None:
        cls.dataset = simulate_dataset(
            get_scenario("sparse").with_n(10), ParametricFamily.reference(), 6
        )
        cls.opts = SolverOptions(max_iterations=40)
        cls.result = cross_validate_lambda(
            cls.dataset, grid=(1e-2,), k=3, seed=2, opts=cls.opts, niter=1
        )

    def test_folds_partition_individuals(self) -> None:
        """Every individual is held out exactly once and fold sizes differ by at most one."""
        folds = self.result.folds
        self.assertEqual(len(folds), 3)
        np.testing.assert_array_equal(np.sort(np.concatenate(folds)), np.arange(10))
        sizes = [fold.size for fold in folds]
        self.assertLessEqual(max(sizes) - min(sizes), 1)

    def test_single_point_grid_selects_it(self) -> None:
        """With one candidate the selection is that candidate."""
        self.assertEqual(self.result.selected_lambda, 1e-2)
        self.assertEqual(self.result.fold_errors.shape, (3, 1))
        self.assertTrue(np.all(self.result.fold_errors >= 0))
        self.assertEqual(self.result.estimator, NONPARAMETRIC)

    def test_same_seed_same_curve(self) -> None:
        """Folds and errors are a deterministic function of the seed."""
        again = cross_validate_lambda(
            self.dataset, grid=(1e-2,), k=3, seed=2, opts=self.opts, niter=1
        )
        for first, second in zip(self.result.folds, again.folds):
            np.testing.assert_array_equal(first, second)
        np.testing.assert_array_equal(self.result.fold_errors, again.fold_errors)

    def test_invalid_arguments(self) -> None:
        """Too few folds, too few individuals and bad grids raise InputError."""
        with self.assertRaises(InputError):
            cross_validate_lambda(self.dataset, grid=(1e-2,), k=1)
        with self.assertRaises(InputError):
            cross_validate_lambda(self.dataset.subset(np.arange(3)), grid=(1e-2,), k=5)
        for grid in ((), (1e-2, 1e-3), (0.0, 1.0), (1e-2, 1e-2)):
            with self.assertRaises(InputError):
                check_grid(grid)

    def test_parse_estimator(self) -> None:
        """The combined estimator needs a family; unknown estimators are rejected."""
        self.assertEqual(parse_estimator(NONPARAMETRIC), (NONPARAMETRIC, None))
        self.assertEqual(parse_estimator("combined:affine_linear"), (COMBINED, AFFINE_LINEAR))
        self.assertEqual(parse_estimator((COMBINED, AFFINE_LINEAR)), (COMBINED, AFFINE_LINEAR))
        with self.assertRaises(InputError):
            parse_estimator(COMBINED)
        with self.assertRaises(InputError):
            parse_estimator("ridge")


if __name__ == "__main__":
    unittest.main()

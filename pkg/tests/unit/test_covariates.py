"""
Unit tests for the parametric covariate families and the weight-for-age surrogate.
"""

import unittest

import numpy as np

from rkhs_gof.config import DEFAULT_TAU0
from rkhs_gof.errors import InputError
from rkhs_gof.optimize.derivatives import finite_diff_jacobian
from rkhs_gof.pk.covariates import (
    AFFINE_LINEAR,
    FAMILY_KINDS,
    MICHAELIS_MENTEN,
    SATURABLE_EXPONENTIAL,
    ParametricFamily,
    WeightModel,
    covariate_family_eval,
    weight_for_age,
)


class TestParametricFamilies(unittest.TestCase):
    """
    Clearance curves, parameter Jacobians and domain checks.
    """

    def test_reference_clearance(self) -> None:
        """CL*(0) = (1 - alpha) CL_max and CL* approaches CL_max in adulthood."""
        family = ParametricFamily.reference()
        self.assertAlmostEqual(float(family.clearance(0.0)), 0.411 * 198.0, places=9)
        self.assertAlmostEqual(float(family.clearance(200.0)), 198.0, places=6)
        star = covariate_family_eval(family, 0.0)
        self.assertEqual((star.v1, star.q, star.v2), (4090.0, 879.0, 2230.0))

    def test_theta_is_in_litres(self) -> None:
        """theta(a) is f_tau(a) divided by 1000."""
        family = ParametricFamily(AFFINE_LINEAR, DEFAULT_TAU0[AFFINE_LINEAR])
        theta = family.theta([0.0, 10.0])
        np.testing.assert_allclose(theta[:, 0], [0.09, 0.15])
        np.testing.assert_allclose(theta[0, 1:], [4.09, 0.879, 2.23])

    def test_michaelis_menten_half_saturation(self) -> None:
        """At a = k_m the clearance is half its maximum."""
        family = ParametricFamily(MICHAELIS_MENTEN, (220.0, 2.0, 4090.0, 879.0, 2230.0))
        self.assertAlmostEqual(float(family.clearance(2.0)), 110.0)

    def test_tau_jacobian_matches_finite_differences(self) -> None:
        """The analytic derivative of theta(ages) with respect to tau for every family."""
        ages = np.array([0.0, 0.5, 3.0, 8.0, 20.0])
        for kind in FAMILY_KINDS:
            family = ParametricFamily(kind, DEFAULT_TAU0[kind])
            k = len(family.tau)
            numeric = finite_diff_jacobian(
                lambda tau: family.with_tau(tau).theta(ages).reshape(-1), family.vector
            ).reshape(ages.size, 4, k)
            np.testing.assert_allclose(
                family.tau_jacobian(ages), numeric, rtol=1e-6, atol=1e-12, err_msg=kind
            )

    def test_inadmissible_parameters_rejected(self) -> None:
        """Out-of-domain or wrongly sized tau raises InputError."""
        with self.assertRaises(InputError):
            ParametricFamily(SATURABLE_EXPONENTIAL, (1.5, 0.1, 198.0, 4090.0, 879.0, 2230.0))
        with self.assertRaises(InputError):
            ParametricFamily(AFFINE_LINEAR, (90.0, 6.0, 4090.0))
        with self.assertRaises(InputError):
            ParametricFamily("hill", (1.0,))

    def test_negative_clearance_is_not_admissible(self) -> None:
        """An affine curve crossing zero inside the age range is flagged."""
        family = ParametricFamily(AFFINE_LINEAR, (50.0, -5.0, 4090.0, 879.0, 2230.0))
        self.assertTrue(family.is_admissible([0.0, 5.0]))
        self.assertFalse(family.is_admissible([0.0, 20.0]))

    def test_serialization_by_name(self) -> None:
        """to_dict keys parameters by name; from_dict also accepts a plain list."""
        family = ParametricFamily.reference()
        record = family.to_dict()
        self.assertEqual(record["tau"]["cl_max"], 198.0)
        self.assertEqual(ParametricFamily.from_dict(record), family)
        listed = {"kind": SATURABLE_EXPONENTIAL, "tau": list(family.tau)}
        self.assertEqual(ParametricFamily.from_dict(listed), family)


class TestWeightModel(unittest.TestCase):
    """
    The lognormal weight-for-age surrogate.
    """

    def test_median_curve(self) -> None:
        """Birth weight at age 0 and half the gain at the half age."""
        model = WeightModel()
        self.assertAlmostEqual(float(model.median(0.0)), 3.5)
        self.assertAlmostEqual(float(model.median(9.0)), 3.5 + 66.5 / 2.0)
        self.assertTrue(np.all(np.diff(model.median(np.linspace(0.0, 20.0, 50))) > 0))

    def test_samples_are_positive_and_reproducible(self) -> None:
        """Draws are positive and depend only on the random stream."""
        first = weight_for_age(4.0, np.random.default_rng(1))
        second = weight_for_age(4.0, np.random.default_rng(1))
        self.assertEqual(first, second)
        self.assertGreater(first, 0.0)

    def test_age_outside_range_rejected(self) -> None:
        """Ages beyond 20 years raise InputError."""
        with self.assertRaises(InputError):
            weight_for_age(25.0, np.random.default_rng(0))

    def test_zero_variation_returns_median(self) -> None:
        """With cv = 0 every draw equals the median."""
        model = WeightModel(cv=0.0)
        value = weight_for_age(12.0, np.random.default_rng(3), model)
        self.assertAlmostEqual(value, float(model.median(12.0)))


if __name__ == "__main__":
    unittest.main()

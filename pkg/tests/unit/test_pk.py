"""
Unit tests for the two-compartment model, its derivatives and allometric scaling.
The closed form is checked against direct numerical integration of the ODE system.
"""

import unittest

import numpy as np
from scipy.integrate import solve_ivp

from rkhs_gof.errors import DegenerateEigenvalueError, DomainError, InputError
from rkhs_gof.inverse.models import MechanisticModel
from rkhs_gof.pk.covariates import ParametricFamily
from rkhs_gof.pk.model import (
    DosingSchedule,
    PkParams,
    PkParamsStar,
    TwoCompartmentModel,
    allometric_scale,
    mechanistic_G,
    two_cmt_concentration,
    two_cmt_jacobian,
)


def _ode_concentrations(params: PkParams, dose: float, times: np.ndarray, dose_times) -> np.ndarray:
    """Central concentrations (mg/L) by integrating the amounts between doses."""
    k10, k12, k21 = params.rate_constants()

    def rhs(_, a):
        return [-(k10 + k12) * a[0] + k21 * a[1], k12 * a[0] - k21 * a[1]]

    ends = list(dose_times[1:]) + [times.max() + 1.0]
    state = np.zeros(2)
    out = np.empty(times.size)
    for start, end in zip(dose_times, ends):
        state[0] += dose
        mask = (times >= start) & (times < end)
        t_eval = np.append(times[mask], end)
        sol = solve_ivp(
            rhs, (start, end), state, method="DOP853", t_eval=t_eval, rtol=1e-12, atol=1e-12
        )
        out[mask] = sol.y[0, :-1]
        state = sol.y[:, -1].copy()
    return out / (params.v1 / 1000.0)


class TestConcentration(unittest.TestCase):
    """
    Closed-form concentrations against the ODE solution.
    """

    def setUp(self) -> None:
        self.family = ParametricFamily.reference()
        self.weight = 20.0
        self.params = allometric_scale(self.family.eval(5.0), self.weight)
        self.dose = 15.0 * self.weight

    def test_single_dose_matches_ode(self) -> None:
        """The biexponential solution agrees with numerical integration."""
        times = np.linspace(0.0, 21.0, 200)
        expected = _ode_concentrations(self.params, self.dose, times, [0.0])
        actual = two_cmt_concentration(self.params, self.dose, times)
        np.testing.assert_allclose(actual, expected, rtol=1e-8)

    def test_initial_concentration_is_dose_over_volume(self) -> None:
        """C1(0) = D / V1."""
        value = two_cmt_concentration(self.params, self.dose, 0.0)
        self.assertAlmostEqual(value, self.dose / (self.params.v1 / 1000.0), places=9)

    def test_multiple_doses_match_ode(self) -> None:
        """Superposition over four 30-day doses agrees with piecewise integration."""
        times = np.array([0.5, 1.0, 2.0, 7.0, 21.0, 40.0, 55.0, 70.0, 85.0, 100.0, 115.0])
        schedule = DosingSchedule(n_doses=4)
        model = TwoCompartmentModel(schedule, times)
        theta = self.family.theta([5.0])
        covariates = np.array([[5.0, self.weight]])
        predicted = np.exp(model.predict(theta, covariates)[0])
        expected = _ode_concentrations(self.params, self.dose, times, schedule.dose_times())
        np.testing.assert_allclose(predicted, expected, rtol=1e-8)

    def test_nonpositive_parameters_raise(self) -> None:
        """Zero or negative parameters raise DomainError."""
        with self.assertRaises(DomainError):
            two_cmt_concentration(PkParams(-1.0, 4000.0, 800.0, 2000.0), 100.0, 1.0)
        model = TwoCompartmentModel(DosingSchedule(), (1.0,))
        with self.assertRaises(DomainError):
            model.predict(np.array([[0.1, 0.0, 0.8, 2.0]]), np.array([[5.0, 20.0]]))

    def test_coinciding_eigenvalues_raise(self) -> None:
        """A numerically vanishing eigenvalue gap raises DegenerateEigenvalueError."""
        params = PkParams(cl=1.0, v1=1.0, q=1e-25, v2=1e-25)
        with self.assertRaises(DegenerateEigenvalueError):
            two_cmt_concentration(params, 10.0, 1.0)

    def test_mechanistic_G_matches_population_model(self) -> None:
        """The single-individual map equals the row of the vectorized model."""
        times = (1.0, 2.0, 4.0, 7.0, 21.0)
        schedule = DosingSchedule()
        star = self.family.eval(3.0)
        single = mechanistic_G(star, (3.0, 14.0), schedule, times)
        population = TwoCompartmentModel(schedule, times).predict(
            star.as_theta()[None, :], np.array([[3.0, 14.0]])
        )
        np.testing.assert_allclose(single, population[0])


class TestDerivatives(unittest.TestCase):
    """
    Analytic Jacobian of ln C1 against central differences.
    """

    def test_jacobian_matches_finite_differences(self) -> None:
        """Relative agreement of 1e-4 for single and multiple dosing."""
        family = ParametricFamily.reference()
        ages = np.array([0.2, 1.0, 4.0, 11.0, 19.0])
        covariates = np.column_stack([ages, [4.0, 9.0, 17.0, 38.0, 66.0]])
        theta = family.theta(ages)
        for n_doses, times in ((1, (0.5, 1.0, 4.0, 21.0)), (4, (0.5, 21.0, 40.0, 115.0))):
            model = TwoCompartmentModel(DosingSchedule(n_doses=n_doses), times)
            analytic = model.jacobian(theta, covariates)
            numeric = MechanisticModel.jacobian(model, theta, covariates)
            self.assertEqual(analytic.shape, (5, len(times), 4))
            np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-6)

    def test_clearance_lowers_late_concentrations(self) -> None:
        """d ln C1 / d CL* is negative at late times for adult parameters."""
        family = ParametricFamily.reference()
        model = TwoCompartmentModel(DosingSchedule(), (7.0, 14.0, 21.0))
        jacobian = model.jacobian(family.theta([20.0]), np.array([[20.0, 70.0]]))
        self.assertTrue(np.all(jacobian[0, :, 0] < 0))

    def test_single_individual_jacobian(self) -> None:
        """two_cmt_jacobian equals the row of the vectorized Jacobian."""
        family = ParametricFamily.reference()
        times = (1.0, 7.0, 21.0)
        schedule = DosingSchedule()
        star = family.eval(5.0)
        single = two_cmt_jacobian(star, (5.0, 19.0), schedule, times)
        population = TwoCompartmentModel(schedule, times).jacobian(
            star.as_theta()[None, :], np.array([[5.0, 19.0]])
        )
        self.assertEqual(single.shape, (3, 4))
        np.testing.assert_allclose(single, population[0])


class TestScaling(unittest.TestCase):
    """
    Allometric scaling, unit conversion and dosing schedules.
    """

    def test_reference_weight_is_identity(self) -> None:
        """At 70 kg the individual parameters equal the reference ones."""
        star = PkParamsStar(198.0, 4090.0, 879.0, 2230.0)
        scaled = allometric_scale(star, 70.0)
        self.assertAlmostEqual(scaled.cl, 198.0)
        self.assertAlmostEqual(scaled.v2, 2230.0)

    def test_exponents(self) -> None:
        """Flows scale with (w/70)^0.75 and volumes with (w/70)^1."""
        star = PkParamsStar(100.0, 1000.0, 200.0, 500.0)
        scaled = allometric_scale(star, 35.0)
        self.assertAlmostEqual(scaled.cl, 100.0 * 0.5**0.75)
        self.assertAlmostEqual(scaled.q, 200.0 * 0.5**0.75)
        self.assertAlmostEqual(scaled.v1, 500.0)
        with self.assertRaises(InputError):
            allometric_scale(star, 0.0)

    def test_theta_round_trip_units(self) -> None:
        """The estimation coordinate is in litres."""
        star = PkParamsStar(198.0, 4090.0, 879.0, 2230.0)
        np.testing.assert_allclose(star.as_theta(), [0.198, 4.09, 0.879, 2.23])
        restored = PkParamsStar.from_theta(star.as_theta())
        np.testing.assert_allclose(restored.as_theta(), star.as_theta())
        self.assertAlmostEqual(restored.v1, 4090.0)

    def test_dosing_schedule(self) -> None:
        """Doses are given every 30 days and scale with weight."""
        schedule = DosingSchedule(n_doses=3)
        np.testing.assert_allclose(schedule.dose_times(), [0.0, 30.0, 60.0])
        self.assertAlmostEqual(float(schedule.dose_mg(20.0)), 300.0)
        with self.assertRaises(InputError):
            DosingSchedule(n_doses=0)


if __name__ == "__main__":
    unittest.main()

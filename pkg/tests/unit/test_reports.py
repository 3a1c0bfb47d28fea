"""
Unit tests for the table, record and PDF writers.
"""

import json
import os
import tempfile
import unittest

import numpy as np
import pandas as pd

from rkhs_gof.estimators.results import PARAMETRIC, FitResult
from rkhs_gof.gof.statistics import parse_kinds
from rkhs_gof.gof.testing import PowerResult
from rkhs_gof.pk.covariates import AFFINE_LINEAR, SATURABLE_EXPONENTIAL, ParametricFamily
from rkhs_gof.reports.generator import generate_power_report
from rkhs_gof.reports.tables import age_grid, clearance_curve_frame, write_record, write_table


class TestReports(unittest.TestCase):
    """
    Output files of the study commands.
    """

    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self) -> None:
        self.tmp.cleanup()

    def test_table_with_provenance_columns(self) -> None:
        """Provenance fields are repeated on every row."""
        path = os.path.join(self.tmp.name, "nested", "table.csv")
        write_table(pd.DataFrame({"x": [1, 2]}), path, {"config_hash": "abc", "seed": 3})
        frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), ["x", "config_hash", "seed"])
        self.assertEqual(frame["seed"].tolist(), [3, 3])

    def test_record_with_numpy_values(self) -> None:
        """Numpy scalars and arrays are written as plain JSON."""
        path = write_record(
            {"value": np.float64(0.5), "values": np.arange(3)},
            os.path.join(self.tmp.name, "record.json"),
        )
        with open(path, encoding="utf-8") as handle:
            self.assertEqual(json.load(handle), {"value": 0.5, "values": [0, 1, 2]})

    def test_clearance_curve_grid(self) -> None:
        """The curve covers 0 to 20 years in quarter-year steps, in mL/day."""
        ages = age_grid()
        self.assertEqual(ages.size, 81)
        self.assertEqual((ages[0], ages[-1]), (0.0, 20.0))
        fit = FitResult(PARAMETRIC, family=ParametricFamily.reference())
        frame = clearance_curve_frame(fit)
        self.assertAlmostEqual(frame["cl_star"].iloc[0], 0.411 * 198.0, places=9)

    def test_power_report_pdf(self) -> None:
        """A PDF is written for a finished power study."""
        records = [
            {"dataset": i, "seed": i, "failed": False, "tests": {"T1": {"reject": i % 2 == 0}}}
            for i in range(4)
        ]
        result = PowerResult(
            "sparse", SATURABLE_EXPONENTIAL, AFFINE_LINEAR, parse_kinds("T1"), 0.05, 19, 0, records
        )
        path = generate_power_report(
            [result], os.path.join(self.tmp.name, "power.pdf"), {"seed": 0}
        )
        with open(path, "rb") as handle:
            self.assertEqual(handle.read(4), b"%PDF")


if __name__ == "__main__":
    unittest.main()

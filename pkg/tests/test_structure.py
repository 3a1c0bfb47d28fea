import unittest


class TestPackageStructure(unittest.TestCase):
    def test_package_import(self) -> None:
        """The package exposes its version."""
        import rkhs_gof

        self.assertTrue(hasattr(rkhs_gof, "__version__"))

    def test_subpackages_import(self) -> None:
        """Every subpackage imports without side effects."""
        import rkhs_gof.cli
        import rkhs_gof.cv
        import rkhs_gof.estimators
        import rkhs_gof.gof
        import rkhs_gof.inverse
        import rkhs_gof.kernels
        import rkhs_gof.optimize
        import rkhs_gof.pk
        import rkhs_gof.reports  # noqa: F401


if __name__ == "__main__":
    unittest.main()

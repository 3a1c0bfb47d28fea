import contextlib
import io
import unittest
from unittest import mock

import numpy as np

from rkhs_gof import __version__
from rkhs_gof.main import main


class TestEntrypoint(unittest.TestCase):
    def test_version_flag(self) -> None:
        """--version prints the package version and exits cleanly."""
        out = io.StringIO()
        with contextlib.redirect_stdout(out), self.assertRaises(SystemExit) as exit_info:
            main(["--version"])
        self.assertEqual(exit_info.exception.code, 0)
        self.assertIn(__version__, out.getvalue())

    def test_missing_command(self) -> None:
        """Calling without a subcommand is a usage error."""
        with contextlib.redirect_stderr(io.StringIO()), self.assertRaises(SystemExit) as exit_info:
            main([])
        self.assertEqual(exit_info.exception.code, 2)

    def test_unexpected_errors_end_in_one_line(self) -> None:
        """Exceptions from outside the package still exit 1 with a single error line."""
        failures = (RuntimeError("solver\nexploded"), np.linalg.LinAlgError("Singular matrix"))
        for failure in failures:
            handler = mock.Mock(side_effect=failure)
            err = io.StringIO()
            with mock.patch.dict("rkhs_gof.main.COMMAND_HANDLERS", {"simulate": handler}):
                with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(err):
                    code = main(["simulate"])
            self.assertEqual(code, 1)
            lines = [line for line in err.getvalue().splitlines() if line.startswith("error:")]
            self.assertEqual(len(lines), 1)
            self.assertTrue(lines[0].startswith(f"error: {type(failure).__name__}: "))
        self.assertEqual(lines[0], "error: LinAlgError: Singular matrix")


if __name__ == "__main__":
    unittest.main()

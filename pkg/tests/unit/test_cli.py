"""
Unit tests for the command line: configuration, parsing, exit codes and reproducible output.
"""

import contextlib
import io
import json
import os
import tempfile
import unittest

import pandas as pd

from rkhs_gof.cli.app import build_parser, config_from_args
from rkhs_gof.cli.models import RunConfig
from rkhs_gof.errors import InputError
from rkhs_gof.main import main
from rkhs_gof.pk.scenarios import sidecar_path


def _run(argv) -> tuple:
    """Runs main and captures its exit code, stdout and stderr."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


class TestRunConfig(unittest.TestCase):
    """
    Run configuration records and their hash.
    """

    def test_round_trip(self) -> None:
        """A configuration survives to_dict and from_dict."""
        config = RunConfig(command="power", scenario="sparse", lam="cv", M=19, seed=4)
        self.assertEqual(RunConfig.from_dict(config.to_dict()), config)

    def test_hash_ignores_execution_fields(self) -> None:
        """Worker count and output directory do not change the config hash; the seed does."""
        base = RunConfig(command="test", seed=1)
        moved = RunConfig(command="test", seed=1, jobs=4, output_dir="x")
        self.assertEqual(base.config_hash(), moved.config_hash())
        self.assertNotEqual(base.config_hash(), RunConfig(command="test", seed=2).config_hash())

    def test_invalid_values_rejected(self) -> None:
        """Unknown keys, commands and lambdas raise InputError."""
        with self.assertRaises(InputError):
            RunConfig.from_dict({"command": "fit", "kernel": "laplace"})
        with self.assertRaises(InputError):
            RunConfig(command="plot")
        with self.assertRaises(InputError):
            RunConfig(lam="-1")

    def test_scale_presets(self) -> None:
        """Desk scale by default, full scale on request, explicit values win."""
        self.assertEqual((RunConfig().datasets, RunConfig().monte_carlo), (100, 200))
        full = RunConfig(full_scale=True)
        self.assertEqual((full.datasets, full.monte_carlo), (500, 500))
        self.assertEqual(RunConfig(full_scale=True, M=19).monte_carlo, 19)


class TestParser(unittest.TestCase):
    """
    Flag placement and config files.
    """

    def test_flags_before_and_after_command(self) -> None:
        """Common flags are accepted on either side of the subcommand."""
        args = build_parser().parse_args(["--seed", "3", "simulate", "--jobs", "2"])
        config = config_from_args(args)
        self.assertEqual((config.command, config.seed, config.jobs), ("simulate", 3, 2))
        args = build_parser().parse_args(["test", "--seed", "5", "--statistics", "T1,S2"])
        config = config_from_args(args)
        self.assertEqual((config.seed, config.statistics), (5, ["T1", "S2"]))

    def test_paper_scale_flag(self) -> None:
        """--paper-scale selects the long-run preset; --full-scale is an alias."""
        for flag in ("--paper-scale", "--full-scale"):
            config = config_from_args(build_parser().parse_args(["power", flag]))
            self.assertTrue(config.full_scale)
            self.assertEqual((config.datasets, config.monte_carlo), (500, 500))
        config = config_from_args(build_parser().parse_args(["--paper-scale", "simulate"]))
        self.assertTrue(config.full_scale)
        config = config_from_args(build_parser().parse_args(["power"]))
        self.assertEqual((config.datasets, config.monte_carlo), (100, 200))

    def test_flags_override_config_file(self) -> None:
        """Values from --config apply unless a flag sets them."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "run.json")
            with open(path, "w", encoding="utf-8") as handle:
                json.dump({"scenario": "sparse", "seed": 4, "M": 19}, handle)
            args = build_parser().parse_args(["--config", path, "test", "--seed", "9"])
            config = config_from_args(args)
        self.assertEqual((config.scenario, config.seed, config.M), ("sparse", 9, 19))


class TestMain(unittest.TestCase):
    """
    End-to-end behaviour of the entry point on the simulate command.
    """

    def test_simulate_is_byte_reproducible(self) -> None:
        """Two runs with the same seed write identical files."""
        contents = []
        for _ in range(2):
            with tempfile.TemporaryDirectory() as tmp:
                code, out, _ = _run(
                    ["simulate", "--scenario", "sparse", "--seed", "7", "--output-dir", tmp]
                )
                self.assertEqual(code, 0)
                csv_path = os.path.join(tmp, "simulate", "dataset_sparse_seed7.csv")
                self.assertIn(csv_path, out)
                with open(csv_path, "rb") as handle:
                    contents.append(handle.read())
                frame = pd.read_csv(csv_path)
                with open(sidecar_path(csv_path), encoding="utf-8") as handle:
                    sidecar = json.load(handle)
        self.assertEqual(contents[0], contents[1])
        self.assertEqual(sidecar["metadata"]["seed"], 7)
        self.assertEqual(len(sidecar["metadata"]["config_hash"]), 64)
        self.assertEqual(frame["id"].nunique(), 20)
        self.assertEqual(frame["time"].nunique(), 5)

    def test_unknown_scenario_is_a_usage_error(self) -> None:
        """Exit code 2 and one error line on stderr."""
        with tempfile.TemporaryDirectory() as tmp:
            code, _, err = _run(["simulate", "--scenario", "dense", "--output-dir", tmp])
        self.assertEqual(code, 2)
        self.assertIn("error: UnknownScenarioError", err)

    def test_invalid_lambda_is_a_usage_error(self) -> None:
        """A nonpositive lambda is rejected before any computation."""
        code, _, err = _run(["fit", "--lambda", "0"])
        self.assertEqual(code, 2)
        self.assertIn("error: InputError", err)

    def test_missing_dataset_file_fails(self) -> None:
        """A nonexistent --data file ends the run with exit code 1."""
        with tempfile.TemporaryDirectory() as tmp:
            missing = os.path.join(tmp, "missing.csv")
            code, _, err = _run(["fit", "--data", missing, "--output-dir", tmp])
        self.assertEqual(code, 1)
        self.assertIn("error: InputError", err)


if __name__ == "__main__":
    unittest.main()

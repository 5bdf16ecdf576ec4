import contextlib
import io
import math
import os
import tempfile
import unittest
from unittest import mock

from cnskspectral import cli, config

from . import apptesting


class CliTestMixin:
    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = tmp.name
        for patcher in (
            mock.patch.dict(os.environ, {}, clear=True),
            mock.patch.object(cli, "setup_logging"),
        ):
            patcher.start()
            self.addCleanup(patcher.stop)

    def write_config(self, experiment_id, **sections):
        sections.setdefault("output", {"directory": self.tmp, "overwrite": "false"})
        path = os.path.join(self.tmp, "%s.ini" % experiment_id)
        with open(path, "w") as handle:
            handle.write(apptesting.config_text(experiment_id, **sections))
        return path

    def main(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            code = cli.main(list(argv))
        return code, stdout.getvalue(), stderr.getvalue()


class RunCommandTest(CliTestMixin, unittest.TestCase):
    def energy_config(self, **sections):
        return self.write_config(
            "energy-identity",
            grid={"n": 8, "half_width": 10 * math.pi},
            datum={"kind": "zero"},
            time={"t_min": 0.1, "t_max": 1.0},
            **sections
        )

    def test_passing_run(self):
        code, stdout, _ = self.main("run", self.energy_config())
        self.assertEqual(code, cli.EXIT_PASSED)
        self.assertIn("status=passed", stdout.splitlines())
        directory = os.path.join(self.tmp, "energy-identity")
        self.assertEqual(
            sorted(os.listdir(directory)),
            ["changes.jsonl", "energy-ledger-kappa0-0-25.csv", "report.json", "report.txt"],
        )

    def test_run_id_names_output_directory(self):
        path = self.energy_config(experiment={"run_id": "nightly"})
        self.main("run", path)
        self.assertTrue(os.path.isfile(os.path.join(self.tmp, "nightly", "report.txt")))

    def test_second_run_without_overwrite(self):
        path = self.energy_config()
        self.main("run", path)
        code, _, stderr = self.main("run", path)
        self.assertEqual(code, cli.EXIT_ERROR)
        self.assertIn("cannot write results", stderr)

    def test_second_run_with_overwrite(self):
        path = self.energy_config(output={"directory": self.tmp, "overwrite": "true"})
        self.main("run", path)
        code, _, _ = self.main("run", path)
        self.assertEqual(code, cli.EXIT_PASSED)

    def test_failed_run(self):
        path = self.write_config(
            "high-freq-decay",
            grid={"n": 8, "half_width": math.pi},
            datum={"kind": "zero"},
            time={"t_min": 0.1, "t_max": 1.0},
        )
        code, stdout, _ = self.main("run", path)
        self.assertEqual(code, cli.EXIT_ERROR)
        self.assertIn("status=failed", stdout.splitlines())

    def test_failed_check(self):
        path = self.write_config(
            "stokes-bound",
            grid={"n": 8, "half_width": 10 * math.pi},
            datum={"kind": "zero"},
            time={"t_min": 0.1, "t_max": 1.0},
            tolerances={"saturation_ratio": 0.5},
        )
        code, stdout, _ = self.main("run", path)
        self.assertEqual(code, cli.EXIT_CHECK_FAILED)
        lines = stdout.splitlines()
        self.assertIn("status=check-failed", lines)
        self.assertIn("check.saturation.passed=false", lines)

    def test_invalid_configuration(self):
        path = self.write_config("log-growth", params={"kappa0": -1})
        code, stdout, stderr = self.main("run", path)
        self.assertEqual(code, cli.EXIT_ERROR)
        self.assertEqual(stdout, "")
        self.assertIn("params.kappa0", stderr)


class ValidateCommandTest(CliTestMixin, unittest.TestCase):
    def test_valid(self):
        code, stdout, _ = self.main("validate", self.write_config("log-growth"))
        self.assertEqual(code, cli.EXIT_PASSED)
        self.assertIn("experiment log-growth", stdout)

    def test_missing_file(self):
        code, _, stderr = self.main("validate", os.path.join(self.tmp, "missing.ini"))
        self.assertEqual(code, cli.EXIT_ERROR)
        self.assertIn("invalid configuration", stderr)


class ListExperimentsCommandTest(CliTestMixin, unittest.TestCase):
    def test_lists_every_experiment(self):
        code, stdout, _ = self.main("list-experiments")
        self.assertEqual(code, cli.EXIT_PASSED)
        names = [line.split()[0] for line in stdout.splitlines()]
        self.assertEqual(names, list(config.EXPERIMENTS))

    def test_command_is_required(self):
        with contextlib.redirect_stderr(io.StringIO()):
            self.assertRaises(SystemExit, cli.main, [])

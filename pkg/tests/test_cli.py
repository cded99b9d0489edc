import json
import tempfile
import unittest
from pathlib import Path

from run import EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_OK, main

TINY = """
name = cli_uwb
scenario = uwb_batch
seed = 2
omegas = 1.0
dts = 0.1
reprs = so3xr3
modes = cf
duration = 1
"""


class TestCli(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write_config(self, text, name="experiment.cfg"):
        path = self.tmp / name
        path.write_text(text, encoding="utf-8")
        return path

    def test_successful_run_writes_reports(self):
        config = self.write_config(TINY)
        out = self.tmp / "out"
        self.assertEqual(main(["run", str(config), "--out", str(out), "--dump-measurements"]), EXIT_OK)
        self.assertTrue((out / "cli_uwb_results.csv").is_file())
        self.assertTrue((out / "cli_uwb_omega_1.meas").is_file())

    def test_solve_reports_are_opt_in(self):
        config = self.write_config(TINY)
        plain, verbose = self.tmp / "plain", self.tmp / "verbose"
        self.assertEqual(main(["run", str(config), "--out", str(plain)]), EXIT_OK)
        self.assertEqual(main(["run", str(config), "--out", str(verbose), "--solve-reports"]), EXIT_OK)
        self.assertFalse((plain / "cli_uwb_solve_reports.jsonl").exists())
        lines = (verbose / "cli_uwb_solve_reports.jsonl").read_text(encoding="utf-8").splitlines()
        self.assertTrue(lines)
        self.assertTrue(all(json.loads(line)["grid_point"] == 0 for line in lines))

    def test_seed_override_changes_results(self):
        config = self.write_config(TINY)
        for seed in ("2", "3"):
            self.assertEqual(main(["run", str(config), "--out", str(self.tmp / seed), "--seed", seed]), EXIT_OK)
        first = (self.tmp / "2" / "cli_uwb_results.csv").read_text(encoding="utf-8")
        second = (self.tmp / "3" / "cli_uwb_results.csv").read_text(encoding="utf-8")
        self.assertNotEqual(first, second)

    def test_configuration_errors(self):
        config = self.write_config(TINY)
        bad = self.write_config(TINY + "warp_factor = 9\n", "bad.cfg")
        cases = {
            "missing file": ["run", str(self.tmp / "absent.cfg")],
            "unknown key": ["run", str(bad)],
            "negative seed": ["run", str(config), "--seed", "-1"],
            "no threads": ["run", str(config), "--threads", "0"],
        }
        for name, argv in cases.items():
            with self.subTest(case=name):
                self.assertEqual(main(argv + ["--out", str(self.tmp / "out")]), EXIT_CONFIG)

    def test_strict_mode_flags_unconverged_points(self):
        config = self.write_config(TINY + "rot_init_var = 0.2\npos_init_var = 0.5\nsolver_max_iters = 1\n")
        out = str(self.tmp / "out")
        self.assertEqual(main(["run", str(config), "--out", out]), EXIT_OK)
        self.assertEqual(main(["run", str(config), "--out", out, "--strict"]), EXIT_NOT_CONVERGED)


if __name__ == "__main__":
    unittest.main()

"""Full preset experiments checked against the qualitative results they reproduce."""
import unittest

import pytest

from config import presets_dir
from config.experiment_loader import load_experiment_config
from modules.bench import ExperimentRunner
from schemas.trajectory_types import PoseRepr

# Relative slack on the CF <= AP comparison
CF_AP_SLACK = 1e-2


def run_preset(name, **update):
    cfg = load_experiment_config(presets_dir / f"{name}.cfg")
    if update:
        cfg = cfg.model_copy(update=update)
    results = ExperimentRunner(cfg).run()
    return cfg, {(result.omega, result.repr, result.mode): result for result in results}


@pytest.mark.slow
class TestUwbPresets(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.split_cfg, cls.split = run_preset("uwb_split")
        cls.non_split_cfg, cls.non_split = run_preset("uwb_non_split")

    def test_split_so3xr3_tracks_every_rate(self):
        for omega in self.split_cfg.omegas:
            with self.subTest(omega=omega):
                self.assertLess(self.split[(omega, "so3xr3", "cf")].pos_rmse, 0.2)

    def test_split_favours_so3xr3_at_the_fastest_rate(self):
        omega = max(self.split_cfg.omegas)
        self.assertGreater(self.split[(omega, "se3", "cf")].pos_rmse, self.split[(omega, "so3xr3", "cf")].pos_rmse)

    def test_non_split_favours_se3_at_the_fastest_rate(self):
        omega = max(self.non_split_cfg.omegas)
        self.assertLess(self.non_split[(omega, "se3", "cf")].pos_rmse, self.non_split[(omega, "so3xr3", "cf")].pos_rmse)

    def test_closed_form_no_worse_than_approximated(self):
        for name, cfg, results in (("split", self.split_cfg, self.split), ("non_split", self.non_split_cfg, self.non_split)):
            omega = max(cfg.omegas)
            for pose_repr in ("so3xr3", "se3"):
                with self.subTest(trajectory=name, repr=pose_repr):
                    closed_form = results[(omega, pose_repr, "cf")].pos_rmse
                    approximated = results[(omega, pose_repr, "ap")].pos_rmse
                    self.assertLessEqual(closed_form, approximated * (1.0 + CF_AP_SLACK))


@pytest.mark.slow
class TestMlcmePreset(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        _, results = run_preset("mlcme", omegas=[0.25], reprs=[PoseRepr.SO3xR3])
        cls.result = results[(0.25, "so3xr3", "cf")]

    def test_per_lidar_position_rmse(self):
        self.assertEqual(len(self.result.per_lidar), 2)
        for lidar, (position_rmse, _) in enumerate(self.result.per_lidar):
            with self.subTest(lidar=lidar):
                self.assertLessEqual(position_rmse, 0.06)

    def assert_extrinsic_settled(self, start, end):
        entries = [entry for entry in self.result.extrinsic_trace if start <= entry[0] < end]
        self.assertTrue(entries)
        for window_end, rotation_deg, translation_m, *_ in entries:
            with self.subTest(window_end=window_end):
                self.assertLess(translation_m, 0.02)
                self.assertLess(rotation_deg, 2.0)

    def test_extrinsic_before_the_mount_slips(self):
        self.assert_extrinsic_settled(5.0, 10.0 + 1e-9)

    def test_extrinsic_reconverges_after_the_slip(self):
        self.assert_extrinsic_settled(15.0, 20.0)


if __name__ == "__main__":
    unittest.main()

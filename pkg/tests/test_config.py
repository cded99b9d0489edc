import tempfile
import unittest
from pathlib import Path

from config import presets_dir, settings
from config.experiment_loader import load_experiment_config, parse_experiment_text
from errors import ConfigError
from modules.bench.scenarios import solver_options
from schemas.experiment import LIDAR_DTS, UWB_OMEGAS, GtKind, Scenario
from schemas.trajectory_types import KinematicsMode, PoseRepr


class TestPresets(unittest.TestCase):
    def test_every_preset_parses(self):
        for path in sorted(presets_dir.glob("*.cfg")):
            with self.subTest(preset=path.name):
                cfg = load_experiment_config(path)
                self.assertEqual(cfg.name, path.stem)
                self.assertEqual(cfg.grid_size, len(cfg.omegas) * len(cfg.dts) * len(cfg.reprs) * len(cfg.modes))

    def test_uwb_split_preset(self):
        cfg = load_experiment_config(presets_dir / "uwb_split.cfg")
        self.assertEqual(cfg.scenario, Scenario.UWB_BATCH)
        self.assertEqual(cfg.gt_kind, GtKind.SPLIT)
        self.assertEqual(cfg.grid_size, 24)
        self.assertEqual(cfg.modes, [KinematicsMode.CLOSED_FORM, KinematicsMode.APPROXIMATED])
        self.assertEqual(cfg.solver.max_iters, 50)
        self.assertEqual(len(cfg.anchors), 4)

    def test_mlcme_preset(self):
        cfg = load_experiment_config(presets_dir / "mlcme.cfg")
        self.assertEqual(cfg.gt_kind, GtKind.LISSAJOUS)
        self.assertEqual(cfg.modes, [KinematicsMode.CLOSED_FORM])
        self.assertEqual(cfg.room_min, (-3.0, -3.0, 0.0))

    def test_lidar_batch_preset_sweeps_knot_spacing(self):
        cfg = load_experiment_config(presets_dir / "lidar_batch.cfg")
        self.assertEqual(cfg.dts, [0.05, 0.1, 0.2, 0.3])
        self.assertEqual(cfg.grid_size, 64)


class TestParsing(unittest.TestCase):
    def test_scenario_defaults_fill_missing_keys(self):
        cfg = parse_experiment_text("scenario = lidar_batch\n")
        self.assertEqual(cfg.duration, 10.0)
        self.assertEqual(cfg.omegas, UWB_OMEGAS)
        self.assertEqual(cfg.room_min, (-6.0, -6.0, -6.0))
        self.assertEqual(cfg.dts, LIDAR_DTS)
        self.assertEqual(cfg.reprs, [PoseRepr.SO3xR3, PoseRepr.SE3])
        self.assertIsNone(cfg.solver)
        self.assertEqual((cfg.anchor_rot_sigma, cfg.anchor_pos_sigma), (1.0, 1.0))

        mlcme = parse_experiment_text("scenario = mlcme\n")
        self.assertEqual(mlcme.gt_kind, GtKind.LISSAJOUS)
        self.assertEqual(mlcme.dts, [0.04357])

    def test_explicit_values_win(self):
        cfg = parse_experiment_text("scenario = uwb_batch\nduration = 5\nomegas = 1.0, 2.0\nmodes = CF\n")
        self.assertEqual(cfg.duration, 5.0)
        self.assertEqual(cfg.omegas, [1.0, 2.0])
        self.assertEqual(cfg.modes, [KinematicsMode.CLOSED_FORM])
        self.assertEqual(cfg.grid_size, 4)

    def test_vector_lists(self):
        cfg = parse_experiment_text("scenario = uwb_batch\nanchors = 1 2 3 | 4 5 6\nroom_min = -1, -2, -3\n")
        self.assertEqual(cfg.anchors, [(1.0, 2.0, 3.0), (4.0, 5.0, 6.0)])
        self.assertEqual(cfg.room_min, (-1.0, -2.0, -3.0))

    def test_solver_keys_override_settings(self):
        cfg = parse_experiment_text("scenario = uwb_batch\nsolver_lambda0 = 1e-3\nsolver_loss = huber\n")
        self.assertEqual(cfg.solver.lambda0, 1e-3)
        options = solver_options(cfg)
        self.assertEqual(options.lambda0, 1e-3)
        self.assertEqual(options.loss, "huber")
        self.assertEqual(options.max_iters, settings.solver_max_iters)

    def test_termination_keys(self):
        cfg = parse_experiment_text("scenario = uwb_batch\nsolver_gradient_tol = 1e-6\nsolver_cost_floor = 0\n")
        options = solver_options(cfg)
        self.assertEqual(options.gradient_tol, 1e-6)
        self.assertEqual(options.cost_floor, 0.0)
        self.assertEqual(solver_options(parse_experiment_text("scenario = uwb_batch\n")).gradient_tol, settings.solver_gradient_tol)

    def test_settings_hold_no_service_title(self):
        self.assertNotIn("app_title", type(settings).model_fields)

    def test_invalid_files(self):
        cases = {
            "unknown key": "scenario = uwb_batch\nwarp_factor = 9\n",
            "unknown solver key": "scenario = uwb_batch\nsolver_warp = 9\n",
            "missing scenario": "seed = 1\n",
            "unknown scenario": "scenario = teleport\n",
            "empty grid": "scenario = uwb_batch\nomegas =\n",
            "negative dt": "scenario = uwb_batch\ndts = 0.1, -0.1\n",
            "negative seed": "scenario = uwb_batch\nseed = -4\n",
            "key without value": "scenario = uwb_batch\nduration\n",
            "inverted room": "scenario = lidar_batch\nroom_min = 1 1 1\nroom_max = 0 2 2\n",
            "zero anchor sigma": "scenario = uwb_batch\nanchor_rot_sigma = 0\n",
        }
        for name, text in cases.items():
            with self.subTest(case=name):
                with self.assertRaises(ConfigError):
                    parse_experiment_text(text)

    def test_missing_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ConfigError):
                load_experiment_config(Path(tmp) / "absent.cfg")


if __name__ == "__main__":
    unittest.main()

import unittest

import numpy as np
from numpy.testing import assert_allclose

from errors import DomainError
from modules.bench import evaluate_rmse, sample_times
from modules.lie import Pose3, so3_log
from modules.simulation import GtTrajectory, PoseFunction
from schemas.experiment import GtKind
from test_solver import smooth_trajectory


class ShiftedEstimate(PoseFunction):
    """The estimate's own poses, translated by a fixed offset."""

    def __init__(self, estimate, offset=(0.0, 0.0, 0.0)):
        self.estimate = estimate
        self.offset = np.asarray(offset, dtype=float)

    def pose(self, t):
        state = self.estimate.interpolate(t)
        return Pose3(state.rotation, state.position + self.offset)


class TestSampleTimes(unittest.TestCase):
    def test_grid_inside_overlap(self):
        estimate = smooth_trajectory(t_end=1.0)
        times = sample_times(estimate, 0.01)
        self.assertEqual(len(times), 101)
        assert_allclose(times[[0, -1]], [0.0, 1.0])

    def test_window_is_clipped(self):
        estimate = smooth_trajectory(t_end=1.0)
        times = sample_times(estimate, 0.1, start=0.35, end=5.0)
        assert_allclose(times, [0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])

    def test_no_overlap(self):
        estimate = smooth_trajectory(t_end=1.0)
        with self.assertRaises(DomainError):
            sample_times(estimate, 0.01, start=5.0, end=6.0)


class TestRmse(unittest.TestCase):
    def setUp(self):
        self.estimate = smooth_trajectory(t_end=1.0)

    def test_identical_trajectories(self):
        pos, rot = evaluate_rmse(self.estimate, ShiftedEstimate(self.estimate), 0.01)
        self.assertAlmostEqual(pos, 0.0, places=12)
        self.assertAlmostEqual(rot, 0.0, places=6)

    def test_constant_offset(self):
        pos, rot = evaluate_rmse(self.estimate, ShiftedEstimate(self.estimate, (0.1, 0.0, 0.0)), 0.01)
        self.assertAlmostEqual(pos, 0.1, places=12)
        self.assertAlmostEqual(rot, 0.0, places=6)

    def test_matches_per_sample_loop(self):
        gt = GtTrajectory(GtKind.SPLIT, 1.0)
        pos, rot = evaluate_rmse(self.estimate, gt, 0.05)

        position_sq, rotation_sq = [], []
        for t in np.arange(21) * 0.05:
            state = self.estimate.interpolate(np.array([t]))
            truth = gt.pose(t)
            position_sq.append(np.sum((state.position[0] - truth.translation) ** 2))
            rotation_sq.append(np.sum(so3_log(truth.rotation.T @ state.rotation[0]) ** 2))
        self.assertAlmostEqual(pos, np.sqrt(np.mean(position_sq)), places=10)
        self.assertAlmostEqual(rot, np.sqrt(np.mean(rotation_sq)), places=10)


if __name__ == "__main__":
    unittest.main()

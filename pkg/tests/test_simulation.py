import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from errors import DomainError, SimulationError, TrajectoryError
from modules.bench.scenarios import lidar_mounts, true_extrinsic
from modules.lie import Pose3
from modules.simulation import (
    BoxRoom,
    fibonacci_directions,
    GtTrajectory,
    MountSchedule,
    measurements_to_text,
    parse_measurements,
    ray_box,
    simulate_lidar,
    simulate_uwb,
)
from schemas.experiment import GtKind
from schemas.measurements import MeasurementSet

ANCHORS = [(10.0, 10.0, 0.5), (-10.0, 10.0, 2.5), (-10.0, -10.0, 0.5), (10.0, -10.0, 2.5)]
TAGS = [(0.2, 0.0, 0.0), (-0.2, 0.0, 0.0)]


def assert_rotations(test, rotation, atol=1e-12):
    eye = np.broadcast_to(np.eye(3), rotation.shape)
    assert_allclose(np.swapaxes(rotation, -1, -2) @ rotation, eye, atol=atol)
    assert_allclose(np.linalg.det(rotation), 1.0, atol=atol)


class TestGroundTruth(unittest.TestCase):
    def test_split_translation_start(self):
        gt = GtTrajectory(GtKind.SPLIT, 1.0)
        position, _ = gt.translation(0.0)
        assert_allclose(position, [5 * np.sin(43.0), 5 * np.cos(43.0), 5 * np.cos(57.0)], atol=1e-12)

    def test_translation_stays_bounded(self):
        t = np.linspace(0.0, 20.0, 2001)
        for kind in (GtKind.SPLIT, GtKind.NON_SPLIT):
            position, _ = GtTrajectory(kind, 3.0).translation(t)
            self.assertTrue(np.all(np.linalg.norm(position, axis=-1) <= 5.0 * np.sqrt(3.0) + 1e-12))

    def test_tangent_frames_are_rotations(self):
        t = np.linspace(0.0, 20.0, 501)
        for kind, omega in ((GtKind.NON_SPLIT, 2.0), (GtKind.LISSAJOUS, 0.55)):
            with self.subTest(kind=kind):
                pose = GtTrajectory(kind, omega).pose(t)
                assert_rotations(self, pose.rotation)
                _, velocity = GtTrajectory(kind, omega).translation(t)
                heading = velocity / np.linalg.norm(velocity, axis=-1, keepdims=True)
                assert_allclose(pose.rotation[..., 0], heading, atol=1e-12)

    def test_lissajous_path(self):
        gt = GtTrajectory(GtKind.LISSAJOUS, 0.5)
        t = np.array([0.0, np.pi / 2.0, np.pi])
        position, _ = gt.translation(t)
        assert_allclose(position, [[0.0, 0.0, 0.75], [2 * np.sin(np.pi / 4), 1.0, 0.75], [2.0, 0.0, 0.75]], atol=1e-12)

    def test_kinematics_match_analytic_velocity(self):
        gt = GtTrajectory(GtKind.SPLIT, 1.0)
        t = np.linspace(1.0, 5.0, 9)
        _, velocity = gt.translation(t)
        state = gt.kinematics(t)
        assert_allclose(state.velocity, velocity, atol=1e-5)
        assert_rotations(self, state.rotation)


class TestMounts(unittest.TestCase):
    def test_slipped_mount_inside_interval(self):
        _, mount = lidar_mounts()
        assert_allclose(mount.at(15.0).translation, [-0.5, 0.0, -0.35], atol=1e-12)
        assert_allclose(mount.at(5.0).translation, [-0.5, 0.0, -0.25], atol=1e-12)
        # Open interval: the boundaries keep the nominal mount
        assert_allclose(mount.at(np.array([10.0, 20.0])).translation[:, 2], [-0.25, -0.25], atol=1e-12)

    def test_true_extrinsic(self):
        half = np.sqrt(0.5)
        nominal = true_extrinsic(5.0)
        slipped = true_extrinsic(15.0)
        assert_allclose(nominal.translation, [half * (-0.5 + 0.25), 0.0, half * (-0.5 - 0.25)], atol=1e-12)
        assert_allclose(slipped.translation, [half * (-0.5 + 0.35), 0.0, half * (-0.5 - 0.35)], atol=1e-12)
        assert_allclose(nominal.rotation, slipped.rotation, atol=1e-12)
        assert_rotations(self, nominal.rotation)


class TestUwb(unittest.TestCase):
    def setUp(self):
        self.gt = GtTrajectory(GtKind.SPLIT, 1.5)

    def simulate(self, sigma=0.2, seed=7):
        return simulate_uwb(self.gt, ANCHORS, TAGS, 0.05, sigma, seed, 20.0)

    def test_count_and_order(self):
        ranges = self.simulate()
        self.assertEqual(len(ranges), 400 * len(TAGS) * len(ANCHORS))
        self.assertTrue(np.all(np.diff(ranges.t) >= 0.0))
        self.assertLess(ranges.t.max(), 20.0)

    def test_noiseless_ranges_are_exact(self):
        ranges = self.simulate(sigma=0.0)
        pose = self.gt.pose(ranges.t)
        tag_world = np.einsum("nij,nj->ni", pose.rotation, np.asarray(TAGS)[ranges.tag]) + pose.translation
        expected = np.linalg.norm(tag_world - np.asarray(ANCHORS)[ranges.anchor], axis=-1)
        assert_allclose(ranges.d, expected, atol=1e-12)

    def test_noise_statistics(self):
        noisy, exact = self.simulate(), self.simulate(sigma=0.0)
        error = noisy.d - exact.d
        self.assertLess(abs(error.mean()), 0.02)
        self.assertAlmostEqual(error.std(), 0.2, delta=0.02)

    def test_seeded_runs_are_reproducible(self):
        assert_array_equal(self.simulate().d, self.simulate().d)
        self.assertFalse(np.array_equal(self.simulate().d, self.simulate(seed=8).d))


class TestRayBox(unittest.TestCase):
    def setUp(self):
        self.room = BoxRoom.from_bounds((-3.0, -3.0, 0.0), (3.0, 3.0, 3.0))
        self.origin = np.array([0.0, 0.0, 1.5])

    def test_axis_ray(self):
        ranges, wall = ray_box(self.origin, [1.0, 0.0, 0.0], self.room)
        self.assertAlmostEqual(float(ranges), 3.0)
        self.assertEqual(int(wall), 1)

    def test_diagonal_ray(self):
        ranges, _ = ray_box(self.origin, np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0), self.room)
        self.assertAlmostEqual(float(ranges), 3.0 * np.sqrt(2.0))

    def test_hits_lie_on_their_walls(self):
        rng = np.random.default_rng(4)
        directions = rng.normal(size=(200, 3))
        directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
        ranges, wall = ray_box(np.broadcast_to(self.origin, directions.shape), directions, self.room)
        hits = self.origin + ranges[:, None] * directions
        residual = np.einsum("ni,ni->n", self.room.normals[wall], hits) + self.room.offsets[wall]
        assert_allclose(residual, 0.0, atol=1e-12)
        self.assertTrue(np.all(ranges > 0.0))

    def test_origin_outside_room(self):
        with self.assertRaises(DomainError):
            ray_box([0.0, 0.0, 5.0], [1.0, 0.0, 0.0], self.room)

    def test_invalid_bounds(self):
        with self.assertRaises(DomainError):
            BoxRoom.from_bounds((0.0, 0.0, 0.0), (1.0, -1.0, 1.0))


class TestLidar(unittest.TestCase):
    def setUp(self):
        self.room = BoxRoom.from_bounds((-3.0, -3.0, 0.0), (3.0, 3.0, 3.0))
        self.gt = GtTrajectory(GtKind.LISSAJOUS, 0.5)
        self.mount = MountSchedule.fixed(Pose3.identity())

    def test_noiseless_points_lie_on_walls(self):
        scan = simulate_lidar(self.gt, self.mount, self.room, 16, 10.0, 0.0, 3, 2.0)
        self.assertEqual(len(scan), 20 * 16)
        pose = self.gt.pose(scan.t)
        world = np.einsum("nij,nj->ni", pose.rotation, scan.points) + pose.translation
        residual = np.einsum("ni,ni->n", self.room.normals[scan.wall], world) + self.room.offsets[scan.wall]
        assert_allclose(residual, 0.0, atol=1e-9)

    def test_fibonacci_directions(self):
        directions = fibonacci_directions(64)
        self.assertEqual(directions.shape, (64, 3))
        assert_allclose(np.linalg.norm(directions, axis=-1), 1.0, atol=1e-12)
        assert_allclose(directions.mean(axis=0), 0.0, atol=0.05)
        with self.assertRaises(DomainError):
            fibonacci_directions(0)

    def test_sensor_leaving_room(self):
        small = BoxRoom.from_bounds((-1.0, -1.0, 0.0), (1.0, 1.0, 1.0))
        with self.assertRaises(SimulationError) as ctx:
            simulate_lidar(self.gt, self.mount, small, 4, 10.0, 0.0, 3, 5.0)
        self.assertIsNotNone(ctx.exception.t)


class TestMeasurementText(unittest.TestCase):
    def test_round_trip(self):
        gt = GtTrajectory(GtKind.LISSAJOUS, 0.5)
        room = BoxRoom.from_bounds((-3.0, -3.0, 0.0), (3.0, 3.0, 3.0))
        measurements = MeasurementSet(
            simulate_uwb(gt, ANCHORS[:2], TAGS[:1], 0.5, 0.2, 1, 1.0),
            simulate_lidar(gt, MountSchedule.fixed(Pose3.identity()), room, 3, 2.0, 0.05, 1, 1.0),
        )
        parsed = parse_measurements(measurements_to_text(measurements))
        assert_array_equal(parsed.ranges.d, measurements.ranges.d)
        assert_array_equal(parsed.ranges.anchor, measurements.ranges.anchor)
        assert_array_equal(parsed.lidar.points, measurements.lidar.points)
        assert_array_equal(parsed.lidar.wall, measurements.lidar.wall)

    def test_bad_line_reports_position(self):
        with self.assertRaisesRegex(TrajectoryError, ":2:"):
            parse_measurements("RANGE 0 0 0 1.5\nRANGE 0.1 zero 0 1.5\n")


if __name__ == "__main__":
    unittest.main()

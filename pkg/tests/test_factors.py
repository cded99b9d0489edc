import unittest

import numpy as np
from numpy.testing import assert_allclose

from errors import DomainError
from fd_helpers import random_knots, random_vectors, relative_error
from modules.estimation import (
    ColumnLayout,
    EstimationState,
    ExtrinsicPriorFactor,
    KnotPriorFactor,
    MotionPriorFactor,
    PointToPlaneFactor,
    UwbFactor,
    extrinsic_prior_factor,
    knot_prior_factor,
    motion_prior_factor,
    point2plane_factor,
    uwb_factor,
)
from modules.gp import GpTrajectory
from modules.lie import Pose3, se3_exp, so3_exp
from schemas.trajectory_types import KinematicsMode, PoseRepr, SupportState

REPRS = (PoseRepr.SO3xR3, PoseRepr.SE3)
MODES = (KinematicsMode.CLOSED_FORM, KinematicsMode.APPROXIMATED)
H = 1e-6


def residuals(factors, state):
    layout = ColumnLayout(state)
    return np.concatenate([f.evaluate(state, layout, False).residual.ravel() for f in factors])


def analytic_jacobian(factors, state):
    """Dense Jacobian assembled from the factors' blocks."""
    layout = ColumnLayout(state)
    rows = []
    for factor in factors:
        terms = factor.evaluate(state, layout, True)
        n, dim = terms.residual.shape
        dense = np.zeros((n, dim, layout.size))
        for block in terms.blocks:
            width = block.values.shape[-1]
            for i in range(n):
                dense[i, :, block.columns[i] : block.columns[i] + width] += block.values[i]
        rows.append(dense.reshape(n * dim, layout.size))
    return np.concatenate(rows)


def numerical_jacobian(factors, state, h=H):
    layout = ColumnLayout(state)
    columns = []
    for j in range(layout.size):
        delta = np.zeros(layout.size)
        delta[j] = h
        plus = residuals(factors, state.retracted(delta, layout))
        minus = residuals(factors, state.retracted(-delta, layout))
        columns.append((plus - minus) / (2.0 * h))
    return np.stack(columns, axis=-1)


def random_state(seed, pose_repr, mode, extrinsics=0):
    rng = np.random.default_rng(seed)
    traj = GpTrajectory(0.0, 0.5, random_knots(rng, 3, max_step=0.8), pose_repr=pose_repr, mode=mode)
    poses = [se3_exp(random_vectors(rng, 1, 1.0, dim=6)[0]) for _ in range(extrinsics)]
    return rng, EstimationState([traj], poses)


class TestFactorJacobians(unittest.TestCase):
    def assert_jacobian(self, factors, state, tol=1e-5):
        analytic = analytic_jacobian(factors, state)
        numeric = numerical_jacobian(factors, state)
        self.assertLess(relative_error(analytic, numeric), tol)

    def test_motion_prior(self):
        for seed, (pose_repr, mode) in enumerate((r, m) for r in REPRS for m in MODES):
            with self.subTest(repr=pose_repr, mode=mode):
                _, state = random_state(seed, pose_repr, mode)
                self.assert_jacobian([MotionPriorFactor(0, [0, 1])], state)

    def test_uwb(self):
        for seed, (pose_repr, mode) in enumerate((r, m) for r in REPRS for m in MODES):
            with self.subTest(repr=pose_repr, mode=mode):
                rng, state = random_state(10 + seed, pose_repr, mode)
                times = rng.uniform(0.0, 1.0, size=5)
                factor = UwbFactor(
                    0,
                    times,
                    rng.normal(scale=0.3, size=(5, 3)),
                    rng.uniform(-10.0, 10.0, size=(5, 3)),
                    rng.uniform(1.0, 10.0, size=5),
                    0.2,
                )
                self.assert_jacobian([factor], state)

    def test_point_to_plane_fixed_extrinsic(self):
        for seed, (pose_repr, mode) in enumerate((r, m) for r in REPRS for m in MODES):
            with self.subTest(repr=pose_repr, mode=mode):
                rng, state = random_state(20 + seed, pose_repr, mode)
                normals = random_vectors(rng, 6, 1.0)
                normals /= np.linalg.norm(normals, axis=-1, keepdims=True)
                mount = se3_exp(rng.normal(scale=0.5, size=6))
                factor = PointToPlaneFactor(
                    0, rng.uniform(0.0, 1.0, 6), rng.normal(scale=3.0, size=(6, 3)), normals, rng.normal(size=6), 0.05, mount
                )
                self.assert_jacobian([factor], state)

    def test_point_to_plane_estimated_extrinsic(self):
        for seed, pose_repr in enumerate(REPRS):
            with self.subTest(repr=pose_repr):
                rng, state = random_state(30 + seed, pose_repr, KinematicsMode.CLOSED_FORM, extrinsics=1)
                normals = random_vectors(rng, 6, 1.0)
                normals /= np.linalg.norm(normals, axis=-1, keepdims=True)
                factor = PointToPlaneFactor(
                    0, rng.uniform(0.0, 1.0, 6), rng.normal(scale=3.0, size=(6, 3)), normals, rng.normal(size=6), 0.05, 0
                )
                self.assert_jacobian([factor], state)

    def test_extrinsic_prior(self):
        rng, state = random_state(40, PoseRepr.SO3xR3, KinematicsMode.CLOSED_FORM, extrinsics=2)
        information = np.diag(rng.uniform(1.0, 100.0, size=6))
        prior = state.extrinsics[1].compose(se3_exp(rng.normal(scale=0.3, size=6)))
        self.assert_jacobian([ExtrinsicPriorFactor(1, prior, information)], state)

    def test_knot_prior(self):
        for seed, pose_repr in enumerate(REPRS):
            with self.subTest(repr=pose_repr):
                rng, state = random_state(60 + seed, pose_repr, KinematicsMode.CLOSED_FORM)
                traj = state.trajectories[0]
                rotation = traj.rotation[1] @ so3_exp(rng.normal(scale=0.4, size=3))
                factor = KnotPriorFactor(0, 1, rotation, traj.position[1] + rng.normal(size=3), 0.3, 2.0)
                self.assert_jacobian([factor], state)

    def test_mixed_factors(self):
        rng, state = random_state(50, PoseRepr.SE3, KinematicsMode.APPROXIMATED, extrinsics=1)
        factors = [
            motion_prior_factor(0, 1),
            uwb_factor(0, 0.3, [0.2, 0.0, 0.0], [10.0, 10.0, 0.5], 12.0, 0.2),
            point2plane_factor(0, 0.7, [1.0, 2.0, 0.5], [0.0, 0.0, 1.0], -2.0, 0.05, extrinsic=0),
            extrinsic_prior_factor(0, Pose3.identity(), 1e2),
        ]
        self.assert_jacobian(factors, state)


class TestFactorResiduals(unittest.TestCase):
    def setUp(self):
        self.traj = GpTrajectory(0.0, 0.1, [SupportState(np.eye(3)), SupportState(np.eye(3))])
        self.state = EstimationState([self.traj], [])
        self.layout = ColumnLayout(self.state)

    def test_point_on_plane_has_zero_residual(self):
        factor = point2plane_factor(0, 0.05, [0.0, 0.0, 2.0], [0.0, 0.0, 1.0], -2.0, 0.05)
        assert_allclose(factor.evaluate(self.state, self.layout).residual, 0.0, atol=1e-12)

    def test_point_to_plane_residual_is_signed_distance_over_sigma(self):
        factor = point2plane_factor(0, 0.05, [0.0, 0.0, 2.1], [0.0, 0.0, 1.0], -2.0, 0.05)
        assert_allclose(factor.evaluate(self.state, self.layout).residual, [[2.0]], rtol=1e-12)

    def test_consistent_range_has_zero_residual(self):
        rng = np.random.default_rng(3)
        rotation = so3_exp([0.3, -0.2, 1.1])
        position = np.array([1.0, -2.0, 0.5])
        traj = GpTrajectory.from_pose(0.0, 0.1, rotation, position)
        traj.extend_to(0.5)
        state = EstimationState([traj], [])
        tag, anchor = np.array([0.2, 0.0, 0.0]), np.array([10.0, 10.0, 0.5])
        d = np.linalg.norm(rotation @ tag + position - anchor)
        factor = uwb_factor(0, rng.uniform(0.0, 0.5), tag, anchor, d, 0.2)
        assert_allclose(factor.evaluate(state, ColumnLayout(state)).residual, 0.0, atol=1e-12)

    def test_degenerate_range_is_skipped(self):
        factor = uwb_factor(0, 0.05, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0], 1.0, 0.2)
        terms = factor.evaluate(self.state, self.layout)
        assert_allclose(terms.residual, 0.0)
        assert_allclose(terms.blocks[0].values, 0.0)

    def test_extrinsic_prior_at_prior_is_zero(self):
        pose = se3_exp([0.1, 0.2, -0.3, 1.0, 2.0, 3.0])
        state = EstimationState([self.traj], [pose])
        factor = extrinsic_prior_factor(0, pose, 50.0)
        assert_allclose(factor.evaluate(state, ColumnLayout(state)).residual, 0.0, atol=1e-12)

    def test_knot_prior_at_current_value_is_zero(self):
        self.traj.rotation[1] = so3_exp([0.3, -0.1, 0.2])
        self.traj.position[1] = [1.0, 2.0, 3.0]
        factor = knot_prior_factor(0, self.traj, 1)
        assert_allclose(factor.evaluate(self.state, self.layout).residual, 0.0, atol=1e-12)

    def test_knot_prior_weights(self):
        factor = KnotPriorFactor(0, 0, np.eye(3), [0.0, 0.0, -1.0], 0.5, 0.1)
        residual = factor.evaluate(self.state, self.layout).residual
        assert_allclose(residual, [[0.0, 0.0, 0.0, 0.0, 0.0, 10.0]], atol=1e-12)

    def test_rejects_bad_inputs(self):
        with self.assertRaises(DomainError):
            point2plane_factor(0, 0.05, [0.0, 0.0, 2.0], [0.0, 0.0, 2.0], -2.0, 0.05)
        with self.assertRaises(DomainError):
            uwb_factor(0, 0.05, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], 1.0, 0.0)
        with self.assertRaises(DomainError):
            KnotPriorFactor(0, 0, np.eye(3), np.zeros(3), 0.0, 1.0)


class TestMotionPriorZeroSet(unittest.TestCase):
    def test_propagated_knots_have_zero_residual(self):
        for pose_repr in REPRS:
            with self.subTest(repr=pose_repr):
                start = SupportState(
                    so3_exp([0.2, -0.4, 0.9]),
                    np.array([0.3, -0.5, 0.8]),
                    np.array([0.1, 0.2, -0.1]),
                    np.array([1.0, 2.0, 3.0]),
                    np.array([0.5, -0.2, 0.1]),
                    np.array([0.0, 0.3, -0.2]),
                )
                traj = GpTrajectory(0.0, 0.2, [start], pose_repr=pose_repr)
                traj.extend_to(0.6)
                state = EstimationState([traj], [])
                factor = motion_prior_factor(0, 1)
                assert_allclose(factor.evaluate(state, ColumnLayout(state)).residual, 0.0, atol=1e-7)

    def test_perturbed_knot_has_nonzero_residual(self):
        traj = GpTrajectory(0.0, 0.2, [SupportState(np.eye(3), np.array([0.3, 0.0, 0.0]))])
        traj.extend_to(0.4)
        traj.velocity[2] += 0.01
        state = EstimationState([traj], [])
        residual = motion_prior_factor(0, 1).evaluate(state, ColumnLayout(state)).residual
        self.assertGreater(np.linalg.norm(residual), 1e-6)


if __name__ == "__main__":
    unittest.main()

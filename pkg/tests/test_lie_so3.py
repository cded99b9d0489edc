import unittest

import numpy as np

from errors import DomainError
from fd_helpers import numerical_jacobian, random_vectors, relative_error, rotation_jacobian
from modules.lie import (
    f_maps,
    h1_so3,
    h1p_so3,
    hat,
    jr_inv_so3,
    jr_so3,
    l_maps_so3,
    so3_exp,
    so3_log,
)
from modules.lie.derivatives import JR, JR_INV


def apply(matrix, vector):
    return np.einsum("...ij,...j->...i", matrix, vector)


class TestExpLog(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)

    def test_identity_and_quarter_turn(self):
        np.testing.assert_array_equal(so3_exp(np.zeros(3)), np.eye(3))
        np.testing.assert_allclose(
            so3_exp([np.pi / 2, 0, 0]), [[1, 0, 0], [0, 0, -1], [0, 1, 0]], atol=1e-15
        )

    def test_roundtrip(self):
        v = random_vectors(self.rng, 1000, 3.0)
        self.assertLess(np.abs(so3_log(so3_exp(v)) - v).max(), 1e-10)

    def test_roundtrip_small_angles(self):
        v = random_vectors(self.rng, 200, 1e-3)
        self.assertLess(np.abs(so3_log(so3_exp(v)) - v).max(), 1e-15)

    def test_orthonormal(self):
        rotations = so3_exp(random_vectors(self.rng, 1000, 6.0))
        residual = np.swapaxes(rotations, -1, -2) @ rotations - np.eye(3)
        self.assertLess(np.abs(residual).max(), 1e-9)
        np.testing.assert_allclose(np.linalg.det(rotations), 1.0, atol=1e-9)

    def test_log_near_half_turn(self):
        axis = random_vectors(self.rng, 100, 1.0)
        axis /= np.linalg.norm(axis, axis=-1, keepdims=True)
        v = axis * (np.pi - 1e-7)
        self.assertLess(np.abs(so3_log(so3_exp(v)) - v).max(), 1e-8)

    def test_log_at_half_turn_picks_positive_dominant_component(self):
        theta = so3_log(so3_exp([0.0, -np.pi, 0.0]))
        np.testing.assert_allclose(theta, [0.0, np.pi, 0.0], atol=1e-12)


class TestRightJacobian(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(12)

    def test_known_values(self):
        np.testing.assert_array_equal(jr_so3(np.zeros(3)), np.eye(3))
        expected = [[1, 0, 0], [0, 0, 2 / np.pi], [0, -2 / np.pi, 0]]
        np.testing.assert_allclose(jr_so3([np.pi, 0, 0]), expected, atol=1e-15)

    def test_matches_power_series(self):
        theta = random_vectors(self.rng, 100, 3.0)
        theta_hat = hat(theta)
        series = np.broadcast_to(np.eye(3), theta_hat.shape).copy()
        term = series.copy()
        factorial = 1.0
        for k in range(1, 60):
            term = term @ (-theta_hat)
            factorial *= k + 1
            series = series + term / factorial
        self.assertLess(np.abs(jr_so3(theta) - series).max(), 1e-12)

    def test_inverse_identity(self):
        theta = random_vectors(self.rng, 1000, 0.9 * 2 * np.pi)
        product = jr_so3(theta) @ jr_inv_so3(theta)
        self.assertLess(np.abs(product - np.eye(3)).max(), 1e-9)

    def test_is_right_jacobian_of_exp(self):
        theta = random_vectors(self.rng, 200, 3.0)
        numeric = rotation_jacobian(lambda x: np.swapaxes(so3_exp(theta), -1, -2) @ so3_exp(x), theta)
        self.assertLess(relative_error(jr_so3(theta), numeric), 1e-5)

    def test_inverse_domain(self):
        with self.assertRaises(DomainError):
            jr_inv_so3([2 * np.pi, 0.0, 0.0])
        with self.assertRaises(DomainError):
            h1p_so3([0.0, 0.0, 7.0], [1.0, 0.0, 0.0])


class TestFMaps(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(13)
        self.u = random_vectors(rng, 200, 3.0)
        self.v = rng.normal(size=(200, 3))
        self.w = rng.normal(size=(200, 3))

    def test_zero(self):
        np.testing.assert_array_equal(f_maps(np.zeros(3), np.ones(3), np.ones(3)).f, np.zeros((3, 3)))

    def test_first_derivative(self):
        numeric = numerical_jacobian(lambda u: apply(f_maps(u, self.v, self.w).f, self.v), self.u)
        self.assertLess(relative_error(f_maps(self.u, self.v, self.w).f_u, numeric), 1e-5)

    def test_second_derivatives(self):
        maps = f_maps(self.u, self.v, self.w)
        numeric_u = numerical_jacobian(lambda u: apply(f_maps(u, self.v, self.w).f_u, self.w), self.u)
        numeric_v = numerical_jacobian(lambda v: apply(f_maps(self.u, v, self.w).f_u, self.w), self.v)
        self.assertLess(relative_error(maps.f_uu, numeric_u), 1e-5)
        self.assertLess(relative_error(maps.f_uv, numeric_v), 1e-5)


class TestDerivativeMaps(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(14)
        self.theta = random_vectors(rng, 1000, 3.0)
        self.v = rng.normal(size=(1000, 3))
        self.w = rng.normal(size=(1000, 3))

    def test_h1_zero_cases(self):
        np.testing.assert_array_equal(h1_so3(self.theta[:5], np.zeros(3)), np.zeros((5, 3, 3)))
        v = np.array([0.3, -1.2, 0.7])
        # Jr(theta) v = v - theta x v / 2 + O(theta^2)
        np.testing.assert_allclose(h1_so3(np.zeros(3), v), 0.5 * hat(v), atol=1e-15)
        np.testing.assert_allclose(h1p_so3(np.zeros(3), v), -0.5 * hat(v), atol=1e-15)

    def test_h1_matches_finite_differences(self):
        numeric = numerical_jacobian(lambda t: apply(jr_so3(t), self.v), self.theta)
        self.assertLess(relative_error(h1_so3(self.theta, self.v), numeric), 1e-5)

    def test_h1p_matches_finite_differences(self):
        numeric = numerical_jacobian(lambda t: apply(jr_inv_so3(t), self.v), self.theta)
        self.assertLess(relative_error(h1p_so3(self.theta, self.v), numeric), 1e-5)

    def test_closed_forms_match_product_rule(self):
        np.testing.assert_allclose(h1_so3(self.theta, self.v), JR.jacobian(self.theta, self.v), atol=1e-12)
        np.testing.assert_allclose(h1p_so3(self.theta, self.v), JR_INV.jacobian(self.theta, self.v), atol=1e-12)

    def test_l_maps_match_finite_differences(self):
        theta, v, w = self.theta[:200], self.v[:200], self.w[:200]
        maps = l_maps_so3(theta, v, w)
        cases = [
            (maps.l11, numerical_jacobian(lambda t: apply(h1_so3(t, v), w), theta)),
            (maps.l12, numerical_jacobian(lambda x: apply(h1_so3(theta, x), w), v)),
            (maps.l11p, numerical_jacobian(lambda t: apply(h1p_so3(t, v), w), theta)),
            (maps.l12p, numerical_jacobian(lambda x: apply(h1p_so3(theta, x), w), v)),
        ]
        for name, (analytic, numeric) in zip(("l11", "l12", "l11p", "l12p"), cases):
            self.assertLess(relative_error(analytic, numeric), 1e-5, msg=name)

    def test_l_maps_special_values(self):
        v = np.array([0.4, 0.1, -0.9])
        w = np.array([-0.2, 0.5, 0.3])
        np.testing.assert_array_equal(l_maps_so3(self.theta[:3], v, np.zeros(3)).l12, np.zeros((3, 3, 3)))
        np.testing.assert_allclose(l_maps_so3(np.zeros(3), v, w).l12p, 0.5 * hat(w), atol=1e-15)


if __name__ == "__main__":
    unittest.main()

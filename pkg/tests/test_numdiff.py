"""Finite-difference layer: self-tests on polynomials and geometry probes."""

from __future__ import annotations

import numpy as np
import pytest

from finsleroid.conformal import zeta_jacobian, zeta_map
from finsleroid.metric import covariant_momentum, metric_function, metric_tensor
from finsleroid.numdiff import (
    FDConfig,
    TOL_FD_SELFTEST,
    fd_gradient,
    fd_hessian,
    fd_jacobian,
)


def quartic(x: np.ndarray) -> float:
    return float(
        x[0] ** 4
        - 2.0 * x[0] ** 2 * x[1] ** 2
        + 0.5 * x[1] ** 3 * x[2]
        + 3.0 * x[2] ** 2
        - x[0] * x[1] * x[2]
        + 7.0
    )


def quartic_gradient(x: np.ndarray) -> np.ndarray:
    return np.array(
        [
            4.0 * x[0] ** 3 - 4.0 * x[0] * x[1] ** 2 - x[1] * x[2],
            -4.0 * x[0] ** 2 * x[1] + 1.5 * x[1] ** 2 * x[2] - x[0] * x[2],
            0.5 * x[1] ** 3 + 6.0 * x[2] - x[0] * x[1],
        ]
    )


def quartic_hessian(x: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [12.0 * x[0] ** 2 - 4.0 * x[1] ** 2, -8.0 * x[0] * x[1] - x[2], -x[1]],
            [-8.0 * x[0] * x[1] - x[2], -4.0 * x[0] ** 2 + 3.0 * x[1] * x[2], 1.5 * x[1] ** 2 - x[0]],
            [-x[1], 1.5 * x[1] ** 2 - x[0], 6.0],
        ]
    )


POINT = np.array([0.8, -0.6, 1.1])


class TestPolynomialSelfTest:
    def test_gradient_with_richardson(self):
        got = fd_gradient(quartic, POINT)
        expected = quartic_gradient(POINT)
        assert np.max(np.abs(got - expected)) / np.max(np.abs(expected)) < TOL_FD_SELFTEST

    def test_jacobian_with_richardson(self):
        got = fd_jacobian(quartic_gradient, POINT)
        expected = quartic_hessian(POINT)
        assert np.max(np.abs(got - expected)) / np.max(np.abs(expected)) < TOL_FD_SELFTEST

    def test_hessian(self):
        got = fd_hessian(quartic, POINT)
        expected = quartic_hessian(POINT)
        assert np.max(np.abs(got - expected)) / np.max(np.abs(expected)) < 1e-6

    def test_richardson_beats_plain_central(self):
        # a step large enough that truncation (not roundoff) dominates, so the
        # extrapolation's order gain is visible
        plain = FDConfig(step_rel_first=1e-3, richardson=False)
        refined = FDConfig(step_rel_first=1e-3, richardson=True)
        expected = quartic_gradient(POINT)
        error_plain = np.max(np.abs(fd_gradient(quartic, POINT, plain) - expected))
        error_refined = np.max(np.abs(fd_gradient(quartic, POINT, refined) - expected))
        assert error_plain > 1e-8  # plain central is visibly truncated here
        assert error_refined < error_plain / 100.0

    def test_steps_scale_with_magnitude(self):
        config = FDConfig()
        small = config.steps_first(np.zeros(3))
        large = config.steps_first(np.full(3, 100.0))
        assert np.all(large > 50 * small)


class TestGeometryProbes:
    def test_gradient_of_squared_norm_is_twice_lowered_direction(self, desk):
        y = np.array([1.0, 0.0, 0.0, 0.0])
        grad = fd_gradient(lambda v: metric_function(desk, v), y)
        expected = 2.0 * covariant_momentum(desk, y)
        assert np.max(np.abs(grad - expected)) < 1e-6

    def test_jacobian_of_conformal_map_matches_analytic(self, desk):
        y = np.array([1.0, 0.0, 0.0, 0.0])
        numeric = fd_jacobian(lambda v: zeta_map(desk, v).zeta, y)
        analytic = zeta_jacobian(desk, y)
        assert np.max(np.abs(numeric - analytic)) < 1e-6

    def test_hessian_of_squared_norm_is_twice_metric(self, desk):
        y = np.array([0.0, 1.0, 0.0, 0.0])
        numeric = fd_hessian(lambda v: metric_function(desk, v), y)
        expected = 2.0 * metric_tensor(desk, y)
        assert np.max(np.abs(numeric - expected)) < 1e-5


class TestShapes:
    def test_jacobian_stacks_output_components_in_rows(self):
        def fn(x: np.ndarray) -> np.ndarray:
            return np.array([x[0] * 2.0, x[1] * 3.0, x[0] + x[1]])

        jac = fd_jacobian(fn, np.array([1.0, 1.0]))
        assert jac.shape == (3, 2)
        assert np.allclose(jac, [[2.0, 0.0], [0.0, 3.0], [1.0, 1.0]], atol=1e-9)

    def test_hessian_symmetric(self):
        hess = fd_hessian(quartic, POINT)
        assert np.allclose(hess, hess.T, atol=1e-10)

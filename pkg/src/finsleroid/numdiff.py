"""Independent finite-difference oracle layer and the central tolerance table.

Every closed-form identity shipped by this package is cross-checked against
plain central differences computed here. This module deliberately knows
nothing about the geometry: it differentiates black-box callables, so a bug in
a closed form cannot leak into its own check.

Key entry points
----------------
FDConfig
    Relative step sizes (scaled per coordinate by ``1 + |x_i|``) and an
    optional single Richardson extrapolation level.
fd_gradient / fd_jacobian / fd_hessian
    Central differences for scalar and vector maps.

All verification tolerances used across the test battery are defined once
here as module constants so that every check and the command-line ``check``
battery agree on what "passing" means.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "FDConfig",
    "fd_gradient",
    "fd_jacobian",
    "fd_hessian",
    "TOL_EULER_CHAIN",
    "TOL_METRIC_INVERSE",
    "TOL_DET_RATIO",
    "TOL_INDICATRIX",
    "TOL_INDICATRIX_CONST",
    "TOL_CARTAN_NORM",
    "TOL_SPRAY_ORACLE",
    "TOL_BERWALD",
    "TOL_GEODESIC_F2",
    "TOL_DUAL_CLOSED",
    "TOL_DUAL_NUMERIC",
    "TOL_ANGLE_ROUTES",
    "TOL_ANGLE_EXACT",
    "TOL_UAR_ROUNDTRIP",
    "TOL_UAR_F2",
    "TOL_UAR_OFFDIAG",
    "TOL_UAR_DIAG",
    "TOL_UAR_KA",
    "TOL_CONFORMAL_S",
    "TOL_CONFORMAL_POWER",
    "TOL_CONFORMAL_ROUNDTRIP",
    "TOL_FACTOR_CURVATURE",
    "TOL_FRAME_CONSTANT",
    "TOL_FRAME_VARYING",
    "TOL_BACKGROUND_FD",
    "TOL_IDENTITY",
    "TOL_FD_SELFTEST",
]

# --- tolerances (single source of truth) ------------------------------------

#: Euler chain (momentum = half slope of the squared norm, metric = slope of
#: the momentum, Cartan = half slope of the metric), relative.
TOL_EULER_CHAIN = 1e-5
#: Contravariant metric times covariant metric versus identity, absolute.
TOL_METRIC_INVERSE = 1e-9
#: Closed-form determinant ratio versus numerically computed ratio, relative.
TOL_DET_RATIO = 1e-9
#: Indicatrix curvature versus its charge-only closed form, absolute.
TOL_INDICATRIX = 1e-6
#: Direction independence of the indicatrix curvature, absolute.
TOL_INDICATRIX_CONST = 1e-6
#: Normalised Cartan-vector square versus its closed form, absolute.
TOL_CARTAN_NORM = 1e-10
#: Closed-form spray versus the finite-difference spray oracle, relative.
TOL_SPRAY_ORACLE = 1e-5
#: Spray reduction on parallel backgrounds (exact identity), absolute.
TOL_BERWALD = 1e-8
#: Squared-norm drift along an integrated geodesic of unit parameter length.
TOL_GEODESIC_F2 = 1e-6
#: Closed-form duality round trip at unit preferred-direction norm, relative.
TOL_DUAL_CLOSED = 1e-9
#: Newton duality round trip below unit norm, relative.
TOL_DUAL_NUMERIC = 1e-7
#: Agreement of the three angle routes (direct, chart, factor space), absolute.
TOL_ANGLE_ROUTES = 1e-10
#: Exact angle invariants (self-angle, symmetry, scale invariance), absolute.
TOL_ANGLE_EXACT = 1e-12
#: Angular-chart round trip, relative on components.
TOL_UAR_ROUNDTRIP = 1e-9
#: Squared norm reproduced from chart coordinates, relative.
TOL_UAR_F2 = 1e-10
#: Off-diagonal chart-metric entries, absolute.
TOL_UAR_OFFDIAG = 1e-9
#: Diagonal chart-metric entries versus closed forms, relative.
TOL_UAR_DIAG = 1e-8
#: Conformal-flattening factor consistency, relative.
TOL_UAR_KA = 1e-8
#: Pushforward metric congruence residual, relative.
TOL_CONFORMAL_S = 1e-9
#: Power law between squared norms of a vector and its conformal image.
TOL_CONFORMAL_POWER = 1e-10
#: Conformal map round trip, relative on components.
TOL_CONFORMAL_ROUNDTRIP = 1e-9
#: Factor-space curvature extraction (nested finite differences), absolute.
TOL_FACTOR_CURVATURE = 1e-5
#: Adapted-frame reconstruction of the base metric, absolute: constant fields.
TOL_FRAME_CONSTANT = 1e-12
#: Adapted-frame reconstruction of the base metric: position-dependent fields.
TOL_FRAME_VARYING = 1e-9
#: Symbolic field derivatives versus finite differences, relative.
TOL_BACKGROUND_FD = 1e-6
#: Exact algebraic identities between scalar-chain quantities, absolute.
TOL_IDENTITY = 1e-12
#: Finite-difference self-test on polynomials of degree at most four.
TOL_FD_SELFTEST = 1e-9


# --- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class FDConfig:
    """Step policy for the central-difference oracles.

    The step along coordinate ``i`` is ``step_rel * (1 + |x_i|)``. With
    ``richardson`` set, each derivative is evaluated at the base step and at
    half the step and combined to cancel the leading error term.
    """

    step_rel_first: float = 6e-6
    step_rel_second: float = 1.2e-4
    richardson: bool = False

    def steps_first(self, x: np.ndarray) -> np.ndarray:
        return self.step_rel_first * (1.0 + np.abs(x))

    def steps_second(self, x: np.ndarray) -> np.ndarray:
        return self.step_rel_second * (1.0 + np.abs(x))


# --- first derivatives -------------------------------------------------------


def _central(fn: Callable[[np.ndarray], np.ndarray | float], x: np.ndarray, i: int, h: float):
    forward = np.array(x, dtype=float)
    backward = np.array(x, dtype=float)
    forward[i] += h
    backward[i] -= h
    return (np.asarray(fn(forward), dtype=float) - np.asarray(fn(backward), dtype=float)) / (2.0 * h)


def _first_derivative(fn, x: np.ndarray, i: int, h: float, richardson: bool):
    coarse = _central(fn, x, i, h)
    if not richardson:
        return coarse
    fine = _central(fn, x, i, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def fd_gradient(
    fn: Callable[[np.ndarray], float], x: Sequence[float], config: FDConfig = FDConfig()
) -> np.ndarray:
    """Central-difference gradient of a scalar map."""
    x_arr = np.asarray(x, dtype=float)
    steps = config.steps_first(x_arr)
    return np.array(
        [_first_derivative(fn, x_arr, i, steps[i], config.richardson) for i in range(x_arr.size)]
    )


def fd_jacobian(
    fn: Callable[[np.ndarray], np.ndarray], x: Sequence[float], config: FDConfig = FDConfig()
) -> np.ndarray:
    """Central-difference Jacobian ``J[..., i] = d fn / d x_i`` of a vector map."""
    x_arr = np.asarray(x, dtype=float)
    steps = config.steps_first(x_arr)
    columns = [
        _first_derivative(fn, x_arr, i, steps[i], config.richardson) for i in range(x_arr.size)
    ]
    return np.stack(columns, axis=-1)


# --- second derivatives ------------------------------------------------------


def _hessian_entry(fn, x: np.ndarray, i: int, j: int, hi: float, hj: float) -> float:
    if i == j:
        plus = np.array(x)
        minus = np.array(x)
        plus[i] += hi
        minus[i] -= hi
        return (float(fn(plus)) - 2.0 * float(fn(x)) + float(fn(minus))) / (hi * hi)
    total = 0.0
    for si in (1.0, -1.0):
        for sj in (1.0, -1.0):
            probe = np.array(x)
            probe[i] += si * hi
            probe[j] += sj * hj
            total += si * sj * float(fn(probe))
    return total / (4.0 * hi * hj)


def fd_hessian(
    fn: Callable[[np.ndarray], float], x: Sequence[float], config: FDConfig = FDConfig()
) -> np.ndarray:
    """Central-difference Hessian of a scalar map (symmetric by construction)."""
    x_arr = np.asarray(x, dtype=float)
    n = x_arr.size
    steps = config.steps_second(x_arr)

    def entry(i: int, j: int, scale: float) -> float:
        return _hessian_entry(fn, x_arr, i, j, scale * steps[i], scale * steps[j])

    hessian = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            coarse = entry(i, j, 1.0)
            if config.richardson:
                fine = entry(i, j, 0.5)
                value = (4.0 * fine - coarse) / 3.0
            else:
                value = coarse
            hessian[i, j] = value
            hessian[j, i] = value
    return hessian

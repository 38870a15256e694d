"""Geodesic spray: closed coefficients, an independent oracle, an integrator.

The closed-form spray coefficients combine four pieces: a drift term driven by
the covariant derivative of the preferred direction, a rotation term driven by
its curl, a charge-gradient term driven by the slope of the anisotropy charge,
and the base-metric connection term. The oracle route never touches the
closed forms: it differentiates the squared norm and the momentum with
respect to position by central differences and raises the index with the
inverse metric, so the two routes are independent down to the scalar chain.

Key entry points
----------------
spray_coefficients
    Closed-form spray at a sampled point (``SprayData``).
spray_oracle
    Finite-difference route for the same vector.
geodesic_integrate
    Fixed-step or adaptive integration of the spray equation with sector-exit
    detection after every accepted substep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .background import BackgroundField, BackgroundSample, sample as sample_background
from .errors import DegenerateNu, GeometryError, NoConvergence
from .kinematics import Sector, classify, scalars
from .metric import covariant_momentum, inverse_metric, metric_function
from .numdiff import FDConfig, fd_gradient, fd_jacobian

__all__ = [
    "SprayData",
    "GeodesicTrajectory",
    "spray_coefficients",
    "spray_oracle",
    "geodesic_integrate",
    "charge_slope_scalars",
]

#: Default step policy for the spray oracle (position differentiation).
ORACLE_FD = FDConfig(step_rel_first=1e-6, richardson=True)


@dataclass(frozen=True)
class SprayData:
    """Closed-form spray pieces: total ``G``, charge-gradient part ``E``,
    logarithmic charge-slope of the squared norm ``Mbar``, squared norm
    ``f2``, and the base-connection part ``riem``."""

    G: np.ndarray
    E: np.ndarray
    Mbar: float
    f2: float
    riem: np.ndarray


@dataclass(frozen=True)
class GeodesicTrajectory:
    """Integrated trajectory.

    ``samples`` has one row per accepted node: parameter value, position,
    velocity, squared norm (``1 + 2 N + 1`` columns). ``F2_drift`` is the
    worst deviation of the squared norm from its initial value; ``step`` the
    fixed step (or initial adaptive step); ``length`` the parameter length
    actually covered. ``exit_reason`` is ``None`` for a completed run, else a
    diagnostic describing the truncation.
    """

    samples: np.ndarray
    F2_drift: float
    step: float
    length: float
    exit_reason: str | None = None


# --- charge-slope machinery --------------------------------------------------


def charge_slope_scalars(sample: BackgroundSample, scal) -> tuple[float, float, float]:
    """Exact charge-slopes ``(df/dg, W, Mbar)`` of the scalar chain.

    ``W`` is the charge-slope of the logarithm of the squared anisotropy
    weight and ``Mbar`` that of the squared norm.
    """
    g, eps = sample.g, scal.eps
    h, q, b, big_b, f = scal.h, scal.q, scal.b, scal.B, scal.f
    big_g = g / h
    df_dg = (q / big_b) * (q / (2.0 * h) - eps * big_g * b / 4.0)
    w = -f / h**3 - big_g * df_dg
    mbar = -b * q / big_b + w
    return df_dg, w, mbar


# --- closed-form spray -------------------------------------------------------


def spray_coefficients(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> SprayData:
    """Closed-form spray coefficients ``G^i`` at a sampled point."""
    y_arr = np.asarray(y, dtype=float)
    scal = scalars(sample, y_arr, sector)
    g, eps, q = sample.g, scal.eps, scal.q
    j2 = scal.J * scal.J

    riem = np.einsum("inm,n,m->i", sample.christoffel, y_arr, y_arr)
    total = riem.copy()

    f2 = scal.B * j2
    _, w, mbar = charge_slope_scalars(sample, scal)

    drift = float(y_arr @ sample.nabla_b @ y_arr)
    curl = sample.db - sample.db.T  # f_mn, connection parts cancel
    curl_low = curl @ y_arr  # f_j = f_jn y^n
    curl_up = sample.a_inv @ curl_low
    b_curl = float(sample.b_contra @ curl_low)

    coeff = drift - g * q * b_curl
    if g != 0.0 and coeff != 0.0:
        if scal.nu <= 1e-300:
            raise DegenerateNu("spray drift term divides by the dual radius nu = 0")
        v_contra = y_arr + scal.b * sample.b_contra
        total += -eps * (g / scal.nu) * coeff * v_contra
    if g != 0.0:
        total += g * q * curl_up

    e_vec = np.zeros(sample.dim)
    if np.any(sample.dg != 0.0):
        g_contra = inverse_metric(sample, y_arr, sector)
        u = sample.a @ y_arr
        y_cov = (u - g * q * sample.b_cov) * j2
        dy_dg_cov = -q * sample.b_cov * j2 + w * y_cov
        yg = float(y_arr @ sample.dg)
        e_vec = yg * (g_contra @ dy_dg_cov) - 0.5 * mbar * f2 * (g_contra @ sample.dg)
        total += e_vec

    return SprayData(G=total, E=e_vec, Mbar=mbar, f2=f2, riem=riem)


# --- oracle ------------------------------------------------------------------


def spray_oracle(
    field: BackgroundField,
    x: Sequence[float],
    y: Sequence[float],
    config: FDConfig = ORACLE_FD,
) -> np.ndarray:
    """Finite-difference spray: position-differentiate momentum and squared
    norm at fixed direction, then raise the index with the inverse metric."""
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.asarray(y, dtype=float)

    def momentum_at(position: np.ndarray) -> np.ndarray:
        return covariant_momentum(sample_background(field, position), y_arr)

    def f2_at(position: np.ndarray) -> float:
        return metric_function(sample_background(field, position), y_arr)

    jac = fd_jacobian(momentum_at, x_arr, config)  # jac[k, m] = d y_k / d x^m
    grad = fd_gradient(f2_at, x_arr, config)
    g_cov_low = jac @ y_arr - 0.5 * grad

    here = sample_background(field, x_arr)
    return inverse_metric(here, y_arr) @ g_cov_low


# --- integration -------------------------------------------------------------

# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def _rhs(field: BackgroundField, state: np.ndarray, dim: int) -> np.ndarray:
    position = state[:dim]
    velocity = state[dim:]
    here = sample_background(field, position)
    spray = spray_coefficients(here, velocity)
    return np.concatenate([velocity, -spray.G])


def geodesic_integrate(
    field: BackgroundField,
    x0: Sequence[float],
    y0: Sequence[float],
    length: float,
    *,
    method: str = "rk4",
    step: float | None = None,
    tol: float = 1e-9,
    max_steps: int = 200_000,
) -> GeodesicTrajectory:
    """Integrate the spray equation from ``(x0, y0)`` over parameter ``length``.

    ``method`` is ``rk4`` (fixed step, default ``length / 4096``) or ``rk45``
    (adaptive embedded pair controlled by ``tol``). After every accepted
    substep the velocity is re-classified; leaving the initial sector (or
    entering a degenerate configuration) truncates the trajectory at the last
    good node and records the reason.
    """
    if method not in ("rk4", "rk45"):
        raise ValueError(f"unknown integration method {method!r}")
    x_arr = np.asarray(x0, dtype=float)
    y_arr = np.asarray(y0, dtype=float)
    dim = x_arr.size

    start = sample_background(field, x_arr)
    start_tag = classify(start, y_arr).tag
    f2_start = metric_function(start, y_arr)

    rows: list[np.ndarray] = [
        np.concatenate([[0.0], x_arr, y_arr, [f2_start]])
    ]
    state = np.concatenate([x_arr, y_arr])
    s_now = 0.0
    exit_reason: str | None = None

    if method == "rk4":
        h = float(step) if step is not None else length / 4096.0
        n_steps = max(1, math.ceil(length / h - 1e-12))
        h = length / n_steps
        step_used = h
        for _ in range(n_steps):
            try:
                k1 = _rhs(field, state, dim)
                k2 = _rhs(field, state + 0.5 * h * k1, dim)
                k3 = _rhs(field, state + 0.5 * h * k2, dim)
                k4 = _rhs(field, state + h * k3, dim)
                candidate = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                here = sample_background(field, candidate[:dim])
                tag = classify(here, candidate[dim:]).tag
                if tag != start_tag:
                    exit_reason = (
                        f"sector exit at s = {s_now + h:.9g}: velocity became {tag}"
                    )
                    break
                f2_here = metric_function(here, candidate[dim:])
            except GeometryError as exc:
                exit_reason = f"geometry degenerated at s = {s_now + h:.9g}: {exc}"
                break
            state = candidate
            s_now += h
            rows.append(np.concatenate([[s_now], state, [f2_here]]))
    else:
        h = float(step) if step is not None else length / 100.0
        step_used = h
        k_cache = _rhs(field, state, dim)
        accepted = 0
        while s_now < length - 1e-14 * length:
            if accepted >= max_steps:
                raise NoConvergence(
                    f"adaptive integrator exceeded {max_steps} accepted steps"
                )
            h = min(h, length - s_now)
            try:
                stages = [k_cache]
                for row_idx in range(1, 7):
                    increment = sum(
                        coeff * stages[j] for j, coeff in enumerate(_DP_A[row_idx])
                    )
                    stages.append(_rhs(field, state + h * increment, dim))
                stages_arr = np.stack(stages)
                order5 = state + h * (_DP_B5 @ stages_arr)
                order4 = state + h * (_DP_B4 @ stages_arr)
                scale = tol + tol * np.abs(order5)
                err = float(np.sqrt(np.mean(((order5 - order4) / scale) ** 2)))
            except GeometryError as exc:
                exit_reason = f"geometry degenerated near s = {s_now:.9g}: {exc}"
                break
            if err > 1.0:
                h *= max(0.2, 0.9 * err ** (-0.2))
                continue
            try:
                here = sample_background(field, order5[:dim])
                tag = classify(here, order5[dim:]).tag
                if tag != start_tag:
                    exit_reason = (
                        f"sector exit at s = {s_now + h:.9g}: velocity became {tag}"
                    )
                    break
                f2_here = metric_function(here, order5[dim:])
            except GeometryError as exc:
                exit_reason = f"geometry degenerated at s = {s_now + h:.9g}: {exc}"
                break
            state = order5
            s_now += h
            accepted += 1
            rows.append(np.concatenate([[s_now], state, [f2_here]]))
            k_cache = stages[6]  # first-same-as-last
            if err > 0.0:
                h *= min(5.0, 0.9 * err ** (-0.2))
            else:
                h *= 5.0

    samples = np.vstack(rows)
    drift = float(np.max(np.abs(samples[:, -1] - f2_start)))
    return GeodesicTrajectory(
        samples=samples,
        F2_drift=drift,
        step=step_used,
        length=s_now,
        exit_reason=exit_reason,
    )

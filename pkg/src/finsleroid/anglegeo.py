"""Anisotropic angles, scalar products, and the angular chart (dimension 4).

The angle between two directions of the same sector is invariant under the
anisotropy: it is computed directly from the scalar chains, reproduced by a
closed form in chart coordinates, and (in the conformal module) by mapping to
the factor space — three genuinely different routes that the tests require to
agree.

The angular chart parameterises a supported direction by its norm ``z0``, a
boost angle ``eta``, an azimuth ``phi``, and the normalised angular variable
``chi`` along the preferred direction. In these coordinates the induced
metric is diagonal, and a further two-variable substitution exhibits it as
conformally flat.

Key entry points
----------------
angle / scalar_product
    Direct route from the two scalar chains.
uar_from_angles / uar_to_angles
    The chart and its inverse (axis rays canonicalised).
angle_closed_form
    Chart-coordinate closed form of the angle.
uar_metric / uar_closed_diagonals / flatness_check
    Induced chart metric by congruence, its closed diagonal, and the
    conformally flat normal form with factor ``(1/h^2) |F^2|^(1-h)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .background import BackgroundSample
from .errors import ChartDomain, CNotUnit, DomainError, MixedSectors, UnsupportedSector
from .kinematics import KinematicScalars, Q_MIN_REL, Sector, classify, scalars
from .metric import metric_tensor

__all__ = [
    "UarPoint",
    "positively_parallel",
    "angle",
    "scalar_product",
    "angle_closed_form",
    "uar_from_angles",
    "uar_to_angles",
    "uar_metric",
    "uar_closed_diagonals",
    "flatness_check",
]

#: Clamp window for inverse trigonometric/hyperbolic arguments.
CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class UarPoint:
    """Chart coordinates: norm ``z0 > 0``, boost ``eta``, azimuth ``phi`` in
    ``[0, 2 pi)``, normalised angular variable ``chi`` (sector-dependent
    range)."""

    z0: float
    eta: float
    phi: float
    chi: float


# --- guards ------------------------------------------------------------------


def _require_unit(sample: BackgroundSample, what: str) -> None:
    if not sample.c_is_unit:
        raise CNotUnit(f"{what} requires unit preferred-direction norm")


def _require_dim4(sample: BackgroundSample, what: str) -> None:
    if sample.dim != 4:
        raise ChartDomain(f"{what} is implemented for dimension 4")


def _paired_chains(
    sample: BackgroundSample, y1: Sequence[float], y2: Sequence[float]
) -> tuple[np.ndarray, np.ndarray, KinematicScalars, KinematicScalars]:
    y1_arr = np.asarray(y1, dtype=float)
    y2_arr = np.asarray(y2, dtype=float)
    s1 = classify(sample, y1_arr)
    s2 = classify(sample, y2_arr)
    if not s1.supported:
        raise UnsupportedSector(f"first direction is {s1.tag}")
    if not s2.supported:
        raise UnsupportedSector(f"second direction is {s2.tag}")
    if s1.tag != s2.tag:
        raise MixedSectors(f"directions lie in different sectors: {s1.tag} vs {s2.tag}")
    return y1_arr, y2_arr, scalars(sample, y1_arr, s1), scalars(sample, y2_arr, s2)


# --- direct route ------------------------------------------------------------


def positively_parallel(y1: np.ndarray, y2: np.ndarray) -> bool:
    """True when ``y2`` is a positive multiple of ``y1`` up to rounding.

    The pair invariant of a parallel pair is exactly 1 analytically, but the
    inverse-cosh route amplifies its last-ulp rounding to ~1e-8; the angle
    routes short-circuit such pairs to an exact zero instead.
    """
    k = int(np.argmax(np.abs(y1)))
    if y1[k] == 0.0 or y2[k] == 0.0:
        return False
    lam = y2[k] / y1[k]
    if lam <= 0.0:
        return False
    return bool(
        np.max(np.abs(y2 - lam * y1)) <= 8e-16 * abs(lam) * float(np.max(np.abs(y1)))
    )


def _pair_cosine(
    sample: BackgroundSample,
    y1_arr: np.ndarray,
    y2_arr: np.ndarray,
    k1: KinematicScalars,
    k2: KinematicScalars,
) -> float:
    """Normalised pair invariant: hyperbolic cosine of ``h * angle`` in the
    time sector, circular cosine in the space sector."""
    if positively_parallel(y1_arr, y2_arr):
        return 1.0
    r12 = float(y1_arr @ sample.a @ y2_arr) + k1.b * k2.b
    h = k1.h
    if k1.eps > 0:
        tau = (h * h * r12 - k1.A * k2.A) / math.sqrt(k1.B * k2.B)
        if tau < 1.0 - CLAMP_TOL:
            raise DomainError(f"pair invariant {tau!r} below the hyperbolic domain")
        return max(tau, 1.0)
    tau = (k1.A * k2.A - h * h * r12) / math.sqrt(abs(k1.B) * abs(k2.B))
    if abs(tau) > 1.0 + CLAMP_TOL:
        raise DomainError(f"pair invariant {tau!r} outside the circular domain")
    return min(max(tau, -1.0), 1.0)


def angle(sample: BackgroundSample, y1: Sequence[float], y2: Sequence[float]) -> float:
    """Anisotropic angle between two same-sector directions (direct route)."""
    _require_unit(sample, "the anisotropic angle")
    y1_arr, y2_arr, k1, k2 = _paired_chains(sample, y1, y2)
    tau = _pair_cosine(sample, y1_arr, y2_arr, k1, k2)
    if k1.eps > 0:
        return math.acosh(tau) / k1.h
    return math.acos(tau) / k1.h


def scalar_product(
    sample: BackgroundSample, y1: Sequence[float], y2: Sequence[float]
) -> float:
    """Anisotropic scalar product; reduces to the squared norm on the diagonal."""
    _require_unit(sample, "the anisotropic scalar product")
    y1_arr, y2_arr, k1, k2 = _paired_chains(sample, y1, y2)
    tau = _pair_cosine(sample, y1_arr, y2_arr, k1, k2)
    f2_1 = k1.B * k1.J * k1.J
    f2_2 = k2.B * k2.J * k2.J
    if k1.eps > 0:
        return math.sqrt(f2_1) * math.sqrt(f2_2) * tau
    return -math.sqrt(-f2_1) * math.sqrt(-f2_2) * tau


# --- chart -------------------------------------------------------------------


def _time_profiles(chi: float, g: float, h: float) -> tuple[float, float, float]:
    """Profiles ``(Ch, Sh, Sh*)`` of the time-sector chart at ``chi``."""
    f = h * chi
    j = math.exp(-0.5 * (g / h) * f)
    ch = math.cosh(f) / (j * h)
    sh = (math.sinh(f) - 0.5 * (g / h) * math.cosh(f)) / j
    sh_star = (math.sinh(f) + 0.5 * (g / h) * math.cosh(f)) / j
    return ch, sh, sh_star


def _space_profiles(chi: float, g: float, h: float) -> tuple[float, float, float]:
    """Profiles ``(Sin, Cos, Cos*)`` of the space-sector chart at ``chi``."""
    f = h * chi
    j = math.exp(-0.5 * (g / h) * f)
    sin = math.sin(f) / (j * h)
    cos = (math.cos(f) - 0.5 * (g / h) * math.sin(f)) / j
    cos_star = (math.cos(f) + 0.5 * (g / h) * math.sin(f)) / j
    return sin, cos, cos_star


def uar_from_angles(sample: BackgroundSample, point: UarPoint, tag: str) -> np.ndarray:
    """Direction for chart coordinates ``point`` in sector ``tag``."""
    _require_unit(sample, "the angular chart")
    _require_dim4(sample, "the angular chart")
    if point.z0 <= 0.0:
        raise ChartDomain(f"chart norm z0 = {point.z0!r} must be positive")
    g = sample.g
    if tag == "time-future":
        h = sample.h_time
        ch, sh, _ = _time_profiles(point.chi, g, h)
        radial = point.z0 * ch
        frame_components = np.array(
            [
                radial * math.cosh(point.eta),
                radial * math.sinh(point.eta) * math.cos(point.phi),
                radial * math.sinh(point.eta) * math.sin(point.phi),
                point.z0 * sh,
            ]
        )
    elif tag == "space-like":
        h = sample.h_space
        if not -math.pi / h - CLAMP_TOL <= point.chi <= CLAMP_TOL:
            raise ChartDomain(
                f"space-sector chi = {point.chi!r} outside (-pi/h, 0]"
            )
        sin, cos, _ = _space_profiles(point.chi, g, h)
        radial = -point.z0 * sin
        frame_components = np.array(
            [
                point.z0 * math.sinh(point.eta) * -sin,
                radial * math.cosh(point.eta) * math.cos(point.phi),
                radial * math.cosh(point.eta) * math.sin(point.phi),
                -point.z0 * cos,
            ]
        )
    else:
        raise UnsupportedSector(f"no chart for sector {tag!r}")
    return sample.frame_inv @ frame_components


def uar_to_angles(sample: BackgroundSample, y: Sequence[float]) -> UarPoint:
    """Chart coordinates of a supported direction (axis rays get
    ``eta = phi = 0``)."""
    _require_unit(sample, "the angular chart")
    _require_dim4(sample, "the angular chart")
    y_arr = np.asarray(y, dtype=float)
    sector = classify(sample, y_arr)
    scal = scalars(sample, y_arr, sector)
    f2 = scal.B * scal.J * scal.J
    z0 = math.sqrt(abs(f2))
    r = sample.frame @ y_arr
    rho = math.hypot(r[1], r[2])
    scale = float(np.linalg.norm(y_arr))
    if scal.q <= Q_MIN_REL * scale:
        eta, phi = 0.0, 0.0
    else:
        phi = math.atan2(r[2], r[1])
        if phi < 0.0:
            phi += 2.0 * math.pi
        if scal.eps > 0:
            eta = math.asinh(rho / scal.q)
        else:
            eta = math.asinh(r[0] / scal.q)
    return UarPoint(z0=z0, eta=eta, phi=phi, chi=scal.chi)


def angle_closed_form(
    sample: BackgroundSample, y1: Sequence[float], y2: Sequence[float]
) -> float:
    """Angle via chart coordinates of the two directions."""
    _require_unit(sample, "the closed-form angle")
    _require_dim4(sample, "the closed-form angle")
    y1_arr, y2_arr, k1, _ = _paired_chains(sample, y1, y2)
    if positively_parallel(y1_arr, y2_arr):
        return 0.0
    p1 = uar_to_angles(sample, y1_arr)
    p2 = uar_to_angles(sample, y2_arr)
    h = k1.h
    f1, f2 = h * p1.chi, h * p2.chi
    dphi = p1.phi - p2.phi
    if k1.eps > 0:
        z12 = math.cosh(p1.eta) * math.cosh(p2.eta) - math.sinh(p1.eta) * math.sinh(
            p2.eta
        ) * math.cos(dphi)
        tau = math.cosh(f1) * math.cosh(f2) * z12 - math.sinh(f1) * math.sinh(f2)
        if tau < 1.0 - CLAMP_TOL:
            raise DomainError(f"chart pair invariant {tau!r} below the hyperbolic domain")
        return math.acosh(max(tau, 1.0)) / h
    z12 = math.cosh(p1.eta) * math.cosh(p2.eta) * math.cos(dphi) - math.sinh(
        p1.eta
    ) * math.sinh(p2.eta)
    tau = math.sin(f1) * math.sin(f2) * z12 + math.cos(f1) * math.cos(f2)
    if abs(tau) > 1.0 + CLAMP_TOL:
        raise DomainError(f"chart pair invariant {tau!r} outside the circular domain")
    return math.acos(min(max(tau, -1.0), 1.0)) / h


# --- chart metric ------------------------------------------------------------


def _chart_jacobian(point: UarPoint, g: float, h: float, tag: str) -> np.ndarray:
    """Analytic Jacobian ``d(frame components)/d(z0, eta, phi, chi)``."""
    z0, eta, phi = point.z0, point.eta, point.phi
    cphi, sphi = math.cos(phi), math.sin(phi)
    jac = np.zeros((4, 4))
    if tag == "time-future":
        ch, sh, sh_star = _time_profiles(point.chi, g, h)
        cheta, sheta = math.cosh(eta), math.sinh(eta)
        r = np.array([z0 * cheta * ch, z0 * sheta * ch * cphi, z0 * sheta * ch * sphi, z0 * sh])
        jac[:, 0] = r / z0
        jac[:, 1] = [z0 * sheta * ch, z0 * cheta * ch * cphi, z0 * cheta * ch * sphi, 0.0]
        jac[:, 2] = [0.0, -z0 * sheta * ch * sphi, z0 * sheta * ch * cphi, 0.0]
        jac[:, 3] = [
            z0 * cheta * sh_star,
            z0 * sheta * sh_star * cphi,
            z0 * sheta * sh_star * sphi,
            z0 * ch,
        ]
    else:
        sin, cos, cos_star = _space_profiles(point.chi, g, h)
        cheta, sheta = math.cosh(eta), math.sinh(eta)
        r = np.array(
            [-z0 * sheta * sin, -z0 * cheta * sin * cphi, -z0 * cheta * sin * sphi, -z0 * cos]
        )
        jac[:, 0] = r / z0
        jac[:, 1] = [-z0 * cheta * sin, -z0 * sheta * sin * cphi, -z0 * sheta * sin * sphi, 0.0]
        jac[:, 2] = [0.0, z0 * cheta * sin * sphi, -z0 * cheta * sin * cphi, 0.0]
        jac[:, 3] = [
            -z0 * sheta * cos_star,
            -z0 * cheta * cos_star * cphi,
            -z0 * cheta * cos_star * sphi,
            z0 * sin,
        ]
    return jac


def uar_metric(sample: BackgroundSample, point: UarPoint, tag: str) -> np.ndarray:
    """Induced chart metric by congruence with the direction-dependent metric."""
    y = uar_from_angles(sample, point, tag)
    g_cov = metric_tensor(sample, y)
    g_frame = sample.frame_inv.T @ g_cov @ sample.frame_inv
    h = sample.h_time if tag == "time-future" else sample.h_space
    jac = _chart_jacobian(point, sample.g, h, tag)
    return jac.T @ g_frame @ jac


def uar_closed_diagonals(sample: BackgroundSample, point: UarPoint, tag: str) -> np.ndarray:
    """Closed form of the chart-metric diagonal."""
    z0 = point.z0
    if tag == "time-future":
        h = sample.h_time
        f = h * point.chi
        return np.array(
            [
                1.0,
                -(z0 * math.cosh(f) / h) ** 2,
                -((z0 * math.sinh(point.eta) * math.cosh(f) / h) ** 2),
                -(z0 * z0),
            ]
        )
    h = sample.h_space
    f = h * point.chi
    return np.array(
        [
            -1.0,
            (z0 * math.sin(f) / h) ** 2,
            -((z0 * math.cosh(point.eta) * math.sin(f) / h) ** 2),
            -(z0 * z0),
        ]
    )


def flatness_check(
    sample: BackgroundSample, point: UarPoint, tag: str
) -> tuple[float, float]:
    """Fit the conformally flat normal form of the chart metric.

    Transforms the sector-signed chart metric to the two-variable normal
    coordinates and fits the proportionality constant against the flat target
    ``diag(1, -1, -rho^2, -rho^2 sinh^2 eta)`` (time) or
    ``diag(1, 1, -rho^2, rho^2 cosh^2 eta)`` (space). Returns the fitted
    factor (expected ``(1/h^2)|F^2|^(1-h)``) and the relative residual.
    """
    a_chart = uar_metric(sample, point, tag)
    eps = 1.0 if tag == "time-future" else -1.0
    h = sample.h_time if tag == "time-future" else sample.h_space
    z0, chi = point.z0, point.chi
    power = z0**h
    if tag == "time-future":
        rho = power * math.cosh(h * chi)
        jac2 = np.array(
            [
                [h * power / z0 * math.cosh(h * chi), h * power * math.sinh(h * chi)],
                [h * power / z0 * math.sinh(h * chi), h * power * math.cosh(h * chi)],
            ]
        )
        target = np.diag(
            [1.0, -1.0, -rho * rho, -rho * rho * math.sinh(point.eta) ** 2]
        )
    else:
        rho = power * math.sin(h * chi)
        jac2 = np.array(
            [
                [h * power / z0 * math.sin(h * chi), h * power * math.cos(h * chi)],
                [h * power / z0 * math.cos(h * chi), -h * power * math.sin(h * chi)],
            ]
        )
        target = np.diag(
            [1.0, 1.0, -rho * rho, rho * rho * math.cosh(point.eta) ** 2]
        )

    # full Jacobian d(rho, tau, eta, phi)/d(z0, eta, phi, chi)
    jac_full = np.zeros((4, 4))
    jac_full[0, 0], jac_full[0, 3] = jac2[0, 0], jac2[0, 1]
    jac_full[1, 0], jac_full[1, 3] = jac2[1, 0], jac2[1, 1]
    jac_full[2, 1] = 1.0
    jac_full[3, 2] = 1.0
    inverse = np.linalg.inv(jac_full)
    transformed = inverse.T @ (eps * a_chart) @ inverse

    weight = float(np.sum(target * target))
    factor = float(np.sum(transformed * target) / weight)
    residual = float(
        np.linalg.norm(transformed - factor * target) / np.linalg.norm(factor * target)
    )
    return factor, residual

"""Conformal isomorphism onto a flat-metric model space (unit axis norm).

A fibrewise map sends each supported direction to an image vector whose
plain quadratic norm reproduces the anisotropic norm up to a conformal
factor: the pushforward of the direction-dependent metric along the map is
exactly a multiple of the seed quadratic form. Restricted to the unit shell
the map descends to the factor space of rays, where the induced metric has
constant sectional curvature — the same constant the indicatrix-curvature
route produces.

Key entry points
----------------
zeta_map / ConformalImage
    The image vector with its conformal factor and quadratic norm.
zeta_jacobian / pushforward_metric_check
    Fibre derivative of the map and the conformality residual.
zeta_inverse
    Reconstruction of the direction from its image.
factor_space_curvature / factor_space_angle
    Constant-curvature extraction on the factor space and the angle route
    through the image vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .background import BackgroundSample
from .errors import (
    ChartDomain,
    CNotUnit,
    DegenerateQ,
    DomainError,
    MixedSectors,
    UnsupportedImage,
    UnsupportedSector,
)
from .kinematics import Q_MIN_REL, Sector, aux_vectors, classify, scalars
from .anglegeo import (
    CLAMP_TOL,
    UarPoint,
    _chart_jacobian,
    positively_parallel,
    uar_from_angles,
)

__all__ = [
    "ConformalImage",
    "zeta_map",
    "zeta_jacobian",
    "pushforward_metric_check",
    "zeta_inverse",
    "factor_space_curvature",
    "factor_space_angle",
]

#: Relative tolerance below which an image vector counts as isotropic.
S2_TOL_REL = 1e-12

#: Central-difference step for factor-space Christoffel symbols.
FACTOR_FD_STEP = 1e-4


@dataclass(frozen=True)
class ConformalImage:
    """Image vector ``zeta`` with conformal factor ``kappa``, quadratic norm
    ``S2 = a(zeta, zeta)``, and metric multiplier ``p = kappa**2``."""

    zeta: np.ndarray
    kappa: float
    S2: float
    p: float


def _require_unit(sample: BackgroundSample, what: str) -> None:
    if not sample.c_is_unit:
        raise CNotUnit(f"{what} requires unit preferred-direction norm")


def zeta_map(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> ConformalImage:
    """Map a supported direction to its conformal image."""
    _require_unit(sample, "the conformal map")
    y_arr = np.asarray(y, dtype=float)
    scal = scalars(sample, y_arr, sector)
    h = scal.h
    f2 = scal.B * scal.J * scal.J
    kappa = (1.0 / h) * abs(f2) ** (0.5 * (1.0 - h))
    v_contra = y_arr + scal.b * sample.b_contra
    zeta = (h * v_contra - scal.A * sample.b_contra) * (scal.J / (kappa * h))
    s2 = float(zeta @ sample.a @ zeta)
    return ConformalImage(zeta=zeta, kappa=kappa, S2=s2, p=kappa * kappa)


def zeta_jacobian(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> np.ndarray:
    """Fibre derivative ``Z[i, m] = d zeta^i / d y^m`` (off the axis)."""
    _require_unit(sample, "the conformal map derivative")
    y_arr = np.asarray(y, dtype=float)
    scal = scalars(sample, y_arr, sector)
    if scal.q <= Q_MIN_REL * float(np.linalg.norm(y_arr)):
        raise DegenerateQ("conformal map derivative undefined on the preferred axis")
    aux = aux_vectors(sample, y_arr, scal)
    h = scal.h
    f2 = scal.B * scal.J * scal.J
    image = zeta_map(sample, y_arr, sector)
    kappa = image.kappa
    scale = scal.J / (kappa * h)
    b_contra = sample.b_contra
    core = (
        h * (np.eye(sample.dim) + np.outer(b_contra, sample.b_cov))
        - np.outer(
            b_contra,
            sample.b_cov + scal.eps * sample.g * aux.v_cov / (2.0 * scal.q),
        )
    ) * scale
    y_cov = (aux.u - sample.g * scal.q * sample.b_cov) * scal.J**2
    weight = (sample.g * scal.q / (2.0 * scal.B)) * aux.e - (1.0 - h) * y_cov / f2
    return core + np.outer(image.zeta, weight)


def pushforward_metric_check(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> float:
    """Relative residual of conformality: the pulled-back seed form times the
    conformal multiplier must reproduce the direction-dependent metric."""
    from .metric import metric_tensor

    y_arr = np.asarray(y, dtype=float)
    image = zeta_map(sample, y_arr, sector)
    jac = zeta_jacobian(sample, y_arr, sector)
    reconstructed = image.p * jac.T @ sample.a @ jac
    g_cov = metric_tensor(sample, y_arr, sector)
    return float(
        np.max(np.abs(reconstructed - g_cov)) / max(np.max(np.abs(g_cov)), 1e-300)
    )


def _time_b(f: float, g: float, h: float, norm: float) -> float:
    j = math.exp(-0.5 * (g / h) * f)
    return norm * (math.sinh(f) - 0.5 * (g / h) * math.cosh(f)) / j

def _space_b(f: float, g: float, h: float, norm: float) -> float:
    j = math.exp(-0.5 * (g / h) * f)
    return -norm * (math.cos(f) - 0.5 * (g / h) * math.sin(f)) / j


def zeta_inverse(sample: BackgroundSample, zeta: Sequence[float]) -> np.ndarray:
    """Reconstruct the direction whose conformal image is ``zeta``."""
    _require_unit(sample, "the inverse conformal map")
    z_arr = np.asarray(zeta, dtype=float)
    s2 = float(z_arr @ sample.a @ z_arr)
    scale = float(np.linalg.norm(z_arr))
    if abs(s2) <= S2_TOL_REL * scale * scale:
        raise UnsupportedImage("image vector is isotropic for the seed form")
    zb = float(z_arr @ sample.b_cov)
    g = sample.g
    if s2 > 0.0:
        h = sample.h_time
        f = math.asinh(zb / math.sqrt(s2))
        norm = s2 ** (0.5 / h)
        b = _time_b(f, g, h, norm)
        expected = "time-future"
    else:
        h = sample.h_space
        u = -zb / math.sqrt(-s2)
        if u <= -1.0 + 1e-12:
            raise UnsupportedImage("image vector lies on the excluded branch endpoint")
        f = -math.acos(min(u, 1.0))
        norm = (-s2) ** (0.5 / h)
        b = _space_b(f, g, h, norm)
        expected = "space-like"
    chi = f / h
    inv_j = math.exp(0.5 * g * chi)
    h_kappa = abs(s2) ** (0.5 * (1.0 - h) / h)
    y = -b * sample.b_contra + (1.0 / h) * (
        z_arr + zb * sample.b_contra
    ) * (h_kappa * inv_j)
    tag = classify(sample, y).tag
    if tag != expected:
        raise UnsupportedImage(
            f"reconstructed direction classifies as {tag}, expected {expected}"
        )
    return y


# --- factor space ------------------------------------------------------------


def _factor_frame(
    sample: BackgroundSample, m: Sequence[float], tag: str
) -> tuple[np.ndarray, np.ndarray]:
    """Image vector and its analytic derivatives along the unit-shell factor
    coordinates ``m = (eta, phi, chi)``."""
    eta, phi, chi = (float(component) for component in m)
    point = UarPoint(z0=1.0, eta=eta, phi=phi, chi=chi)
    y = uar_from_angles(sample, point, tag)
    h = sample.h_time if tag == "time-future" else sample.h_space
    chart_jac = _chart_jacobian(point, sample.g, h, tag)
    dy_dm = sample.frame_inv @ chart_jac[:, 1:]
    zeta = zeta_map(sample, y).zeta
    legs = zeta_jacobian(sample, y) @ dy_dm
    return zeta, legs


def _factor_metric(sample: BackgroundSample, m: Sequence[float], tag: str) -> np.ndarray:
    h = sample.h_time if tag == "time-future" else sample.h_space
    _, legs = _factor_frame(sample, m, tag)
    return (legs.T @ sample.a @ legs) / (h * h)


def factor_space_curvature(
    sample: BackgroundSample, m: Sequence[float], tag: str
) -> float:
    """Constant sectional curvature of the factor-space metric at ``m``.

    Fits the constant-curvature relation between the curvature tensor and the
    factor metric by least squares over all index combinations; the fitted
    constant is the sectional curvature.
    """
    _require_unit(sample, "the factor-space curvature")
    if sample.dim != 4:
        raise ChartDomain("the factor-space curvature is implemented for dimension 4")
    m_arr = np.asarray(m, dtype=float)
    step = FACTOR_FD_STEP

    def metric_at(point: np.ndarray) -> np.ndarray:
        return _factor_metric(sample, point, tag)

    def christoffel_at(point: np.ndarray) -> np.ndarray:
        i_ab = metric_at(point)
        d_i = np.zeros((3, 3, 3))
        for k in range(3):
            shift = np.zeros(3)
            shift[k] = step
            d_i[k] = (metric_at(point + shift) - metric_at(point - shift)) / (2 * step)
        inverse = np.linalg.inv(i_ab)
        # Gamma^a_{bc} = 1/2 i^{ad} (d_b i_{dc} + d_c i_{db} - d_d i_{bc})
        return 0.5 * np.einsum(
            "ad,bdc->abc",
            inverse,
            d_i.transpose(0, 1, 2) + d_i.transpose(2, 1, 0) - d_i.transpose(1, 0, 2),
        )

    i_ab = metric_at(m_arr)
    gamma = christoffel_at(m_arr)
    d_gamma = np.zeros((3, 3, 3, 3))
    for k in range(3):
        shift = np.zeros(3)
        shift[k] = step
        d_gamma[k] = (christoffel_at(m_arr + shift) - christoffel_at(m_arr - shift)) / (
            2 * step
        )

    # R^a_{bcd} = d_d Gamma^a_{cb} - d_c Gamma^a_{db} + Gamma^a_{dm} Gamma^m_{cb}
    #             - Gamma^a_{cm} Gamma^m_{db}
    # (sign convention fixed so this route agrees with the cubic-form shell
    # curvature carried over by the conformal isomorphism)
    riemann_up = (
        np.einsum("dacb->abcd", d_gamma)
        - np.einsum("cadb->abcd", d_gamma)
        + np.einsum("adm,mcb->abcd", gamma, gamma)
        - np.einsum("acm,mdb->abcd", gamma, gamma)
    )
    riemann = np.einsum("am,mbcd->abcd", i_ab, riemann_up)
    target = np.einsum("ac,bd->abcd", i_ab, i_ab) - np.einsum(
        "ad,bc->abcd", i_ab, i_ab
    )
    return float(np.sum(riemann * target) / np.sum(target * target))


def factor_space_angle(
    sample: BackgroundSample, y1: Sequence[float], y2: Sequence[float]
) -> float:
    """Angle between two same-sector directions via their conformal images."""
    _require_unit(sample, "the factor-space angle")
    y1_arr = np.asarray(y1, dtype=float)
    y2_arr = np.asarray(y2, dtype=float)
    image1 = zeta_map(sample, y1_arr)
    image2 = zeta_map(sample, y2_arr)
    if positively_parallel(y1_arr, y2_arr) and image1.S2 * image2.S2 > 0.0:
        return 0.0
    if image1.S2 > 0.0 and image2.S2 > 0.0:
        h = sample.h_time
        tau = float(image1.zeta @ sample.a @ image2.zeta) / math.sqrt(
            image1.S2 * image2.S2
        )
        if tau < 1.0 - CLAMP_TOL:
            raise DomainError(f"image pair invariant {tau!r} below the hyperbolic domain")
        return math.acosh(max(tau, 1.0)) / h
    if image1.S2 < 0.0 and image2.S2 < 0.0:
        h = sample.h_space
        tau = -float(image1.zeta @ sample.a @ image2.zeta) / math.sqrt(
            image1.S2 * image2.S2
        )
        if abs(tau) > 1.0 + CLAMP_TOL:
            raise DomainError(f"image pair invariant {tau!r} outside the circular domain")
        return math.acos(min(max(tau, -1.0), 1.0)) / h
    raise MixedSectors("image vectors lie on opposite sides of the seed cone")

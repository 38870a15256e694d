"""Closed-form metric stack: squared norm, momentum, metric tensors, cubic form.

Everything here is an explicit algebraic function of the scalar chain — no
differentiation is performed. The finite-difference layer independently
verifies that these closed forms really are the derivative chain of the
squared norm (momentum = half gradient, metric = momentum Jacobian, cubic
form = half metric slope).

Key entry points
----------------
metric_function / covariant_momentum / metric_tensor / inverse_metric
    The squared norm ``F^2`` and its derivative stack.
determinant_ratio
    Closed form for ``det(metric) / det(base metric)``.
cartan_vector / cartan_tensor
    Contracted and full cubic forms, plus the angular (projected) metric.
indicatrix_curvature
    Sectional-curvature extraction on the unit shell from the cubic-form
    curvature products; constant by construction, which the tests verify.
frame_components
    Direction and metric expressed in the adapted frame, via closed frame
    formulas (the congruence route cross-checks them).
metric_bundle
    One-pass assembly of the whole stack.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .background import BackgroundSample
from .errors import CNotUnit, DegenerateNu, DegenerateQ, NullCartan
from .kinematics import (
    AuxVectors,
    KinematicScalars,
    NU_MIN_REL,
    Q_MIN_REL,
    Sector,
    aux_vectors,
    classify,
    scalars,
)

__all__ = [
    "MetricBundle",
    "FrameComponents",
    "metric_function",
    "covariant_momentum",
    "metric_tensor",
    "inverse_metric",
    "determinant_ratio",
    "cartan_vector",
    "cartan_norm",
    "cartan_tensor",
    "angular_metric",
    "indicatrix_curvature",
    "frame_components",
    "metric_bundle",
]

#: Below this |charge| the cubic form vanishes identically.
G_NULL_TOL = 1e-12


@dataclass(frozen=True)
class MetricBundle:
    """Full metric stack at one (point, direction) pair.

    ``cartan`` is the full cubic form (exact zeros at zero charge); ``CC`` is
    the squared norm of the contracted cubic form; ``h_ang`` the angular
    metric.
    """

    F2: float
    y_cov: np.ndarray
    g_cov: np.ndarray
    g_contra: np.ndarray
    det_ratio: float
    C_cov: np.ndarray
    C_contra: np.ndarray
    CC: float
    cartan: np.ndarray
    h_ang: np.ndarray


@dataclass(frozen=True)
class FrameComponents:
    """Direction and metric in the adapted frame: ``R[p]`` and ``g_frame[p, q]``."""

    R: np.ndarray
    g_frame: np.ndarray


# --- guards ------------------------------------------------------------------


def _require_q(scal: KinematicScalars, scale: float, what: str) -> None:
    if scal.q <= Q_MIN_REL * scale:
        raise DegenerateQ(f"{what} divides by the transverse radius, zero on the axis ray")


def _require_nu(scal: KinematicScalars, scale: float, what: str) -> None:
    if scal.nu <= NU_MIN_REL * scale:
        raise DegenerateNu(f"{what} divides by the dual radius nu = {scal.nu!r}")


def _chain(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None
) -> tuple[np.ndarray, KinematicScalars]:
    y_arr = np.asarray(y, dtype=float)
    return y_arr, scalars(sample, y_arr, sector)


# --- squared norm and derivative stack ---------------------------------------


def metric_function(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> float:
    """Squared anisotropic norm ``F^2`` (positive time-future, negative space-like)."""
    _, scal = _chain(sample, y, sector)
    return scal.B * scal.J * scal.J


def covariant_momentum(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> np.ndarray:
    """Lowered direction ``y_i`` (half gradient of the squared norm)."""
    y_arr, scal = _chain(sample, y, sector)
    u = sample.a @ y_arr
    return (u - sample.g * scal.q * sample.b_cov) * (scal.J * scal.J)


def metric_tensor(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> np.ndarray:
    """Covariant direction-dependent metric ``g_ij``."""
    y_arr, scal = _chain(sample, y, sector)
    scale = float(np.linalg.norm(y_arr))
    _require_q(scal, scale, "metric tensor")
    aux = aux_vectors(sample, y_arr, scal)
    g, q, b, eps = sample.g, scal.q, scal.b, scal.eps
    b_cov, v = sample.b_cov, aux.v_cov
    j2 = scal.J * scal.J
    bb = np.outer(b_cov, b_cov)
    bv = np.outer(b_cov, v) + np.outer(v, b_cov)
    vv = np.outer(v, v)
    inner = -q * (b + g * q) * bb + q * bv - eps * (b / q) * vv
    return (sample.a - (g / scal.B) * inner) * j2


def inverse_metric(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> np.ndarray:
    """Contravariant direction-dependent metric ``g^ij``."""
    y_arr, scal = _chain(sample, y, sector)
    scale = float(np.linalg.norm(y_arr))
    _require_q(scal, scale, "inverse metric")
    _require_nu(scal, scale, "inverse metric")
    aux = aux_vectors(sample, y_arr, scal)
    g, q, b, eps = sample.g, scal.q, scal.b, scal.eps
    c2 = sample.c * sample.c
    b_up, v_up = sample.b_contra, aux.v_contra
    j2 = scal.J * scal.J
    bb = np.outer(b_up, b_up)
    bv = np.outer(b_up, v_up) + np.outer(v_up, b_up)
    vv = np.outer(v_up, v_up)
    inner = -b * q * bb + q * bv - eps * ((b + g * c2 * q) / scal.nu) * vv
    return (sample.a_inv + (g / scal.B) * inner) / j2


def determinant_ratio(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> float:
    """Closed form for ``det(g_ij) / det(a_ij)``."""
    y_arr, scal = _chain(sample, y, sector)
    j_pow = scal.J ** (2 * sample.dim)
    if abs(1.0 - sample.c * sample.c) <= 1e-15:
        return j_pow
    _require_q(scal, float(np.linalg.norm(y_arr)), "determinant ratio")
    return (scal.nu / scal.q) * j_pow


# --- cubic form --------------------------------------------------------------


def cartan_vector(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Contracted cubic form, covariant and contravariant (zeros at zero charge)."""
    y_arr, scal = _chain(sample, y, sector)
    if abs(sample.g) <= G_NULL_TOL:
        zero = np.zeros(sample.dim)
        return zero, zero.copy()
    scale = float(np.linalg.norm(y_arr))
    _require_q(scal, scale, "cubic-form vector")
    _require_nu(scal, scale, "cubic-form vector")
    aux = aux_vectors(sample, y_arr, scal)
    g, q, b, eps = sample.g, scal.q, scal.b, scal.eps
    c2 = sample.c * sample.c
    f2 = scal.B * scal.J * scal.J
    c_cov = (g / (2.0 * scal.B)) * (q / scal.X) * aux.e
    c_contra = (g / (2.0 * f2)) * (q / scal.X) * (
        -sample.b_contra + eps * ((b + g * c2 * q) / (q * scal.nu)) * aux.v_contra
    )
    return c_cov, c_contra


def cartan_norm(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> float:
    """Closed form for the squared norm ``C_h C^h`` of the contracted cubic form."""
    y_arr, scal = _chain(sample, y, sector)
    if abs(sample.g) <= G_NULL_TOL:
        return 0.0
    f2 = scal.B * scal.J * scal.J
    n = sample.dim
    x = scal.X
    return -scal.eps * (sample.g**2 / 4.0) * (1.0 / (f2 * x * x)) * (n + 1.0 - 1.0 / x)


def angular_metric(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> np.ndarray:
    """Angular metric: the metric projected orthogonally to the direction."""
    y_arr, scal = _chain(sample, y, sector)
    g_cov = metric_tensor(sample, y_arr, sector)
    y_cov = (sample.a @ y_arr - sample.g * scal.q * sample.b_cov) * (scal.J * scal.J)
    f2 = scal.B * scal.J * scal.J
    return g_cov - np.outer(y_cov, y_cov) / f2


def cartan_tensor(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> np.ndarray:
    """Full cubic form ``C_ijk``.

    Raises
    ------
    NullCartan
        At zero charge, where the normalised assembly divides by the vanishing
        squared norm of the contracted form (the exact limit value is zero).
    """
    y_arr, scal = _chain(sample, y, sector)
    if abs(sample.g) <= G_NULL_TOL:
        raise NullCartan("cubic-form assembly is degenerate at zero charge")
    c_cov, _ = cartan_vector(sample, y_arr, sector)
    h_ang = angular_metric(sample, y_arr, sector)
    cc = cartan_norm(sample, y_arr, sector)
    n = sample.dim
    x = scal.X
    sym = (
        np.einsum("i,jk->ijk", c_cov, h_ang)
        + np.einsum("j,ik->ijk", c_cov, h_ang)
        + np.einsum("k,ij->ijk", c_cov, h_ang)
    )
    triple = np.einsum("i,j,k->ijk", c_cov, c_cov, c_cov)
    return x * (sym - (n + 1.0 - 1.0 / x) * triple / cc)


# --- indicatrix curvature ----------------------------------------------------


def _projected_pair(
    g_cov: np.ndarray,
    h_ang: np.ndarray,
    y_arr: np.ndarray,
    f2: float,
    seeds: tuple[Sequence[float], Sequence[float]] | tuple[int, int] | None,
) -> tuple[np.ndarray, np.ndarray]:
    dim = y_arr.size
    if seeds is None:
        candidates = [np.eye(dim)[k] for k in range(dim)]
    else:
        candidates = []
        for s in seeds:
            if isinstance(s, (int, np.integer)):
                candidates.append(np.eye(dim)[int(s)])
            else:
                candidates.append(np.asarray(s, dtype=float))
    picked: list[np.ndarray] = []
    for t in candidates:
        w = t - (float(g_cov @ y_arr @ t) / f2) * y_arr
        if float(np.linalg.norm(w)) < 1e-10:
            continue
        if picked:
            u = picked[0]
            huu = float(u @ h_ang @ u)
            huw = float(u @ h_ang @ w)
            hww = float(w @ h_ang @ w)
            if abs(huu * hww - huw * huw) < 1e-10 * (abs(huu * hww) + w @ w * (u @ u)):
                continue
        picked.append(w)
        if len(picked) == 2:
            return picked[0], picked[1]
    raise DegenerateQ("could not find a nondegenerate tangent pair for curvature extraction")


def indicatrix_curvature(
    sample: BackgroundSample,
    y: Sequence[float],
    sector: Sector | None = None,
    seeds: tuple[Sequence[float], Sequence[float]] | tuple[int, int] | None = None,
) -> float:
    """Sectional curvature of the unit shell, extracted from cubic-form products.

    Requires unit preferred-direction norm. The value is a charge-only
    constant; ``seeds`` selects the tangent plane used for extraction so the
    tests can verify direction independence.
    """
    if not sample.c_is_unit:
        raise CNotUnit("indicatrix curvature is implemented at unit preferred-direction norm")
    y_arr, scal = _chain(sample, y, sector)
    eps = scal.eps
    if abs(sample.g) <= G_NULL_TOL:
        return -float(eps)
    g_cov = metric_tensor(sample, y_arr, sector)
    g_contra = inverse_metric(sample, y_arr, sector)
    h_ang = angular_metric(sample, y_arr, sector)
    cartan = cartan_tensor(sample, y_arr, sector)
    f2 = scal.B * scal.J * scal.J

    c_mixed = np.einsum("ha,ian->ihn", g_contra, cartan)  # C_i{}^h{}_n
    riem = np.einsum("inh,jhm->ijmn", cartan, c_mixed) - np.einsum(
        "imh,jhn->ijmn", cartan, c_mixed
    )

    u, v = _projected_pair(g_cov, h_ang, y_arr, f2, seeds)
    numerator = f2 * float(np.einsum("ijmn,i,j,m,n->", riem, u, v, u, v))
    huu = float(u @ h_ang @ u)
    hvv = float(v @ h_ang @ v)
    huv = float(u @ h_ang @ v)
    kappa = numerator / (huu * hvv - huv * huv)
    return -eps * (1.0 + kappa)


# --- adapted frame -----------------------------------------------------------


def frame_components(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> FrameComponents:
    """Direction and metric in the adapted frame, from closed frame formulas."""
    y_arr, scal = _chain(sample, y, sector)
    scale = float(np.linalg.norm(y_arr))
    _require_q(scal, scale, "frame metric")
    r = sample.frame @ y_arr
    dim = sample.dim
    g, q, b, eps, c = sample.g, scal.q, scal.b, scal.eps, sample.c
    j2 = scal.J * scal.J
    big_b = scal.B
    z = r[dim - 1]
    trans = np.concatenate([[1.0], -np.ones(dim - 2)])  # frame metric block diag(+1, -1, ...)
    er = trans * r[: dim - 1]  # e_ad R^d over transverse legs
    s2 = q * q - eps * b * b

    g_frame = np.zeros((dim, dim))
    g_frame[: dim - 1, : dim - 1] = np.diag(trans) + eps * g * (b / (big_b * q)) * np.outer(
        er, er
    )
    edge = (g / (big_b * q)) * (-eps * b * z - s2 * c) * er
    g_frame[dim - 1, : dim - 1] = edge
    g_frame[: dim - 1, dim - 1] = edge
    g_frame[dim - 1, dim - 1] = -1.0 + (g / (big_b * q)) * (
        (g * q**3 - b * s2) * c * c + eps * b * z * z + 2.0 * s2 * b
    )
    return FrameComponents(R=r, g_frame=g_frame * j2)


# --- one-pass assembly -------------------------------------------------------


def metric_bundle(
    sample: BackgroundSample, y: Sequence[float], sector: Sector | None = None
) -> MetricBundle:
    """Assemble the full metric stack at one direction."""
    y_arr, scal = _chain(sample, y, sector)
    if sector is None:
        sector = classify(sample, y_arr)
    f2 = scal.B * scal.J * scal.J
    y_cov = covariant_momentum(sample, y_arr, sector)
    g_cov = metric_tensor(sample, y_arr, sector)
    g_contra = inverse_metric(sample, y_arr, sector)
    det_ratio = determinant_ratio(sample, y_arr, sector)
    c_cov, c_contra = cartan_vector(sample, y_arr, sector)
    cc = cartan_norm(sample, y_arr, sector)
    h_ang = g_cov - np.outer(y_cov, y_cov) / f2
    if abs(sample.g) <= G_NULL_TOL:
        cartan = np.zeros((sample.dim,) * 3)
    else:
        cartan = cartan_tensor(sample, y_arr, sector)
    return MetricBundle(
        F2=f2,
        y_cov=y_cov,
        g_cov=g_cov,
        g_contra=g_contra,
        det_ratio=det_ratio,
        C_cov=c_cov,
        C_contra=c_contra,
        CC=cc,
        cartan=cartan,
        h_ang=h_ang,
    )

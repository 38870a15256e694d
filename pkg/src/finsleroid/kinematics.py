"""Direction classification and the scalar chain underlying the metric.

For a background sample and a direction ``y`` this module computes the
support scalar ``b = b_i y^i``, the augmented quadratic form
``gamma = (a_ij + b_i b_j) y^i y^j``, the transverse radius ``q = sqrt|gamma|``,
and the derived chain (half-charge roots, cone margins, angular variable,
anisotropy weight) that every closed-form tensor in the package is built from.

Supported directions fall into two open cones:

* ``time-future`` — inside the future metric cone (``gamma > 0``, both cone
  margins positive, future time orientation);
* ``space-like`` — outside the augmented cone (``gamma < 0``), extended by
  the null shell on the negative-support side, which contains the preferred
  axis ray.

Directions on the metric cone itself are tagged ``isotropic``; past cones,
the gap between the cones on the positive-support side, and the opposite
axis ray are ``unsupported``.

Key entry points
----------------
classify
    Tolerance-guarded sector and side tags (never raises on finite input).
scalars
    The full scalar chain; raises ``UnsupportedSector`` outside the two
    supported cones.
aux_vectors
    Lowered direction, transverse parts, and the angular gradient direction.
random_admissible
    Seeded rejection sampler used by the check battery and the test-suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .background import BackgroundSample
from .errors import DegenerateNu, DegenerateQ, UnsupportedSector

__all__ = [
    "Sector",
    "KinematicScalars",
    "AuxVectors",
    "classify",
    "scalars",
    "aux_vectors",
    "random_admissible",
    "GAMMA_TOL_REL",
    "MARGIN_TOL_REL",
    "Q_MIN_REL",
    "NU_MIN_REL",
]

#: Relative tolerance on ``gamma`` (degree-2 homogeneous) for cone tests.
GAMMA_TOL_REL = 1e-9
#: Relative tolerance on degree-1 homogeneous margins (``b``, cone margins).
MARGIN_TOL_REL = 1e-9
#: Below this relative transverse radius, operations dividing by ``q`` refuse.
Q_MIN_REL = 1e-10
#: Below this relative dual radius, operations dividing by ``nu`` refuse.
NU_MIN_REL = 1e-12


@dataclass(frozen=True)
class Sector:
    """Classification of a direction.

    ``tag`` is one of ``time-future``, ``space-like``, ``isotropic``,
    ``unsupported``; ``side`` is ``right`` (positive support), ``left``
    (negative support), or ``boundary``.
    """

    tag: str
    side: str

    @property
    def supported(self) -> bool:
        return self.tag in ("time-future", "space-like")

    @property
    def eps(self) -> int:
        """Sector sign: +1 in the time-future cone, -1 in the space-like cone."""
        if self.tag == "time-future":
            return 1
        if self.tag == "space-like":
            return -1
        raise UnsupportedSector(f"direction is {self.tag}; no sector sign")


@dataclass(frozen=True)
class KinematicScalars:
    """The scalar chain at one direction.

    ``b`` support scalar, ``gamma`` augmented quadratic form, ``q`` transverse
    radius, ``eps`` sector sign, ``h`` half-charge root, ``g_plus``/``g_minus``
    cone-slope roots, ``B`` cone quadratic, ``L``/``A`` shifted radii, ``f``
    angular variable, ``J`` anisotropy weight, ``chi`` normalised angular
    variable, ``nu`` dual radius, ``X`` trace weight.
    """

    b: float
    gamma: float
    q: float
    eps: int
    h: float
    g_plus: float
    g_minus: float
    B: float
    L: float
    A: float
    f: float
    J: float
    chi: float
    nu: float
    X: float


@dataclass(frozen=True)
class AuxVectors:
    """Auxiliary vectors: ``u_i = a_ij y^j``, transverse parts ``v``, and the
    angular gradient direction ``e_i`` (orthogonal to ``y``)."""

    u: np.ndarray
    v_cov: np.ndarray
    v_contra: np.ndarray
    e: np.ndarray


# --- classification ----------------------------------------------------------


def classify(sample: BackgroundSample, y: Sequence[float]) -> Sector:
    """Classify direction ``y`` at the sampled point with relative tolerances."""
    y_arr = np.asarray(y, dtype=float)
    scale = float(np.linalg.norm(y_arr))
    tol_gamma = GAMMA_TOL_REL * scale * scale
    tol_margin = MARGIN_TOL_REL * scale

    b = float(sample.b_cov @ y_arr)
    gamma = float(y_arr @ sample.a @ y_arr) + b * b

    if b > tol_margin:
        side = "right"
    elif b < -tol_margin:
        side = "left"
    else:
        side = "boundary"

    if gamma > tol_gamma:
        q = math.sqrt(gamma)
        h = sample.h_time
        g_minus = -0.5 * sample.g - h
        g_plus = -0.5 * sample.g + h
        margin_low = b - g_minus * q
        margin_high = g_plus * q - b
        if abs(margin_low) <= tol_margin or abs(margin_high) <= tol_margin:
            return Sector("isotropic", side)
        if margin_low > 0.0 and margin_high > 0.0:
            time_component = float(sample.frame[0] @ y_arr)
            if time_component > 0.0:
                return Sector("time-future", side)
            return Sector("unsupported", side)
        return Sector("unsupported", side)

    if gamma < -tol_gamma:
        return Sector("space-like", side)

    # on the augmented null shell
    if side == "left":
        return Sector("space-like", side)
    if side == "right":
        return Sector("unsupported", side)
    return Sector("isotropic", side)


# --- scalar chain ------------------------------------------------------------


def scalars(
    sample: BackgroundSample,
    y: Sequence[float],
    sector: Sector | None = None,
) -> KinematicScalars:
    """Compute the scalar chain for a supported direction.

    Raises
    ------
    UnsupportedSector
        If the direction is isotropic or unsupported.
    DegenerateQ / DegenerateNu
        Only below unit preferred-direction norm, where the trace weight
        divides by ``q`` and ``nu``.
    """
    y_arr = np.asarray(y, dtype=float)
    if sector is None:
        sector = classify(sample, y_arr)
    if not sector.supported:
        raise UnsupportedSector(
            f"direction {tuple(y_arr)} is {sector.tag} (side {sector.side})"
        )
    eps = sector.eps

    scale = float(np.linalg.norm(y_arr))
    b = float(sample.b_cov @ y_arr)
    gamma = float(y_arr @ sample.a @ y_arr) + b * b
    q = math.sqrt(abs(gamma))
    g = sample.g
    h = sample.h_time if eps > 0 else sample.h_space
    g_plus = -0.5 * g + h
    g_minus = -0.5 * g - h
    big_b = gamma - g * b * q - b * b
    big_a = b + 0.5 * g * q
    big_l = q - eps * 0.5 * g * b

    if eps > 0:
        f = 0.5 * math.log((b - g_minus * q) / (g_plus * q - b))
    else:
        f = math.atan2(h * q, big_a) - math.pi

    big_g = g / h
    j = math.exp(-0.5 * big_g * f)
    chi = f / h

    one_minus_c2 = 1.0 - sample.c * sample.c
    nu = q - eps * one_minus_c2 * g * b
    if abs(one_minus_c2) <= 1e-15:
        x_weight = 1.0 / sample.dim
    else:
        if q <= Q_MIN_REL * scale:
            raise DegenerateQ("trace weight needs a positive transverse radius below unit norm")
        if nu <= NU_MIN_REL * scale:
            raise DegenerateNu(f"dual radius nu = {nu!r} is not positive")
        x_weight = 1.0 / (sample.dim + eps * one_minus_c2 * big_b / (q * nu))

    return KinematicScalars(
        b=b,
        gamma=gamma,
        q=q,
        eps=eps,
        h=h,
        g_plus=g_plus,
        g_minus=g_minus,
        B=big_b,
        L=big_l,
        A=big_a,
        f=f,
        J=j,
        chi=chi,
        nu=nu,
        X=x_weight,
    )


def aux_vectors(
    sample: BackgroundSample,
    y: Sequence[float],
    scal: KinematicScalars,
) -> AuxVectors:
    """Auxiliary vectors for tensor assembly.

    Raises
    ------
    DegenerateQ
        On the axis ray, where the angular gradient direction divides by
        ``q^2``.
    """
    y_arr = np.asarray(y, dtype=float)
    scale = float(np.linalg.norm(y_arr))
    u = sample.a @ y_arr
    v_contra = y_arr + scal.b * sample.b_contra
    v_cov = u + scal.b * sample.b_cov
    if scal.q <= Q_MIN_REL * scale:
        raise DegenerateQ("angular gradient direction is undefined on the axis ray")
    e = -sample.b_cov + scal.eps * (scal.b / (scal.q * scal.q)) * v_cov
    return AuxVectors(u=u, v_cov=v_cov, v_contra=v_contra, e=e)


# --- sampling ----------------------------------------------------------------


def random_admissible(
    sample: BackgroundSample,
    rng: np.random.Generator,
    tag: str,
    count: int,
    *,
    margin: float = 0.0,
    max_tries: int = 100_000,
) -> np.ndarray:
    """Draw ``count`` unit-Euclidean-norm directions classified as ``tag``.

    ``margin`` additionally requires the direction to sit comfortably inside
    its cone (all relevant homogeneous margins exceed ``margin`` at unit
    norm), which keeps finite-difference probes from crossing sector walls.
    """
    if tag not in ("time-future", "space-like"):
        raise ValueError(f"can only sample supported sectors, not {tag!r}")
    out = np.empty((count, sample.dim))
    found = 0
    for _ in range(max_tries):
        if found == count:
            break
        y = rng.standard_normal(sample.dim)
        norm = float(np.linalg.norm(y))
        if norm < 1e-12:
            continue
        y /= norm
        sector = classify(sample, y)
        if sector.tag != tag:
            continue
        if margin > 0.0:
            b = float(sample.b_cov @ y)
            gamma = float(y @ sample.a @ y) + b * b
            if tag == "time-future":
                q = math.sqrt(max(gamma, 0.0))
                h = sample.h_time
                if gamma <= margin * margin:
                    continue
                if b - (-0.5 * sample.g - h) * q <= margin:
                    continue
                if (-0.5 * sample.g + h) * q - b <= margin:
                    continue
            else:
                if gamma >= -margin * margin:
                    continue
        out[found] = y
        found += 1
    if found < count:
        raise RuntimeError(
            f"rejection sampling exhausted {max_tries} tries with {found}/{count} accepted"
        )
    return out

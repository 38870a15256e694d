"""Independent high-precision oracle for the frozen reference constants.

Everything in this module is recomputed from first principles with mpmath at
50 significant digits and **no imports from the package under test**. The
``FROZEN`` literals were transcribed from this oracle's output; ``_selfcheck``
re-derives them at import time and fails loudly on any mismatch, so a stale
or mistyped literal cannot silently gate the suite.

The reference background is four-dimensional: base metric
``diag(1, -1, -1, -1)``, covariant preferred direction ``(0, 0, 0, 1)``
(unit spatial norm), anisotropy charge ``0.6``.
"""

from __future__ import annotations

import mpmath as mp

mp.mp.dps = 50

G = mp.mpf("0.6")
DIM = 4

H_TIME = mp.sqrt(1 + G * G / 4)
H_SPACE = mp.sqrt(1 - G * G / 4)

A_DIAG = (mp.mpf(1), mp.mpf(-1), mp.mpf(-1), mp.mpf(-1))
B_COV = (mp.mpf(0), mp.mpf(0), mp.mpf(0), mp.mpf(1))
B_CONTRA = (mp.mpf(0), mp.mpf(0), mp.mpf(0), mp.mpf(-1))


def _dot_a(u, v):
    return mp.fsum(A_DIAG[i] * u[i] * v[i] for i in range(DIM))


def chain(y):
    """Full scalar chain for a direction on the reference background.

    Returns a dict with the axis projection ``b``, transverse radius ``q``,
    sector sign ``eps``, per-sector constants, the angular variable ``f``,
    scale ``J``, normalised angle ``chi``, quadratic ``B``, squared norm
    ``F2``, and the lowered direction ``y_cov``.
    """
    y = tuple(mp.mpf(v) for v in y)
    b = mp.fsum(B_COV[i] * y[i] for i in range(DIM))
    gamma = _dot_a(y, y) + b * b
    eps = 1 if gamma > 0 else -1
    if gamma == 0:
        eps = -1 if b < 0 else 1
    q = mp.sqrt(abs(gamma))
    h = H_TIME if eps > 0 else H_SPACE
    g_plus = -G / 2 + h
    g_minus = -G / 2 - h
    A = b + (G / 2) * q
    B = gamma - G * b * q - b * b
    if eps > 0:
        f = mp.log((b - g_minus * q) / (g_plus * q - b)) / 2
    else:
        f = mp.atan2(h * q, A) - mp.pi
    g_param = G / h
    J = mp.e ** (-g_param * f / 2)
    chi = f / h
    F2 = B * J * J
    u = tuple(A_DIAG[i] * y[i] for i in range(DIM))
    y_cov = tuple((u[i] - G * q * B_COV[i]) * J * J for i in range(DIM))
    return {
        "b": b, "q": q, "eps": eps, "h": h, "A": A, "B": B,
        "f": f, "J": J, "chi": chi, "F2": F2, "y_cov": y_cov,
    }


def dual_chain(p):
    """Scalar chain for a covector (unit preferred-direction norm)."""
    p = tuple(mp.mpf(v) for v in p)
    b_hat = mp.fsum(B_CONTRA[i] * p[i] for i in range(DIM))
    gamma_hat = _dot_a(p, p) + b_hat * b_hat  # a is its own inverse here
    eps = 1 if gamma_hat > 0 else -1
    q_hat = mp.sqrt(abs(gamma_hat))
    h = H_TIME if eps > 0 else H_SPACE
    g_plus = -G / 2 + h
    g_minus = -G / 2 - h
    if eps > 0:
        f_hat = mp.log((b_hat + g_plus * q_hat) / (-g_minus * q_hat - b_hat)) / 2
    else:
        f_hat = mp.atan2(h * q_hat, b_hat - (G / 2) * q_hat) - mp.pi
    g_param = G / h
    J_hat = mp.e ** (g_param * f_hat / 2)
    B_hat = gamma_hat + G * b_hat * q_hat - b_hat * b_hat
    return {"b_hat": b_hat, "q_hat": q_hat, "f_hat": f_hat, "J_hat": J_hat,
            "B_hat": B_hat, "H2": B_hat * J_hat * J_hat, "eps": eps, "h": h}


def angle_between(y1, y2):
    """Anisotropic angle between two same-sector reference directions."""
    k1, k2 = chain(y1), chain(y2)
    assert k1["eps"] == k2["eps"]
    r12 = _dot_a(y1, y2) + k1["b"] * k2["b"]
    h = k1["h"]
    if k1["eps"] > 0:
        tau = (h * h * r12 - k1["A"] * k2["A"]) / mp.sqrt(k1["B"] * k2["B"])
        return mp.acosh(tau) / h
    tau = (k1["A"] * k2["A"] - h * h * r12) / mp.sqrt(abs(k1["B"]) * abs(k2["B"]))
    return mp.acos(tau) / h


E0 = (1, 0, 0, 0)
EX = (0, 1, 0, 0)
AXIS = (0, 0, 0, -1)

_K0 = chain(E0)
_KX = chain(EX)

#: Frozen float literals (17 significant digits), one per reference constant.
FROZEN = {
    "h_time": 1.0440306508910549,
    "h_space": 0.95393920141694566,
    "g_plus_time": 0.74403065089105495,
    "g_minus_time": -1.3440306508910549,
    "g_param_time": 0.57469577113269084,
    "g_param_space": 0.62897090203315098,
    "f_e0": 0.29567304756342249,
    "J_e0": 0.91854808408203457,
    "F2_e0": 0.84373058277077639,
    "y_cov_e0_0": 0.84373058277077639,
    "y_cov_e0_3": -0.50623834966246584,
    "det_ratio_e0": 0.50677498002563256,
    "CC_e0": -1.7067059431117209,
    "f_ex": -1.8754889808102941,
    "chi_ex": -1.9660466600224762,
    "F2_ex": -3.2531637878661512,
    "alpha_ex_axis": 1.9660466600224762,
    "S2_e0": 0.83744153343971577,
    "H2_unit_cov": 1.0,
    "R0_time_axis": 0.95782628522115142,
    "R3_time_axis": -0.28734788556634542,
    "curvature_time": -1.09,
    "curvature_space": 0.91,
    "cc_product": 1.44,
}


def _selfcheck():
    computed = {
        "h_time": H_TIME,
        "h_space": H_SPACE,
        "g_plus_time": -G / 2 + H_TIME,
        "g_minus_time": -G / 2 - H_TIME,
        "g_param_time": G / H_TIME,
        "g_param_space": G / H_SPACE,
        "f_e0": _K0["f"],
        "J_e0": _K0["J"],
        "F2_e0": _K0["F2"],
        "y_cov_e0_0": _K0["y_cov"][0],
        "y_cov_e0_3": _K0["y_cov"][3],
        "det_ratio_e0": _K0["J"] ** (2 * DIM),
        # X = 1/DIM at unit norm: C_h C^h = -eps (G^2/4) (DIM^2/F2) (DIM + 1 - DIM)
        "CC_e0": -(G * G / 4) * DIM * DIM / _K0["F2"],
        "f_ex": _KX["f"],
        "chi_ex": _KX["chi"],
        "F2_ex": _KX["F2"],
        "alpha_ex_axis": angle_between(EX, AXIS),
        "S2_e0": _K0["F2"] ** H_TIME,
        "H2_unit_cov": dual_chain((1 / H_TIME, 0, 0, -G / (2 * H_TIME)))["H2"],
        # chart-origin direction (z0 = 1, eta = phi = chi = 0): the time
        # profiles at chi = 0 give (1/h, 0, 0, -(g/h)/2)
        "R0_time_axis": 1 / H_TIME,
        "R3_time_axis": -G / (2 * H_TIME),
        "curvature_time": -(1 + G * G / 4),
        "curvature_space": 1 - G * G / 4,
        "cc_product": DIM * DIM * G * G / 4,
    }
    assert computed.keys() == FROZEN.keys()
    for name, value in computed.items():
        frozen = mp.mpf(repr(FROZEN[name]))
        scale = max(abs(value), mp.mpf(1))
        if abs(value - frozen) / scale > mp.mpf("1e-12"):
            raise AssertionError(
                f"frozen literal {name} = {FROZEN[name]!r} disagrees with the "
                f"50-digit oracle value {mp.nstr(value, 20)}"
            )


_selfcheck()

REF = FROZEN

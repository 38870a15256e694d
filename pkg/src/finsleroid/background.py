"""Background structure: base metric, preferred direction, anisotropy charge.

A background is a triple of position-dependent fields on an ``N``-dimensional
chart: a Lorentz-signature base metric ``a_ij(x)`` (signature ``+ - ... -``),
a covariant preferred direction ``b_i(x)`` whose norm ``c(x)`` must lie in
``(0, 1]``, and a scalar anisotropy charge ``g(x)`` with ``|g| < 2``.

Key entry points
----------------
parse_config / load_config
    Read the line-oriented ``key = value`` configuration format (keys ``dim``,
    ``a.<i>.<j>``, ``b.<i>``, ``g``; values are expressions in ``x0..x{N-1}``).
parse_config reports syntax problems with the 1-based column at which the
    offending value expression starts.
sample
    Evaluate every field and its exact symbolic first derivatives at a point,
    assemble connection coefficients, the covariant derivative of the
    preferred direction, and an adapted orthonormal frame whose last leg is
    aligned with the preferred direction and whose time leg fixes the future
    orientation.

Design choices
--------------
Symbolic differentiation of the configured expressions is the normative
derivative route; the finite-difference layer only cross-checks it. The
adapted frame is built by Gram-Schmidt in a fixed deterministic order (last
leg first, then the time leg, then the space legs) with each leg's sign pinned
so results are reproducible across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ConfigDimensionError,
    ConfigDuplicateError,
    ConfigSyntaxError,
    ConfigValueError,
    DomainError,
)
from .expressions import FieldExpression

__all__ = ["BackgroundField", "BackgroundSample", "parse_config", "load_config"]

# Degenerate-direction guard when normalising Gram-Schmidt residuals.
_FRAME_SEED_TOL = 1e-10


# --- field container ---------------------------------------------------------


@dataclass(frozen=True)
class BackgroundField:
    """Symbolic background fields over an ``dim``-dimensional chart.

    Attributes
    ----------
    dim : int
        Chart dimension ``N >= 2``.
    a : tuple[tuple[FieldExpression, ...], ...]
        Symmetric base-metric entries ``a[i][j]``.
    b_cov : tuple[FieldExpression, ...]
        Covariant preferred-direction components.
    g : FieldExpression
        Anisotropy charge.
    """

    dim: int
    a: tuple[tuple[FieldExpression, ...], ...]
    b_cov: tuple[FieldExpression, ...]
    g: FieldExpression

    @classmethod
    def constant(
        cls,
        a: Sequence[Sequence[float]] | Sequence[float],
        b_cov: Sequence[float],
        g: float,
    ) -> "BackgroundField":
        """Build a position-independent background from numbers.

        ``a`` may be a full symmetric matrix or just its diagonal.
        """
        a_arr = np.asarray(a, dtype=float)
        if a_arr.ndim == 1:
            a_arr = np.diag(a_arr)
        dim = a_arr.shape[0]
        if a_arr.shape != (dim, dim) or not np.array_equal(a_arr, a_arr.T):
            raise ConfigDimensionError("constant background needs a symmetric square matrix")
        if len(b_cov) != dim:
            raise ConfigDimensionError("preferred-direction length does not match dim")
        rows = tuple(
            tuple(FieldExpression.constant(a_arr[i, j]) for j in range(dim)) for i in range(dim)
        )
        field = cls(
            dim=dim,
            a=rows,
            b_cov=tuple(FieldExpression.constant(v) for v in b_cov),
            g=FieldExpression.constant(g),
        )
        _validate_constant_parts(field)
        return field

    @property
    def is_constant(self) -> bool:
        exprs = [e for row in self.a for e in row] + list(self.b_cov) + [self.g]
        return all(e.is_constant for e in exprs)

    # cached symbolic first-derivative tables -------------------------------

    @cached_property
    def _da(self) -> tuple[tuple[tuple[FieldExpression, ...], ...], ...]:
        """``_da[k][i][j]`` is the exact derivative of ``a[i][j]`` along ``x{k}``."""
        return tuple(
            tuple(tuple(self.a[i][j].differentiate(k) for j in range(self.dim)) for i in range(self.dim))
            for k in range(self.dim)
        )

    @cached_property
    def _db(self) -> tuple[tuple[FieldExpression, ...], ...]:
        """``_db[k][j]`` is the exact derivative of ``b_cov[j]`` along ``x{k}``."""
        return tuple(
            tuple(self.b_cov[j].differentiate(k) for j in range(self.dim))
            for k in range(self.dim)
        )

    @cached_property
    def _dg(self) -> tuple[FieldExpression, ...]:
        return tuple(self.g.differentiate(k) for k in range(self.dim))


# --- sampled values ----------------------------------------------------------


@dataclass(frozen=True)
class BackgroundSample:
    """All background data evaluated at one chart point.

    Index conventions: ``da[k, i, j]`` is the ``x^k`` derivative of ``a_ij``;
    ``db[k, j]`` of ``b_j``; ``christoffel[k, i, j]`` carries the upper index
    first; ``nabla_b[i, j]`` is the covariant derivative of ``b_j`` along
    ``x^i``. ``frame[p, i]`` maps vectors to frame components ``R^p``;
    ``frame_inv[i, p]`` maps back, with ``frame_inv = inv(frame)``.
    """

    x: np.ndarray
    a: np.ndarray
    a_inv: np.ndarray
    b_cov: np.ndarray
    b_contra: np.ndarray
    c: float
    g: float
    h_time: float
    h_space: float
    da: np.ndarray
    db: np.ndarray
    dg: np.ndarray
    christoffel: np.ndarray
    nabla_b: np.ndarray
    frame: np.ndarray
    frame_inv: np.ndarray

    @property
    def dim(self) -> int:
        return self.x.shape[0]

    @property
    def c_is_unit(self) -> bool:
        return abs(self.c - 1.0) <= 1e-9


# --- configuration parsing ---------------------------------------------------


def _parse_index(part: str, key: str, lineno: int) -> int:
    if not part.isdigit():
        raise ConfigSyntaxError(f"line {lineno}: malformed key {key!r}")
    return int(part)


def parse_config(text: str) -> BackgroundField:
    """Parse configuration text into a :class:`BackgroundField`.

    Raises
    ------
    ConfigSyntaxError
        Malformed lines or value expressions; value-expression problems are
        reported as ``syntax error at column <n>`` where ``<n>`` is the
        1-based column at which the value expression starts.
    ConfigDimensionError
        Missing/invalid ``dim``, out-of-range indices, or a value expression
        using coordinates beyond ``x{dim-1}``.
    ConfigDuplicateError
        A key (after symmetry canonicalisation for ``a``) assigned twice.
    """
    dim: int | None = None
    entries: dict[str, tuple[int, str, FieldExpression]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            raise ConfigSyntaxError(f"line {lineno}: syntax error at column 1: expected 'key = value'")
        key_part, value_part = line.split("=", 1)
        key = key_part.strip()
        if not key:
            raise ConfigSyntaxError(f"line {lineno}: syntax error at column 1: missing key")
        # 1-based column where the value expression begins
        leading = len(value_part) - len(value_part.lstrip())
        value_col = len(key_part) + 1 + leading + 1
        value_text = value_part.strip()
        if not value_text:
            raise ConfigSyntaxError(
                f"line {lineno}: syntax error at column {value_col}: missing value"
            )
        if key in entries or (key == "dim" and dim is not None):
            raise ConfigDuplicateError(f"line {lineno}: duplicate key {key!r}")

        if key == "dim":
            try:
                dim_value = int(value_text)
            except ValueError:
                raise ConfigSyntaxError(
                    f"line {lineno}: syntax error at column {value_col}: dim must be an integer"
                ) from None
            if dim_value < 2:
                raise ConfigDimensionError(f"line {lineno}: dim must be at least 2")
            dim = dim_value
            continue

        try:
            expr = FieldExpression.parse(value_text)
        except ConfigSyntaxError as exc:
            raise ConfigSyntaxError(
                f"line {lineno}: syntax error at column {value_col}: {exc}"
            ) from None

        parts = key.split(".")
        if parts[0] == "a" and len(parts) == 3:
            i = _parse_index(parts[1], key, lineno)
            j = _parse_index(parts[2], key, lineno)
            canonical = f"a.{min(i, j)}.{max(i, j)}"
            if canonical in entries:
                raise ConfigDuplicateError(
                    f"line {lineno}: duplicate key {key!r} (symmetric partner already set)"
                )
            entries[canonical] = (lineno, key, expr)
        elif parts[0] == "b" and len(parts) == 2:
            i = _parse_index(parts[1], key, lineno)
            if f"b.{i}" in entries:
                raise ConfigDuplicateError(f"line {lineno}: duplicate key {key!r}")
            entries[f"b.{i}"] = (lineno, key, expr)
        elif key == "g":
            entries["g"] = (lineno, key, expr)
        else:
            raise ConfigSyntaxError(f"line {lineno}: unknown key {key!r}")

    if dim is None:
        raise ConfigDimensionError("dim is required")

    zero = FieldExpression.constant(0.0)
    a_rows: list[list[FieldExpression]] = [[zero] * dim for _ in range(dim)]
    b_rows: list[FieldExpression] = [zero] * dim
    g_expr = zero

    for canonical, (lineno, key, expr) in entries.items():
        parts = canonical.split(".")
        indices = [int(p) for p in parts[1:]]
        if any(idx >= dim for idx in indices):
            raise ConfigDimensionError(
                f"line {lineno}: index in {key!r} out of range for dim = {dim}"
            )
        if expr.max_var_index >= dim:
            raise ConfigDimensionError(
                f"line {lineno}: value for {key!r} uses x{expr.max_var_index} "
                f"but dim = {dim}"
            )
        if parts[0] == "a":
            i, j = indices
            a_rows[i][j] = expr
            a_rows[j][i] = expr
        elif parts[0] == "b":
            b_rows[indices[0]] = expr
        else:
            g_expr = expr

    field = BackgroundField(
        dim=dim,
        a=tuple(tuple(row) for row in a_rows),
        b_cov=tuple(b_rows),
        g=g_expr,
    )
    _validate_constant_parts(field)
    return field


def _validate_constant_parts(field: BackgroundField) -> None:
    """Reject invalid position-independent values at load time.

    Position-dependent entries can only be judged where they are evaluated;
    those are checked when the background is sampled.
    """
    dim = field.dim
    origin = (0.0,) * dim
    a_const = all(e.is_constant for row in field.a for e in row)
    if a_const:
        a = np.array(
            [[field.a[i][j].compiled(origin) for j in range(dim)] for i in range(dim)]
        )
        eigenvalues = np.linalg.eigvalsh(a)
        positive = int(np.sum(eigenvalues > 0.0))
        negative = int(np.sum(eigenvalues < 0.0))
        if positive != 1 or negative != dim - 1:
            raise ConfigValueError(
                "base metric must have Lorentzian signature "
                f"(one positive and {dim - 1} negative eigenvalues; "
                f"got {positive} positive, {negative} negative)"
            )
        if all(e.is_constant for e in field.b_cov):
            b_cov = np.array([field.b_cov[i].compiled(origin) for i in range(dim)])
            c_sq = float(-(b_cov @ np.linalg.solve(a, b_cov)))
            if c_sq <= 1e-15:
                raise ConfigValueError(
                    f"preferred direction has non-positive norm squared {c_sq!r}"
                )
            if c_sq > 1.0 + 1e-12:
                raise ConfigValueError(
                    f"preferred direction norm exceeds 1 (c^2 = {c_sq!r})"
                )
    if field.g.is_constant:
        g = float(field.g.compiled(origin))
        if not abs(g) < 2.0:
            raise ConfigValueError(f"anisotropy charge g = {g!r} outside (-2, 2)")


def load_config(path: str | Path) -> BackgroundField:
    """Read and parse a configuration file."""
    return parse_config(Path(path).read_text(encoding="utf-8"))


# --- sampling ----------------------------------------------------------------


def _first_significant_sign(w: np.ndarray) -> float:
    scale = float(np.linalg.norm(w))
    for value in w:
        if abs(value) > 1e-12 * scale:
            return 1.0 if value > 0 else -1.0
    return 1.0


def _build_frame(a: np.ndarray, b_contra: np.ndarray, c: float) -> np.ndarray:
    """Return ``legs[p, i]`` with ``a(leg_p, leg_q) = diag(+1, -1, ..., -1)[pq]``.

    The last leg is ``-b_contra/c`` (so the preferred direction has frame
    components ``(0, ..., 0, -c)``); the time leg (index 0) and space legs are
    Gram-Schmidt residuals of coordinate-axis seeds taken in order, with
    eigenvector seeds as a deterministic fallback, and each leg's sign fixed
    so its first significant component is positive.
    """
    dim = a.shape[0]
    legs = np.zeros((dim, dim))
    signs = np.zeros(dim)
    legs[dim - 1] = -b_contra / c
    signs[dim - 1] = -1.0
    built = [dim - 1]

    eigvals, eigvecs = np.linalg.eigh(a)
    # seeds: coordinate axes first, then eigenvectors by descending eigenvalue
    seeds = [np.eye(dim)[k] for k in range(dim)]
    seeds += [eigvecs[:, k] for k in np.argsort(eigvals)[::-1]]

    def residual(seed: np.ndarray) -> np.ndarray:
        w = seed.astype(float).copy()
        for p in built:
            w -= signs[p] * (w @ a @ legs[p]) * legs[p]
        return w

    # time leg: positive base-metric norm
    for target, wanted_sign in [(0, 1.0)] + [(p, -1.0) for p in range(1, dim - 1)]:
        for seed in seeds:
            w = residual(seed)
            norm2 = float(w @ a @ w)
            scale = float(w @ w)
            if scale < 1e-20:
                continue
            if wanted_sign * norm2 > _FRAME_SEED_TOL * scale:
                w = w / np.sqrt(wanted_sign * norm2)
                legs[target] = _first_significant_sign(w) * w
                signs[target] = wanted_sign
                built.append(target)
                break
        else:
            kind = "time" if wanted_sign > 0 else "space"
            raise DomainError(
                f"cannot build an adapted frame: no {kind} leg found "
                "(background metric is not Lorentzian here)"
            )
    return legs


def sample(field: BackgroundField, x: Sequence[float]) -> BackgroundSample:
    """Evaluate the background and its derived structure at chart point ``x``.

    Raises
    ------
    DomainError
        Singular or non-Lorentzian base metric, preferred-direction norm
        outside ``(0, 1]``, or charge outside ``(-2, 2)``.
    """
    x_arr = np.asarray(x, dtype=float)
    dim = field.dim
    if x_arr.shape != (dim,):
        raise ConfigDimensionError(f"expected {dim} coordinates, got shape {x_arr.shape}")
    coords = tuple(float(v) for v in x_arr)

    a = np.array([[field.a[i][j].compiled(coords) for j in range(dim)] for i in range(dim)])
    b_cov = np.array([field.b_cov[i].compiled(coords) for i in range(dim)])
    g = float(field.g.compiled(coords))

    da = np.array(
        [
            [[field._da[k][i][j].compiled(coords) for j in range(dim)] for i in range(dim)]
            for k in range(dim)
        ]
    )
    db = np.array([[field._db[k][j].compiled(coords) for j in range(dim)] for k in range(dim)])
    dg = np.array([field._dg[k].compiled(coords) for k in range(dim)])

    try:
        a_inv = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"base metric is singular at x = {coords}") from exc
    a_inv = 0.5 * (a_inv + a_inv.T)

    b_contra = a_inv @ b_cov
    c_sq = float(-(b_cov @ b_contra))
    if c_sq <= 1e-15:
        raise DomainError(
            f"preferred direction has non-positive norm squared {c_sq!r} at x = {coords}"
        )
    if c_sq > 1.0 + 1e-12:
        raise DomainError(
            f"preferred direction norm exceeds 1 (c^2 = {c_sq!r}) at x = {coords}"
        )
    c = min(float(np.sqrt(c_sq)), 1.0)

    if not abs(g) < 2.0:
        raise DomainError(f"anisotropy charge g = {g!r} outside (-2, 2) at x = {coords}")
    h_time = float(np.sqrt(1.0 + 0.25 * g * g))
    h_space = float(np.sqrt(1.0 - 0.25 * g * g))

    # connection coefficients of the base metric, upper index first
    christoffel = 0.5 * np.einsum("kn,jni->kij", a_inv, da)
    christoffel = christoffel + 0.5 * np.einsum("kn,inj->kij", a_inv, da)
    christoffel -= 0.5 * np.einsum("kn,nij->kij", a_inv, da)

    nabla_b = db - np.einsum("k,kij->ij", b_cov, christoffel)

    legs = _build_frame(a, b_contra, c)
    frame_inv = legs.T.copy()  # frame_inv[i, p] = component i of leg p
    frame = np.linalg.inv(frame_inv)

    arrays = dict(
        x=x_arr.copy(),
        a=a,
        a_inv=a_inv,
        b_cov=b_cov,
        b_contra=b_contra,
        da=da,
        db=db,
        dg=dg,
        christoffel=christoffel,
        nabla_b=nabla_b,
        frame=frame,
        frame_inv=frame_inv,
    )
    for arr in arrays.values():
        arr.flags.writeable = False

    return BackgroundSample(
        c=c,
        g=g,
        h_time=h_time,
        h_space=h_space,
        **arrays,
    )

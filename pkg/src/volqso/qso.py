"""Quadratic stochastic operators and their Volterra form.

A general operator is given by a heredity tensor p[i][j][k] (probability that
parents of types i,j produce type k); the Volterra subclass (offspring always
repeats a parent) is equivalently a skew-symmetric matrix A with entries in
[-1, 1], acting as x_k -> x_k * (1 + (Ax)_k).

The tensor <-> matrix conversion here is pinned by the tautology
apply_qso(to_tensor(A), x) == apply_volterra(A, x); expanding the quadratic
form gives a[k][i] = p[i][k][k] + p[k][i][k] - 1, and that is what
to_skew_matrix implements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateFactor,
    DimensionMismatch,
    NonFiniteInput,
    NotVolterra,
    ValidationError,
    WrongDimension,
)
from .simplex import LogSimplexPoint, SimplexPoint, _renormalized

TENSOR_SUM_TOL = 1e-12   # |sum_k p[i][j][k] - 1|
VOLTERRA_TOL = 1e-15     # mass allowed outside parental types
FACTOR_CLAMP = 1e-12     # rounding dust allowed below 0 in a step factor

_INF = float("inf")


@dataclass(frozen=True)
class SkewMatrix:
    """Skew-symmetric interaction matrix with entries in [-1, 1].

    Skew-symmetry is required exactly (a[i][j] == -a[j][i] as floats); use
    skewize() to project a nearly-skew array first.
    """

    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        m = len(rows)
        if not 2 <= m <= 4:
            raise WrongDimension(f"m={m} outside supported range 2..4")
        for row in rows:
            if len(row) != m:
                raise WrongDimension("matrix is not square")
        for i in range(m):
            for j in range(m):
                v = rows[i][j]
                if not math.isfinite(v):
                    raise NonFiniteInput(f"entry ({i + 1},{j + 1}) is {v}")
                if abs(v) > 1.0:
                    raise ValidationError(
                        f"entry ({i + 1},{j + 1}) = {v} outside [-1, 1]")
                if v != -rows[j][i]:
                    raise ValidationError(
                        f"entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) "
                        "are not exact negatives")

    @property
    def m(self) -> int:
        return len(self.rows)

    @classmethod
    def zero(cls, m: int) -> "SkewMatrix":
        return cls(tuple(tuple(0.0 for _ in range(m)) for _ in range(m)))

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)


def skewize(arr) -> SkewMatrix:
    """Project a nearly-skew square array onto exact skew-symmetry,
    (a - a^T)/2, clamping rounding spill just outside [-1, 1]."""
    a = np.asarray(arr, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise WrongDimension("expected a square matrix")
    s = (a - a.T) / 2.0
    s = np.clip(s, -1.0, 1.0)
    rows = tuple(tuple(float(v) for v in row) for row in s)
    # rebuild exact negation: keep the upper triangle, mirror it
    m = len(rows)
    out = [[0.0] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            out[i][j] = rows[i][j]
            out[j][i] = -rows[i][j]
    return SkewMatrix(tuple(tuple(r) for r in out))


@dataclass(frozen=True)
class HeredityTensor:
    """Coefficients p[i][j][k] of a quadratic stochastic operator:
    nonnegative, sum_k p[i][j][k] == 1 for every parent pair (i,j)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 3 or len(set(p.shape)) != 1:
            raise WrongDimension(f"tensor shape {p.shape} is not (m,m,m)")
        m = p.shape[0]
        if not 2 <= m <= 4:
            raise WrongDimension(f"m={m} outside supported range 2..4")
        if not np.all(np.isfinite(p)):
            raise NonFiniteInput("non-finite tensor entry")
        if np.any(p < 0.0):
            raise ValidationError("negative tensor entry")
        sums = p.sum(axis=2)
        if np.max(np.abs(sums - 1.0)) > TENSOR_SUM_TOL:
            raise ValidationError("tensor rows are not stochastic in k")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def m(self) -> int:
        return self.p.shape[0]

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.p, self.p.transpose(1, 0, 2)))


def symmetrize(t: HeredityTensor) -> HeredityTensor:
    """Average over parent order: q[i][j][k] = (p[i][j][k] + p[j][i][k]) / 2.
    The induced operator is unchanged (the quadratic form only sees the
    symmetric part)."""
    return HeredityTensor((t.p + t.p.transpose(1, 0, 2)) / 2.0)


def apply_qso(t: HeredityTensor, x: SimplexPoint) -> SimplexPoint:
    """One generation: (Vx)_k = sum_ij p[i][j][k] x_i x_j, renormalized."""
    if t.m != x.m:
        raise DimensionMismatch(f"tensor m={t.m}, point m={x.m}")
    xs = np.array(x.coords)
    image = np.einsum("ijk,i,j->k", t.p, xs, xs)
    return SimplexPoint(_renormalized([float(v) for v in image]))


def is_volterra(t: HeredityTensor, tol: float = VOLTERRA_TOL) -> bool:
    """True iff offspring mass sits on the parental types: p[i][j][k] <= tol
    whenever k is neither i nor j."""
    i_, j_, k_ = np.indices(t.p.shape)
    mask = (k_ != i_) & (k_ != j_)
    return bool(np.all(t.p[mask] <= tol))


def to_skew_matrix(t: HeredityTensor) -> SkewMatrix:
    """Skew matrix of a Volterra tensor: a[k][i] = p[i][k][k] + p[k][i][k] - 1.

    The exact-skewness projection absorbs up to tensor-tolerance rounding."""
    if not is_volterra(t):
        raise NotVolterra("tensor has offspring mass outside parental types")
    m = t.m
    a = np.zeros((m, m))
    for k in range(m):
        for i in range(m):
            if i != k:
                a[k][i] = t.p[i][k][k] + t.p[k][i][k] - 1.0
    return skewize(a)


def to_tensor(a: SkewMatrix) -> HeredityTensor:
    """Volterra tensor of a skew matrix: p[i][i][i] = 1 and, for i != j,
    p[i][j][i] = (1 + a[i][j]) / 2, p[i][j][j] = (1 + a[j][i]) / 2."""
    m = a.m
    p = np.zeros((m, m, m))
    for i in range(m):
        p[i][i][i] = 1.0
        for j in range(m):
            if i != j:
                p[i][j][i] = (1.0 + a.rows[i][j]) / 2.0
                p[i][j][j] = (1.0 + a.rows[j][i]) / 2.0
    return HeredityTensor(p)


def _dot_compensated(row, xs) -> float:
    """Neumaier dot product of two short vectors."""
    s = 0.0
    c = 0.0
    for a, x in zip(row, xs):
        t = a * x
        tmp = s + t
        if abs(s) >= abs(t):
            c += (s - tmp) + t
        else:
            c += (t - tmp) + s
        s = tmp
    return s + c


def raw_volterra_image(a: SkewMatrix, x: SimplexPoint) -> list[float]:
    """Image before renormalization; its sum is 1 + x^T A x = 1 exactly in
    real arithmetic (skew-symmetry), so the float sum measures rounding."""
    if a.m != x.m:
        raise DimensionMismatch(f"matrix m={a.m}, point m={x.m}")
    out = []
    for k in range(a.m):
        f = 1.0 + _dot_compensated(a.rows[k], x.coords)
        if f < 0.0:
            if f < -FACTOR_CLAMP:
                raise DegenerateFactor(
                    f"step factor {f} at slot {k + 1}; input is corrupted")
            f = 0.0
        out.append(x.coords[k] * f)
    return out


def apply_volterra(a: SkewMatrix, x: SimplexPoint) -> SimplexPoint:
    """One step of x_k -> x_k (1 + (Ax)_k), renormalized.  Zero coordinates
    stay exactly zero (faces are invariant)."""
    return SimplexPoint(_renormalized(raw_volterra_image(a, x)))


# The log-space step rewrites the factor 1 + (Ax)_k as
# sum_i (1 + a[k][i]) x_i: a sum of nonnegative terms (|a| <= 1), immune to
# the cancellation that makes 1 + dot(...) collapse to 0 when the true factor
# is tiny.  When even that sum underflows, the same sum is taken in the log
# domain.  _kernel_py/_kernel.pyx repeat this step verbatim; keep in sync.
_UNDERFLOW_GUARD = 1e-280


def _log_step(weights, logw, logx, m):
    """One Volterra step on log coordinates; returns (new_logs, drift)."""
    xs = [math.exp(v) for v in logx]
    new = [0.0] * m
    for k in range(m):
        wk = weights[k]
        s = 0.0
        c = 0.0
        for i in range(m):
            t = wk[i] * xs[i]
            tmp = s + t
            if abs(s) >= abs(t):
                c += (s - tmp) + t
            else:
                c += (t - tmp) + s
            s = tmp
        g = s + c
        if g < _UNDERFLOW_GUARD:
            lk = logw[k]
            mx = -_INF
            for i in range(m):
                t = lk[i] + logx[i]
                if t > mx:
                    mx = t
            if mx == -_INF:
                lg = -_INF
            else:
                acc = 0.0
                for i in range(m):
                    t = lk[i] + logx[i]
                    if t > -_INF:
                        acc += math.exp(t - mx)
                lg = mx + math.log(acc)
        else:
            lg = math.log(g)
        new[k] = logx[k] + lg
    mx = new[0]
    for v in new[1:]:
        if v > mx:
            mx = v
    if mx == -_INF or math.isnan(mx):
        raise DegenerateFactor("all coordinates vanished in one step")
    acc = 0.0
    for v in new:
        acc += math.exp(v - mx)
    drift = mx + math.log(acc)
    return [v - drift for v in new], drift


def step_weights(a: SkewMatrix):
    """(1 + a[k][i]) table and its logs (-inf where the weight is 0)."""
    weights = tuple(tuple(1.0 + v for v in row) for row in a.rows)
    logw = tuple(
        tuple(math.log(w) if w > 0.0 else -_INF for w in row)
        for row in weights
    )
    return weights, logw


def apply_volterra_log(a: SkewMatrix, x: LogSimplexPoint) -> LogSimplexPoint:
    """One Volterra step on log coordinates; agrees with apply_volterra to
    relative 1e-10 whenever all coordinates are above 1e-100, and keeps exact
    zeros (-inf) exactly."""
    if a.m != x.m:
        raise DimensionMismatch(f"matrix m={a.m}, point m={x.m}")
    weights, logw = step_weights(a)
    new, _ = _log_step(weights, logw, x.log_coords, a.m)
    return LogSimplexPoint(tuple(new))


def skew3(a: float, b: float, c: float) -> SkewMatrix:
    """Three-species interaction matrix [[0, a, -b], [-a, 0, c], [b, -c, 0]]."""
    for v in (a, b, c):
        if not math.isfinite(v) or abs(v) > 1.0:
            raise ValidationError(f"parameter {v} outside [-1, 1]")
    return SkewMatrix(((0.0, a, -b), (-a, 0.0, c), (b, -c, 0.0)))


def volterra3(a: float, b: float, c: float, x: SimplexPoint) -> SimplexPoint:
    """Three-species step (x, y, z) -> (x(1+ay-bz), y(1-ax+cz), z(1+bx-cy)).

    This is the step map of skew3(a, b, c); the parameter placement is forced
    by skew-symmetry of the interaction matrix.
    """
    if x.m != 3:
        raise WrongDimension(f"volterra3 needs m=3, got m={x.m}")
    return apply_volterra(skew3(a, b, c), x)

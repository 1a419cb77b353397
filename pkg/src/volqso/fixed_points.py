"""Fixed points of a Volterra operator and their linearized type.

Vertices are always fixed.  A size-3 face carries an interior fixed point
exactly when the kernel direction (w, -v, u) of its restricted skew matrix
[[0,u,v],[-u,0,w],[-v,-w,0]] has one strict sign; an edge consists of fixed
points exactly when its skew entry vanishes (then the whole edge is fixed,
reported as a degenerate continuum with its midpoint as representative); for
m=4 an interior fixed point requires a singular matrix (Pfaffian ~ 0), again
a continuum.

The Jacobian of x_k -> x_k (1 + (Ax)_k) is J_kl = d_kl (1 + (Ap)_k) + p_k a_kl;
its column sums are all 1, so it preserves the tangent space {sum v = 0} and
the spectrum is taken there (the sum direction's eigenvalue 1 is excluded).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np

from .classify import pfaffian4
from .errors import (
    NotAFixedPoint,
    NotRepelling,
    ValidationError,
    WrongDimension,
)
from .qso import SkewMatrix, apply_volterra
from .simplex import FaceId, SimplexPoint, monomial, _renormalized

FIXED_TOL = 1e-10       # |V(p) - p|_inf for a point to count as fixed
NONHYP_TOL = 1e-9       # multiplier modulus within this of 1: nonhyperbolic
PFAFFIAN_TOL = 1e-12    # |Pf| below this: treat the 4x4 matrix as singular
_INTERIOR_MARGIN = 1e-9  # strict positivity margin for kernel points


class StabilityType(Enum):
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    SADDLE = "saddle"
    NON_HYPERBOLIC = "non_hyperbolic"


@dataclass(frozen=True)
class FixedPointRecord:
    point: SimplexPoint
    support: FaceId
    # (coordinate label, 1 + (Ap)_k) for each label off the support
    transverse_multipliers: tuple[tuple[int, float], ...]
    # spectrum of the in-face Jacobian on the face's tangent space
    in_face_eigenvalues: tuple[complex, ...]
    stability: StabilityType
    degenerate: bool = False   # representative of a continuum of fixed points

    def multiplier_at(self, label: int) -> float:
        for lb, v in self.transverse_multipliers:
            if lb == label:
                return v
        raise KeyError(label)

    def all_moduli(self) -> tuple[float, ...]:
        return tuple(abs(z) for z in self.in_face_eigenvalues) + tuple(
            abs(v) for _, v in self.transverse_multipliers)


@dataclass(frozen=True)
class FixedPointInventory:
    records: tuple[FixedPointRecord, ...]
    everywhere_fixed: bool = False
    degenerate_edges: tuple[FaceId, ...] = ()
    degenerate_faces: tuple[FaceId, ...] = ()
    degenerate_interior: bool = False


@dataclass(frozen=True)
class RepellerLyapunov:
    """Monomial exponents taken from a repelling fixed point; the monomial
    tends to 0 along generic trajectories."""

    exponents: tuple[float, ...]

    def value(self, p: SimplexPoint) -> float:
        return monomial(p, self.exponents)


def volterra_jacobian(a: SkewMatrix, p: SimplexPoint) -> np.ndarray:
    if a.m != p.m:
        raise WrongDimension(f"matrix m={a.m}, point m={p.m}")
    arr = a.as_array()
    x = np.array(p.coords)
    return np.diag(1.0 + arr @ x) + x[:, None] * arr


def tangent_restriction(j: np.ndarray) -> np.ndarray:
    """Restrict a column-sum-1 matrix to {sum v = 0} in the basis
    t_c = e_c - e_n: since J t_c stays in the tangent space, the coefficient
    on t_r is simply (J t_c)_r = J[r,c] - J[r,n]."""
    n = j.shape[0]
    m = np.empty((n - 1, n - 1))
    for r in range(n - 1):
        for c in range(n - 1):
            m[r, c] = j[r, c] - j[r, n - 1]
    return m


def _sorted_eigs(mat: np.ndarray) -> tuple[complex, ...]:
    eigs = [complex(z) for z in np.linalg.eigvals(mat)]
    return tuple(sorted(eigs, key=lambda z: (z.real, z.imag)))


def _classify_moduli(moduli) -> StabilityType:
    if any(abs(v - 1.0) <= NONHYP_TOL for v in moduli):
        return StabilityType.NON_HYPERBOLIC
    if all(v > 1.0 for v in moduli):
        return StabilityType.REPELLING
    if all(v < 1.0 for v in moduli):
        return StabilityType.ATTRACTING
    return StabilityType.SADDLE


def jacobian_spectrum(a: SkewMatrix, p: SimplexPoint) -> tuple[complex, ...]:
    """Multipliers of the linearization at a fixed point, on the tangent
    space of the simplex (m-1 values, sorted by real then imaginary part)."""
    image = apply_volterra(a, p)
    residual = max(abs(u - v) for u, v in zip(image.coords, p.coords))
    if residual > FIXED_TOL:
        raise NotAFixedPoint(f"|V(p) - p|_inf = {residual:.3e}")
    return _sorted_eigs(tangent_restriction(volterra_jacobian(a, p)))


def _record_for(a: SkewMatrix, point: SimplexPoint, support: FaceId,
                degenerate: bool = False) -> FixedPointRecord:
    m = a.m
    image = apply_volterra(a, point)
    residual = max(abs(u - v) for u, v in zip(image.coords, point.coords))
    if residual > FIXED_TOL:
        raise NotAFixedPoint(f"|V(p) - p|_inf = {residual:.3e}")
    arr = a.as_array()
    x = np.array(point.coords)
    ap = arr @ x
    idx = support.indices()
    idx_set = set(idx)
    transverse = tuple(
        (k + 1, float(1.0 + ap[k])) for k in range(m) if k not in idx_set)
    if len(idx) >= 2:
        sub = arr[np.ix_(idx, idx)]
        q = x[list(idx)]
        jf = np.diag(1.0 + sub @ q) + q[:, None] * sub
        in_face = _sorted_eigs(tangent_restriction(jf))
    else:
        in_face = ()
    moduli = [abs(z) for z in in_face] + [abs(v) for _, v in transverse]
    return FixedPointRecord(
        point=point,
        support=support,
        transverse_multipliers=transverse,
        in_face_eigenvalues=in_face,
        stability=_classify_moduli(moduli),
        degenerate=degenerate,
    )


def face_fixed_point(a: SkewMatrix, face: FaceId) -> FixedPointRecord | None:
    """Interior fixed point of a size-3 face, if any.

    The restriction to the face is the skew matrix [[0,u,v],[-u,0,w],
    [-v,-w,0]]; its kernel direction is (w, -v, u), and the face holds an
    interior fixed point iff that vector has one strict sign.
    """
    if a.m not in (3, 4):
        raise WrongDimension(f"m={a.m} not supported")
    if face.size != 3:
        raise ValidationError(f"face {face.support} is not a 3-face")
    if face.support[-1] > a.m:
        raise WrongDimension(f"face {face.support} outside 1..{a.m}")
    i, j, k = face.indices()
    u = a.rows[i][j]
    v = a.rows[i][k]
    w = a.rows[j][k]
    kern = (w, -v, u)
    if all(t > 0.0 for t in kern):
        q = kern
    elif all(t < 0.0 for t in kern):
        q = tuple(-t for t in kern)
    else:
        return None
    s = math.fsum(q)
    coords = [0.0] * a.m
    for pos, t in zip((i, j, k), q):
        coords[pos] = t / s
    point = SimplexPoint(_renormalized(coords))
    return _record_for(a, point, face)


def _vertex_record(a: SkewMatrix, label: int) -> FixedPointRecord:
    return _record_for(a, SimplexPoint.vertex(a.m, label), FaceId((label,)))


def _edge_midpoint_record(a: SkewMatrix, i: int, j: int) -> FixedPointRecord:
    coords = [0.0] * a.m
    coords[i] = 0.5
    coords[j] = 0.5
    return _record_for(a, SimplexPoint(tuple(coords)),
                       FaceId((i + 1, j + 1)), degenerate=True)


def _interior_kernel_record(a: SkewMatrix) -> FixedPointRecord | None:
    """Representative interior fixed point of a singular 4x4 matrix: a
    strictly positive, sum-1 vector in the 2-dimensional kernel, found by
    maximizing the smallest coordinate (tiny LP)."""
    from scipy.optimize import linprog

    arr = a.as_array()
    _, svals, vh = np.linalg.svd(arr)
    scale = max(svals[0], 1.0)
    basis = [vh[r] for r in range(4) if svals[r] <= 1e-10 * scale]
    if not basis:
        return None
    nb = len(basis)
    a_ub = np.zeros((4, nb + 1))
    for i in range(4):
        for b in range(nb):
            a_ub[i, b] = -basis[b][i]
        a_ub[i, nb] = 1.0
    a_eq = np.zeros((1, nb + 1))
    for b in range(nb):
        a_eq[0, b] = basis[b].sum()
    c = np.zeros(nb + 1)
    c[nb] = -1.0
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(4), A_eq=a_eq, b_eq=[1.0],
                  bounds=[(None, None)] * (nb + 1), method="highs")
    if not res.success or res.x[nb] <= _INTERIOR_MARGIN:
        return None
    x = np.zeros(4)
    for b in range(nb):
        x += res.x[b] * basis[b]
    point = SimplexPoint(_renormalized([max(0.0, float(v)) for v in x]))
    try:
        return _record_for(a, point, FaceId((1, 2, 3, 4)), degenerate=True)
    except NotAFixedPoint:
        return None


def all_fixed_points(a: SkewMatrix) -> FixedPointInventory:
    """Vertices, edge continua, face-interior points and interior kernel
    points, each with its linearized type."""
    m = a.m
    if m not in (3, 4):
        raise WrongDimension(f"m={m} not supported")
    records = [_vertex_record(a, label) for label in range(1, m + 1)]
    if all(v == 0.0 for row in a.rows for v in row):
        return FixedPointInventory(records=tuple(records),
                                   everywhere_fixed=True)

    degenerate_edges = []
    for i, j in combinations(range(m), 2):
        if a.rows[i][j] == 0.0:
            degenerate_edges.append(FaceId((i + 1, j + 1)))
            records.append(_edge_midpoint_record(a, i, j))

    degenerate_faces = []
    for combo in combinations(range(m), 3):
        face = FaceId(tuple(i + 1 for i in combo))
        i, j, k = combo
        if (a.rows[i][j] == 0.0 and a.rows[i][k] == 0.0
                and a.rows[j][k] == 0.0):
            degenerate_faces.append(face)
            coords = [0.0] * m
            for pos in combo:
                coords[pos] = 1.0 / 3.0
            records.append(_record_for(
                a, SimplexPoint(_renormalized(coords)), face,
                degenerate=True))
            continue
        rec = face_fixed_point(a, face)
        if rec is not None:
            records.append(rec)

    degenerate_interior = False
    if m == 4 and abs(pfaffian4(a)) <= PFAFFIAN_TOL:
        rec = _interior_kernel_record(a)
        if rec is not None:
            degenerate_interior = True
            records.append(rec)

    return FixedPointInventory(
        records=tuple(records),
        degenerate_edges=tuple(degenerate_edges),
        degenerate_faces=tuple(degenerate_faces),
        degenerate_interior=degenerate_interior,
    )


def lyapunov_from_repeller(rec: FixedPointRecord) -> RepellerLyapunov:
    """Monomial with exponents equal to the repelling point's coordinates;
    zero exponents off the support, exponents sum to 1."""
    if rec.stability != StabilityType.REPELLING:
        raise NotRepelling(f"fixed point is {rec.stability.value}")
    return RepellerLyapunov(exponents=rec.point.coords)

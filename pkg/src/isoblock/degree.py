"""Brouwer degree of a vector field over a region, three ways.

* ``winding_degree`` (n = 2): accumulated angle of F along the boundary.
* ``kronecker_degree`` (n = 3): surface integral of the pulled-back area
  form of F/|F| over the boundary.
* ``zero_count_degree`` (any n): sum of sign det DF over zeros found by
  Newton's method from a grid of seeds.

``degree`` runs a boundary method and the zero count and insists that they
agree.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import DEFAULTS, Tolerances
from .errors import (BoundaryZeroError, ConvergenceError, CrossValidationError,
                     DegenerateZeroError, InputError)
from .field import FieldDef
from .region import Ball, Box, CubeRegion, Shell, diameter
from . import cubical

log = logging.getLogger(__name__)

DEFAULT_LOOP_SAMPLES = DEFAULTS.loop_samples
DEFAULT_SPHERE_GRID = DEFAULTS.sphere_grid
DEFAULT_AGREEMENT = DEFAULTS.quadrature_agreement
DEFAULT_MAX_REFINEMENTS = DEFAULTS.max_refinements
DEFAULT_NEWTON_TOL = DEFAULTS.newton_tol
BOUNDARY_ZERO_TOL = 1e-9  # min |F| on the boundary relative to max |F|
DEGENERACY_TOL = 1e-10


@dataclass
class Zero:
    point: list
    index: int
    residual: float
    det: float


@dataclass
class DegreeReport:
    method: str
    raw: float
    degree: int
    refinements: int = 0
    zeros: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    min_boundary_norm: float | None = None
    checks: dict = field(default_factory=dict)  # method -> degree, filled by degree()

    def to_dict(self) -> dict:
        return asdict(self)


def _finish(method, raw, **kw) -> DegreeReport:
    d = int(round(raw))
    if not abs(raw - d) < 0.5:
        raise ConvergenceError(f"{method}: raw value {raw} does not round to an integer")
    return DegreeReport(method, float(raw), d, **kw)


# -- winding (n = 2) --------------------------------------------------------

def _planar_curves(region):
    """Boundary pieces as maps [0, 1] -> R^2, oriented with the interior on the left."""
    if isinstance(region, Ball):
        c, r = np.asarray(region.center), region.radius
        return [lambda s, c=c, r=r: c + r * np.stack([np.cos(2 * np.pi * s), np.sin(2 * np.pi * s)], 1)]
    if isinstance(region, Shell):
        c = np.asarray(region.center)
        return [
            lambda s: c + region.outer * np.stack([np.cos(2 * np.pi * s), np.sin(2 * np.pi * s)], 1),
            lambda s: c + region.inner * np.stack([np.cos(2 * np.pi * s), -np.sin(2 * np.pi * s)], 1),
        ]
    if isinstance(region, Box):
        (x0, y0), (x1, y1) = region.lo, region.hi
        corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        return [_segment(corners[i], corners[(i + 1) % 4]) for i in range(4)]
    if isinstance(region, CubeRegion):
        h = region.cubes.h
        out = []
        for face in cubical.boundary_faces(region.cubes):
            c = face.center(h)
            nv = face.normal(2)
            t = np.array([-nv[1], nv[0]])
            out.append(_segment(c - t * h / 2, c + t * h / 2))
        return out
    raise InputError(f"unsupported region {region!r}")


def _segment(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return lambda s: a + s[:, None] * (b - a)


def _curve_winding(f, curve, samples, max_rounds):
    """Angle swept by F along one curve, refining until every step turns < pi/2."""
    s = np.linspace(0.0, 1.0, samples + 1)
    F = f.eval_many(curve(s))
    for rounds in range(max_rounds + 1):
        mag = np.linalg.norm(F, axis=1)
        k = int(np.argmin(mag))
        _check_boundary_norm(float(mag[k]), float(mag.max()), curve(s[k:k + 1])[0])
        ang = np.arctan2(F[:, 1], F[:, 0])
        d = np.diff(ang)
        d = (d + np.pi) % (2 * np.pi) - np.pi
        bad = np.abs(d) >= np.pi / 2
        if not bad.any():
            return float(d.sum()), float(mag.min()), float(mag.max()), rounds, curve(s)[np.argmin(mag)]
        if rounds == max_rounds or len(s) > 2_000_000:
            break
        mids = 0.5 * (s[:-1][bad] + s[1:][bad])
        Fm = f.eval_many(curve(mids))
        order = np.argsort(np.concatenate([s, mids]), kind="stable")
        s = np.concatenate([s, mids])[order]
        F = np.concatenate([F, Fm])[order]
    raise ConvergenceError("winding refinement did not converge; the field may vanish on the boundary")


def winding_degree(f: FieldDef, region, samples: int = DEFAULT_LOOP_SAMPLES,
                   max_rounds: int = 40) -> DegreeReport:
    if f.n != 2 or region.n != 2:
        raise InputError("winding_degree needs a planar field and region")
    curves = _planar_curves(region)
    per = max(4, samples // len(curves)) if isinstance(region, (Box, CubeRegion)) else samples
    total, lo, hi, depth, where = 0.0, math.inf, 0.0, 0, None
    for curve in curves:
        sweep, mn, mx, rounds, p = _curve_winding(f, curve, per, max_rounds)
        total += sweep
        if mn < lo:
            lo, where = mn, p
        hi, depth = max(hi, mx), max(depth, rounds)
    _check_boundary_norm(lo, hi, where)
    return _finish("winding", total / (2 * np.pi), refinements=depth, min_boundary_norm=lo)


def _check_boundary_norm(lo, hi, where):
    if lo == 0 or lo < BOUNDARY_ZERO_TOL * hi:
        raise BoundaryZeroError(
            f"field nearly vanishes on the boundary (min |F| = {lo:.3g} near {np.round(where, 12).tolist()})",
            point=where, magnitude=lo)


# -- Kronecker integral (n = 3) ---------------------------------------------

@dataclass
class _Patch:
    """A parameterized surface piece with its quadrature rule."""

    points: np.ndarray  # (m, 3)
    du: np.ndarray  # (m, 3) tangent vectors
    dv: np.ndarray
    weights: np.ndarray  # (m,), orientation sign folded in


def _sphere_patches(center, radius, m, k, sign):
    nodes, w = np.polynomial.legendre.leggauss(m)
    theta = 0.5 * np.pi * (nodes + 1)
    wt = 0.5 * np.pi * w
    phi = 2 * np.pi * np.arange(k) / k
    wp = 2 * np.pi / k
    T, P = np.meshgrid(theta, phi, indexing="ij")
    st, ct, sp, cp = np.sin(T), np.cos(T), np.sin(P), np.cos(P)
    pts = np.asarray(center) + radius * np.stack([st * cp, st * sp, ct], -1)
    du = radius * np.stack([ct * cp, ct * sp, -st], -1)
    dv = radius * np.stack([-st * sp, st * cp, np.zeros_like(st)], -1)
    W = sign * np.outer(wt, np.full(k, wp))
    return _Patch(pts.reshape(-1, 3), du.reshape(-1, 3), dv.reshape(-1, 3), W.ravel())


def _face_patch(axis, value, outward, lo, hi, m):
    """Tensor Gauss-Legendre rule on an axis-aligned rectangle in R^3."""
    i, j = [(1, 2), (2, 0), (0, 1)][axis]  # cyclic, so e_i x e_j = e_axis
    nodes, w = np.polynomial.legendre.leggauss(m)
    u = lo[i] + 0.5 * (hi[i] - lo[i]) * (nodes + 1)
    v = lo[j] + 0.5 * (hi[j] - lo[j]) * (nodes + 1)
    wu = 0.5 * (hi[i] - lo[i]) * w
    wv = 0.5 * (hi[j] - lo[j]) * w
    U, V = np.meshgrid(u, v, indexing="ij")
    pts = np.empty(U.shape + (3,))
    pts[..., i], pts[..., j], pts[..., axis] = U, V, value
    du = np.zeros(3)
    du[i] = 1.0
    dv = np.zeros(3)
    dv[j] = 1.0
    W = outward * np.outer(wu, wv)
    cnt = U.size
    return _Patch(pts.reshape(-1, 3), np.tile(du, (cnt, 1)), np.tile(dv, (cnt, 1)), W.ravel())


def _surface_patches(region, level, sphere_grid=DEFAULT_SPHERE_GRID):
    """Quadrature patches for the boundary at refinement ``level`` (0 = base grid)."""
    if isinstance(region, (Ball, Shell)):
        m, k = (g * 2**level for g in sphere_grid)
        if isinstance(region, Ball):
            return [_sphere_patches(region.center, region.radius, m, k, 1.0)]
        return [_sphere_patches(region.center, region.outer, m, k, 1.0),
                _sphere_patches(region.center, region.inner, m, k, -1.0)]
    if isinstance(region, Box):
        m = 64 * 2**level
        lo, hi = np.asarray(region.lo), np.asarray(region.hi)
        return [_face_patch(a, (lo if s < 0 else hi)[a], s, lo, hi, m)
                for a in range(3) for s in (-1.0, 1.0)]
    if isinstance(region, CubeRegion):
        h = region.cubes.h
        m = 4 * 2**level
        out = []
        for face in cubical.boundary_faces(region.cubes):
            c = face.center(h)
            lo, hi = c - h / 2, c + h / 2
            out.append(_face_patch(face.axis, c[face.axis], float(face.sign), lo, hi, m))
        return out
    raise InputError(f"unsupported region {region!r}")


def _kronecker_sum(f, patches, chunk=200_000):
    total, lo, hi, where = 0.0, math.inf, 0.0, None
    for p in patches:
        for a in range(0, len(p.points), chunk):
            sl = slice(a, a + chunk)
            F, J = f.jacobian_many(p.points[sl])
            Fu = np.einsum("mij,mj->mi", J, p.du[sl])
            Fv = np.einsum("mij,mj->mi", J, p.dv[sl])
            mag = np.linalg.norm(F, axis=1)
            k = int(np.argmin(mag))
            if mag[k] < lo:
                lo, where = float(mag[k]), p.points[sl][k]
            hi = max(hi, float(mag.max()))
            with np.errstate(divide="ignore", invalid="ignore"):
                integrand = np.einsum("mi,mi->m", F, np.cross(Fu, Fv)) / mag**3
            total += float(np.dot(integrand, p.weights[sl]))
    return total / (4 * np.pi), lo, hi, where


def kronecker_degree(f: FieldDef, region, agreement: float = DEFAULT_AGREEMENT,
                     max_refinements: int = DEFAULT_MAX_REFINEMENTS,
                     sphere_grid: tuple = DEFAULT_SPHERE_GRID) -> DegreeReport:
    """Degree as (1/4pi) * surface integral of F.(dF/du x dF/dv)/|F|^3.

    Surface tangents of F come from the AD Jacobian. The grid is doubled
    until two successive values differ by less than ``agreement`` and round
    to the same integer.
    """
    if f.n != 3 or region.n != 3:
        raise InputError("kronecker_degree needs a field and region in R^3")
    prev = None
    values = []
    for level in range(max_refinements + 1):
        raw, lo, hi, where = _kronecker_sum(f, _surface_patches(region, level, sphere_grid))
        if level == 0:
            _check_boundary_norm(lo, hi, where)
        values.append(raw)
        if not math.isfinite(raw):
            raise BoundaryZeroError("Kronecker integrand is not finite; the field vanishes on the boundary",
                                    point=where, magnitude=lo)
        if abs(raw - round(raw)) > 0.25:
            z = _boundary_zero_near(f, region, where)
            if z is not None:
                raise BoundaryZeroError(f"field vanishes on the boundary at {np.round(z, 12).tolist()}",
                                        point=z, magnitude=float(np.linalg.norm(f.eval(z))))
        settled = abs(raw - round(raw)) < agreement
        if prev is not None and settled and abs(raw - prev) < agreement and round(raw) == round(prev):
            return _finish("kronecker", raw, refinements=level, min_boundary_norm=lo)
        prev = raw
    raise ConvergenceError(f"Kronecker quadrature did not settle after {max_refinements} "
                           f"refinements: {values}")


def _boundary_zero_near(f, region, p, iterations=30):
    """Newton from a boundary node; returns the zero if it lands on the boundary."""
    z = np.asarray(p, dtype=float)
    for _ in range(iterations):
        jet = f.jacobian(z)
        try:
            step = np.linalg.solve(jet.jacobian, jet.value)
        except np.linalg.LinAlgError:
            return None
        z = z - step
        if not np.all(np.isfinite(z)):
            return None
    on_boundary = abs(float(region.level(z)[0])) < 1e-6 * diameter(region)
    return z if on_boundary and np.linalg.norm(f.eval(z)) < DEFAULT_NEWTON_TOL else None


# -- zeros ------------------------------------------------------------------

def _seed_grid(region, per_axis):
    lo, hi = region.bounding_box()
    axes = [np.linspace(a, b, per_axis + 2)[1:-1] for a, b in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, region.n)
    pts = pts[region.contains(pts)]
    center = 0.5 * (np.asarray(lo) + np.asarray(hi))
    return np.concatenate([center[None, :], pts])


def default_seeds(n: int) -> int:
    return {1: 200, 2: 40, 3: 14}.get(n, 6)


def newton_zeros(f: FieldDef, region, seeds: int | None = None, newton_tol: float = DEFAULT_NEWTON_TOL,
                 merge_radius: float | None = None, max_iter: int = 100):
    """Distinct zeros reached by Newton's method from a seed grid over the region.

    Iteration continues until the step stalls (not merely until the residual
    is small), so degenerate zeros, where Newton converges only linearly,
    are approached closely enough for their tiny Jacobian determinant to
    show. Returns ``(points, residuals)`` for converged points within the
    bounding box of the region (callers filter for interiority).
    """
    diam = diameter(region)
    if merge_radius is None:
        merge_radius = 1e-6 * diam
    x = _seed_grid(region, seeds or default_seeds(region.n))
    lo, hi = region.bounding_box()
    center = 0.5 * (np.asarray(lo) + np.asarray(hi))
    alive = np.ones(len(x), dtype=bool)
    stalled = np.zeros(len(x), dtype=bool)
    for _ in range(max_iter):
        rows = np.flatnonzero(alive & ~stalled)
        if len(rows) == 0:
            break
        F, J = f.jacobian_many(x[rows])
        with np.errstate(all="ignore"):
            try:
                step = np.linalg.solve(J, F[..., None])[..., 0]
            except np.linalg.LinAlgError:
                step = np.einsum("mij,mj->mi", np.linalg.pinv(J), F)
        norm = np.linalg.norm(step, axis=1)
        # damp wild steps, drop runaways
        big = norm > diam
        step[big] *= (diam / norm[big])[:, None]
        xn = x[rows] - step
        ok = np.all(np.isfinite(xn), axis=1) & (np.linalg.norm(xn - center, axis=1) < 10 * diam)
        alive[rows[~ok]] = False
        x[rows[ok]] = xn[ok]
        done = ok & (norm <= 1e-14 * (1.0 + np.linalg.norm(xn, axis=1)))
        stalled[rows[done]] = True
    pts = x[alive]
    if len(pts) == 0:
        return np.zeros((0, region.n)), np.zeros(0)
    res = np.linalg.norm(f.eval_many(pts), axis=1)
    keep = res < newton_tol
    pts, res = pts[keep], res[keep]
    # greedy clustering; keep the best residual representative
    order = np.argsort(res)
    reps, rep_res = [], []
    for i in order:
        p = pts[i]
        if all(np.linalg.norm(p - q) > merge_radius for q in reps):
            reps.append(p)
            rep_res.append(res[i])
    reps = np.array(reps).reshape(-1, region.n)
    order = np.lexsort(reps.T[::-1]) if len(reps) else np.zeros(0, dtype=int)
    return reps[order], np.array(rep_res)[order]


def zero_count_degree(f: FieldDef, region, seeds: int | None = None,
                      newton_tol: float = DEFAULT_NEWTON_TOL,
                      merge_radius: float | None = None) -> DegreeReport:
    """Degree as the sum of sign det DF over the zeros found inside the region."""
    if f.n != region.n:
        raise InputError("field and region dimensions differ")
    diam = diameter(region)
    if merge_radius is None:
        merge_radius = 1e-6 * diam
    pts, res = newton_zeros(f, region, seeds, newton_tol, merge_radius)
    zeros = []
    for p, r in zip(pts, res):
        lev = float(region.level(p)[0])
        if lev > merge_radius:
            continue
        if lev >= -merge_radius:
            raise BoundaryZeroError(f"zero at {p.tolist()} lies on the boundary", point=p, magnitude=float(r))
        J = f.jacobian(p).jacobian
        det = float(np.linalg.det(J))
        scale = max(1.0, float(np.max(np.abs(J))))
        if abs(det) < DEGENERACY_TOL * scale**f.n:
            raise DegenerateZeroError(
                f"degenerate zero at {np.round(p, 12).tolist()} (det DF = {det:.3g}); index not defined",
                point=p, det=det)
        zeros.append(Zero(p.tolist(), int(np.sign(det)), float(r), abs(det)))
    total = sum(z.index for z in zeros)
    return _finish("zeros", float(total), zeros=zeros)


def boundary_degree(f: FieldDef, region, tolerances: Tolerances = DEFAULTS) -> DegreeReport:
    t = tolerances
    if region.n == 2:
        return winding_degree(f, region, t.loop_samples)
    if region.n == 3:
        return kronecker_degree(f, region, t.quadrature_agreement, t.max_refinements, tuple(t.sphere_grid))
    raise InputError("boundary degree methods exist only for n = 2 and n = 3")


def point_index(f: FieldDef, z, radius: float, seeds: int | None = None) -> int:
    """Index of an isolated zero as the degree over a small ball around it."""
    z = np.asarray(z, dtype=float)
    if radius <= 0:
        raise InputError("radius must be positive")
    ball = Ball(tuple(z), radius)
    pts, _ = newton_zeros(f, ball, seeds)
    merge = 1e-5 * radius
    inside = [p for p in pts if ball.level(p)[0] <= merge]
    others = [p for p in inside if np.linalg.norm(p - z) > max(merge, 1e-6)]
    if others:
        raise InputError(f"another zero inside the ball: {np.round(others[0], 10).tolist()}")
    return boundary_degree(f, ball).degree


def degree(f: FieldDef, region, method: str = "auto", tolerances: Tolerances = DEFAULTS,
           **kw) -> DegreeReport:
    """Degree with optional cross-validation.

    ``auto`` runs the boundary method for the ambient dimension together
    with the zero count (when every zero is nondegenerate) and raises
    CrossValidationError if they disagree.
    """
    if f.n != region.n:
        raise InputError("field and region dimensions differ")
    kw.setdefault("newton_tol", tolerances.newton_tol)
    if method in ("winding", "kronecker"):
        if method != {2: "winding", 3: "kronecker"}.get(region.n):
            raise InputError(f"method {method!r} does not apply in dimension {region.n}")
        return boundary_degree(f, region, tolerances)
    if method == "zeros":
        return zero_count_degree(f, region, **kw)
    if method != "auto":
        raise InputError(f"unknown method {method!r}")
    if region.n not in (2, 3):
        rep = zero_count_degree(f, region, **kw)
        rep.checks = {"zeros": rep.degree}
        return rep
    rep = boundary_degree(f, region, tolerances)
    rep.checks = {rep.method: rep.degree}
    try:
        zc = zero_count_degree(f, region, **kw)
    except DegenerateZeroError as exc:
        rep.warnings.append(f"zero count skipped: {exc}")
        return rep
    rep.zeros = zc.zeros
    rep.checks["zeros"] = zc.degree
    if zc.degree != rep.degree:
        raise CrossValidationError(
            f"{rep.method} gives {rep.degree} (raw {rep.raw:.6f}) but zero count gives {zc.degree}")
    return rep

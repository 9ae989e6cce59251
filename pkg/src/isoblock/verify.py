"""Integer identities between degree, index and Euler characteristics.

Each ``check_*`` function evaluates both sides of one identity on a given
field and block and returns a :class:`VerifyReport`. Euler characteristics
are computed from cubical rasterizations where the block geometry allows it
and may always be supplied by the caller instead (the invariant set itself
usually cannot be rasterized); provenance is recorded either way.

Verdicts: ``pass`` / ``fail`` for identities; ``inconclusive`` whenever a
precondition is not met; ``connection exists`` for the connecting-orbit
criterion, which is sufficient but not necessary.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial import cKDTree

from . import cubical
from .block import (ENTRANCE, EXIT, DegenerateTangencyError, classify_boundary,
                    sample_boundary, tangency_components_2d)
from .config import DEFAULTS
from .degree import degree, zero_count_degree
from .errors import BoundaryZeroError, DegenerateZeroError, InputError
from .field import FieldDef
from .region import Ball, Box, CubeRegion, Shell, rasterize

log = logging.getLogger(__name__)

CHECK_IDS = ("conley", "eq1", "planar-bound", "poincare-hopf", "tangency", "nonsaddle",
             "connection", "antipodal")
SUCCESS = ("pass", "connection exists")


@dataclass
class EulerData:
    chi_N: int | None = None
    chi_L: int | None = None
    chi_K: int | None = None
    chi_S: int | None = None
    chi_Sstar: int | None = None
    provenance: dict = field(default_factory=dict)

    def set(self, name, value, source):
        setattr(self, name, None if value is None else int(value))
        if value is not None:
            self.provenance[name] = source

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class VerifyReport:
    check: str
    lhs: object
    rhs: object
    verdict: str
    inputs: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    euler: dict | None = None
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict in SUCCESS

    def to_dict(self) -> dict:
        return asdict(self)

    def line(self) -> str:
        return f"{self.check}: lhs={self.lhs} rhs={self.rhs} -> {self.verdict}"


def _verdict(lhs, rhs) -> str:
    return "pass" if int(lhs) == int(rhs) else "fail"


def default_resolution(region) -> float:
    """Grid width fine enough to resolve the topology of a catalog region."""
    lo, hi = region.bounding_box()
    width = float(np.min(np.asarray(hi) - np.asarray(lo)))
    per = 40 if region.n == 2 else 24
    h = width / per
    if isinstance(region, Shell):
        h = min(h, (region.outer - region.inner) / 8)
    if isinstance(region, CubeRegion):
        h = region.cubes.h
    return h


# -- block topology ---------------------------------------------------------

@dataclass
class BlockTopology:
    """Euler characteristics of a block and of its boundary pieces."""

    chi_N: int
    component_chi: list  # one per boundary component of the sampled boundary
    verdicts: list
    chi_L: int | None
    chi_L_source: str | None
    resolution: float

    @property
    def chi_outward(self) -> int:
        return sum(c for c, v in zip(self.component_chi, self.verdicts) if v == "outward")

    @property
    def chi_inward(self) -> int:
        return sum(c for c, v in zip(self.component_chi, self.verdicts) if v == "inward")


def _match_components(groups, h, comps, points):
    """Assign rasterized boundary pieces to sampled boundary components."""
    trees = [cKDTree(points[c.indices]) for c in comps]
    chis = [0] * len(comps)
    for g in groups:
        centers = np.array([f.center(h) for f in g])
        dists = [float(np.mean(t.query(centers)[0])) for t in trees]
        k = int(np.argmin(dists))
        chis[k] += cubical.euler(cubical.face_complex(g, centers.shape[1]))
    return chis


def _planar_exit_chi(boundary) -> int:
    """chi of the exit set from the cyclic labels of every boundary loop."""
    total = 0
    for comp in boundary.components:
        for loop in comp.loops:
            labels = list(boundary.classes[loop])
            if ENTRANCE not in labels:
                continue  # L is the whole circle (chi 0) or empty
            start = labels.index(ENTRANCE)
            seq = labels[start:] + labels[:start]
            runs, cur = 0, False
            for l in seq + [ENTRANCE]:
                if l == ENTRANCE:
                    runs += cur
                    cur = False
                elif l == EXIT:
                    cur = True
            total += runs  # each run of L is an arc
    return total


def _box_exit_chi(f: FieldDef, box: Box, tol: float, per_axis: int = 32) -> int:
    """chi of the exit set on an exactly gridded box (axis-aligned faces)."""
    n = box.n
    lo, hi = np.asarray(box.lo), np.asarray(box.hi)
    cells = CubeRegion(cubical.CubeSet.from_array(
        n, 1.0, np.stack(np.meshgrid(*[np.arange(per_axis)] * n, indexing="ij"), -1).reshape(-1, n)))
    faces = cubical.boundary_faces(cells.cubes)
    centers = np.array([lo + np.asarray(fc.cell) / 2 * (hi - lo) / per_axis for fc in faces])
    normals = np.array([fc.normal(n) for fc in faces])
    F = f.eval_many(centers)
    align = np.einsum("ij,ij->i", F, normals) / np.linalg.norm(F, axis=1)
    exits = [fc for fc, a in zip(faces, align) if a > tol]
    return cubical.euler(cubical.face_complex(exits, n))


def block_topology(f: FieldDef, region, boundary=None, resolution=None,
                   tol: float = DEFAULTS.tangency_tol) -> BlockTopology:
    if boundary is None:
        boundary = classify_boundary(f, region, tol=tol)
    h = resolution or default_resolution(region)
    cubes = rasterize(region, h)
    if len(cubes) == 0:
        raise InputError(f"region {region.spec()} is empty at resolution {h}")
    chi_N = cubical.euler(cubical.close(cubes))
    groups = cubical.face_components(cubical.boundary_faces(cubes), region.n)
    comp_chi = _match_components(groups, h, boundary.components, boundary.points)
    verdicts = boundary.verdicts()
    if all(v != "mixed" for v in verdicts):
        chi_L = sum(c for c, v in zip(comp_chi, verdicts) if v == "outward")
        source = f"computed: outward boundary components (h={h:g})"
    elif region.n == 2:
        chi_L = _planar_exit_chi(boundary)
        source = f"computed: exit arcs along sampled boundary loops ({len(boundary.classes)} samples)"
    elif isinstance(region, Box):
        chi_L = _box_exit_chi(f, region, tol)
        source = "computed: exit faces of a gridded box"
    else:
        chi_L, source = None, None
    return BlockTopology(chi_N, comp_chi, verdicts, chi_L, source, h)


def _euler(topo: BlockTopology | None = None) -> EulerData:
    e = EulerData()
    if topo is not None:
        e.set("chi_N", topo.chi_N, f"computed (h={topo.resolution:g})")
    return e


def _inputs(f, region, **kw) -> dict:
    out = {"field": f.name or f.source, "params": f.param_map, "region": region.spec()}
    out.update({k: v for k, v in kw.items() if v is not None})
    return out


# -- checks -----------------------------------------------------------------

def check_degree_conley(f: FieldDef, region, chi_L: int | None = None,
                        resolution: float | None = None, deg=None) -> VerifyReport:
    """deg(F, N) against (-1)^n chi(N, L) with L the exit set."""
    topo = block_topology(f, region, resolution=resolution)
    e = _euler(topo)
    if chi_L is not None:
        e.set("chi_L", chi_L, "supplied")
    elif topo.chi_L is not None:
        e.set("chi_L", topo.chi_L, topo.chi_L_source)
    inputs = _inputs(f, region, chi_L=chi_L)
    if e.chi_L is None:
        return VerifyReport("conley", None, None, "inconclusive", inputs,
                            ["boundary has mixed components; supply chi_L"], e.to_dict(),
                            {"verdicts": topo.verdicts})
    rep = deg or degree(f, region)
    rhs = (-1) ** region.n * (e.chi_N - e.chi_L)
    return VerifyReport("conley", rep.degree, rhs, _verdict(rep.degree, rhs), inputs,
                        [f"chi(N, L) = {e.chi_N - e.chi_L}"], e.to_dict(),
                        {"degree_checks": rep.checks, "verdicts": topo.verdicts})


def _k_and_s(f, region, chi_K, chi_S, resolution, e, notes):
    """Fill chi_K and chi_S: supplied, or from a non-saddle block's boundary."""
    topo = None
    if chi_K is None or chi_S is None:
        topo = block_topology(f, region, resolution=resolution)
        e.set("chi_N", topo.chi_N, f"computed (h={topo.resolution:g})")
        if not all(v != "mixed" for v in topo.verdicts):
            notes.append("block is not in non-saddle form; chi_K and chi_S must be supplied")
        else:
            if chi_K is None:
                chi_K = topo.chi_N
                e.set("chi_K", chi_K, "computed: chi(N) for a non-saddle block")
            if chi_S is None:
                chi_S = topo.chi_outward
                e.set("chi_S", chi_S, "computed: outward boundary components")
    if e.chi_K is None and chi_K is not None:
        e.set("chi_K", chi_K, "supplied")
    if e.chi_S is None and chi_S is not None:
        e.set("chi_S", chi_S, "supplied")
    return e.chi_K, e.chi_S, topo


def check_eq1(f: FieldDef, region, chi_K: int | None = None, chi_S: int | None = None,
              resolution: float | None = None, deg=None) -> VerifyReport:
    """deg(F, N) against (-1)^n (chi(K) - chi(S)) for an initial section S."""
    e, notes = EulerData(), []
    chi_K, chi_S, _ = _k_and_s(f, region, chi_K, chi_S, resolution, e, notes)
    inputs = _inputs(f, region)
    if chi_K is None or chi_S is None:
        return VerifyReport("eq1", None, None, "inconclusive", inputs, notes, e.to_dict())
    rep = deg or degree(f, region)
    rhs = (-1) ** region.n * (chi_K - chi_S)
    return VerifyReport("eq1", rep.degree, rhs, _verdict(rep.degree, rhs), inputs, notes, e.to_dict(),
                        {"degree_checks": rep.checks})


def check_planar_bound(f: FieldDef, region, chi_K: int | None = None,
                       resolution: float | None = None, deg=None) -> VerifyReport:
    """deg(F, N) <= chi(K) for an invariant continuum K in the plane."""
    if region.n != 2:
        raise InputError("the planar bound applies to n = 2 only")
    e, notes = EulerData(), []
    chi_K, _, _ = _k_and_s(f, region, chi_K, 0 if chi_K is None else None, resolution, e, notes)
    inputs = _inputs(f, region)
    if chi_K is None:
        return VerifyReport("planar-bound", None, None, "inconclusive", inputs, notes, e.to_dict())
    rep = deg or degree(f, region)
    verdict = "pass" if rep.degree <= chi_K else "fail"
    return VerifyReport("planar-bound", rep.degree, chi_K, verdict, inputs,
                        notes + ["identity is an inequality: lhs <= rhs"], e.to_dict())


def check_poincare_hopf(f: FieldDef, region, reverse: bool = False,
                        resolution: float | None = None) -> VerifyReport:
    """Total index against chi(N) when F points outward on the whole boundary."""
    g = f.reversed() if reverse else f
    inputs = _inputs(f, region, reverse=reverse or None)
    b = classify_boundary(g, region)
    topo = block_topology(g, region, boundary=b, resolution=resolution)
    e = _euler(topo)
    if not all(v == "outward" for v in topo.verdicts):
        note = f"field is not outward on the whole boundary ({topo.verdicts})"
        if all(v == "inward" for v in topo.verdicts) and not reverse:
            note += "; the reversed field is outward, rerun with reverse"
        return VerifyReport("poincare-hopf", None, e.chi_N, "inconclusive", inputs, [note], e.to_dict())
    try:
        rep = zero_count_degree(g, region)
    except DegenerateZeroError as exc:
        return VerifyReport("poincare-hopf", None, e.chi_N, "inconclusive", inputs,
                            [f"index not defined: {exc}"], e.to_dict())
    return VerifyReport("poincare-hopf", rep.degree, e.chi_N, _verdict(rep.degree, e.chi_N), inputs,
                        [f"{len(rep.zeros)} zeros"], e.to_dict(),
                        {"zeros": [asdict(z) for z in rep.zeros]})


def check_tangency(f: FieldDef, region, samples: int | None = None,
                   resolution: float | None = None) -> VerifyReport:
    """Number of tangency points against 2 (chi(N) - I(F|N)) in the plane."""
    if region.n != 2:
        raise InputError("tangency counting applies to n = 2 only")
    inputs = _inputs(f, region, samples=samples)
    b = classify_boundary(f, region, samples)
    topo = block_topology(f, region, boundary=b, resolution=resolution)
    e = _euler(topo)
    try:
        count = tangency_components_2d(b)
    except DegenerateTangencyError as exc:
        return VerifyReport("tangency", None, None, "inconclusive", inputs, [str(exc)], e.to_dict())
    try:
        index = zero_count_degree(f, region).degree
    except DegenerateZeroError as exc:
        return VerifyReport("tangency", count, None, "inconclusive", inputs,
                            [f"index not defined: {exc}"], e.to_dict())
    rhs = 2 * (e.chi_N - index)
    return VerifyReport("tangency", count, rhs, _verdict(count, rhs), inputs,
                        [f"I(F|N) = {index}"], e.to_dict(), {"index": index, "verdicts": topo.verdicts})


def check_nonsaddle(f: FieldDef, region, chi_S: int | None = None, chi_Sstar: int | None = None,
                    resolution: float | None = None, deg=None) -> VerifyReport:
    """Index of a non-saddle block from its boundary components.

    n even: I = chi(N). n odd: both sign conventions are evaluated,
    (chi(S*) - chi(S)) / 2 and (chi(S) - chi(S*)) / 2; the report records
    which one agrees with the degree oracle. The verdict is ``pass`` when
    the convention consistent with deg = (-1)^n (chi(K) - chi(S)) matches.
    """
    inputs = _inputs(f, region)
    b = classify_boundary(f, region)
    topo = block_topology(f, region, boundary=b, resolution=resolution)
    e = _euler(topo)
    if not all(v != "mixed" for v in topo.verdicts):
        return VerifyReport("nonsaddle", None, None, "inconclusive", inputs,
                            [f"boundary has mixed components ({topo.verdicts})"], e.to_dict())
    e.set("chi_S", topo.chi_outward if chi_S is None else chi_S,
          "supplied" if chi_S is not None else "computed: outward boundary components")
    e.set("chi_Sstar", topo.chi_inward if chi_Sstar is None else chi_Sstar,
          "supplied" if chi_Sstar is not None else "computed: inward boundary components")
    rep = deg or degree(f, region)
    oracle = rep.degree
    if region.n % 2 == 0:
        return VerifyReport("nonsaddle", oracle, e.chi_N, _verdict(oracle, e.chi_N), inputs,
                            ["n even: I(F|N) = chi(N)"], e.to_dict())
    star_minus_s = (e.chi_Sstar - e.chi_S) / 2
    s_minus_star = (e.chi_S - e.chi_Sstar) / 2
    matches = [name for name, v in (("(S*-S)/2", star_minus_s), ("(S-S*)/2", s_minus_star)) if v == oracle]
    notes = [
        f"(chi(S*) - chi(S))/2 = {star_minus_s:g}; (chi(S) - chi(S*))/2 = {s_minus_star:g}; "
        f"degree oracle = {oracle}",
        f"matching convention: {', '.join(matches) or 'none'}",
    ]
    if 2 * e.chi_N != e.chi_S + e.chi_Sstar:
        notes.append("chi(N) != (chi(S) + chi(S*))/2 on this block")
    # (S-S*)/2 is the convention consistent with deg = (-1)^n (chi(K) - chi(S))
    verdict = "pass" if s_minus_star == oracle else "fail"
    rhs = int(s_minus_star) if s_minus_star == int(s_minus_star) else s_minus_star
    return VerifyReport("nonsaddle", oracle, rhs, verdict, inputs, notes, e.to_dict(),
                        {"half_Sstar_minus_S": star_minus_s, "half_S_minus_Sstar": s_minus_star,
                         "matches": matches})


def detect_connection(f: FieldDef, region, chi_A: int, chi_R: int, chi_S: int,
                      chi_K: int | None = None, deg=None) -> VerifyReport:
    """Connecting orbits of an attractor-repeller pair {A, R} in K.

    If deg(F, N) != chi(A) + chi(R) - chi(S), some orbit connects R to A.
    With chi(K) given, also reports chi(C) = chi(A) + chi(R) - chi(K) for
    the union C of connecting orbits.
    """
    if chi_A is None or chi_R is None or chi_S is None:
        raise InputError("chi_A, chi_R and chi_S are required")
    e = EulerData()
    e.set("chi_S", chi_S, "supplied")
    if chi_K is not None:
        e.set("chi_K", chi_K, "supplied")
    rep = deg or degree(f, region)
    rhs = chi_A + chi_R - chi_S
    verdict = "connection exists" if rep.degree != rhs else "inconclusive"
    extra = {"chi_A": chi_A, "chi_R": chi_R}
    notes = ["sufficient criterion: equality is silent about connections"]
    if chi_K is not None:
        extra["chi_C"] = chi_A + chi_R - chi_K
        notes.append(f"chi(C) = chi(A) + chi(R) - chi(K) = {extra['chi_C']}")
    return VerifyReport("connection", rep.degree, rhs, verdict,
                        _inputs(f, region, chi_A=chi_A, chi_R=chi_R, chi_S=chi_S, chi_K=chi_K),
                        notes, e.to_dict(), extra)


# -- antipodal points -------------------------------------------------------

@dataclass
class AntipodalResult:
    found: bool
    point: list | None
    residual: float
    mode: str
    rule: str | None = None


def parity_mode(chi_K: int, chi_S: int) -> str:
    """Same parity of chi(K), chi(S) -> 'same'; different -> 'opposite'."""
    return "same" if (chi_K - chi_S) % 2 == 0 else "opposite"


def _alignment(f, pts, sign):
    F = f.eval_many(pts)
    G = f.eval_many(-pts)
    a = np.linalg.norm(F, axis=1)
    b = np.linalg.norm(G, axis=1)
    return F / a[:, None] - sign * G / b[:, None], np.minimum(a, b)


def _polish(f, region, x0, normal0, sign, tol):
    """Local least squares on the boundary near x0 (chart: tangent plane)."""
    n = region.n
    if isinstance(region, (Ball, Shell)):
        c = np.asarray(region.center)
        r = float(np.linalg.norm(x0 - c))
        u = (x0 - c) / r
        basis = np.linalg.svd(u[None, :])[2][1:]  # orthonormal tangent directions

        def chart(t):
            v = u + t @ basis
            return c + r * v / np.linalg.norm(v)

        bounds = (-np.inf, np.inf)
        t0 = np.zeros(n - 1)
    else:
        # box face: move within the face, bounded by its extent
        lo, hi = region.bounding_box()
        axis = int(np.argmax(np.abs(normal0)))
        free = [i for i in range(n) if i != axis]

        def chart(t):
            p = x0.copy()
            p[free] = t
            return p

        t0 = x0[free]
        bounds = (np.asarray(lo)[free], np.asarray(hi)[free])

    def resid(t):
        p = chart(np.asarray(t))
        return _alignment(f, p[None, :], sign)[0][0]

    sol = least_squares(resid, t0, bounds=bounds, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
    p = chart(sol.x)
    return p, float(np.linalg.norm(resid(sol.x)))


def antipodal_search(f: FieldDef, region, mode: str | None = None, chi_K: int | None = None,
                     chi_S: int | None = None, tol: float = DEFAULTS.antipodal_tol,
                     samples: int | None = None, candidates: int = 8) -> AntipodalResult:
    """Boundary point x with F(x), F(-x) pointing the same or opposite way."""
    if not region.is_symmetric() or not region.contains(np.zeros(region.n))[0]:
        raise InputError("antipodal search needs a region symmetric about the origin that contains it")
    rule = None
    if mode is None:
        if chi_K is None or chi_S is None:
            raise InputError("give a mode or both chi_K and chi_S")
        mode = parity_mode(chi_K, chi_S)
        rule = f"chi(K)={chi_K}, chi(S)={chi_S}: " + (
            "same parity -> same direction" if mode == "same" else "different parity -> opposite directions")
    if mode not in ("same", "opposite"):
        raise InputError("mode must be 'same' or 'opposite'")
    sign = 1.0 if mode == "same" else -1.0
    pts, nrm, _ = sample_boundary(region, samples)
    res_vec, mags = _alignment(f, pts, sign)
    scale = float(np.max(np.linalg.norm(f.eval_many(pts), axis=1)))
    if mags.min() <= 1e-12 * max(scale, 1e-300):
        k = int(np.argmin(mags))
        raise BoundaryZeroError(f"field vanishes on the boundary near {pts[k].tolist()}",
                                point=pts[k], magnitude=float(mags[k]))
    res = np.linalg.norm(res_vec, axis=1)
    order = np.argsort(res)
    best_p, best_r = pts[order[0]], float(res[order[0]])
    for k in order[:candidates]:
        if best_r < tol:
            break
        p, r = _polish(f, region, pts[k].copy(), nrm[k], sign, tol)
        if r < best_r:
            best_p, best_r = p, r
    found = best_r < tol
    return AntipodalResult(found, best_p.tolist(), best_r, mode, rule)


def check_antipodal(f: FieldDef, region, mode: str | None = None, chi_K: int | None = None,
                    chi_S: int | None = None, tol: float = DEFAULTS.antipodal_tol) -> VerifyReport:
    res = antipodal_search(f, region, mode, chi_K, chi_S, tol)
    inputs = _inputs(f, region, mode=res.mode, chi_K=chi_K, chi_S=chi_S)
    if res.found:
        verdict = "pass"
    else:
        # existence is only promised when the parity data came from the block
        verdict = "fail" if res.rule else "inconclusive"
    notes = [res.rule] if res.rule else []
    notes.append(f"best residual {res.residual:.3g} (tol {tol:g})")
    return VerifyReport("antipodal", res.residual, tol, verdict, inputs, notes, None, asdict(res))

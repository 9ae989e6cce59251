"""Candidate isolating blocks: boundary exit/entrance/tangency decomposition.

Boundaries are sampled, each sample classified by the sign of F.n relative
to |F|. In the plane every boundary component is an ordered closed loop, so
tangency points can be counted as sign-change sites along the loop.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import cubical
from .config import DEFAULTS
from .errors import BoundaryZeroError, InputError, NumericalError
from .field import FieldDef
from .flow import orbit_stays
from .region import Ball, Box, CubeRegion, Shell, rasterize

log = logging.getLogger(__name__)

EXIT, ENTRANCE, TANGENT = "exit", "entrance", "tangent"
DEFAULT_LOOP_SAMPLES = DEFAULTS.loop_samples
DEFAULT_SURFACE_SAMPLES = DEFAULTS.surface_samples
DEFAULT_TANGENCY_TOL = DEFAULTS.tangency_tol
ZERO_TOL = 1e-10  # |F| below this fraction of max |F| on the boundary counts as a zero


class DegenerateTangencyError(NumericalError):
    def __init__(self, message, count=None):
        self.count = count
        super().__init__(message)


@dataclass
class BoundaryComponent:
    """One connected piece of the boundary.

    ``loops`` holds sample indices in cyclic order (planar regions only).
    """

    label: str
    indices: np.ndarray
    loops: list = field(default_factory=list)
    verdict: str = "mixed"  # outward | inward | mixed


@dataclass
class BlockBoundary:
    n: int
    points: np.ndarray
    normals: np.ndarray
    alignment: np.ndarray  # F.n / |F| per sample
    classes: np.ndarray  # exit | entrance | tangent
    components: list
    tol: float
    min_field_norm: float

    def count(self, kind: str) -> int:
        return int(np.sum(self.classes == kind))

    def verdicts(self) -> list[str]:
        return [c.verdict for c in self.components]

    def uniform(self) -> bool:
        return all(v != "mixed" for v in self.verdicts())

    def summary(self) -> dict:
        return {
            "samples": int(len(self.classes)),
            "exit": self.count(EXIT),
            "entrance": self.count(ENTRANCE),
            "tangent": self.count(TANGENT),
            "components": [{"label": c.label, "verdict": c.verdict, "samples": int(len(c.indices))}
                           for c in self.components],
            "tolerance": self.tol,
            "min_field_norm": self.min_field_norm,
        }


# -- boundary sampling ------------------------------------------------------

def _circle(center, radius, m, outward=True):
    theta = 2 * np.pi * np.arange(m) / m
    u = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    pts = np.asarray(center) + radius * u
    if not outward:
        # clockwise traversal with normals toward the center
        return pts[::-1], -u[::-1]
    return pts, u


def _fibonacci_sphere(m):
    k = np.arange(m) + 0.5
    z = 1 - 2 * k / m
    phi = np.pi * (1 + 5**0.5) * k
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _box_loop(lo, hi, m):
    """Counterclockwise samples of a rectangle; each corner appears once per face."""
    per = max(2, m // 4)
    s = np.linspace(0.0, 1.0, per)
    (x0, y0), (x1, y1) = lo, hi
    faces = [
        (np.stack([x0 + s * (x1 - x0), np.full(per, y0)], 1), (0.0, -1.0)),
        (np.stack([np.full(per, x1), y0 + s * (y1 - y0)], 1), (1.0, 0.0)),
        (np.stack([x1 - s * (x1 - x0), np.full(per, y1)], 1), (0.0, 1.0)),
        (np.stack([np.full(per, x0), y1 - s * (y1 - y0)], 1), (-1.0, 0.0)),
    ]
    pts = np.concatenate([p for p, _ in faces])
    nrm = np.concatenate([np.tile(nv, (per, 1)) for _, nv in faces])
    return pts, nrm


def _box_surface(lo, hi, m):
    n = len(lo)
    per = max(2, int(round((m / (2 * n)) ** (1.0 / (n - 1)))))
    pts, nrm = [], []
    for axis in range(n):
        others = [i for i in range(n) if i != axis]
        grids = np.meshgrid(*[np.linspace(lo[i], hi[i], per) for i in others], indexing="ij")
        flat = np.stack([g.ravel() for g in grids], axis=1)
        for sign, val in ((-1, lo[axis]), (1, hi[axis])):
            p = np.empty((len(flat), n))
            p[:, others] = flat
            p[:, axis] = val
            v = np.zeros((len(flat), n))
            v[:, axis] = sign
            pts.append(p)
            nrm.append(v)
    return np.concatenate(pts), np.concatenate(nrm)


def _cube_loops(cubes, per_edge):
    """Chain the boundary edges of a planar cube set into oriented loops."""
    h = cubes.h
    edges = []
    for face in cubical.boundary_faces(cubes):
        c = face.center(h)
        nv = face.normal(2)
        t = np.array([-nv[1], nv[0]])  # interior on the left
        a = np.round((c - t * h / 2) / h * 2).astype(int)
        b = np.round((c + t * h / 2) / h * 2).astype(int)
        edges.append((tuple(a), tuple(b), c, nv, t))
    starts: dict = {}
    for i, e in enumerate(edges):
        starts.setdefault(e[0], []).append(i)
    used = np.zeros(len(edges), dtype=bool)
    loops = []
    for first in range(len(edges)):
        if used[first]:
            continue
        loop, i = [], first
        while not used[i]:
            used[i] = True
            loop.append(i)
            nxt = [j for j in starts.get(edges[i][1], []) if not used[j]]
            if not nxt:
                break
            i = nxt[0]
        loops.append(loop)
    s = (np.arange(per_edge) + 0.5) / per_edge - 0.5
    out = []
    for loop in loops:
        pts = np.concatenate([edges[i][2] + s[:, None] * h * edges[i][4] for i in loop])
        nrm = np.concatenate([np.tile(edges[i][3], (per_edge, 1)) for i in loop])
        out.append((pts, nrm))
    return out


def sample_boundary(region, samples=None):
    """Boundary samples, outward normals and components for a region.

    Returns ``(points, normals, components)``; for n = 2 each component has
    ``loops`` in cyclic order.
    """
    n = region.n
    if n not in (2, 3):
        raise InputError("boundary sampling supports n = 2 and n = 3")
    if samples is None:
        samples = DEFAULT_LOOP_SAMPLES if n == 2 else DEFAULT_SURFACE_SAMPLES
    pieces = []  # (label, points, normals)
    if isinstance(region, Ball):
        if n == 2:
            pieces.append(("circle", *_circle(region.center, region.radius, samples)))
        else:
            u = _fibonacci_sphere(samples)
            pieces.append(("sphere", np.asarray(region.center) + region.radius * u, u))
    elif isinstance(region, Shell):
        if n == 2:
            pieces.append(("inner", *_circle(region.center, region.inner, samples, outward=False)))
            pieces.append(("outer", *_circle(region.center, region.outer, samples)))
        else:
            u = _fibonacci_sphere(samples)
            c = np.asarray(region.center)
            pieces.append(("inner", c + region.inner * u, -u))
            pieces.append(("outer", c + region.outer * u, u))
    elif isinstance(region, Box):
        lo, hi = np.asarray(region.lo), np.asarray(region.hi)
        if n == 2:
            pieces.append(("box", *_box_loop(lo, hi, samples)))
        else:
            pieces.append(("box", *_box_surface(lo, hi, samples)))
    elif isinstance(region, CubeRegion):
        cubes = region.cubes
        if n == 2:
            nfaces = len(cubical.boundary_faces(cubes))
            per_edge = max(1, int(np.ceil(samples / max(nfaces, 1))))
            for k, (p, v) in enumerate(_cube_loops(cubes, per_edge)):
                pieces.append((f"loop{k}", p, v))
        else:
            faces = cubical.boundary_faces(cubes)
            for k, group in enumerate(cubical.face_components(faces, n)):
                p = np.array([f.center(cubes.h) for f in group])
                v = np.array([f.normal(n) for f in group])
                pieces.append((f"surface{k}", p, v))
    else:
        raise InputError(f"unsupported region {region!r}")

    points, normals, comps, offset = [], [], [], 0
    for label, p, v in pieces:
        idx = np.arange(offset, offset + len(p))
        comps.append(BoundaryComponent(label, idx, loops=[idx] if n == 2 else []))
        points.append(p)
        normals.append(v)
        offset += len(p)
    return np.concatenate(points), np.concatenate(normals), comps


# -- classification ---------------------------------------------------------

def classify_boundary(f: FieldDef, region, samples=None, tol: float = DEFAULT_TANGENCY_TOL,
                      reverse: bool = False) -> BlockBoundary:
    """Label every boundary sample exit, entrance or tangent.

    A sample is tangent iff |F.n| <= tol * |F|. Raises BoundaryZeroError
    when F (nearly) vanishes at a boundary sample.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    if f.n != region.n:
        raise InputError("field and region dimensions differ")
    pts, nrm, comps = sample_boundary(region, samples)
    F = f.eval_many(pts)
    if reverse:
        F = -F
    mag = np.linalg.norm(F, axis=1)
    scale = max(float(mag.max()), 1e-300)
    k = int(np.argmin(mag))
    if mag[k] <= ZERO_TOL * scale or mag[k] == 0:
        raise BoundaryZeroError(
            f"field vanishes on the boundary near {pts[k].tolist()} (|F| = {mag[k]:.3g})",
            point=pts[k], magnitude=float(mag[k]))
    align = np.einsum("ij,ij->i", F, nrm) / mag
    classes = np.where(align > tol, EXIT, np.where(align < -tol, ENTRANCE, TANGENT)).astype(object)
    for c in comps:
        labels = set(classes[c.indices])
        c.verdict = "outward" if labels == {EXIT} else "inward" if labels == {ENTRANCE} else "mixed"
    return BlockBoundary(region.n, pts, nrm, align, classes, comps, tol, float(mag[k]))


def _loop_tangencies(labels) -> tuple[int, bool]:
    """Count tangency sites along a cyclic label sequence.

    A site is a maximal run of tangent samples, or an exit/entrance pair of
    adjacent samples with no tangent sample between them.
    """
    m = len(labels)
    if m == 0:
        return 0, True
    if all(l == TANGENT for l in labels):
        return 0, False
    # rotate so the sequence starts at a non-tangent sample
    start = next(i for i, l in enumerate(labels) if l != TANGENT)
    seq = list(labels[start:]) + list(labels[:start])
    count = 0
    prev = seq[0]
    in_run = False
    for l in seq[1:] + [seq[0]]:
        if l == TANGENT:
            if not in_run:
                count += 1
                in_run = True
            continue
        if not in_run and l != prev:
            count += 1
        in_run = False
        prev = l
    return count, True


def tangency_components_2d(b: BlockBoundary) -> int:
    """Number of points where F is tangent to a planar block boundary."""
    if b.n != 2:
        raise InputError("tangency counting is only defined for planar blocks")
    total = 0
    for comp in b.components:
        for loop in comp.loops:
            count, ok = _loop_tangencies(b.classes[loop])
            if not ok:
                raise DegenerateTangencyError(
                    f"field is tangent along the whole loop {comp.label!r}", count=None)
            total += count
    return total


# -- isolation --------------------------------------------------------------

@dataclass
class IsolationVerdict:
    verdict: str  # plausible | violated | indeterminate
    sampled_cells: int
    invariant_cells: int
    boundary_hits: int
    horizon: float
    resolution: float
    label: str = "heuristic"


def isolation_check(f: FieldDef, region, T: float = 1.0, resolution: float = 0.05,
                    tol: float = 1e-7) -> IsolationVerdict:
    """Sampled test that the maximal invariant set stays off the boundary.

    A cell center whose orbit stays in the region over [-T, T] approximates
    a point of the maximal invariant set; if any such center lies in a cell
    touching the boundary of the rasterized region, isolation is violated.
    """
    if T <= 0 or resolution <= 0:
        raise InputError("T and resolution must be positive")
    cubes = rasterize(region, resolution)
    if len(cubes) == 0:
        raise InputError("region is empty at this resolution")
    centers = cubes.centers()
    fwd, fail_f = orbit_stays(f, region, centers, T, +1, tol)
    bwd, fail_b = orbit_stays(f, region, centers, T, -1, tol)
    inv = fwd & bwd
    failed = fail_f | fail_b
    edge_cells = {face_cell for face_cell in _boundary_adjacent(cubes)}
    adjacent = np.array([tuple(c) in edge_cells for c in cubes.array.tolist()], dtype=bool)
    hits = int(np.sum(inv & adjacent))
    if hits:
        verdict = "violated"
    elif failed.any():
        verdict = "indeterminate"
    else:
        verdict = "plausible"
    log.debug("isolation check: %d invariant cells, %d on the boundary", int(inv.sum()), hits)
    return IsolationVerdict(verdict, len(cubes), int(inv.sum()), hits, T, resolution)


def _boundary_adjacent(cubes):
    out = set()
    for face in cubical.boundary_faces(cubes):
        c = np.array(face.cell)
        c[face.axis] -= face.sign
        out.add(tuple(((c - 1) // 2).tolist()))
    return out

"""Full-cube sets on a uniform grid and their cubical complexes.

Elementary cells are stored in *doubled* integer coordinates: a coordinate
``2a`` is the degenerate interval ``[a, a]`` and ``2a + 1`` is the unit
interval ``[a, a + 1]``. The full cube with lattice index ``i`` is therefore
``2i + 1`` in every coordinate, and a cell's dimension is the number of odd
coordinates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import ndimage

from .errors import InputError


@dataclass(frozen=True, eq=False)
class CubeSet:
    """Full n-cubes ``[i*h, (i+1)*h]`` indexed by integer lattice points ``i``."""

    n: int
    h: float
    cells: frozenset = frozenset()
    _array: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.h <= 0:
            raise InputError("cell width must be positive")
        cells = frozenset(tuple(int(v) for v in c) for c in self.cells)
        if any(len(c) != self.n for c in cells):
            raise InputError("cell coordinates must have the set's dimension")
        object.__setattr__(self, "cells", cells)
        arr = np.array(sorted(cells), dtype=np.int64).reshape(-1, self.n)
        object.__setattr__(self, "_array", arr)

    @classmethod
    def from_array(cls, n, h, arr) -> "CubeSet":
        return cls(n, h, frozenset(map(tuple, np.asarray(arr, dtype=np.int64).reshape(-1, n).tolist())))

    def __len__(self):
        return len(self.cells)

    def __contains__(self, cell):
        return tuple(cell) in self.cells

    def __eq__(self, other):
        return isinstance(other, CubeSet) and (self.n, self.h, self.cells) == (other.n, other.h, other.cells)

    def __hash__(self):
        return hash((self.n, self.h, self.cells))

    @property
    def array(self) -> np.ndarray:
        """Cells as a lexicographically sorted ``(m, n)`` integer array."""
        return self._array

    def centers(self) -> np.ndarray:
        return (self._array + 0.5) * self.h

    def union(self, other: "CubeSet") -> "CubeSet":
        _check_compatible(self, other)
        return CubeSet(self.n, self.h, self.cells | other.cells)

    def difference(self, other: "CubeSet") -> "CubeSet":
        _check_compatible(self, other)
        return CubeSet(self.n, self.h, self.cells - other.cells)

    def issubset(self, other: "CubeSet") -> bool:
        _check_compatible(self, other)
        return self.cells <= other.cells

    def cell_of(self, points) -> np.ndarray:
        """Lattice index of the cube containing each point."""
        return np.floor(np.asarray(points, dtype=float) / self.h).astype(np.int64)


def _check_compatible(a: CubeSet, b: CubeSet):
    if a.n != b.n or a.h != b.h:
        raise InputError("cube sets live on different grids")


@dataclass(frozen=True, eq=False)
class CubicalComplex:
    """A face-closed set of elementary cells in doubled coordinates."""

    n: int
    cells: np.ndarray  # (m, n) int64, unique rows, lexicographically sorted

    def cells_by_dim(self) -> dict[int, np.ndarray]:
        dims = (self.cells % 2).sum(axis=1) if len(self.cells) else np.zeros(0, dtype=int)
        return {k: self.cells[dims == k] for k in range(self.n + 1)}

    def counts(self) -> list[int]:
        by = self.cells_by_dim()
        return [len(by[k]) for k in range(self.n + 1)]

    def __len__(self):
        return len(self.cells)

    def cell_set(self) -> set:
        return set(map(tuple, self.cells.tolist()))


def _unique_rows(arr: np.ndarray, n: int) -> np.ndarray:
    if len(arr) == 0:
        return np.zeros((0, n), dtype=np.int64)
    return np.unique(arr, axis=0)


def close_cells(doubled, n: int) -> CubicalComplex:
    """Face closure of arbitrary elementary cells given in doubled coordinates."""
    cells = _unique_rows(np.asarray(doubled, dtype=np.int64).reshape(-1, n), n)
    if len(cells) == 0:
        return CubicalComplex(n, cells)
    odd = (cells % 2).astype(bool)
    pieces = []
    for delta in itertools.product((-1, 0, 1), repeat=n):
        d = np.array(delta, dtype=np.int64)
        # only odd (nondegenerate) coordinates may move to an endpoint
        ok = np.all(odd | (d == 0), axis=1)
        if ok.any():
            pieces.append(cells[ok] + d)
    return CubicalComplex(n, _unique_rows(np.concatenate(pieces), n))


def rasterize(region, h: float) -> CubeSet:
    """Cubes of width ``h`` whose centers lie in ``region``.

    ``region`` needs ``n``, ``bounding_box()`` and ``contains(points)``.
    An empty result is returned as an empty set; callers decide whether
    that is fatal.
    """
    if h <= 0:
        raise InputError("cell width must be positive")
    lo, hi = region.bounding_box()
    lo_i = np.floor(np.asarray(lo) / h).astype(np.int64) - 1
    hi_i = np.ceil(np.asarray(hi) / h).astype(np.int64) + 1
    axes = [np.arange(a, b + 1) for a, b in zip(lo_i, hi_i)]
    idx = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, region.n)
    inside = region.contains((idx + 0.5) * h)
    return CubeSet.from_array(region.n, h, idx[inside])


def close(C: CubeSet) -> CubicalComplex:
    return close_cells(2 * C.array + 1, C.n)


def euler(X: CubicalComplex) -> int:
    return int(sum((-1) ** k * c for k, c in enumerate(X.counts())))


def euler_pair(X: CubicalComplex, A: CubicalComplex) -> int:
    """chi(X, A) = chi(X) - chi(A) for a subcomplex A."""
    if A.n != X.n:
        raise InputError("complexes have different ambient dimensions")
    if len(A) and not A.cell_set() <= X.cell_set():
        raise InputError("A is not a subcomplex of X")
    return euler(X) - euler(A)


def components(C: CubeSet) -> list[CubeSet]:
    """Face-connected components, ordered by their lexicographically least cell."""
    if len(C) == 0:
        return []
    arr = C.array
    lo = arr.min(axis=0)
    shape = tuple(arr.max(axis=0) - lo + 1)
    grid = np.zeros(shape, dtype=bool)
    grid[tuple((arr - lo).T)] = True
    labels, count = ndimage.label(grid)  # default structure = face adjacency
    lab = labels[tuple((arr - lo).T)]
    parts = [arr[lab == k] for k in range(1, count + 1)]
    parts.sort(key=lambda p: tuple(p[0]))  # rows of arr are sorted, so p[0] is least
    return [CubeSet.from_array(C.n, C.h, p) for p in parts]


@dataclass(frozen=True)
class Face:
    """A boundary (n-1)-face in doubled coordinates with its outward normal."""

    cell: tuple
    axis: int
    sign: int

    def center(self, h: float) -> np.ndarray:
        return np.asarray(self.cell, dtype=float) * (h / 2.0)

    def normal(self, n: int) -> np.ndarray:
        v = np.zeros(n)
        v[self.axis] = self.sign
        return v


def boundary_faces(C: CubeSet) -> list[Face]:
    """Faces of member cubes not shared with another member cube."""
    arr = C.array
    faces = []
    for axis in range(C.n):
        for sign in (1, -1):
            step = np.zeros(C.n, dtype=np.int64)
            step[axis] = sign
            for cell in arr:
                if tuple(cell + step) not in C.cells:
                    d = 2 * cell + 1
                    d[axis] += sign
                    faces.append(Face(tuple(int(v) for v in d), axis, sign))
    faces.sort(key=lambda f: (f.cell, f.axis, f.sign))
    return faces


def face_complex(faces: Iterable[Face], n: int) -> CubicalComplex:
    cells = [f.cell for f in faces]
    return close_cells(np.array(cells, dtype=np.int64).reshape(-1, n), n)


def face_components(faces: list[Face], n: int) -> list[list[Face]]:
    """Group boundary faces into connected pieces (adjacent via a shared (n-2)-face)."""
    if not faces:
        return []
    parent = list(range(len(faces)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner = {}
    for i, f in enumerate(faces):
        c = np.array(f.cell, dtype=np.int64)
        odd = np.flatnonzero(c % 2)
        for j in odd:
            for s in (-1, 1):
                ridge = c.copy()
                ridge[j] += s
                key = tuple(ridge.tolist())
                if key in owner:
                    a, b = find(owner[key]), find(i)
                    if a != b:
                        parent[b] = a
                else:
                    owner[key] = i
    groups: dict[int, list[Face]] = {}
    for i, f in enumerate(faces):
        groups.setdefault(find(i), []).append(f)
    out = list(groups.values())
    out.sort(key=lambda g: min(f.cell for f in g))
    return out

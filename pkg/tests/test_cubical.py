from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isoblock import cubical
from isoblock.cubical import CubeSet
from isoblock.errors import InputError
from isoblock.region import Ball, Box, Shell


def chi(region, h):
    return cubical.euler(cubical.close(cubical.rasterize(region, h)))


def boundary_chis(region, h):
    faces = cubical.boundary_faces(cubical.rasterize(region, h))
    return sorted(cubical.euler(cubical.face_complex(g, region.n)) for g in cubical.face_components(faces, region.n))


@pytest.mark.parametrize("region, expected", [
    (Ball((0, 0), 1), 1), (Shell((0, 0), 0.5, 1.5), 0), (Box((-1, -1), (1, 1)), 1),
    (Ball((0, 0, 0), 1), 1), (Shell((0, 0, 0), 0.5, 1.0), 2),
])
def test_euler_characteristic_stable_under_refinement(region, expected):
    assert chi(region, 0.1) == expected
    assert chi(region, 0.05) == expected


def test_cubical_sphere_and_shell_boundaries():
    for h in (0.2, 0.1):
        assert boundary_chis(Ball((0, 0, 0), 1), h) == [2]
        assert boundary_chis(Shell((0, 0, 0), 0.5, 1.0), h) == [2, 2]
        assert boundary_chis(Shell((0, 0), 0.5, 1.5), h) == [0, 0]


def test_single_cube_cell_counts():
    X = cubical.close(CubeSet(3, 1.0, frozenset({(0, 0, 0)})))
    assert X.counts() == [8, 12, 6, 1]
    assert cubical.euler(X) == 1


cube_sets = st.sets(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=1, max_size=20)


@given(cube_sets, cube_sets)
def test_euler_additive_on_separated_sets(a, b):
    A = CubeSet(2, 1.0, frozenset(a))
    B = CubeSet(2, 1.0, frozenset((x + 10, y) for x, y in b))  # far apart, closures disjoint
    total = cubical.euler(cubical.close(A.union(B)))
    assert total == cubical.euler(cubical.close(A)) + cubical.euler(cubical.close(B))


@given(cube_sets, cube_sets)
def test_inclusion_exclusion(a, b):
    A, B = CubeSet(2, 1.0, frozenset(a)), CubeSet(2, 1.0, frozenset(b))
    XA, XB = cubical.close(A), cubical.close(B)
    inter = XA.cell_set() & XB.cell_set()
    chi_inter = sum((-1) ** int(np.sum(np.array(c) % 2)) for c in inter)
    assert cubical.euler(cubical.close(A.union(B))) == cubical.euler(XA) + cubical.euler(XB) - chi_inter


@given(st.sets(st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=25))
def test_boundary_of_boundary_is_empty(cells):
    """Every (n-2)-face of the boundary surface is shared by an even number of boundary faces."""
    C = CubeSet(3, 1.0, frozenset(cells))
    ridges = Counter()
    for f in cubical.boundary_faces(C):
        c = np.array(f.cell)
        for j in np.flatnonzero(c % 2):
            for s in (-1, 1):
                r = c.copy()
                r[j] += s
                ridges[tuple(r)] += 1
    assert all(v % 2 == 0 for v in ridges.values())


@given(cube_sets)
def test_components_partition_the_set(a):
    C = CubeSet(2, 1.0, frozenset(a))
    parts = cubical.components(C)
    assert sum(len(p) for p in parts) == len(C)
    assert frozenset().union(*(p.cells for p in parts)) == C.cells
    assert [tuple(p.array[0]) for p in parts] == sorted(tuple(p.array[0]) for p in parts)


def test_euler_pair_requires_subcomplex():
    X = cubical.close(CubeSet(2, 1.0, frozenset({(0, 0)})))
    A = cubical.close(CubeSet(2, 1.0, frozenset({(3, 3)})))
    with pytest.raises(InputError):
        cubical.euler_pair(X, A)
    edge = cubical.close_cells(np.array([[1, 0]]), 2)
    assert cubical.euler_pair(X, edge) == 0


def test_rasterize_keeps_centers_inside():
    region = Ball((0.3, -0.2), 0.77)
    C = cubical.rasterize(region, 0.05)
    assert region.contains(C.centers()).all()
    assert set(map(tuple, C.cell_of(C.centers()).tolist())) == set(C.cells)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isoblock.degree import (degree, kronecker_degree, newton_zeros, point_index, winding_degree,
                             zero_count_degree)
from isoblock.errors import BoundaryZeroError, CrossValidationError, DegenerateZeroError, InputError
from isoblock.field import catalog, parse_field, random_polynomial_field
from isoblock.region import Ball, Box, Shell

B2, B3 = Ball((0, 0), 1), Ball((0, 0, 0), 1)
BIG = Ball((0, 0, 0), 60)
ORIGIN_BOX = Box((-6, -6, -6), (6, 6, 6))
LORENZ = catalog("lorenz")
C = math.sqrt(8 / 3 * 23)


@pytest.mark.parametrize("name, region, expected", [
    ("attractor(2)", B2, 1), ("saddle2", B2, -1), ("limit_cycle", Shell((0, 0), 0.5, 1.5), 0),
    ("repeller(2)", B2, 1), ("even_field", B2, 2), ("segment_flow", Box((-2, -1), (2, 1)), 0),
])
def test_winding_examples(name, region, expected):
    rep = winding_degree(catalog(name), region)
    assert rep.degree == expected
    assert abs(rep.raw - expected) < 1e-9


@pytest.mark.parametrize("name, region, expected", [
    ("attractor(3)", B3, -1), ("repeller(3)", B3, 1), ("repeller(3)", Shell((0, 0, 0), 0.5, 1), 0),
    ("repeller(3)", Box((-1, -2, -1), (2, 1, 1)), 1), ("lorenz", BIG, -1), ("lorenz", ORIGIN_BOX, 1),
])
def test_kronecker_examples(name, region, expected):
    rep = kronecker_degree(catalog(name), region)
    assert rep.degree == expected
    assert abs(rep.raw - expected) < 0.05


def test_lorenz_zeros_and_indices():
    rep = zero_count_degree(LORENZ, BIG)
    pts = np.array([z.point for z in rep.zeros])
    idx = {tuple(np.round(p, 4)): z.index for p, z in zip(pts, rep.zeros)}
    assert len(rep.zeros) == 3 and rep.degree == -1
    assert idx[(0.0, 0.0, 0.0)] == 1
    for s in (1, -1):
        k = np.argmin(np.linalg.norm(pts - [s * C, s * C, 23], axis=1))
        assert np.linalg.norm(pts[k] - [s * C, s * C, 23]) < 1e-6
        assert rep.zeros[k].index == -1
    for z in rep.zeros:
        assert z.residual < 1e-10
        assert BIG.level(np.array(z.point))[0] < -60e-6


def test_degree_additivity_on_lorenz_sub_balls():
    parts = [Ball((0, 0, 0), 3), Ball((C, C, 23), 3), Ball((-C, -C, 23), 3)]
    sub = [kronecker_degree(LORENZ, b).degree for b in parts]
    assert sub == [1, -1, -1]
    assert sum(sub) == kronecker_degree(LORENZ, BIG).degree


def test_auto_cross_validates():
    rep = degree(LORENZ, BIG)
    assert rep.checks == {"kronecker": -1, "zeros": -1}
    rep = degree(catalog("limit_cycle"), Shell((0, 0), 0.5, 1.5))
    assert rep.checks == {"winding": 0, "zeros": 0} and rep.zeros == []


@pytest.mark.parametrize("seed", range(50))
def test_winding_agrees_with_zero_count_on_random_cubics(seed):
    f = random_polynomial_field(np.random.default_rng(seed))
    assert winding_degree(f, B2).degree == zero_count_degree(f, B2).degree


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.floats(0.1, 50))
def test_positive_scaling_preserves_degree(seed, c):
    f = random_polynomial_field(np.random.default_rng(seed))
    try:
        d = winding_degree(f, B2).degree
    except BoundaryZeroError:
        return
    assert winding_degree(f.scaled(c), B2).degree == d


@pytest.mark.parametrize("name, region", [
    ("attractor(2)", B2), ("saddle2", B2), ("repeller(2)", B2),
    ("attractor(3)", B3), ("repeller(3)", B3),
])
def test_reversal_multiplies_by_sign(name, region):
    f = catalog(name)
    n = region.n
    assert degree(f.reversed(), region).degree == (-1) ** n * degree(f, region).degree


@pytest.mark.parametrize("name, point, radius, expected", [
    ("saddle2", (0, 0), 0.5, -1), ("attractor(3)", (0, 0, 0), 0.5, -1), ("even_field", (0, 0), 1.0, 2),
    ("lorenz", (C, C, 23), 1.0, -1),
])
def test_point_index(name, point, radius, expected):
    assert point_index(catalog(name), point, radius) == expected


def test_point_index_rejects_second_zero():
    with pytest.raises(InputError):
        point_index(catalog("segment_flow"), (1, 0), 3.0)


def test_degenerate_zero():
    f = parse_field("x^2, y", 2)
    with pytest.raises(DegenerateZeroError) as info:
        zero_count_degree(f, B2)
    assert np.allclose(info.value.point, 0, atol=1e-6)
    # the boundary method still works and auto reports the skipped cross-check
    rep = degree(f, B2)
    assert rep.degree == 0 and rep.warnings


def test_boundary_zero_detected():
    with pytest.raises(BoundaryZeroError):
        winding_degree(parse_field("x - 1, y", 2), B2)
    with pytest.raises(BoundaryZeroError):
        kronecker_degree(parse_field("x - 1, y, z", 3), B3)


def test_cross_validation_failure_is_raised(monkeypatch):
    import isoblock.degree as D
    real = D.zero_count_degree

    def wrong(*a, **k):
        rep = real(*a, **k)
        rep.degree += 1
        return rep

    monkeypatch.setattr(D, "zero_count_degree", wrong)
    with pytest.raises(CrossValidationError):
        D.degree(catalog("saddle2"), B2)


def test_zero_count_in_four_dimensions():
    rep = degree(catalog("attractor(4)"), Ball((0, 0, 0, 0), 1))
    assert rep.degree == 1 and rep.checks == {"zeros": 1}
    with pytest.raises(InputError):
        degree(catalog("attractor(4)"), Ball((0, 0, 0, 0), 1), "kronecker")


def test_newton_finds_every_zero_of_a_product_field():
    f = parse_field("(x - 0.3)*(x + 0.4), y*(y - 0.5)", 2)
    pts, res = newton_zeros(f, B2)
    expected = {(a, b) for a in (0.3, -0.4) for b in (0.0, 0.5)}
    assert {tuple(np.round(p, 8) + 0.0) for p in pts} == expected
    assert zero_count_degree(f, B2).degree == winding_degree(f, B2).degree

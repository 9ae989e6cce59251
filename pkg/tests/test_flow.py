import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isoblock import flow
from isoblock.errors import InputError, IntegrationError
from isoblock.field import catalog, parse_field
from isoblock.region import Ball, Box


def test_linear_flow_matches_exponential():
    f = parse_field("-2*x + y, -x - 2*y", 2)
    t = 1.7
    got = flow.flow_to(f, [1.0, 0.5], t, tol=1e-11)
    rot = np.array([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]])
    exact = np.exp(-2 * t) * rot @ np.array([1.0, 0.5])
    np.testing.assert_allclose(got, exact, atol=1e-10)


def test_error_decreases_with_tolerance():
    f = catalog("limit_cycle")
    exact = flow.flow_to(f, [0.3, 0.1], 3.0, tol=1e-13)
    errs = [np.linalg.norm(flow.flow_to(f, [0.3, 0.1], 3.0, tol=t) - exact) for t in (1e-4, 1e-6, 1e-8)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-7


def test_backward_integration_inverts_forward():
    f = catalog("lorenz")
    x0 = np.array([1.0, 2.0, 20.0])
    x1 = flow.flow_to(f, x0, 0.4, tol=1e-12)
    back = flow.integrate(f, x1, -0.4, tol=1e-12)
    assert back.direction == -1
    np.testing.assert_allclose(back.final, x0, atol=1e-7)


def test_trajectory_dense_output():
    f = catalog("repeller(2)")
    tr = flow.integrate(f, [0.1, 0.2], 2.0, tol=1e-11)
    assert np.all(np.diff(tr.times) > 0) and tr.times[0] == 0
    np.testing.assert_allclose(tr.at(1.234), np.exp(1.234) * np.array([0.1, 0.2]), rtol=1e-6)


@pytest.mark.parametrize("name, region, x", [
    ("repeller(2)", Ball((0, 0), 1), [0.5, 0.0]),
    ("saddle2", Box((-1, -1), (1, 1)), [0.5, 0.1]),  # leaves through the face x = 1
])
def test_exit_time_ln2(name, region, x):
    t = flow.exit_time(catalog(name), region, x, 10.0)
    assert t == pytest.approx(math.log(2), abs=1e-6)


@given(st.floats(0.05, 0.9), st.floats(0, 2 * math.pi))
def test_exit_point_lies_on_the_boundary(r, theta):
    f = catalog("repeller(2)")
    x = [r * math.cos(theta), r * math.sin(theta)]
    t = flow.exit_time(f, Ball((0, 0), 1), x, 20.0)
    assert t == pytest.approx(-math.log(r), abs=1e-6)
    assert np.linalg.norm(flow.flow_to(f, x, t, 1e-11)) == pytest.approx(1.0, abs=1e-6)


def test_exit_time_infinite_for_trapped_orbits():
    assert flow.exit_time(catalog("attractor(2)"), Ball((0, 0), 1), [0.5, 0.5], 5.0) == math.inf


def test_limit_cycle_and_omega_estimate():
    f = catalog("limit_cycle")
    pts = flow.omega_estimate(f, [0.1, 0.0], 20.0, 10.0)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-6)
    pts = flow.omega_estimate(catalog("segment_flow"), [-0.5, 0.8], 30.0, 5.0)
    np.testing.assert_allclose(pts[-1], [1.0, 0.0], atol=1e-6)


def test_blow_up_raises_integration_error():
    with pytest.raises(IntegrationError):
        flow.integrate(parse_field("x^2, 0*y", 2), [1.0, 0.0], 2.0)


def test_bad_input():
    with pytest.raises(InputError):
        flow.exit_time(catalog("saddle2"), Ball((0, 0), 1), [2.0, 0.0], 1.0)
    with pytest.raises(InputError):
        flow.integrate(catalog("saddle2"), [1.0, 0.0, 0.0], 1.0)


def test_asymptotic_sets_shrink_with_horizon():
    f, box = catalog("saddle2"), Box((-1, -1), (1, 1))
    sets = [flow.asymptotic_approx(f, box, 0.05, T, "negative").cells for T in (0.5, 1.0, 2.0, 3.0)]
    for a, b in zip(sets, sets[1:]):
        assert b.issubset(a)
    # the unstable manifold of the saddle is the x axis
    assert np.max(np.abs(sets[-1].centers()[:, 1])) <= 0.025 + 1e-12
    assert len(sets[-1]) > 0


def test_positive_asymptotic_set_is_the_stable_axis():
    cells = flow.asymptotic_approx(catalog("saddle2"), Box((-1, -1), (1, 1)), 0.05, 3.0, "positive").cells
    assert np.max(np.abs(cells.centers()[:, 0])) <= 0.025 + 1e-12

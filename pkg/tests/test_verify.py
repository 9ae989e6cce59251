import numpy as np
import pytest

from isoblock import verify as V
from isoblock.errors import InputError
from isoblock.field import catalog, parse_field
from isoblock.region import Ball, Box, Shell

B2, B3, SQ = Ball((0, 0), 1), Ball((0, 0, 0), 1), Box((-1, -1), (1, 1))
SHELL = Shell((0, 0), 0.5, 1.5)
SEG = Box((-2, -1), (2, 1))


@pytest.mark.parametrize("name, region", [
    ("attractor(2)", B2), ("attractor(3)", B3), ("repeller(2)", B2), ("repeller(3)", B3),
    ("saddle2", SQ), ("limit_cycle", SHELL), ("segment_flow", SEG), ("saddle2", B2),
    ("repeller(3)", Shell((0, 0, 0), 0.5, 1.0)),
])
def test_degree_conley(name, region):
    rep = V.check_degree_conley(catalog(name), region)
    assert rep.verdict == "pass", rep.line()
    assert rep.euler["provenance"]["chi_N"].startswith("computed")


def test_conley_on_a_mixed_three_dimensional_box():
    saddle3 = parse_field("x, -y, -z", 3)
    rep = V.check_degree_conley(saddle3, Box((-1, -1, -1), (1, 1, 1)))
    assert rep.euler["chi_L"] == 2 and rep.verdict == "pass"


def test_conley_inconclusive_without_chi_L_on_curved_mixed_surface():
    saddle3 = parse_field("x, -y, -z", 3)
    rep = V.check_degree_conley(saddle3, B3)
    assert rep.verdict == "inconclusive"
    rep = V.check_degree_conley(saddle3, B3, chi_L=2)
    assert rep.verdict == "pass" and rep.euler["provenance"]["chi_L"] == "supplied"


@pytest.mark.parametrize("name, region, chiK, chiS, deg", [
    ("saddle2", SQ, 1, 2, -1), ("segment_flow", SEG, 1, 1, 0),
    ("attractor(3)", B3, None, None, -1), ("repeller(3)", B3, None, None, 1),
    ("attractor(2)", B2, None, None, 1), ("repeller(2)", B2, None, None, 1),
    ("lorenz", Box((-6, -6, -6), (6, 6, 6)), -1, 0, 1),
])
def test_eq1(name, region, chiK, chiS, deg):
    rep = V.check_eq1(catalog(name), region, chiK, chiS)
    assert rep.verdict == "pass" and rep.lhs == deg == rep.rhs


def test_eq1_detects_wrong_inputs():
    assert V.check_eq1(catalog("saddle2"), SQ, 1, 1).verdict == "fail"
    assert V.check_eq1(catalog("saddle2"), SQ).verdict == "inconclusive"


def test_planar_bound():
    assert V.check_planar_bound(catalog("saddle2"), SQ, chi_K=1).verdict == "pass"
    assert V.check_planar_bound(catalog("repeller(2)"), B2).verdict == "pass"
    # a deliberately wrong chi(K) violates the inequality
    assert V.check_planar_bound(catalog("repeller(2)"), B2, chi_K=0).verdict == "fail"
    with pytest.raises(InputError):
        V.check_planar_bound(catalog("repeller(3)"), B3)


@pytest.mark.parametrize("seed", range(50))
def test_planar_bound_on_random_cubics(seed):
    from isoblock.degree import zero_count_degree
    from isoblock.field import random_polynomial_field
    f = random_polynomial_field(np.random.default_rng(seed))
    zeros = zero_count_degree(f, B2).zeros
    if len(zeros) > 1:
        pytest.skip(f"{len(zeros)} zeros: chi(K) not determined by the zero structure")
    chi_K = len(zeros)  # no zeros: empty K; one zero: a point
    rep = V.check_planar_bound(f, B2, chi_K=chi_K)
    assert rep.verdict == "pass"


@pytest.mark.parametrize("name, region, reverse", [
    ("repeller(2)", B2, False), ("repeller(3)", B3, False), ("attractor(3)", B3, True),
    ("limit_cycle", SHELL, True),
])
def test_poincare_hopf(name, region, reverse):
    rep = V.check_poincare_hopf(catalog(name), region, reverse)
    assert rep.verdict == "pass", rep.line()


def test_poincare_hopf_needs_outward_field():
    rep = V.check_poincare_hopf(catalog("attractor(2)"), B2)
    assert rep.verdict == "inconclusive" and "reverse" in rep.notes[0]
    # F = x enters a shell through its inner sphere
    assert V.check_poincare_hopf(catalog("repeller(3)"), Shell((0, 0, 0), 0.5, 1.0)).verdict == "inconclusive"


@pytest.mark.parametrize("name, region, count", [
    ("saddle2", SQ, 4), ("saddle2", B2, 4), ("attractor(2)", B2, 0), ("limit_cycle", SHELL, 0),
    ("segment_flow", SEG, 2), ("repeller(2)", B2, 0),
])
def test_tangency(name, region, count):
    for samples in (64, 128):
        rep = V.check_tangency(catalog(name), region, samples)
        assert rep.verdict == "pass" and rep.lhs == count


def test_nonsaddle_sign_audit():
    matches = {}
    for name in ("repeller(3)", "attractor(3)"):
        rep = V.check_nonsaddle(catalog(name), B3)
        assert rep.verdict == "pass"
        matches[name] = rep.extra["matches"]
    assert all(m == ["(S-S*)/2"] for m in matches.values())
    rep = V.check_nonsaddle(catalog("repeller(3)"), B3)
    assert rep.extra["half_Sstar_minus_S"] == -1 and rep.extra["half_S_minus_Sstar"] == 1 and rep.lhs == 1


def test_nonsaddle_even_dimension_and_mixed():
    assert V.check_nonsaddle(catalog("limit_cycle"), SHELL).verdict == "pass"
    assert V.check_nonsaddle(catalog("saddle2"), SQ).verdict == "inconclusive"


def test_connection_examples():
    rep = V.detect_connection(catalog("segment_flow"), SEG, 1, 1, 1, chi_K=1)
    assert rep.verdict == "connection exists" and rep.extra["chi_C"] == 1
    rep = V.detect_connection(catalog("limit_cycle"), Ball((0, 0), 1.5), 0, 1, 0, chi_K=1)
    assert rep.verdict == "inconclusive" and rep.extra["chi_C"] == 0
    with pytest.raises(InputError):
        V.detect_connection(catalog("saddle2"), SQ, None, 1, 1)


def test_parity_rule():
    assert V.parity_mode(1, 0) == "opposite"
    assert V.parity_mode(1, 1) == "same"
    assert V.parity_mode(-1, 1) == "same"


@pytest.mark.parametrize("name, region, mode", [
    ("attractor(2)", B2, "opposite"), ("even_field", B2, "same"), ("repeller(3)", B3, "opposite"),
])
def test_antipodal_trivial_cases(name, region, mode):
    res = V.antipodal_search(catalog(name), region, mode)
    assert res.found and res.residual < 1e-6


def test_antipodal_polishes_generic_fields():
    f = parse_field("x + 0.3*y^2 + 0.2, y - 0.4*x*y + 0.1", 2)
    res = V.antipodal_search(f, B2, "opposite", samples=16)
    p = np.array(res.point)
    assert res.found and abs(np.linalg.norm(p) - 1) < 1e-12
    a, b = f.eval(p), f.eval(-p)
    assert np.linalg.norm(a / np.linalg.norm(a) + b / np.linalg.norm(b)) < 1e-6


def test_antipodal_requires_symmetric_region():
    with pytest.raises(InputError):
        V.antipodal_search(catalog("saddle2"), Box((0, -1), (1, 1)), "same")
    with pytest.raises(InputError):
        V.antipodal_search(catalog("saddle2"), SQ)

import math

import numpy as np
import pytest

from multicorn_lab import curves
from multicorn_lab.core import RealCubic, find_attracting_cycle, find_cycle
from multicorn_lab.errors import OutOfRange

A0 = 0.7071067811865476
INV_SQRT3 = 1 / math.sqrt(3)


def test_phi1_values():
    assert curves.phi1(0) == 16
    assert curves.phi1(INV_SQRT3) == pytest.approx(0, abs=1e-14)
    assert curves.phi1(1) == -200


def test_in_H1():
    assert curves.in_H1(0, 0)
    assert not curves.in_H1(INV_SQRT3, 0)
    assert not curves.in_H1(0, 0.77)


def test_per1_points():
    p = curves.per1_minus1_point(INV_SQRT3)
    assert (p.a, p.b) == (pytest.approx(INV_SQRT3), 0.0)
    assert curves.per1_minus1_point(0).b == pytest.approx(math.sqrt(16 / 27), abs=1e-15)
    assert curves.per1_minus1_point(0.5).b == pytest.approx(math.sqrt(7.5625 / 27), abs=1e-15)
    with pytest.raises(OutOfRange):
        curves.per1_minus1_point(0.9)


@pytest.mark.parametrize("a", np.linspace(0, INV_SQRT3, 7))
def test_per1_point_carries_fixed_point_of_multiplier_minus_one(a):
    p = curves.per1_minus1_point(a)
    assert abs(curves.per1_minus1_value(p.a, p.b)) < 1e-10
    g = RealCubic(p.a, p.b)
    # the multiplier -1 fixed point is real: -3(x^2 + a^2) = -1
    x0 = math.sqrt(max(1 / 3 - a * a, 0.0))
    x0 = min((x0, -x0), key=lambda x: abs(-x ** 3 - 3 * a * a * x + p.b - x))
    cyc = find_cycle(g, 1, complex(x0, 0))
    assert abs(cyc.points[0].imag) < 1e-9
    assert abs(cyc.multiplier + 1) < 1e-6


def test_boundary_of_H1_is_per1():
    for a in np.linspace(0, INV_SQRT3 * 0.999, 25):
        b_edge = math.sqrt(curves.phi1(a) / 27)
        assert b_edge == pytest.approx(curves.per1_minus1_point(a).b, abs=1e-12)
        assert curves.in_H1(a, 0.999 * b_edge) and not curves.in_H1(a, 1.001 * b_edge)


def test_resultant_structure():
    c = curves.per2_1_polynomial()
    assert c.deg_p == 6 and c.deg_q == 8
    assert c.resultant.total_degree <= c.degree_bound
    # the resultant contains Per1(-1) as a factor
    assert len(c.factors) >= 2
    assert all(isinstance(v, type(c.polynomial.as_dict()[k])) for k, v in c.polynomial.coeffs)


def test_per2_polynomial_values():
    c = curves.per2_1_polynomial()
    assert abs(c.polynomial(A0, 0)) > 0
    p1 = curves.per1_minus1_point(0)
    assert abs(c.polynomial.normalized(p1.a, p1.b)) > 1e-3


def test_per2_polynomial_sign_agrees_on_bitransitive_interior():
    poly = curves.per2_1_polynomial().polynomial
    sign = math.copysign(1, poly(A0, 0))
    for a, b in [(0.72, 0.02), (0.70, -0.05), (0.75, 0.0)]:
        cyc = find_attracting_cycle(RealCubic(a, b))
        assert cyc is not None and cyc.period == 2
        assert math.copysign(1, poly(a, b)) == sign


@pytest.mark.parametrize("a", [0.62, 0.7, 0.75, 0.8])
def test_per2_polynomial_vanishes_on_multiplier_one_two_cycles(a):
    p = curves.per2_1_point(a)
    poly = curves.per2_1_polynomial().polynomial
    assert abs(poly.normalized(p.a, p.b)) < 1e-8
    g = RealCubic(p.a, p.b)
    # a parabolic 2-cycle sits close to the critical orbit's limit
    z = complex(0, p.a)
    for _ in range(20000):
        z = -z ** 3 - 3 * p.a * p.a * z + p.b
    cyc = find_cycle(g, 2, z)
    assert abs(cyc.multiplier - 1) < 1e-6


def test_bitransitive_center():
    a, b = curves.bitransitive_center()
    assert (a, b) == (0.7071067811865476, 0.0)
    w = -(1j * a) ** 3 - 3 * a * a * (1j * a) + b
    assert abs(w + 1j * a) < 1e-15


def test_newton_seeds_all_reach_positive_root():
    for s in np.random.default_rng(3).uniform(1e-3, 2, 20):
        assert curves.positive_root_a_minus_2a3(s) == pytest.approx(A0, abs=1e-15)


def test_polyline_is_symmetric():
    pts = curves.curve_polyline(curves.PER1_MINUS1, np.linspace(0, 0.5, 5))
    assert len(pts) == 10
    assert {(p.a, p.b) for p in pts} == {(p.a, -p.b) for p in pts}

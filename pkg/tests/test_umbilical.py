import cmath
import math

import numpy as np
import pytest

from multicorn_lab import umbilical as U
from multicorn_lab.errors import ContractViolation, NotOnArc
from multicorn_lab.parabolic import critical_ecalle_height

OMEGA = cmath.exp(2j * math.pi / 3)
C1, C3 = U.ArcComponent(1), U.ArcComponent(3)


@pytest.fixture(scope="module")
def airplane_root():
    return U.find_arc_point("multicorn", C3, 0.0, ((-1.75, 0.0), None))


def test_wiggle_count_definition():
    assert U.wiggle_count([0.0] * 9, 1e-3) == 0
    assert U.wiggle_count([2e-3 * (-1) ** k for k in range(7)], 1e-3) == 6
    # small values are ignored before counting
    assert U.wiggle_count([2e-3, 1e-5, -1e-5, 2e-3], 1e-3) == 0
    assert U.default_threshold(1e-4) == pytest.approx(1e-3)


def test_component_contract():
    with pytest.raises(ContractViolation):
        U.ArcComponent(2)


def test_period_one_height_zero_point_is_quarter():
    seed = U.boundary_seed("multicorn", C1, (0.0, 0.0), 0.0)
    ap = U.find_arc_point("multicorn", C1, 0.0, seed)
    assert ap.c == pytest.approx(0.25, abs=1e-8)
    assert abs(ap.height) < 1e-6


def test_minus_three_quarters_is_a_cusp():
    ap = U.arc_point_at("multicorn", C1, ((-0.75, 0.0), -0.5))
    assert ap.cusp and ap.parabolic.petals == 2
    assert ap.c == pytest.approx(-0.75, abs=1e-8)


def test_airplane_root(airplane_root):
    assert airplane_root.c == pytest.approx(-1.75, abs=1e-8)
    assert abs(airplane_root.height) < 1e-4


def test_rotated_airplane_root():
    c = OMEGA * -1.75
    ap = U.find_arc_point("multicorn", C3, 0.0, ((c.real, c.imag), None))
    assert ap.c == pytest.approx(c, abs=1e-8)


def test_heights_monotone_along_arc():
    seed = U.boundary_seed("multicorn", C1, (0.0, 0.0), 0.0)
    start = U.arc_point_at("multicorn", C1, seed)
    hs = [h for _, h in U.arc_heights("multicorn", C1, start, 12, 0.01)]
    diffs = np.diff(hs)
    assert np.all(diffs > 1e-6) or np.all(diffs < -1e-6)


def test_height_half_point_is_consistent():
    seed = U.boundary_seed("multicorn", C1, (0.0, 0.0), 0.0)
    ap = U.find_arc_point("multicorn", C1, 0.5, seed)
    assert ap.height == pytest.approx(0.5, abs=1e-6)
    assert abs(ap.c.imag) > 0.1
    assert abs(ap.height - critical_ecalle_height(ap.parabolic)) < 1e-4


def test_find_arc_point_rejects_cusp_walk():
    with pytest.raises(NotOnArc):
        U.find_arc_point("multicorn", C1, 0.0, ((-0.75, 0.0), -0.5))


def test_real_cord_is_real(airplane_root):
    step = 1e-3
    tr = U.trace_cord(airplane_root, (-1.6, 0.0), step)
    assert max(abs(d) for d in tr.transverse_displacements) < 1e-6
    assert U.wiggle_count(tr, U.default_threshold(step)) == 0
    end = np.array(tr.polyline[-1])
    assert np.linalg.norm(end - np.array(airplane_root.params)) < 2 * step
    lines = tr.to_csv().splitlines()
    assert lines[0] == "step_index,re,im,displacement"
    assert len(lines) == len(tr.polyline) + 1


def test_membership():
    inside = U.Membership("multicorn")
    assert inside((-1.0, 0.0)) and not inside((1.0, 1.0))
    cubic = U.Membership("real-cubic")
    assert cubic((0.7071067811865476, 0.0)) and not cubic((2.0, 0.0))

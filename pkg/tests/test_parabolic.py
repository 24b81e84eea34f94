import cmath
import math

import numpy as np
import pytest

from multicorn_lab import parabolic as P
from multicorn_lab.core import UnicriticalAnti, UnicriticalHolo
from multicorn_lab.errors import NotAntiReturn, NotInPetal, NotSimplePetal
from multicorn_lab.raster import Window

OMEGA = cmath.exp(2j * math.pi / 3)


@pytest.fixture(scope="module")
def quad():
    """The germ z + z^2 at 0."""
    return P.ParabolicGerm.from_polynomial([0, 1, 1])


@pytest.fixture(scope="module")
def tricorn_quarter():
    return P.parabolic_germ_for(UnicriticalAnti(2, 0.25), 1)


def test_germ_structure(quad):
    assert quad.petals == 1
    assert abs(quad.expansion[1] - 1) < 1e-12
    assert quad.anchor == pytest.approx(-0.5)


def test_attracting_coordinate_normalization(quad):
    assert abs(P.attracting_fatou(quad, -0.5)) < 1e-9
    assert abs(P.attracting_fatou(quad, -0.25) - 1) < 1e-9
    z = -0.5
    for _ in range(10):
        z = z + z * z
    assert abs(P.attracting_fatou(quad, z) - 10) < 1e-6


def test_not_in_petal(quad):
    with pytest.raises(NotInPetal):
        P.attracting_fatou(quad, 0.5)


def test_abel_residual_on_petal_samples(quad):
    assert P.abel_residual(quad, P.petal_samples(quad, 100)) < 1e-6


def test_repelling_inverse(quad):
    rng = np.random.default_rng(4)
    for _ in range(10):
        zeta = complex(rng.uniform(-60, -21), rng.uniform(-5, 5))
        lhs = quad.T(P.repelling_fatou_inverse(quad, zeta))
        assert abs(lhs - P.repelling_fatou_inverse(quad, zeta + 1)) < 1e-6
        assert P.repelling_fatou_inverse(quad, zeta.conjugate()) == \
            pytest.approx(P.repelling_fatou_inverse(quad, zeta).conjugate(), abs=1e-12)
    assert abs(P.repelling_fatou_inverse(quad, -1e6) - quad.z0) < 1e-4


def test_lifted_horn_equivariance_and_eta(quad):
    for x in np.linspace(-0.5, 0.4, 10):
        zeta = complex(x, 12.0)
        assert abs(P.lifted_horn(quad, zeta + 1) - P.lifted_horn(quad, zeta) - 1) < 1e-6
    up, spread = P.eta(quad, 1)
    assert spread < 1e-5
    low, _ = P.eta(quad, -1)
    assert up == pytest.approx(low.conjugate(), abs=1e-6)


def test_real_symmetry_of_real_germ(quad):
    assert P.check_real_symmetry(quad, P.symmetry_samples(quad)) < 1e-6


def test_find_parabolic_parameter_examples():
    c, g = P.find_parabolic_parameter("multibrot", 1, 1, (0.3, 0.4))
    assert c == pytest.approx(0.25, abs=1e-9) and g.z0 == pytest.approx(0.5, abs=1e-6)
    c, g = P.find_parabolic_parameter("multibrot", 3, 1, (-1.76, -0.03))
    assert c == pytest.approx(-1.75, abs=1e-9)
    c, g = P.find_parabolic_parameter("multicorn", 1, 1, (-0.7, -0.45))
    assert c == pytest.approx(-0.75, abs=1e-8) and g.z0 == pytest.approx(-0.5, abs=1e-5)


def test_fingerprint_of_quarter():
    g = P.parabolic_germ_for(UnicriticalHolo(2, 0.25), 1)
    fp = P.germ_fingerprint(g)
    assert fp.singular_count == 1 and fp.ecalle_height is None
    assert '"singular_count": 1' in fp.to_json("multibrot", [0.25, 0])


def test_anti_return_has_two_singular_values(tricorn_quarter):
    fp = P.germ_fingerprint(tricorn_quarter)
    assert fp.singular_count == 2
    assert abs(fp.ecalle_height) < 1e-6


def test_height_requires_anti_return():
    g = P.parabolic_germ_for(UnicriticalHolo(2, 0.25), 1)
    with pytest.raises(NotAntiReturn):
        P.critical_ecalle_height(g)


def test_cusp_has_two_petals():
    g = P.parabolic_germ_for(UnicriticalAnti(2, -0.75), 1, -0.5)
    assert g.petals == 2
    with pytest.raises(NotSimplePetal):
        P.critical_ecalle_height(g)


def test_height_reflects_under_anti_return(tricorn_quarter):
    g = tricorn_quarter
    A = g.map
    v = g.marker
    psi_v = P.attracting_fatou(g, v)
    psi_Av = P.attracting_fatou(g, A.c + v.conjugate() ** 2)
    assert psi_Av == pytest.approx(psi_v.conjugate() + 0.5, abs=1e-6)


def test_height_insensitive_to_depth(tricorn_quarter):
    g = tricorn_quarter
    z = np.array([g.marker])
    a, _ = P.attracting_raw_array(g, z, switch=P.U_SWITCH)
    b, _ = P.attracting_raw_array(g, z, switch=2 * P.U_SWITCH)
    assert abs(a[0] - b[0]) < 1e-5


def test_conjugate_parameter_mirrors_eta():
    c = 0.2 + 0.11j
    c, g = P.find_parabolic_parameter("multibrot", 1, 1, (c, 0.45 + 0.1j))
    fp1 = P.germ_fingerprint(g)
    fp2 = P.germ_fingerprint(P.germ_at(UnicriticalHolo(2, c.conjugate()), g.z0.conjugate(), 1))
    assert fp1.singular_count == fp2.singular_count == 1
    assert abs(fp1.eta_upper.imag + fp2.eta_lower.imag) < 1e-6


def test_fingerprint_invariant_under_rotation(tricorn_quarter):
    rotated = P.parabolic_germ_for(UnicriticalAnti(2, OMEGA * 0.25), 1)
    fp1 = P.germ_fingerprint(tricorn_quarter)
    fp2 = P.germ_fingerprint(rotated)
    assert P.fingerprints_match(fp1, fp2) < 1e-6


def test_chessboard(quad):
    win = Window(complex(-0.5, 0), 0.8, 0.8)
    r = P.render_chessboard(quad, win, 41, 41)
    assert r.cell(20, 20).tag == "interior"
    vals = {r.cell(px, py).value for px in range(41) for py in range(41)
            if r.cell(px, py).tag == "interior"}
    assert vals == {0, 1, 2, 3}
    # away from the critical point the real axis is the attracting equator
    up, down = r.cell(30, 19).value, r.cell(30, 21).value
    assert (up >= 2) != (down >= 2)
    # four tiles meet at the critical point -1/2
    assert {r.cell(px, py).value for px in range(17, 24) for py in range(17, 24)} == {0, 1, 2, 3}
    assert r.to_ppm() == P.render_chessboard(quad, win, 41, 41).to_ppm()

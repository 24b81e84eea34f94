import cmath
import math

import numpy as np
import pytest

from multicorn_lab import curves, raster
from multicorn_lab.raster import CellClass, Window

OMEGA = cmath.exp(2j * math.pi / 3)


def test_classify_examples():
    assert raster.classify_parameter(raster.multibrot(2), 0, 100) == CellClass.interior(1)
    cell = raster.classify_parameter(raster.multicorn(2), -1.75, 5000)
    assert cell.tag == "unknown" or cell == CellClass.interior(3)
    assert raster.classify_parameter(raster.real_cubic(), (0.7071067811865476, 0), 100) == \
        CellClass.interior(2)
    assert raster.classify_parameter(raster.multibrot(2), 1, 100).tag == "exterior"


def test_parse_family():
    assert raster.parse_family("multicorn:3") == raster.multicorn(3)
    assert raster.parse_family("real_cubic") == raster.real_cubic()


def test_small_render_is_complete_and_deterministic():
    win = Window(0j, 4, 4)
    r1 = raster.render_locus(raster.multibrot(2), win, 2, 2, 100)
    r2 = raster.render_locus(raster.multibrot(2), win, 2, 2, 100)
    assert len(r1.cells) == 4
    assert r1.to_ppm() == r2.to_ppm()


def test_pixel_centers():
    win = Window.from_bounds(-2, 1, -1.5, 1.5)
    assert win.pixel_center(0, 0, 3, 3) == pytest.approx(complex(-1.5, 1.0))
    assert win.pixel_center(1, 1, 3, 3) == pytest.approx(complex(-0.5, 0.0))


def test_multicorn_rotational_symmetry():
    rng = np.random.default_rng(7)
    fam = raster.multicorn(2)
    for _ in range(300):
        c = complex(*rng.uniform(-1.5, 1.5, 2))
        a = raster.classify_parameter(fam, c, 400)
        b = raster.classify_parameter(fam, OMEGA * c, 400)
        if a.tag == "exterior" and b.tag == "exterior":
            # escape times may differ by one step at rounding-level radii
            assert abs(a.value - b.value) <= 1
        else:
            assert a == b


def test_real_cubic_reflection_symmetry():
    win = Window.from_bounds(0, 1.2, -1, 1)
    r = raster.render_locus(raster.real_cubic(), win, 60, 64, 300)
    assert np.array_equal(r.kinds, r.kinds[::-1])
    assert np.array_equal(r.values[r.kinds == 1], r.values[::-1][r.kinds == 1])


def test_real_cubic_H1_matches_closed_form():
    win = Window.from_bounds(0, 1.2, -1, 1)
    r = raster.render_locus(raster.real_cubic(), win, 100, 100, 2000)
    checked = 0
    for py in range(r.height_px):
        for px in range(r.width_px):
            p = r.parameter(px, py)
            a, b = p.real, p.imag
            margin = abs(27 * b * b - curves.phi1(a))
            if margin < 0.5 or abs(a - 1 / math.sqrt(3)) < 0.02:
                continue
            checked += 1
            assert (r.cell(px, py) == CellClass.interior(1)) == curves.in_H1(a, b)
    assert checked > 5000


def test_monotone_in_max_iter():
    win = Window.from_bounds(-2, 1, -1.5, 1.5)
    lo = raster.render_locus(raster.multicorn(2), win, 64, 64, 50)
    hi = raster.render_locus(raster.multicorn(2), win, 64, 64, 500)
    assert not np.any((lo.kinds == 0) & (hi.kinds == 1))


def test_census_counts_components():
    win = Window.from_bounds(-2, 0.5, -1.25, 1.25)
    r = raster.render_locus(raster.multibrot(2), win, 200, 200, 500)
    assert raster.component_census(r, 1) == 1
    assert raster.component_census(r, 2) == 1
    assert raster.component_census(r, 3) == 3


def test_ppm_header_and_palette():
    win = Window(0j, 4, 4)
    r = raster.render_locus(raster.multibrot(2), win, 5, 3, 50)
    data = r.to_ppm()
    assert data.startswith(b"P6\n5 3\n255\n")
    assert len(data) == len(b"P6\n5 3\n255\n") + 5 * 3 * 3
    img = raster.rgb_image(r)
    for py in range(3):
        for px in range(5):
            cell = r.cell(px, py)
            if cell.tag == "interior":
                assert tuple(img[py, px]) == tuple(raster.PALETTE[cell.value % 16])
            elif cell.tag == "exterior":
                v = cell.value % 256
                assert tuple(img[py, px]) == (v, v, v)
            else:
                assert tuple(img[py, px]) == (0, 0, 0)


def test_csv_dump():
    r = raster.render_locus(raster.multibrot(2), Window(0j, 4, 4), 2, 2, 50)
    lines = r.to_csv().splitlines()
    assert lines[0] == "px,py,re,im,class,value"
    assert len(lines) == 5


def test_thread_count_does_not_change_output():
    win = Window.from_bounds(-2, 1, -1.5, 1.5)
    a = raster.render_locus(raster.multicorn(2), win, 96, 80, 300, threads=1)
    b = raster.render_locus(raster.multicorn(2), win, 96, 80, 300, threads=4)
    assert a.to_ppm() == b.to_ppm()

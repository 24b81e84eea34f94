import math

import numpy as np
import pytest

from multicorn_lab.core import (
    AntiCubicReturn,
    RealCubic,
    UnicriticalAnti,
    UnicriticalHolo,
    derivative,
    evaluate,
    find_attracting_cycle,
    find_cycle,
    iterate,
    iterate_orbit,
    second_iterate_derivative,
)
from multicorn_lab.errors import ContractViolation, NoConvergence

A0 = 0.7071067811865476


def test_eval_examples():
    assert evaluate(RealCubic(A0, 0), 1j * A0) == pytest.approx(-1j * A0, abs=1e-15)
    assert evaluate(RealCubic(0, 0), 1) == -1
    assert evaluate(UnicriticalAnti(2, 0), 1j) == -1


def test_eval_overflow_returns_sentinel():
    w = evaluate(UnicriticalHolo(2, 0), 1e200)
    assert math.isinf(w.real)


def test_anti_cubic_return_conjugates_iterate():
    k = AntiCubicReturn(0.4, 0.3, 2)
    z = 0.1 + 0.2j
    assert evaluate(k, z) == pytest.approx(iterate(RealCubic(0.4, 0.3), z, 2).conjugate())


def test_derivative_examples():
    assert derivative(RealCubic(A0, 0), 0) == pytest.approx(-1.5, abs=1e-15)
    assert derivative(UnicriticalHolo(2, 0.3 + 0.1j), 0) == 0
    assert derivative(RealCubic(0.6, -0.2), 0.6j) == pytest.approx(0, abs=1e-15)


def test_derivative_rejects_anti_maps():
    with pytest.raises(ContractViolation):
        derivative(UnicriticalAnti(2, 0), 0.1)


def test_second_iterate_derivative():
    assert second_iterate_derivative(UnicriticalAnti(2, 0), 0) == 0
    k = AntiCubicReturn(A0, 0, 1)
    assert abs(second_iterate_derivative(k, 1j * A0)) < 1e-14
    assert second_iterate_derivative(UnicriticalAnti(2, -0.75), -0.5) == pytest.approx(1, abs=1e-14)


def test_second_iterate_derivative_matches_finite_difference():
    f = UnicriticalAnti(3, 0.2 - 0.4j)
    z, h = 0.3 + 0.1j, 1e-6
    fd = (iterate(f, z + h, 2) - iterate(f, z - h, 2)) / (2 * h)
    assert second_iterate_derivative(f, z) == pytest.approx(fd, rel=1e-7)


def test_iterate_orbit():
    orb = iterate_orbit(UnicriticalHolo(2, 0), 0, 50)
    assert not orb.escaped and set(orb.points) == {0}
    # 0, 1, 2, 5: index 3 is the first point beyond radius 2
    orb = iterate_orbit(UnicriticalHolo(2, 1), 0, 50, escape_radius=2)
    assert orb.escaped and orb.escape_index == 3
    assert orb.points[:4] == (0, 1, 2, 5)
    orb = iterate_orbit(RealCubic(2, 0), 2j, 5, escape_radius=10)
    assert orb.escaped


def test_iterate_orbit_contract():
    with pytest.raises(ContractViolation):
        iterate_orbit(UnicriticalHolo(2, 0), 0, 0)


def test_find_cycle_examples():
    cyc = find_cycle(UnicriticalHolo(2, 0), 1, 0.1)
    assert cyc.points[0] == pytest.approx(0, abs=1e-12)
    assert cyc.stability == "superattracting"
    cyc = find_cycle(UnicriticalHolo(2, 0.25), 1, 0.4)
    assert cyc.points[0] == pytest.approx(0.5, abs=1e-6)
    assert cyc.multiplier == pytest.approx(1, abs=1e-6)
    assert cyc.stability == "indifferent"
    cyc = find_cycle(RealCubic(A0, 0), 2, 0.7j)
    assert sorted(p.imag for p in cyc.points) == pytest.approx([-A0, A0], abs=1e-12)
    assert abs(cyc.multiplier) < 1e-12


def test_find_cycle_multiplier_matches_finite_difference():
    f = UnicriticalHolo(2, -0.12 + 0.75j)
    cyc = find_cycle(f, 3, -0.1 + 0.7j)
    z, h = cyc.points[0], 1e-6
    fd = (iterate(f, z + h, 3) - iterate(f, z - h, 3)) / (2 * h)
    assert abs(iterate(f, z, 3) - z) < 1e-12
    assert abs(cyc.multiplier - fd) < 1e-5 * (1 + abs(cyc.multiplier))


def test_find_cycle_no_convergence():
    with pytest.raises(NoConvergence):
        find_cycle(UnicriticalHolo(2, 5.0), 1, 100.0, max_steps=3)


def test_find_attracting_cycle():
    cyc = find_attracting_cycle(UnicriticalHolo(2, -1))
    assert cyc.period == 2
    assert sorted(p.real for p in cyc.points) == pytest.approx([-1, 0], abs=1e-12)
    cyc = find_attracting_cycle(UnicriticalAnti(2, 0))
    assert cyc.period == 1 and abs(cyc.points[0]) < 1e-12
    assert find_attracting_cycle(UnicriticalHolo(2, 0.3)) is None


def test_conjugation_equivariance_and_sign_symmetry():
    rng = np.random.default_rng(1)
    for _ in range(50):
        a, b = rng.uniform(0, 1.5), rng.uniform(-1, 1)
        z = complex(*rng.normal(size=2))
        g = RealCubic(a, b)
        assert evaluate(g, z.conjugate()) == pytest.approx(evaluate(g, z).conjugate(), rel=1e-14)
        assert evaluate(g, -z) == pytest.approx(-evaluate(RealCubic(a, -b), z), rel=1e-14)


def test_interval_dynamics_at_bitransitive_center():
    g = RealCubic(A0, 0)
    for y in np.random.default_rng(0).uniform(0, A0, 100):
        z = complex(0, y)
        for _ in range(10_000):
            z = iterate(g, z, 2)
            if abs(z - 1j * A0) < 1e-6:
                break
        assert abs(z - 1j * A0) < 1e-6
    assert abs(derivative(g, 0)) > 1

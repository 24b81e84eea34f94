"""Anti-polynomial-like return maps of real cubics and numerical straightening."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import root

from . import _kernels as K
from . import series
from .core import (
    AntiCubicReturn,
    RealCubic,
    UnicriticalAnti,
    evaluate,
    find_attracting_cycle,
    find_cycle,
    iterate,
    iterate_jet,
)
from .errors import (
    AmbiguousComponent,
    ContractViolation,
    DynamicsError,
    NoAttractingCycle,
    NoConvergence,
    NotACenter,
)
from .raster import Raster, Window


def anti_return(a: float, b: float, n: int) -> AntiCubicReturn:
    """``k(z) = conj(g_{a,b}^n(z))``."""
    return AntiCubicReturn(a, b, n)


# ---------------------------------------------------------------------------
# seeds


def _basin_radius(a0: float, b0: float, n: int, probes: int = 64, r_max: float = 4.0,
                  samples: int = 400, iters: int = 200) -> float:
    """Largest distance from ``ia0``, over ``probes`` rays, up to which the ray
    stays in the immediate basin of the superattracting fixed point of ``k``."""
    k = anti_return(a0, b0, n)
    center = complex(0.0, a0)
    best = 0.0
    for j in range(probes):
        u = cmath.exp(2j * math.pi * (j + 0.5) / probes)
        reach = 0.0
        for s in range(1, samples + 1):
            t = r_max * s / samples
            z = center + t * u
            for _ in range(iters):
                z = evaluate(k, z)
                if not abs(z) < 1e3:
                    break
            if not abs(z - center) < 1e-6:
                break
            reach = t
        best = max(best, reach)
    return best


@dataclass(frozen=True)
class RenormSeed:
    """A center ``(a0, b0)`` with ``g^n(i a0) = -i a0``."""

    a0: float
    b0: float
    n: int
    local_radius: float = field(default=0.0)

    def __post_init__(self):
        if self.n < 1 or self.a0 < 0:
            raise ContractViolation("seed needs n >= 1 and a0 >= 0")
        w = iterate(RealCubic(self.a0, self.b0), complex(0, self.a0), self.n)
        if not abs(w + complex(0, self.a0)) < 1e-9:
            raise NotACenter(f"g^{self.n}(i a0) = {w!r} is not -i a0")
        if not self.local_radius > 0:
            object.__setattr__(
                self, "local_radius", 3.0 * _basin_radius(self.a0, self.b0, self.n)
            )

    @property
    def center(self) -> complex:
        return complex(0.0, self.a0)


@lru_cache(maxsize=8)
def default_seed() -> RenormSeed:
    return RenormSeed(math.sqrt(0.5), 0.0, 1)


@dataclass(frozen=True)
class RenormResult:
    renormalizable: bool
    escape_index: Optional[int] = None
    inner_period: Optional[int] = None


def is_renormalizable_approx(
    a: float,
    b: float,
    seed: RenormSeed,
    max_iter: int = 1000,
    local_radius: Optional[float] = None,
) -> RenormResult:
    """Bounded-orbit proxy: the ``k``-orbit of ``ia`` stays near the seed's disk."""
    radius = seed.local_radius if local_radius is None else float(local_radius)
    kind, value = K.renorm_classify(3, float(a), float(b), seed.n, int(max_iter),
                                    seed.center, radius)
    if kind == K.EXTERIOR:
        return RenormResult(False, int(value), None)
    if kind == K.CAPTURED:
        # bounded, but the attracting cycle is not of renormalization type
        return RenormResult(False, 0, None)
    if kind == K.INTERIOR:
        return RenormResult(True, None, int(value))
    return RenormResult(True, None, None)


def render_tricorn_like(
    seed: RenormSeed,
    window: Window,
    width_px: int,
    height_px: int,
    max_iter: int = 1000,
    threads: Optional[int] = None,
    local_radius: Optional[float] = None,
) -> Raster:
    """Raster of the proxy; interior cells carry the inner period under ``k``."""
    if width_px < 1 or height_px < 1:
        raise ContractViolation("resolution must be at least 1x1")
    radius = seed.local_radius if local_radius is None else float(local_radius)
    kinds = np.empty((height_px, width_px), dtype=np.int8)
    values = np.empty((height_px, width_px), dtype=np.int32)
    K.set_threads(threads)
    K.render_renorm(
        seed.n, window.center.real, window.center.imag,
        window.width / width_px, window.height / height_px,
        width_px, height_px, int(max_iter), seed.center, radius, kinds, values,
    )
    return Raster(width_px, height_px, window, kinds, values, f"tricorn_like(n={seed.n})")


# ---------------------------------------------------------------------------
# multicorn centers


def _critical_orbit_jet(c: complex, d: int, m: int) -> Tuple[complex, complex, complex]:
    """``f_c^m(0)`` with its Wirtinger derivatives in ``c``."""
    z, zc, zcb = 0j, 0j, 0j
    for _ in range(m):
        zb = z.conjugate()
        fzb = d * zb ** (d - 1)
        # z_{j+1} = conj(z_j)^d + c
        z, zc, zcb = zb ** d + c, fzb * zcb.conjugate() + 1.0, fzb * zc.conjugate()
    return z, zc, zcb


def newton_center(c0: complex, m: int, d: int = 2, steps: int = 64) -> complex:
    """Solve ``f_c^m(0) = 0`` by real 2-D Newton from ``c0``."""
    c = complex(c0)
    for _ in range(steps):
        F, A, B = _critical_orbit_jet(c, d, m)
        if not cmath.isfinite(F):
            raise NoConvergence("critical orbit escaped")
        c1, c2 = A + B, 1j * (A - B)
        det = c1.real * c2.imag - c2.real * c1.imag
        if abs(det) < 1e-14:
            raise NoConvergence("singular Jacobian for the center equation")
        dx = (-F.real * c2.imag + c2.real * F.imag) / det
        dy = (-c1.real * F.imag + F.real * c1.imag) / det
        c += complex(dx, dy)
        if abs(complex(dx, dy)) < 1e-15 * (1 + abs(c)):
            break
    if abs(_critical_orbit_jet(c, d, m)[0]) > 1e-11:
        raise NoConvergence(f"center equation residual too large at {c!r}")
    return c


@lru_cache(maxsize=32)
def multicorn_centers(m: int, d: int = 2, grid: int = 48) -> Tuple[complex, ...]:
    """All centers of hyperbolic components of exact period ``m`` (grid-seeded)."""
    found = []
    for x in np.linspace(-2.0, 2.0, grid):
        for y in np.linspace(-2.0, 2.0, grid):
            try:
                c = newton_center(complex(x, y), m, d, steps=80)
            except NoConvergence:
                continue
            if any(abs(c - e) < 1e-8 for e in found):
                continue
            if any(abs(_critical_orbit_jet(c, d, j)[0]) < 1e-8 for j in range(1, m)):
                continue
            found.append(c)
    found.sort(key=lambda c: (round(c.real, 9), round(c.imag, 9)))
    return tuple(found)


def _canonical_center(centers, d: int) -> complex:
    """Pick a representative when all centers are rotations of one another."""
    omega = cmath.exp(2j * math.pi / (d + 1))
    ref = centers[0]
    orbit = [ref * omega ** j for j in range(d + 1)]
    if not all(any(abs(c - o) < 1e-8 for o in orbit) for c in centers):
        raise AmbiguousComponent(
            f"{len(centers)} centers fall in several classes; pass component_center"
        )
    real = [c for c in centers if abs(c.imag) < 1e-9]
    if real:
        return complex(min(real, key=lambda c: c.real).real, 0.0)
    return min(centers, key=lambda c: abs(cmath.phase(c)))


def inner_center_period(a: float, b: float, seed: RenormSeed, max_period: int = 64,
                        tol: float = 1e-8) -> int:
    """Period of ``ia`` under ``k`` when it is periodic, else :class:`NotACenter`."""
    k = anti_return(a, b, seed.n)
    z0 = complex(0.0, a)
    z = z0
    for m in range(1, max_period + 1):
        z = evaluate(k, z)
        if not abs(z) < 1e3:
            break
        if abs(z - z0) < tol:
            return m
    raise NotACenter(f"critical point is not periodic under k at ({a!r}, {b!r})")


def straighten_center(a: float, b: float, seed: RenormSeed,
                      component_center: Optional[complex] = None, d: int = 2) -> complex:
    """Multicorn center matching the inner period of the cubic center ``(a, b)``."""
    m = inner_center_period(a, b, seed)
    centers = multicorn_centers(m, d)
    if not centers:
        raise NotACenter(f"no multicorn center of period {m}")
    if component_center is not None:
        return newton_center(min(centers, key=lambda c: abs(c - component_center)), m, d)
    return _canonical_center(centers, d)


# ---------------------------------------------------------------------------
# straightening by conformal invariants of the attracting cycle


def koenigs_value(f, z_star: complex, period: int, z: complex, radius: float = 1e-3,
                  order: int = 14, max_steps: int = 200000) -> complex:
    """Koenigs coordinate (derivative 1 at ``z_star``) of the first holomorphic
    return ``R`` at ``z``: iterate into a small disk, then apply the local
    linearizer series and divide by ``mu**j``."""
    count = 2 * period if (period % 2 and _is_anti(f)) else period
    jet = series.return_jet(f, z_star, period, order)
    mu = jet[1]
    phi = series.koenigs_series(jet)
    w = complex(z)
    scale = 1.0 + 0j
    for _ in range(max_steps):
        if abs(w - z_star) < radius:
            break
        w = iterate(f, w, count)
        scale *= mu
        if not abs(w) < 1e3:
            raise NoConvergence("point left the basin")
    else:
        raise NoConvergence("Koenigs iteration did not settle")
    return series.horner(phi, w - z_star) / scale


def _is_anti(f) -> bool:
    return isinstance(f, (UnicriticalAnti, AntiCubicReturn))


def cycle_invariant(f, cycle_point: complex, period: int, crit: complex) -> complex:
    """Conformal invariant of an attracting cycle captured by ``crit``.

    Even periods (holomorphic returns): the multiplier.  Odd periods of an
    anti-holomorphic map: ``lambda * exp(-i arg B) * phi(v)^2 / |phi(v)|^2``
    where ``B`` is the anti-derivative of the return ``A = f^period``,
    ``lambda = |B|``, ``v = A(crit)`` and ``phi`` the Koenigs coordinate of
    ``A∘A``.  It vanishes exactly at centers.
    """
    if not (_is_anti(f) and period % 2):
        return iterate_jet(f, cycle_point, period)[1]
    _, _, B = iterate_jet(f, cycle_point, period)
    lam = abs(B)
    if lam < 1e-12:
        return 0j
    v = iterate(f, crit, period)
    phi = koenigs_value(f, cycle_point, period, v)
    if abs(phi) == 0:
        return 0j
    return lam * cmath.exp(-1j * cmath.phase(B)) * (phi / abs(phi)) ** 2


def _captured_cycle_point(f, cycle, crit: complex, budget: int = 100000) -> complex:
    """Cycle point attracting ``crit`` directly, i.e. in its Fatou component."""
    count = cycle.period
    if _is_anti(f) and count % 2:
        count *= 2
    w = complex(crit)
    for _ in range(budget):
        near = min(cycle.points, key=lambda p: abs(p - w))
        if abs(near - w) < 1e-6:
            return near
        w = iterate(f, w, count)
    raise NoConvergence("critical orbit is not captured by the cycle")


@dataclass(frozen=True)
class StraighteningSample:
    a: float
    b: float
    mu: complex
    c: complex


def straighten_by_multiplier(
    a: float,
    b: float,
    seed: RenormSeed,
    target_component_center: complex,
    guess: Optional[complex] = None,
    d: int = 2,
    max_iter: int = 4000,
) -> complex:
    """Multicorn parameter with the same conformal cycle invariant as ``(a, b)``.

    ``target_component_center`` names the multicorn component; ``guess``
    (default: that center) seeds the Newton solve.
    """
    return straighten_sample(a, b, seed, target_component_center, guess, d, max_iter).c


def _initial_guess(invariant_at, target: complex, c0: complex, guess: Optional[complex],
                   delta: float = 1e-3, directions: int = 24) -> complex:
    """Start point for the invariant solve near a component center.

    The invariant is a branched cover around the center (three sheets for odd
    periods of the tricorn), so the start direction is chosen among the probe
    directions whose invariant phase matches the target: nearest to ``guess``
    when given, else nearest to the real axis.
    """
    probes = []
    for j in range(directions):
        u = cmath.exp(2j * math.pi * j / directions)
        try:
            probes.append((u, invariant_at(c0 + delta * u)))
        except DynamicsError:
            continue
    if not probes:
        raise NoConvergence("invariant undefined around the component center")

    def mismatch(v):
        return abs(cmath.phase(v / target)) if v != 0 else math.pi

    best = min(mismatch(v) for _, v in probes)
    good = [(u, v) for u, v in probes if mismatch(v) <= best + 2 * math.pi / directions]
    if guess is not None and guess != c0:
        g = complex(guess) - c0
        u, v = min(good, key=lambda p: abs(cmath.phase(p[0] / g)))
    else:
        u, v = min(good, key=lambda p: (round(abs(p[0].imag), 9), -p[0].real))
    # bisect along the ray for |invariant| = |target|; failures count as beyond
    def inside(r):
        try:
            return abs(invariant_at(c0 + r * u)) < abs(target)
        except DynamicsError:
            return False

    lo, hi = delta, max(2 * delta, abs(target) * delta / abs(v))
    while inside(hi) and hi < 8.0:
        lo, hi = hi, 2 * hi
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if inside(mid):
            lo = mid
        else:
            hi = mid
    return c0 + u * lo


def straighten_sample(a, b, seed, target_component_center, guess=None, d=2, max_iter=4000):
    k = anti_return(a, b, seed.n)
    cyc = find_attracting_cycle(k, max_iter)
    if cyc is None:
        raise NoAttractingCycle(f"no attracting inner cycle at ({a!r}, {b!r})")
    m = cyc.period
    crit_k = complex(0.0, a)
    zk = _captured_cycle_point(k, cyc, crit_k)
    target = cycle_invariant(k, zk, m, crit_k)
    c0 = complex(target_component_center)
    # numerically located centers carry multipliers of order 1e-12
    if abs(target) < 1e-9:
        start = c0 if guess is None else complex(guess)
        return StraighteningSample(a, b, cyc.multiplier, newton_center(start, m, d))

    state = {"z": None}

    def invariant_at(c: complex) -> complex:
        f = UnicriticalAnti(d, c)
        cyc_f = None
        if state["z"] is not None:
            try:
                cyc_f = find_cycle(f, m, state["z"])
            except DynamicsError:
                cyc_f = None
        if cyc_f is None or cyc_f.period != m or abs(cyc_f.multiplier) >= 1:
            cyc_f = find_attracting_cycle(f, max_iter)
            if cyc_f is None or cyc_f.period != m:
                raise NoConvergence(f"no attracting {m}-cycle at c={c!r}")
        zf = _captured_cycle_point(f, cyc_f, 0j)
        state["z"] = zf
        return cycle_invariant(f, zf, m, 0j)

    def residual(x):
        try:
            v = invariant_at(complex(x[0], x[1])) - target
        except DynamicsError:
            return [1e3, 1e3]
        return [v.real, v.imag]

    if guess is not None and abs(complex(guess) - c0) > 1e-6:
        starts = [complex(guess), _initial_guess(invariant_at, target, c0, guess)]
    else:
        starts = [_initial_guess(invariant_at, target, c0, guess)]
    err = math.inf
    for start in starts:
        sol = root(residual, [start.real, start.imag], method="hybr", options={"xtol": 1e-13})
        err = math.hypot(*residual(sol.x))
        if err < 1e-9:
            return StraighteningSample(a, b, cyc.multiplier, complex(sol.x[0], sol.x[1]))
    raise NoConvergence(f"straightening residual {err:.3g}")


def straighten_path(points, seed, target_component_center, d=2, max_iter=4000) -> list:
    """Straighten a sequence of ``(a, b)`` points, each solve seeded by the last."""
    out = []
    guess = None
    for a, b in points:
        sample = straighten_sample(a, b, seed, target_component_center, guess, d, max_iter)
        out.append(sample)
        guess = sample.c
    return out


def straightening_csv(samples) -> str:
    lines = ["a,b,mu_re,mu_im,c_re,c_im"]
    for s in samples:
        mu = complex(s.mu)
        lines.append(f"{s.a!r},{s.b!r},{mu.real!r},{mu.imag!r},{s.c.real!r},{s.c.imag!r}")
    return "\n".join(lines) + "\n"


def inner_centers(seed: RenormSeed, m: int, bounds=(0.45, 0.95, -1.05, 1.05),
                  grid: int = 24, max_iter: int = 1000) -> Tuple[Tuple[float, float], ...]:
    """Parameters ``(a, b)`` in ``bounds`` where ``ia`` has exact period ``m``
    under ``k`` and the proxy accepts them (grid-seeded 2-D solve)."""
    a0, a1, b0, b1 = bounds

    def residual(x):
        a = max(x[0], 0.0)
        k = anti_return(a, x[1], seed.n)
        w = iterate(k, complex(0.0, a), m) - complex(0.0, a)
        if not cmath.isfinite(w) or abs(w) > 1e6:
            return [1e6, 1e6]
        return [w.real, w.imag]

    found = []
    for a in np.linspace(a0, a1, grid):
        for b in np.linspace(b0, b1, grid):
            sol = root(residual, [a, b], method="hybr", options={"xtol": 1e-14})
            x = sol.x
            if not (a0 <= x[0] <= a1 and b0 <= x[1] <= b1):
                continue
            if math.hypot(*residual(x)) > 1e-11:
                continue
            if any(abs(x[0] - p[0]) + abs(x[1] - p[1]) < 1e-7 for p in found):
                continue
            res = is_renormalizable_approx(x[0], x[1], seed, max_iter)
            if res.renormalizable and res.inner_period == m:
                found.append((float(x[0]), float(x[1])))
    found.sort(key=lambda p: (round(p[0], 9), round(p[1], 9)))
    return tuple(found)

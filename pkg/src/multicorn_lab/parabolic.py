"""Parabolic germs: Fatou coordinates, horn maps, fingerprints and Écalle heights.

All coordinates are built on the formal Fatou series of the tangent-to-identity
return ``T(z0 + w) = z0 + w + t_{q+1} w^{q+1} + ...``:

    psi(w) = sum_{k=1..q} alpha_k w^-k + beta log w + sum_{j>=1} gamma_j w^j

solved order by order so that ``psi(T(w)) = psi(w) + 1`` as formal series.
Points are iterated into a small sector around an attracting (repelling)
direction, where the truncated series is accurate, and the iteration count is
subtracted (added).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from . import series
from .core import (
    UnicriticalAnti,
    UnicriticalHolo,
    critical_point,
    evaluate,
    is_anti,
    iterate,
    minimal_period,
)
from .errors import (
    ContractViolation,
    NoConvergence,
    NotAntiReturn,
    NotInPetal,
    NotSimplePetal,
    OutsideDomain,
    PrecisionLoss,
    WrongPeriod,
)
from .raster import Raster, Window
from . import _kernels as K

SERIES_TERMS = 12
U_SWITCH = 200.0  # |psi| beyond which the truncated series is used directly
MAX_STEPS = 200_000
PETAL_TOL = 1e-4


# ---------------------------------------------------------------------------
# formal Fatou series


def _log1p_series(s: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros(order + 1, dtype=complex)
    power = np.zeros(order + 1, dtype=complex)
    power[0] = 1.0
    for k in range(1, order + 1):
        power = series.mul(power, s, order)
        power = np.pad(power, (0, order + 1 - power.size))
        out += ((-1) ** (k + 1) / k) * power
    return out


def _pow1p_series(s: np.ndarray, e: int, order: int) -> np.ndarray:
    """``(1 + s)**e - 1`` for integer ``e`` (negative allowed)."""
    out = np.zeros(order + 1, dtype=complex)
    term = np.zeros(order + 1, dtype=complex)
    term[0] = 1.0
    coef = 1.0
    for k in range(1, order + 1):
        coef *= (e - k + 1) / k
        term = series.mul(term, s, order)
        term = np.pad(term, (0, order + 1 - term.size))
        if coef == 0:
            break
        out += coef * term
    return out


@dataclass(frozen=True, eq=False)
class FormalFatou:
    q: int
    lead: complex  # t_{q+1}
    alphas: np.ndarray  # alphas[k-1] multiplies w^-k
    beta: complex
    gammas: np.ndarray  # gammas[j-1] multiplies w^j

    @classmethod
    def solve(cls, t: np.ndarray, q: int, terms: int = SERIES_TERMS) -> "FormalFatou":
        """``t`` holds Taylor coefficients of ``T(z0 + w) - z0``; needs
        ``len(t) > 2q + terms + 1``."""
        n_eq = q + 1 + terms
        order = 2 * q + terms + 1
        if t.size < order + 2:
            raise ContractViolation("expansion too short for the requested series")
        # rescale w = lam v so that the leading coefficient becomes 1
        lead = complex(t[q + 1])
        lam = (1.0 / lead) ** (1.0 / q)
        tv = t[: order + 2] * lam ** (np.arange(order + 2) - 1.0)
        # T(v) = v (1 + s(v))
        s = np.zeros(order + 1, dtype=complex)
        s[1:] = tv[2 : order + 2]
        cols = []
        for k in range(q, 0, -1):
            c = _pow1p_series(s, -k, order)
            cols.append(c[k : k + n_eq])
        cols.append(_log1p_series(s, order)[:n_eq])
        for j in range(1, terms + 1):
            c = _pow1p_series(s, j, order)
            c = np.concatenate([np.zeros(j, dtype=complex), c])
            cols.append(c[:n_eq])
        M = np.array(cols).T
        rhs = np.zeros(n_eq, dtype=complex)
        rhs[0] = 1.0
        x = solve_triangular(M, rhs, lower=True)
        alphas = x[:q][::-1] * lam ** np.arange(1, q + 1)
        gammas = x[q + 1 :] * lam ** (-np.arange(1.0, terms + 1))
        return cls(q, lead, alphas, complex(x[q]), gammas)

    def attracting_directions(self) -> List[complex]:
        base = (-1.0 / (self.q * self.lead)) ** (1.0 / self.q)
        base /= abs(base)
        return [base * cmath.exp(2j * math.pi * j / self.q) for j in range(self.q)]

    def repelling_directions(self) -> List[complex]:
        base = (1.0 / (self.q * self.lead)) ** (1.0 / self.q)
        base /= abs(base)
        return [base * cmath.exp(2j * math.pi * j / self.q) for j in range(self.q)]

    def radius(self, u: float = U_SWITCH) -> float:
        """``|w|`` at which the leading term has modulus ``u``."""
        return (1.0 / (self.q * abs(self.lead) * u)) ** (1.0 / self.q)

    def __call__(self, w, direction: complex):
        inv = 1.0 / w
        out = self.beta * np.log(w / direction)
        p = inv
        for a in self.alphas:
            out = out + a * p
            p = p * inv
        p = w
        for g in self.gammas:
            out = out + g * p
            p = p * w
        return out

    def derivative(self, w: complex) -> complex:
        out = self.beta / w
        for k, a in enumerate(self.alphas, start=1):
            out -= k * a * w ** (-k - 1)
        for j, g in enumerate(self.gammas, start=1):
            out += j * g * w ** (j - 1)
        return out

    def inverse(self, zeta: complex, direction: complex) -> complex:
        """Small ``w`` near ``direction`` with ``psi(w) = zeta`` (``|zeta|`` large)."""
        roots = [(self.alphas[-1] / zeta) ** (1.0 / self.q) * cmath.exp(2j * math.pi * j / self.q)
                 for j in range(self.q)]
        w = min(roots, key=lambda r: abs(cmath.phase(r / direction)))
        for _ in range(60):
            step = (self(w, direction) - zeta) / self.derivative(w)
            w -= step
            if abs(step) <= 1e-16 * abs(w):
                break
        return w


# ---------------------------------------------------------------------------
# germs


def _horner_polys(polys, z):
    for poly in polys:
        out = poly[-1]
        for coef in reversed(poly[:-1]):
            out = out * z + coef
        z = out
    return z


@dataclass(frozen=True, eq=False)
class ParabolicGerm:
    """Tangent-to-identity return ``T`` at a parabolic point ``z0``.

    ``map`` is ``None`` for a raw polynomial germ.  ``anti_period`` is the odd
    period ``p`` when ``T = A∘A`` with ``A = map^p`` anti-holomorphic.
    """

    map: object
    z0: complex
    return_period: int
    petals: int
    expansion: np.ndarray
    polys: Tuple[Tuple[complex, ...], ...]
    formal: FormalFatou
    anchor: Optional[complex] = None
    anti_period: Optional[int] = None
    marker: Optional[complex] = None
    _offsets: dict = field(default_factory=dict, repr=False)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_polynomial(cls, coeffs: Sequence[complex], z0: complex = 0j,
                        terms: int = SERIES_TERMS) -> "ParabolicGerm":
        """Germ of a polynomial (coefficients lowest degree first) at ``z0``."""
        poly = tuple(complex(c) for c in coeffs)
        germ = _build(None, complex(z0), 1, (poly,), terms)
        crit = np.roots(np.polyder(np.array(poly[::-1])))
        for cp in sorted(crit, key=lambda r: abs(r - z0)):
            if _converges_to(germ, complex(cp)):
                return _with(germ, anchor=complex(cp))
        return germ

    def T(self, z):
        return _horner_polys(self.polys, z)

    # -- evaluation helpers ----------------------------------------------

    def attracting_raw(self, z: complex) -> Tuple[complex, int]:
        """Unnormalized attracting coordinate and the petal index."""
        out, petal = attracting_raw_array(self, np.array([complex(z)]))
        if petal[0] < 0:
            raise NotInPetal(f"orbit of {z!r} does not reach an attracting petal")
        return complex(out[0]), int(petal[0])


def _with(germ: ParabolicGerm, **changes) -> ParabolicGerm:
    fields = dict(
        map=germ.map, z0=germ.z0, return_period=germ.return_period, petals=germ.petals,
        expansion=germ.expansion, polys=germ.polys, formal=germ.formal, anchor=germ.anchor,
        anti_period=germ.anti_period, marker=germ.marker,
    )
    fields.update(changes)
    return ParabolicGerm(**fields)


def _petal_count(t: np.ndarray, tol: float = PETAL_TOL) -> int:
    # t_k scales like rho**(k-1) under w -> w / rho
    top = min(t.size, 8)
    rho = max(abs(t[k]) ** (1.0 / (k - 1)) for k in range(2, top))
    if rho == 0:
        raise NotSimplePetal("return map is the identity to the expansion order")
    for k in range(2, t.size):
        if abs(t[k]) > tol * rho ** (k - 1):
            return k - 1
    raise NotSimplePetal("return map is the identity to the expansion order")


def _jet(polys, z0: complex, order: int) -> np.ndarray:
    s = np.zeros(order + 1, dtype=complex)
    s[0] = z0
    s[1] = 1.0
    for poly in polys:
        s = series.poly_of_series(list(poly), s, order)
    return s


def _refine_point(polys, z: complex, steps: int = 40) -> Tuple[complex, int]:
    """Newton on the lowest non-vanishing derivative of ``T(z) - z``."""
    t = _jet(polys, z, 8)
    t[1] -= 1.0
    q = _petal_count(np.concatenate([[0, 0], t[2:]])) if abs(t[1]) < 1e-3 else 1
    k = q  # derivative order whose coefficient has a simple zero at z0
    for _ in range(steps):
        t = _jet(polys, z, k + 2)
        t[1] -= 1.0
        g, dg = t[k], (k + 1) * t[k + 1]
        if dg == 0:
            break
        step = g / dg
        z -= step
        if abs(step) <= 1e-16 * (1.0 + abs(z)):
            break
    return z, q


def _build(fmap, z0: complex, period: int, polys, terms: int, anti_period=None) -> ParabolicGerm:
    z0, _ = _refine_point(polys, z0)
    probe = _jet(polys, z0, 8)
    if abs(probe[1] - 1.0) > 1e-9 or abs(probe[0] - z0) > 1e-9:
        raise NoConvergence(f"no parabolic point near {z0!r} (T'={probe[1]!r})")
    q = _petal_count(probe)
    order = 2 * q + terms + 2
    t = _jet(polys, z0, order)
    t[0] = 0.0
    formal = FormalFatou.solve(t, q, terms)
    return ParabolicGerm(fmap, z0, period, q, t, tuple(polys), formal, anti_period=anti_period)


def _converges_to(germ: ParabolicGerm, z: complex, steps: int = 20000) -> bool:
    _, petal = attracting_raw_array(germ, np.array([complex(z)]), max_steps=steps)
    return petal[0] >= 0


def return_polys_for(f, period: int) -> Tuple[list, int, Optional[int]]:
    """Polynomials of the first holomorphic return of a ``period``-cycle, its
    length in iterates of ``f``, and the odd anti period (if any)."""
    polys = series.return_polys(f, period)
    if is_anti(f) and period % 2:
        return polys, 2 * period, period
    return polys, period, None


def germ_at(f, z: complex, period: int, terms: int = SERIES_TERMS,
            characteristic: bool = True) -> ParabolicGerm:
    """Germ of ``f`` at the parabolic cycle through (approximately) ``z``.

    Rotational multipliers ``e^{2 pi i r/s}`` are handled by passing to the
    ``s``-th power of the first return.  With ``characteristic`` the germ is
    moved to the cycle point attracting the critical value.
    """
    polys, length, anti_period = return_polys_for(f, period)
    lam = _jet(polys, complex(z), 2)[1]
    s = 1
    while abs(lam ** s - 1) > 1e-6:
        s += 1
        if s > 64:
            raise NoConvergence(f"multiplier {lam!r} is not a root of unity")
    polys = polys * s
    length *= s
    germ = _build(f, complex(z), length, polys, terms, anti_period if s == 1 else None)
    cycle = [germ.z0]
    for _ in range(period - 1):
        cycle.append(evaluate(f, cycle[-1]))
    cv = evaluate(f, critical_point(f))
    if characteristic and period > 1:
        w = cv
        for _ in range(4000):
            w = germ.T(w)
            if not abs(w) < 1e6:
                break
        target = min(cycle, key=lambda p: abs(p - w))
        if abs(target - germ.z0) > 1e-12:
            germ = _build(f, target, length, polys, terms, germ.anti_period)
    anchor = None
    if germ.anti_period is None:
        w = critical_point(f)
        for _ in range(period + 1):
            if _converges_to(germ, w):
                anchor = w
                break
            w = evaluate(f, w)
    return _with(germ, anchor=anchor, marker=cv)


def return_critical_values(germ: ParabolicGerm) -> List[complex]:
    """``f^j(crit)`` for ``j = 1..return_period``: the critical values of ``T``."""
    f = germ.map
    if f is None:
        crit = np.roots(np.polyder(np.array(germ.polys[0][::-1])))
        return [complex(germ.T(c)) for c in crit]
    out = []
    w = critical_point(f)
    for _ in range(germ.return_period):
        w = evaluate(f, w)
        out.append(w)
    return out


# ---------------------------------------------------------------------------
# attracting coordinate


def attracting_raw_array(germ: ParabolicGerm, zs: np.ndarray, max_steps: int = MAX_STEPS,
                         escape: float = 1e6, switch: float = U_SWITCH
                         ) -> Tuple[np.ndarray, np.ndarray]:
    """Raw attracting coordinate for many points; petal index -1 on failure.

    ``switch`` is the modulus of the leading term beyond which the series is
    applied; changing it is a direct check of the truncation error.
    """
    F = germ.formal
    dirs = np.array(F.attracting_directions())
    rho = F.radius(switch)
    z = np.asarray(zs, dtype=complex).copy()
    n = np.zeros(z.shape, dtype=np.int64)
    out = np.full(z.shape, np.nan + 0j)
    petal = np.full(z.shape, -1, dtype=np.int64)
    active = np.ones(z.shape, dtype=bool)
    lead = -F.q * F.lead
    # escaping points may overflow before they are dropped
    with np.errstate(over='ignore', invalid='ignore'):
        for step in range(max_steps + 1):
            idx = np.nonzero(active)[0]
            if idx.size == 0:
                break
            w = z[idx] - germ.z0
            # inside the disk and pointing along an attracting direction
            ready = (np.abs(w) < rho) & (np.abs(np.angle(lead * w ** F.q)) < math.pi / 3)
            if ready.any():
                ids = idx[ready]
                wr = w[ready]
                j = np.argmin(np.abs(np.angle(wr[:, None] / dirs[None, :])), axis=1)
                out[ids] = F(wr, dirs[j]) - n[ids]
                petal[ids] = j
                active[ids] = False
            lost = ~ready & ~(np.abs(z[idx]) < escape)
            active[idx[lost]] = False
            if step == max_steps:
                break
            move = idx[~ready & ~lost]
            z[move] = germ.T(z[move])
            n[move] += 1
    return out, petal


def _holo_offset(germ: ParabolicGerm, petal: int) -> complex:
    if germ.anchor is None:
        return 0j
    key = ("holo", petal)
    if key not in germ._offsets:
        val, j = germ.attracting_raw(germ.anchor)
        germ._offsets[("holo", j)] = -val
    return germ._offsets.get(key, 0j)


def _anti_constant(germ: ParabolicGerm, psi_raw, inverse, base: complex) -> complex:
    """Least-squares ``K`` in ``psi(A z) = conj(psi(z)) + K`` from 10 points
    ``z = inverse(base + i y)`` near ``z0`` (``A = map^anti_period``)."""
    ks = []
    for y in np.linspace(-4.0, 4.0, 10):
        zeta = base + 1j * y
        z = inverse(zeta)
        az = iterate(germ.map, z, germ.anti_period)
        ks.append(psi_raw(az) - zeta.conjugate())
    return complex(np.mean(ks))


def anti_normalization(germ: ParabolicGerm) -> complex:
    """Offset ``s`` making ``psi = psi_raw + s`` satisfy
    ``psi(A z) = conj(psi(z)) + 1/2`` and ``Re psi(marker) = 0``."""
    if germ.anti_period is None:
        raise NotAntiReturn("germ is not the second iterate of an anti-holomorphic return")
    if germ.petals != 1:
        raise NotSimplePetal(f"{germ.petals} petals at the parabolic point")
    if "anti" not in germ._offsets:
        F = germ.formal
        d = F.attracting_directions()[0]

        def inv(zeta):
            return germ.z0 + F.inverse(zeta, d)

        def raw(z):
            return germ.attracting_raw(z)[0]

        Kc = _anti_constant(germ, raw, inv, U_SWITCH * 2)
        if abs(Kc.real - 0.5) > 1e-6:
            raise PrecisionLoss(f"anti-return symmetry check failed (Re K = {Kc.real!r})")
        im_s = -Kc.imag / 2
        re_s = -raw(germ.marker).real
        germ._offsets["anti"] = complex(re_s, im_s)
        germ._offsets["anti_K"] = Kc
    return germ._offsets["anti"]


def attracting_fatou(germ: ParabolicGerm, z: complex, normalized: bool = True) -> complex:
    """Attracting Fatou coordinate with ``psi(T z) = psi(z) + 1``.

    Holomorphic germs are normalized by ``psi(anchor) = 0`` (anchor: the first
    critical-orbit point in the immediate basin); anti-holomorphic returns by
    the conjugation to ``zeta -> conj(zeta) + 1/2`` and ``Re psi(c.v.) = 0``.
    """
    val, petal = germ.attracting_raw(z)
    if not normalized:
        return val
    if germ.anti_period is not None and germ.petals == 1:
        return val + anti_normalization(germ)
    return val + _holo_offset(germ, petal)


def abel_residual(germ: ParabolicGerm, points: Sequence[complex]) -> float:
    """``max |psi(T z) - psi(z) - 1|`` with the two sides switching to the
    series at different radii, so the orbits do not coincide."""
    zs = np.asarray(points, dtype=complex)
    a, pa = attracting_raw_array(germ, zs, switch=U_SWITCH)
    b, pb = attracting_raw_array(germ, germ.T(zs), switch=2.7 * U_SWITCH)
    if (pa < 0).any() or (pb < 0).any():
        raise NotInPetal("sample outside the attracting basin")
    return float(np.max(np.abs(b - a - 1.0)))


def petal_samples(germ: ParabolicGerm, count: int = 100, seed: int = 0) -> np.ndarray:
    """Random points in the attracting petals (pulled back into ``|w| ~ 0.3``)."""
    rng = np.random.default_rng(seed)
    F = germ.formal
    dirs = F.attracting_directions()
    pts = []
    r_far = (1.0 / (F.q * abs(F.lead) * 5.0)) ** (1.0 / F.q)
    for i in range(count):
        d = dirs[i % len(dirs)]
        r = r_far * rng.uniform(0.2, 1.0)
        ang = rng.uniform(-0.6, 0.6) / F.q
        pts.append(germ.z0 + r * d * cmath.exp(1j * ang))
    return np.array(pts)


# ---------------------------------------------------------------------------
# repelling coordinate and horn maps


def _rep_raw_inverse(germ: ParabolicGerm, zeta: complex, petal: int = 0,
                     budget: int = MAX_STEPS) -> complex:
    F = germ.formal
    d = F.repelling_directions()[petal]
    m = 0
    if zeta.real > -U_SWITCH:
        m = int(math.ceil(zeta.real + U_SWITCH))
    if m > budget:
        raise PrecisionLoss(f"Re zeta = {zeta.real:.3g} beyond the extension budget")
    z = germ.z0 + F.inverse(zeta - m, d)
    for _ in range(m):
        z = germ.T(z)
        if not abs(z) < 1e12:
            raise PrecisionLoss("repelling extension overflowed")
    return z


def _rep_raw(germ: ParabolicGerm, z: complex, petal: int = 0) -> complex:
    """Raw repelling coordinate of a point already in the small repelling sector."""
    F = germ.formal
    return complex(F(z - germ.z0, F.repelling_directions()[petal]))


def repelling_offset(germ: ParabolicGerm) -> complex:
    """Offset ``r`` applied as ``zeta_rep(zeta) = raw_inverse(zeta - r)``.

    Anti returns: the imaginary part follows from the same conjugation as the
    attracting side, the real part makes ``Re eta_upper = 0``.  Holomorphic
    germs keep the formal normalization.
    """
    if germ.anti_period is None or germ.petals != 1:
        return 0j
    if "rep" not in germ._offsets:
        Kc = _anti_constant(
            germ, lambda z: _rep_raw(germ, z), lambda zeta: _rep_raw_inverse(germ, zeta),
            -U_SWITCH * 2,
        )
        im_r = -Kc.imag / 2
        germ._offsets["rep"] = complex(0.0, im_r)
        eta = _lifted_horn(germ, complex(-0.5, 20.0)) - complex(-0.5, 20.0)
        germ._offsets["rep"] = complex(eta.real, im_r)
    return germ._offsets["rep"]


def repelling_fatou_inverse(germ: ParabolicGerm, zeta: complex, petal: int = 0) -> complex:
    """``zeta_rep`` with ``T(zeta_rep(zeta)) = zeta_rep(zeta + 1)``."""
    return _rep_raw_inverse(germ, complex(zeta) - repelling_offset(germ), petal)


def _lifted_horn(germ: ParabolicGerm, zeta: complex, petal: int = 0) -> complex:
    z = repelling_fatou_inverse(germ, zeta, petal)
    try:
        return attracting_fatou(germ, z)
    except NotInPetal as exc:
        raise OutsideDomain(f"zeta={zeta!r} is outside the horn-map domain") from exc


def lifted_horn(germ: ParabolicGerm, zeta: complex, petal: int = 0) -> complex:
    """``H(zeta) = psi_att(zeta_rep(zeta))``."""
    return _lifted_horn(germ, complex(zeta), petal)


def eta(germ: ParabolicGerm, end: int = 1, heights=(10.0, 20.0, 40.0), x: float = -0.5):
    """Translation constant of ``H`` at the upper (``end=1``) or lower end and
    the largest difference between successive heights."""
    vals = [lifted_horn(germ, complex(x, end * y)) - complex(x, end * y) for y in heights]
    spread = max(abs(a - b) for a, b in zip(vals, vals[1:])) if len(vals) > 1 else 0.0
    return vals[-1], spread


def horn_map(germ: ParabolicGerm, w: complex, end: int = 1) -> complex:
    """``h^+`` near ``w = 0`` (``end=1``) or ``h^-`` near ``w = inf``."""
    zeta = cmath.log(w) / (2j * math.pi)
    if end * zeta.imag < 0:
        raise OutsideDomain("w on the wrong side of the cylinder")
    return cmath.exp(2j * math.pi * lifted_horn(germ, zeta))


def check_real_symmetry(germ: ParabolicGerm, sample_ws: Sequence[complex]) -> float:
    """``max |1/conj(h^-(1/conj w)) - h^+(w)|`` over the samples."""
    worst = 0.0
    for w in sample_ws:
        w = complex(w)
        hp = horn_map(germ, w, 1)
        hm = horn_map(germ, 1.0 / w.conjugate(), -1)
        worst = max(worst, abs(1.0 / hm.conjugate() - hp))
    return worst


def horn_domain_height(germ: ParabolicGerm, ring: int = 16, step: float = 0.25,
                       top: float = 30.0) -> float:
    """Smallest ``y`` (on a ``step`` grid) such that ``H`` is defined on the
    lines ``Im zeta = +-y`` and ``+-(y + step)`` at ``ring`` sample points."""

    def line_ok(y):
        for x in np.linspace(0.0, 1.0, ring, endpoint=False):
            try:
                lifted_horn(germ, complex(x, y))
            except (OutsideDomain, PrecisionLoss):
                return False
        return True

    y = step
    while y <= top:
        if all(line_ok(v) for v in (y, y + step, -y, -y - step)):
            return y
        y += step
    raise OutsideDomain("no horn-map domain found below the search ceiling")


def symmetry_samples(germ: Optional[ParabolicGerm] = None, count: int = 10,
                     seed: int = 0) -> List[complex]:
    """Random ``w`` with ``|w| in (0.01, 0.1)``, scaled into the horn-map
    domain of ``germ`` when given."""
    rng = np.random.default_rng(seed)
    scale = 1.0 if germ is None else math.exp(-2 * math.pi * horn_domain_height(germ))
    r = scale * np.exp(rng.uniform(math.log(0.01), math.log(0.1), count))
    th = rng.uniform(0, 2 * math.pi, count)
    return [complex(a * math.cos(b), a * math.sin(b)) for a, b in zip(r, th)]


# ---------------------------------------------------------------------------
# heights and fingerprints


def critical_ecalle_height(germ: ParabolicGerm) -> float:
    """``Im psi(c.v.)`` in the normalized attracting coordinate."""
    if germ.anti_period is None:
        raise NotAntiReturn("critical Écalle heights need an odd-period anti-holomorphic return")
    if germ.petals != 1:
        raise NotSimplePetal(f"{germ.petals} petals: parabolic cusp")
    return float(attracting_fatou(germ, germ.marker).imag)


@dataclass(frozen=True)
class GermFingerprint:
    eta_upper: complex
    eta_lower: complex
    singular_values: Tuple[complex, ...]
    singular_count: int
    ecalle_height: Optional[float] = None

    def to_json(self, family: str = "", params=None) -> str:
        def cx(z):
            return [z.real, z.imag]

        return json.dumps({
            "family": family,
            "params": params,
            "eta_upper": cx(self.eta_upper),
            "eta_lower": cx(self.eta_lower),
            "singular_values": [cx(v) for v in self.singular_values],
            "singular_count": self.singular_count,
            "ecalle_height": self.ecalle_height,
        }, sort_keys=True)

    def relabeled(self) -> "GermFingerprint":
        """Real shift by 1/2 of both coordinates (swaps ``v`` and ``A v``)."""
        sv = tuple(sorted((-v for v in self.singular_values), key=_sv_key))
        return GermFingerprint(self.eta_upper, self.eta_lower, sv, self.singular_count,
                               None if self.ecalle_height is None else -self.ecalle_height)

    def distance(self, other: "GermFingerprint") -> float:
        if self.singular_count != other.singular_count:
            return math.inf
        parts = [abs(self.eta_upper - other.eta_upper), abs(self.eta_lower - other.eta_lower)]
        parts += [abs(a - b) for a, b in zip(self.singular_values, other.singular_values)]
        if self.ecalle_height is not None and other.ecalle_height is not None:
            parts.append(abs(self.ecalle_height - other.ecalle_height))
        return max(parts)


def _sv_key(v: complex):
    return (round(abs(v), 9), round(cmath.phase(v), 9))


def singular_values(germ: ParabolicGerm, critical_values: Sequence[complex],
                    tol: float = 1e-8) -> List[List[complex]]:
    """Per-petal deduplicated ``Pi(psi_att(v))`` of the values reaching ``z0``."""
    zs = np.asarray(list(critical_values), dtype=complex)
    raw, petal = attracting_raw_array(germ, zs)
    groups: List[List[complex]] = [[] for _ in range(germ.petals)]
    for v, z, j in zip(raw, zs, petal):
        if j < 0:
            continue
        zeta = attracting_fatou(germ, complex(z))
        pi = cmath.exp(2j * math.pi * zeta)
        if all(abs(pi - e) >= tol for e in groups[j]):
            groups[j].append(pi)
    return [sorted(g, key=_sv_key) for g in groups]


def germ_fingerprint(germ: ParabolicGerm, critical_values: Optional[Sequence[complex]] = None
                     ) -> GermFingerprint:
    """Horn-map translation constants, singular values and (anti) height.

    For several petals the singular values are grouped per petal and the
    count is the largest group, since each horn map lives on one cylinder.
    """
    if critical_values is None:
        critical_values = return_critical_values(germ)
    eu, _ = eta(germ, 1)
    el, _ = eta(germ, -1)
    groups = singular_values(germ, critical_values)
    count = max(len(g) for g in groups)
    flat = tuple(v for g in groups for v in g)
    height = None
    if germ.anti_period is not None and germ.petals == 1:
        height = critical_ecalle_height(germ)
    return GermFingerprint(complex(eu), complex(el), flat, count, height)


def fingerprints_match(a: GermFingerprint, b: GermFingerprint) -> float:
    """Distance allowing the forced relabeling."""
    return min(a.distance(b), a.distance(b.relabeled()))


# ---------------------------------------------------------------------------
# parameters


def _map_for(family: str, d: int, param) -> object:
    if family == "multibrot":
        return UnicriticalHolo(d, complex(param))
    if family == "multicorn":
        return UnicriticalAnti(d, complex(param))
    raise ContractViolation(f"family {family!r} has no parabolic solver")


def find_parabolic_parameter(family: str, cycle_period: int, multiplier: complex,
                             seed: Tuple[complex, complex], d: int = 2,
                             tol: float = 1e-11) -> Tuple[complex, ParabolicGerm]:
    """Solve ``R(z) = z, R'(z) = multiplier`` for ``(c, z)``.

    ``R`` is the first holomorphic return (``f^{2p}`` for odd ``p`` in the
    multicorn family, where the real 4x3 system is solved in least squares).
    """
    c, z = complex(seed[0]), complex(seed[1])
    lam = complex(multiplier)

    def F(x):
        f = _map_for(family, d, complex(x[0], x[1]))
        polys, _, _ = return_polys_for(f, cycle_period)
        t = _jet(polys, complex(x[2], x[3]), 1)
        e1 = t[0] - complex(x[2], x[3])
        e2 = t[1] - lam
        return np.array([e1.real, e1.imag, e2.real, e2.imag])

    x = np.array([c.real, c.imag, z.real, z.imag])
    h = 1e-7
    for _ in range(80):
        r = F(x)
        if np.max(np.abs(r)) < tol * 1e-2:
            break
        J = np.empty((4, 4))
        for i in range(4):
            e = np.zeros(4)
            e[i] = h
            J[:, i] = (F(x + e) - F(x - e)) / (2 * h)
        dx = np.linalg.lstsq(J, -r, rcond=1e-10)[0]
        x = x + dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    if not np.max(np.abs(F(x))) < tol:
        raise NoConvergence(f"parabolic system residual {np.max(np.abs(F(x))):.3g}")
    c, z = complex(x[0], x[1]), complex(x[2], x[3])
    f = _map_for(family, d, c)
    q = minimal_period(f, z, cycle_period)
    if q != cycle_period:
        raise WrongPeriod(f"solution has period {q}, not {cycle_period}")
    return c, germ_at(f, z, cycle_period)


def parabolic_germ_for(f, period: int, z_guess: Optional[complex] = None) -> ParabolicGerm:
    """Germ of a map known to be parabolic, locating the cycle if needed."""
    if z_guess is None:
        z_guess = _locate_parabolic_cycle(f, period)
    return germ_at(f, z_guess, period)


def _locate_parabolic_cycle(f, period: int) -> complex:
    """Slowly converging critical orbit: the limit point of the return's orbit."""
    polys, length, _ = return_polys_for(f, period)
    w = evaluate(f, critical_point(f))
    for _ in range(20000):
        w = _horner_polys(polys, w)
        if not abs(w) < 1e6:
            raise NoConvergence("critical orbit escapes; not a parabolic parameter")
    # accept the best Newton solution of T'(z) = 1 near the slowly converging orbit
    z, _ = _refine_point(polys, w)
    return z


# ---------------------------------------------------------------------------
# chessboard


def render_chessboard(germ: ParabolicGerm, window: Window, width_px: int, height_px: int,
                      max_steps: int = 5000) -> Raster:
    """Interior cells carry ``2 * (Im psi > 0) + (floor(Re psi) mod 2)``;
    pixels outside the basin are unknown."""
    xs = np.array([window.pixel_center(px, 0, width_px, height_px).real for px in range(width_px)])
    ys = np.array([window.pixel_center(0, py, width_px, height_px).imag for py in range(height_px)])
    Z = (xs[None, :] + 1j * ys[:, None]).ravel()
    raw, petal = attracting_raw_array(germ, Z, max_steps=max_steps)
    ok = petal >= 0
    psi = raw.copy()
    if ok.any():
        offset = (anti_normalization(germ) if germ.anti_period is not None and germ.petals == 1
                  else _holo_offset(germ, 0))
        psi[ok] = raw[ok] + offset
    kinds = np.full(Z.shape, K.UNKNOWN, dtype=np.int8)
    values = np.zeros(Z.shape, dtype=np.int32)
    kinds[ok] = K.INTERIOR
    values[ok] = 2 * (psi[ok].imag > 0) + (np.floor(psi[ok].real).astype(np.int64) % 2)
    return Raster(width_px, height_px, window, kinds.reshape(height_px, width_px),
                  values.reshape(height_px, width_px), "chessboard")

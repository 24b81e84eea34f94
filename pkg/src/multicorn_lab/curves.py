"""Parabolic curves in the ``(a, b)`` plane of real cubics ``-z^3 - 3a^2 z + b``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Tuple

import sympy as sp

from .core import RealCubic, evaluate
from .errors import NoConvergence, OutOfRange

A0 = 1.0 / math.sqrt(2.0)
INV_SQRT3 = 1.0 / math.sqrt(3.0)

PER1_MINUS1 = "Per1_minus1"
PER2_1 = "Per2_1"


@dataclass(frozen=True)
class CurvePoint:
    a: float
    b: float
    curve_id: str


def phi1(a: float) -> float:
    """``-4 (3a^2 - 1)(3a^2 + 2)^2``."""
    s = 3.0 * a * a
    return -4.0 * (s - 1.0) * (s + 2.0) ** 2


def per1_minus1_value(a: float, b: float) -> float:
    s = 3.0 * a * a
    return 4.0 * (s - 1.0) * (s + 2.0) ** 2 + 27.0 * b * b


def in_H1(a: float, b: float) -> bool:
    """Attracting-fixed-point region: ``0 <= a < 1/sqrt(3)`` and ``27 b^2 < phi1(a)``."""
    return 0.0 <= a < INV_SQRT3 and 27.0 * b * b < phi1(a)


def per1_minus1_point(a: float) -> CurvePoint:
    v = phi1(a)
    if a >= 0 and -1e-12 < v < 0:
        v = 0.0  # a = 1/sqrt(3) up to rounding
    if a < 0 or v < 0:
        raise OutOfRange(f"no real b on Per1(-1) for a={a!r}")
    return CurvePoint(float(a), math.sqrt(v / 27.0), PER1_MINUS1)


# ---------------------------------------------------------------------------
# Per_2(1) through an exact resultant


@dataclass(frozen=True)
class BivariatePolynomial:
    """Integer/rational coefficients keyed by exponents ``(i, j)`` of ``a^i b^j``."""

    coeffs: Tuple[Tuple[Tuple[int, int], Fraction], ...]

    @classmethod
    def from_sympy(cls, expr, a, b) -> "BivariatePolynomial":
        poly = sp.Poly(expr, a, b)
        items = tuple(sorted((tuple(m), Fraction(int(c.p), int(c.q))) for m, c in poly.terms()))
        return cls(items)

    def as_dict(self) -> Dict[Tuple[int, int], Fraction]:
        return dict(self.coeffs)

    @property
    def total_degree(self) -> int:
        return max(i + j for (i, j), _ in self.coeffs)

    def __call__(self, a: float, b: float) -> float:
        return math.fsum(float(c) * a ** i * b ** j for (i, j), c in self.coeffs)

    def scale(self, a: float, b: float) -> float:
        """Sum of absolute term magnitudes; used to normalise residuals."""
        return math.fsum(abs(float(c) * a ** i * b ** j) for (i, j), c in self.coeffs)

    def normalized(self, a: float, b: float) -> float:
        s = self.scale(a, b)
        return self(a, b) / s if s else 0.0


@dataclass(frozen=True)
class Per21Curve:
    """The resultant and its factorisation.

    ``resultant`` is Res_z((g^2(z)-z)/(g(z)-z), (g^2)'(z)-1).  It also vanishes
    on Per_1(-1), because a fixed point of multiplier -1 is a root of both
    arguments, so the Per_2(1) curve itself is the remaining factor.
    """

    resultant: BivariatePolynomial
    factors: Tuple[Tuple[BivariatePolynomial, int], ...]
    polynomial: BivariatePolynomial
    deg_p: int
    deg_q: int
    degree_bound: int

    def __call__(self, a: float, b: float) -> float:
        return self.polynomial(a, b)


@lru_cache(maxsize=1)
def per2_1_polynomial() -> Per21Curve:
    a, b, z = sp.symbols("a b z")

    def g(w):
        return -w ** 3 - 3 * a ** 2 * w + b

    g2 = sp.expand(g(g(z)))
    P, rem = sp.div(sp.Poly(g2 - z, z), sp.Poly(g(z) - z, z))
    assert rem.is_zero
    Q = sp.Poly(sp.diff(g2, z) - 1, z)
    res = sp.expand(sp.resultant(P, Q, z))
    per1 = sp.expand(4 * (3 * a ** 2 - 1) * (3 * a ** 2 + 2) ** 2 + 27 * b ** 2)
    _, flist = sp.factor_list(res)
    factors = []
    curve = None
    for f, mult in flist:
        bp = BivariatePolynomial.from_sympy(f, a, b)
        factors.append((bp, int(mult)))
        if sp.expand(f - per1) != 0 and sp.expand(f + per1) != 0:
            curve = bp
    # Sylvester bound: each coefficient of P (resp. Q) has total degree <= dP (dQ)
    dP = max(sp.Poly(c, a, b).total_degree() for c in P.all_coeffs())
    dQ = max(sp.Poly(c, a, b).total_degree() for c in Q.all_coeffs())
    bound = Q.degree() * dP + P.degree() * dQ
    return Per21Curve(
        BivariatePolynomial.from_sympy(res, a, b),
        tuple(factors),
        curve,
        P.degree(),
        Q.degree(),
        bound,
    )


def per2_1_point(a: float, branch: int = 1) -> CurvePoint:
    """Point of Per_2(1) with ``b >= 0`` (``branch=-1`` for ``b <= 0``)."""
    s = a * a
    rhs = -(108 * s ** 3 - 216 * s ** 2 + 144 * s - 32) / 27.0
    if a < 0 or rhs < 0:
        raise OutOfRange(f"no real b on Per2(1) for a={a!r}")
    return CurvePoint(float(a), branch * math.sqrt(rhs), PER2_1)


def curve_polyline(curve_id: str, a_values) -> list:
    pts = []
    for a in a_values:
        try:
            p = per1_minus1_point(a) if curve_id == PER1_MINUS1 else per2_1_point(a)
        except OutOfRange:
            continue
        pts.append(p)
        if p.b != 0:
            pts.append(CurvePoint(p.a, -p.b, curve_id))
    return pts


# ---------------------------------------------------------------------------
# landmarks


def bitransitive_center(check: bool = True) -> Tuple[float, float]:
    """The center ``(1/sqrt 2, 0)`` of the bitransitive component.

    ``g(ia) = b - 2i a^3``, so ``g(ia) = -ia`` forces ``b = 0`` and ``a = 2a^3``.
    """
    a0 = math.sqrt(0.5)  # correctly rounded; Newton below agrees to an ulp
    b0 = 0.0
    if check:
        if abs(positive_root_a_minus_2a3(1.0) - a0) > 2e-16:
            raise NoConvergence("Newton disagrees with the closed form")
        w = evaluate(RealCubic(a0, b0), complex(0, a0))
        if abs(w + complex(0, a0)) >= 1e-12:
            raise NoConvergence("bitransitive center check failed")
    return a0, b0


def positive_root_a_minus_2a3(seed: float, steps: int = 64) -> float:
    """Positive root of ``a - 2a^3``, via Newton on the deflated ``1 - 2a^2``.

    Newton on the deflated factor converges from every positive seed.
    """
    x = float(seed)
    if not x > 0:
        raise OutOfRange("seed must be positive")
    for _ in range(steps):
        nx = 0.5 * (x + 0.5 / x)
        if nx == x:
            break
        x = nx
    if abs(1 - 2 * x * x) > 1e-15:
        raise NoConvergence(f"Newton ended at {x!r}")
    return x

"""Truncated power series: Taylor jets of holomorphic returns and Koenigs maps."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import holomorphic_return_polys, is_anti


def mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    return np.convolve(a, b)[: order + 1]


def poly_of_series(poly: Sequence[complex], s: np.ndarray, order: int) -> np.ndarray:
    """``P(s(h))`` truncated at ``h**order``; ``poly`` lowest degree first."""
    out = np.zeros(order + 1, dtype=complex)
    out[0] = poly[-1]
    for coef in reversed(poly[:-1]):
        out = mul(out, s, order)
        if out.size < order + 1:
            out = np.pad(out, (0, order + 1 - out.size))
        out[0] += coef
    return out


def compose(outer: np.ndarray, inner: np.ndarray, order: int) -> np.ndarray:
    """``outer(inner(h))`` for an ``inner`` without constant term."""
    if abs(inner[0]) != 0:
        raise ValueError("inner series must vanish at 0")
    return poly_of_series(list(outer[: order + 1]), inner, order)


def return_polys(f, period: int) -> list:
    """Holomorphic polynomials whose left-to-right composition is the first
    holomorphic return of a cycle of ``period`` iterates of ``f``."""
    polys = holomorphic_return_polys(f)
    if not is_anti(f):
        return polys * period
    if period % 2:
        return polys * period
    return polys * (period // 2)


def return_jet(f, z0: complex, period: int, order: int) -> np.ndarray:
    """Taylor coefficients of the first holomorphic return at ``z0``:
    ``R(z0 + h) = sum_k r_k h**k``."""
    s = np.zeros(order + 1, dtype=complex)
    s[0] = z0
    if order >= 1:
        s[1] = 1.0
    for poly in return_polys(f, period):
        s = poly_of_series(poly, s, order)
    return s


def koenigs_series(jet: np.ndarray) -> np.ndarray:
    """Coefficients of the linearizer ``phi(h) = h + ...`` with
    ``phi(R(h)) = mu phi(h)`` for ``R(h) = mu h + r_2 h**2 + ...`` (``jet[0]``
    is ignored)."""
    order = jet.size - 1
    mu = jet[1]
    r = jet.copy()
    r[0] = 0
    powers = [None, r]
    for _ in range(2, order + 1):
        powers.append(mul(powers[-1], r, order))
    h = np.zeros(order + 1, dtype=complex)
    h[1] = 1.0
    for k in range(2, order + 1):
        acc = sum(h[j] * powers[j][k] for j in range(1, k))
        h[k] = acc / (mu - mu ** k)
    return h


def horner(coeffs: np.ndarray, h: complex) -> complex:
    out = 0j
    for c in coeffs[::-1]:
        out = out * h + c
    return out

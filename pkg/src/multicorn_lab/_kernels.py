"""Compiled per-pixel kernels mirroring :mod:`multicorn_lab.core` semantics.

Family codes: 0 ``z^d + c``, 1 ``conj(z)^d + c``, 2 real cubic, 3 anti return
``conj(g^n)``.  For the cubic codes the parameter ``c`` packs ``a + i b``.
"""

import os

# allow explicit thread counts above the core count (results do not depend on it)
os.environ.setdefault("NUMBA_NUM_THREADS", str(max(8, os.cpu_count() or 1)))

import warnings  # noqa: E402

import numba as nb  # noqa: E402
import numpy as np  # noqa: E402
from numba import njit, prange  # noqa: E402

# the bundled TBB is too old; numba falls back to another layer by itself
warnings.filterwarnings("ignore", message=".*TBB.*", category=nb.core.errors.NumbaWarning)

HOLO, ANTI, CUBIC, ANTI_CUBIC = 0, 1, 2, 3
EXTERIOR, INTERIOR, UNKNOWN, CAPTURED = 0, 1, 2, 3

ESCAPE_RADIUS = 1e3
NEWTON_STEPS = 64
NEWTON_TOL = 1e-12
JAC_EPS = 1e-14
PER_EPS = 1e-9
BURN_IN = 200


@njit(cache=True, inline="always")
def _ipow(z, d):
    w = z
    for _ in range(d - 1):
        w = w * z
    return w


@njit(cache=True)
def is_anti(fam, n):
    return fam == ANTI or fam == ANTI_CUBIC


@njit(cache=True)
def critical_point(fam, c):
    if fam >= CUBIC:
        return complex(0.0, c.real)
    return 0j


@njit(cache=True)
def f_eval(fam, d, c, n, z):
    if fam == HOLO:
        return _ipow(z, d) + c
    if fam == ANTI:
        return _ipow(z.conjugate(), d) + c
    a = c.real
    b = c.imag
    if fam == CUBIC:
        return -z * z * z - 3.0 * a * a * z + b
    for _ in range(n):
        z = -z * z * z - 3.0 * a * a * z + b
        if not (abs(z) < 1e150):
            return z
    return z.conjugate()


@njit(cache=True)
def f_jet(fam, d, c, n, z, gz, gzb):
    """Apply one step to the jet (z, dz/dz, dz/dzbar)."""
    if fam == HOLO:
        w = _ipow(z, d) + c
        fz = d * _ipow(z, d - 1) if d > 1 else 1.0 + 0j
        fzb = 0j
    elif fam == ANTI:
        zb = z.conjugate()
        w = _ipow(zb, d) + c
        fz = 0j
        fzb = d * _ipow(zb, d - 1)
    else:
        a = c.real
        b = c.imag
        if fam == CUBIC:
            w = -z * z * z - 3.0 * a * a * z + b
            fz = -3.0 * (z * z + a * a)
            fzb = 0j
        else:
            dz = 1.0 + 0j
            w = z
            for _ in range(n):
                dz = dz * (-3.0 * (w * w + a * a))
                w = -w * w * w - 3.0 * a * a * w + b
            w = w.conjugate()
            fz = 0j
            fzb = dz.conjugate()
    return w, fz * gz + fzb * gzb.conjugate(), fz * gzb + fzb * gz.conjugate()


@njit(cache=True)
def iterate_jet(fam, d, c, n, z, count):
    gz = 1.0 + 0j
    gzb = 0j
    for _ in range(count):
        z, gz, gzb = f_jet(fam, d, c, n, z, gz, gzb)
    return z, gz, gzb


@njit(cache=True)
def f_iter(fam, d, c, n, z, count):
    for _ in range(count):
        z = f_eval(fam, d, c, n, z)
    return z


@njit(cache=True)
def newton_cycle(fam, d, c, n, seed, period):
    """Return (ok, z). Same stopping rule as core.find_cycle."""
    z = seed
    best_z = z
    best_res = np.inf
    last = np.inf
    for _ in range(NEWTON_STEPS):
        w, A, B = iterate_jet(fam, d, c, n, z, period)
        if not (abs(w) < 1e150 and abs(A) < 1e300 and abs(B) < 1e300):
            return False, z
        F = w - z
        res = abs(F)
        A = A - 1.0
        degenerate = False
        if B == 0:
            if abs(A) < JAC_EPS:
                degenerate = True
            else:
                dz = -F / A
        else:
            c1 = A + B
            c2 = 1j * (A - B)
            det = c1.real * c2.imag - c2.real * c1.imag
            if abs(det) < JAC_EPS:
                degenerate = True
            else:
                rx = -F.real
                ry = -F.imag
                dz = complex((rx * c2.imag - c2.real * ry) / det,
                             (c1.real * ry - rx * c1.imag) / det)
        if res < best_res:
            best_z = z
            best_res = res
        if degenerate:
            break
        if res == 0.0:
            break
        size = abs(dz)
        if res < NEWTON_TOL and (size <= 1e-15 * (1.0 + abs(z)) or size >= last):
            break
        last = size if res < NEWTON_TOL else np.inf
        z = z + dz
    else:
        res = abs(f_iter(fam, d, c, n, z, period) - z)
        if res < best_res:
            best_z = z
            best_res = res
    return best_res < NEWTON_TOL, best_z


@njit(cache=True)
def multiplier(fam, d, c, n, z, period):
    count = period
    if is_anti(fam, n) and period % 2 == 1:
        count = 2 * period
    _, A, _ = iterate_jet(fam, d, c, n, z, count)
    return A


@njit(cache=True)
def minimal_period(fam, d, c, n, w, period):
    """Smallest divisor q of ``period`` with f^q(w) = w up to rounding."""
    scale = 1e-9 * (1.0 + abs(w))
    for q in range(1, period):
        if period % q == 0 and abs(f_iter(fam, d, c, n, w, q) - w) < scale:
            return q
    return period


@njit(cache=True)
def classify(fam, d, c, n, max_iter):
    """(kind, value): exterior escape index, interior period, or unknown."""
    z = critical_point(fam, c)
    burn = min(BURN_IN, max_iter // 2)
    start = z
    for i in range(max_iter):
        if i == burn:
            start = z
        z = f_eval(fam, d, c, n, z)
        if not (abs(z) <= ESCAPE_RADIUS):
            return EXTERIOR, i + 1
    if burn >= max_iter:
        start = z
    # Brent periodicity search on the tail of the orbit
    z = start
    ref = z
    power = 1
    lam = 0
    period = 0
    for _ in range(max_iter - burn):
        z = f_eval(fam, d, c, n, z)
        if not (abs(z) <= ESCAPE_RADIUS):
            return UNKNOWN, 0
        lam += 1
        if abs(z - ref) < PER_EPS:
            period = lam
            break
        if lam == power:
            ref = z
            power *= 2
            lam = 0
    if period == 0:
        return UNKNOWN, 0
    ok, w = newton_cycle(fam, d, c, n, z, period)
    if not ok:
        return UNKNOWN, 0
    period = minimal_period(fam, d, c, n, w, period)
    if abs(multiplier(fam, d, c, n, w, period)) >= 1.0:
        return UNKNOWN, 0
    return INTERIOR, period


@njit(cache=True, parallel=True)
def render(fam, d, n, re_c, im_c, dx, dy, width, height, max_iter, kinds, values):
    for py in prange(height):
        im = im_c - (2 * py + 1 - height) * 0.5 * dy
        for px in range(width):
            re = re_c + (2 * px + 1 - width) * 0.5 * dx
            k, v = classify(fam, d, complex(re, im), n, max_iter)
            kinds[py, px] = k
            values[py, px] = v


@njit(cache=True)
def renorm_classify(d, a, b, n, max_iter, center, radius):
    """Bounded-orbit proxy for the anti return map conj(g^n) around ``center``.

    Returns (kind, value) with kind EXTERIOR (value = escape index),
    INTERIOR (value = inner period), CAPTURED or UNKNOWN.  CAPTURED marks an
    attracting k-cycle that g^n maps into itself: the cycle then lives on one
    side only instead of alternating with its mirror image, as in the region
    where g has an attracting fixed point.
    """
    c = complex(a, b)
    z = complex(0.0, a)
    burn = min(BURN_IN, max_iter // 2)
    start = z
    for i in range(max_iter):
        if i == burn:
            start = z
        z = f_eval(ANTI_CUBIC, 3, c, n, z)
        if not (abs(z - center) <= radius):
            return EXTERIOR, i + 1
    if burn >= max_iter:
        start = z
    z = start
    ref = z
    power = 1
    lam = 0
    period = 0
    for _ in range(max_iter - burn):
        z = f_eval(ANTI_CUBIC, 3, c, n, z)
        lam += 1
        if abs(z - ref) < PER_EPS:
            period = lam
            break
        if lam == power:
            ref = z
            power *= 2
            lam = 0
    if period == 0:
        return UNKNOWN, 0
    ok, w = newton_cycle(ANTI_CUBIC, 3, c, n, z, period)
    if not ok:
        return UNKNOWN, 0
    period = minimal_period(ANTI_CUBIC, 3, c, n, w, period)
    if abs(multiplier(ANTI_CUBIC, 3, c, n, w, period)) >= 1.0:
        return UNKNOWN, 0
    image = f_iter(CUBIC, 3, c, 1, w, n)
    p = w
    for _ in range(period):
        if abs(image - p) < 1e-7 * (1.0 + abs(p)):
            return CAPTURED, 0
        p = f_eval(ANTI_CUBIC, 3, c, n, p)
    return INTERIOR, period


@njit(cache=True)
def stays_bounded(fam, d, c, n, max_iter, center, radius):
    """True when the critical orbit stays in the disk for ``max_iter`` steps."""
    z = critical_point(fam, c)
    for _ in range(max_iter):
        z = f_eval(fam, d, c, n, z)
        if not (abs(z - center) <= radius):
            return False
    return True


@njit(cache=True, parallel=True)
def render_renorm(n, re_c, im_c, dx, dy, width, height, max_iter, center, radius,
                  kinds, values):
    for py in prange(height):
        b = im_c - (2 * py + 1 - height) * 0.5 * dy
        for px in range(width):
            a = re_c + (2 * px + 1 - width) * 0.5 * dx
            k, v = renorm_classify(3, a, b, n, max_iter, center, radius)
            kinds[py, px] = k
            values[py, px] = v


def set_threads(threads):
    """Clamp and apply a thread count for the parallel kernels."""
    if threads is None:
        return
    threads = max(1, min(int(threads), nb.config.NUMBA_NUM_THREADS))
    nb.set_num_threads(threads)


def available_threads():
    return nb.config.NUMBA_NUM_THREADS


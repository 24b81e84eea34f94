"""Map families, orbits, derivatives and Newton cycle finding.

Four map variants are supported:

* ``UnicriticalHolo(d, c)``: ``z**d + c``
* ``UnicriticalAnti(d, c)``: ``conj(z)**d + c``
* ``RealCubic(a, b)``: ``-z**3 - 3 a**2 z + b`` with ``a >= 0``
* ``AntiCubicReturn(a, b, n)``: ``conj(g_{a,b}^n(z))``

Anti-holomorphic maps are handled through Wirtinger derivatives: every step
returns ``(w, dw/dz, dw/dzbar)``, and compositions use the chain rule.  The
multiplier of a cycle is always that of its first holomorphic return.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .errors import ContractViolation, DegenerateJacobian, NoConvergence

ESCAPED = complex(math.inf, math.inf)
ESCAPE_RADIUS = 1e3
NEWTON_MAX_STEPS = 64
NEWTON_TOL = 1e-12
JACOBIAN_THRESHOLD = 1e-14
PERIODICITY_EPS = 1e-9
BURN_IN = 200


@dataclass(frozen=True)
class UnicriticalHolo:
    d: int
    c: complex

    def __post_init__(self):
        if self.d < 2:
            raise ContractViolation("degree must be at least 2")
        object.__setattr__(self, "c", complex(self.c))


@dataclass(frozen=True)
class UnicriticalAnti:
    d: int
    c: complex

    def __post_init__(self):
        if self.d < 2:
            raise ContractViolation("degree must be at least 2")
        object.__setattr__(self, "c", complex(self.c))


@dataclass(frozen=True)
class RealCubic:
    a: float
    b: float

    def __post_init__(self):
        if not self.a >= 0:
            raise ContractViolation("real cubic requires a >= 0")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))


@dataclass(frozen=True)
class AntiCubicReturn:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if not self.a >= 0:
            raise ContractViolation("real cubic requires a >= 0")
        if self.n < 1:
            raise ContractViolation("n must be at least 1")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def cubic(self) -> RealCubic:
        return RealCubic(self.a, self.b)


DynamicalMap = Union[UnicriticalHolo, UnicriticalAnti, RealCubic, AntiCubicReturn]


@dataclass(frozen=True)
class Orbit:
    points: tuple
    escaped: bool
    escape_index: Optional[int] = None


@dataclass(frozen=True)
class Cycle:
    points: tuple
    period: int
    multiplier: complex
    stability: str = field(default="")


def is_anti(f: DynamicalMap) -> bool:
    return isinstance(f, (UnicriticalAnti, AntiCubicReturn))


def critical_point(f: DynamicalMap) -> complex:
    """The critical point whose orbit decides connectivity (``ia`` for cubics)."""
    if isinstance(f, (RealCubic, AntiCubicReturn)):
        return complex(0.0, f.a)
    return 0j


def critical_value(f: DynamicalMap) -> complex:
    return evaluate(f, critical_point(f))


# ---------------------------------------------------------------------------
# evaluation


def _ipow(z: complex, d: int) -> complex:
    try:
        w = z ** d
    except OverflowError:
        return ESCAPED
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        return ESCAPED
    return w


def _finite(z: complex) -> complex:
    if math.isfinite(z.real) and math.isfinite(z.imag):
        return z
    return ESCAPED


def _cubic(a: float, b: float, z: complex) -> complex:
    try:
        return _finite(-z * z * z - 3.0 * a * a * z + b)
    except OverflowError:
        return ESCAPED


def evaluate(f: DynamicalMap, z: complex) -> complex:
    """Exact evaluation of ``f`` at ``z``; overflow returns :data:`ESCAPED`."""
    z = complex(z)
    if isinstance(f, UnicriticalHolo):
        return _finite(_ipow(z, f.d) + f.c)
    if isinstance(f, UnicriticalAnti):
        return _finite(_ipow(z.conjugate(), f.d) + f.c)
    if isinstance(f, RealCubic):
        return _cubic(f.a, f.b, z)
    if isinstance(f, AntiCubicReturn):
        for _ in range(f.n):
            z = _cubic(f.a, f.b, z)
            if z == ESCAPED:
                return ESCAPED
        return z.conjugate()
    raise ContractViolation(f"unknown map variant {f!r}")


def derivative(f: DynamicalMap, z: complex) -> complex:
    """Derivative of a holomorphic map; anti-holomorphic variants are rejected."""
    z = complex(z)
    if isinstance(f, UnicriticalHolo):
        return f.d * _ipow(z, f.d - 1)
    if isinstance(f, RealCubic):
        return -3.0 * (z * z + f.a * f.a)
    raise ContractViolation(
        "derivative is undefined for anti-holomorphic maps; "
        "use second_iterate_derivative"
    )


def step(f: DynamicalMap, z: complex) -> tuple:
    """One application of ``f`` with Wirtinger derivatives ``(w, w_z, w_zbar)``."""
    z = complex(z)
    if isinstance(f, UnicriticalHolo):
        return _finite(_ipow(z, f.d) + f.c), f.d * _ipow(z, f.d - 1), 0j
    if isinstance(f, UnicriticalAnti):
        zb = z.conjugate()
        return _finite(_ipow(zb, f.d) + f.c), 0j, f.d * _ipow(zb, f.d - 1)
    if isinstance(f, RealCubic):
        return _cubic(f.a, f.b, z), -3.0 * (z * z + f.a * f.a), 0j
    if isinstance(f, AntiCubicReturn):
        dz = 1 + 0j
        for _ in range(f.n):
            dz *= -3.0 * (z * z + f.a * f.a)
            z = _cubic(f.a, f.b, z)
            if z == ESCAPED:
                return ESCAPED, ESCAPED, ESCAPED
        return z.conjugate(), 0j, dz.conjugate()
    raise ContractViolation(f"unknown map variant {f!r}")


def compose_step(f: DynamicalMap, state: tuple) -> tuple:
    """Apply ``f`` to a jet ``(z, z_z, z_zbar)`` using the Wirtinger chain rule."""
    z, gz, gzb = state
    w, fz, fzb = step(f, z)
    return (
        w,
        fz * gz + fzb * gzb.conjugate(),
        fz * gzb + fzb * gz.conjugate(),
    )


def iterate_jet(f: DynamicalMap, z: complex, count: int) -> tuple:
    state = (complex(z), 1 + 0j, 0j)
    for _ in range(count):
        state = compose_step(f, state)
        if state[0] == ESCAPED:
            break
    return state


def second_iterate_derivative(f: DynamicalMap, z: complex) -> complex:
    """Derivative at ``z`` of the holomorphic map ``f∘f`` for anti-holomorphic ``f``."""
    if not is_anti(f):
        raise ContractViolation("second_iterate_derivative needs an anti-holomorphic map")
    return iterate_jet(f, z, 2)[1]


def iterate(f: DynamicalMap, z: complex, count: int) -> complex:
    for _ in range(count):
        z = evaluate(f, z)
        if z == ESCAPED:
            break
    return z


def iterate_orbit(
    f: DynamicalMap, z0: complex, max_iter: int, escape_radius: float = ESCAPE_RADIUS
) -> Orbit:
    if max_iter < 1 or escape_radius <= 0:
        raise ContractViolation("max_iter >= 1 and escape_radius > 0 required")
    z = complex(z0)
    points = [z]
    if abs(z) > escape_radius:
        return Orbit(tuple(points), True, 0)
    for i in range(1, max_iter + 1):
        z = evaluate(f, z)
        points.append(z)
        if z == ESCAPED or abs(z) > escape_radius:
            return Orbit(tuple(points), True, i)
    return Orbit(tuple(points), False, None)


# ---------------------------------------------------------------------------
# cycles


def return_length(f: DynamicalMap, period: int) -> int:
    """Number of iterates forming the first holomorphic return of a ``period``-cycle."""
    return 2 * period if is_anti(f) and period % 2 else period


def cycle_multiplier(f: DynamicalMap, z: complex, period: int) -> complex:
    return iterate_jet(f, z, return_length(f, period))[1]


def classify_stability(multiplier: complex, indifferent_tol: float = 1e-6) -> str:
    m = abs(multiplier)
    if m < 1e-12:
        return "superattracting"
    if abs(m - 1.0) <= indifferent_tol:
        return "indifferent"
    return "attracting" if m < 1.0 else "repelling"


def newton_step(f: DynamicalMap, z: complex, period: int) -> tuple:
    """Newton update for ``f^period(z) - z``; returns ``(dz, |F|)``."""
    w, A, B = iterate_jet(f, z, period)
    if w == ESCAPED or not cmath.isfinite(A) or not cmath.isfinite(B):
        raise NoConvergence("orbit escaped during Newton iteration")
    F = w - z
    A = A - 1.0
    if B == 0:
        if abs(A) < JACOBIAN_THRESHOLD:
            raise DegenerateJacobian(f"|F'| = {abs(A):.3g}")
        return -F / A, abs(F)
    # real 2x2 system: (A + B) dx + i (A - B) dy = -F
    c1 = A + B
    c2 = 1j * (A - B)
    det = c1.real * c2.imag - c2.real * c1.imag
    if abs(det) < JACOBIAN_THRESHOLD:
        raise DegenerateJacobian(f"|det J| = {abs(det):.3g}")
    rx, ry = -F.real, -F.imag
    dx = (rx * c2.imag - c2.real * ry) / det
    dy = (c1.real * ry - rx * c1.imag) / det
    return complex(dx, dy), abs(F)


def find_cycle(
    f: DynamicalMap,
    period: int,
    seed: complex,
    tol: float = NEWTON_TOL,
    max_steps: int = NEWTON_MAX_STEPS,
) -> Cycle:
    """Newton's method on ``F(z) = f^period(z) - z``.

    ``period`` counts iterates of ``f`` itself; for anti-holomorphic maps
    with odd ``period`` the reported multiplier belongs to ``f^(2 period)``.
    Iteration continues past ``|F| < tol`` while the steps keep shrinking,
    which matters at multiple roots (parabolic points).
    """
    if period < 1:
        raise ContractViolation("period must be >= 1")
    z = complex(seed)
    best_z, best_res = z, math.inf
    last = math.inf
    for _ in range(max_steps):
        try:
            dz, res = newton_step(f, z, period)
        except DegenerateJacobian:
            # a multiple root is exactly where the Jacobian vanishes
            res = abs(iterate(f, z, period) - z)
            if res < best_res:
                best_z, best_res = z, res
            if best_res < tol:
                break
            raise
        if res < best_res:
            best_z, best_res = z, res
        if res == 0.0:
            break
        size = abs(dz)
        if res < tol and (size <= 1e-15 * (1 + abs(z)) or size >= last):
            break
        last = size if res < tol else math.inf
        z = z + dz
    else:
        res = abs(iterate(f, z, period) - z)
        if res < best_res:
            best_z, best_res = z, res
    if not best_res < tol:
        raise NoConvergence(f"residual {best_res:.3g} after {max_steps} steps")
    z = best_z
    points = [z]
    for _ in range(period - 1):
        points.append(evaluate(f, points[-1]))
    mult = cycle_multiplier(f, z, period)
    return Cycle(tuple(points), period, mult, classify_stability(mult))


def detect_period(f: DynamicalMap, z: complex, budget: int, eps: float = PERIODICITY_EPS):
    """Brent-style eps-periodicity detection; returns ``(period, point)`` or None."""
    ref = z
    power, lam = 1, 0
    for _ in range(budget):
        z = evaluate(f, z)
        if z == ESCAPED or abs(z) > ESCAPE_RADIUS:
            return None
        lam += 1
        if abs(z - ref) < eps:
            return lam, z
        if lam == power:
            ref = z
            power *= 2
            lam = 0
    return None


def minimal_period(f: DynamicalMap, z: complex, period: int) -> int:
    """Smallest divisor ``q`` of ``period`` with ``f^q(z) = z`` up to rounding.

    Slowly spiralling orbits can make periodicity detection report a
    multiple of the true period.
    """
    scale = 1e-9 * (1.0 + abs(z))
    for q in range(1, period):
        if period % q == 0 and abs(iterate(f, z, q) - z) < scale:
            return q
    return period


def find_attracting_cycle(f: DynamicalMap, max_iter: int = 1000) -> Optional[Cycle]:
    """Attracting cycle captured by the critical orbit, or None.

    The orbit must survive ``max_iter`` steps; periodicity is then searched
    from the point reached after ``min(200, max_iter // 2)`` steps.
    """
    z = critical_point(f)
    burn = min(BURN_IN, max_iter // 2)
    start = z
    for i in range(max_iter):
        if i == burn:
            start = z
        z = evaluate(f, z)
        if z == ESCAPED or abs(z) > ESCAPE_RADIUS:
            return None
    if burn >= max_iter:
        start = z
    found = detect_period(f, start, max_iter - burn)
    if found is None:
        return None
    p, w = found
    try:
        cyc = find_cycle(f, p, w)
    except (NoConvergence, DegenerateJacobian):
        return None
    q = minimal_period(f, cyc.points[0], p)
    if q != p:
        cyc = find_cycle(f, q, cyc.points[0])
    if abs(cyc.multiplier) >= 1.0:
        return None
    return cyc


def holomorphic_return_polys(f: DynamicalMap) -> list:
    """Coefficient lists (lowest degree first) of holomorphic polynomials whose
    composition, applied left to right, equals ``f`` (holomorphic) or ``f∘f``."""
    if isinstance(f, UnicriticalHolo):
        return [[f.c] + [0j] * (f.d - 1) + [1 + 0j]]
    if isinstance(f, UnicriticalAnti):
        bar = [f.c.conjugate()] + [0j] * (f.d - 1) + [1 + 0j]
        fwd = [f.c] + [0j] * (f.d - 1) + [1 + 0j]
        return [bar, fwd]
    cubic = None
    if isinstance(f, (RealCubic, AntiCubicReturn)):
        cubic = [complex(f.b), complex(-3.0 * f.a * f.a), 0j, -1 + 0j]
    if isinstance(f, RealCubic):
        return [cubic]
    if isinstance(f, AntiCubicReturn):
        return [cubic] * (2 * f.n)
    raise ContractViolation(f"unknown map variant {f!r}")


def orbit_points(f: DynamicalMap, z: complex, count: int) -> list:
    pts = [complex(z)]
    for _ in range(count - 1):
        pts.append(evaluate(f, pts[-1]))
    return pts


def max_abs(values: Sequence[complex]) -> float:
    return max((abs(v) for v in values), default=0.0)

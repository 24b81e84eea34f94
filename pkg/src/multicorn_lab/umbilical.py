"""Parabolic arcs parametrized by critical Écalle height, and umbilical cords.

An arc of an odd-period hyperbolic component of an anti-holomorphic family is
the curve of parameters where the anti-holomorphic return ``A = f^p`` has a
fixed point ``z`` with ``|dA/dzbar| = 1``.  In the four real unknowns
(parameter, ``z``) this is three real equations; the arc is continued by
pseudo-arclength Newton and the height is solved for by bracketing.

Cords are traced in the parameter plane along the normal line of the arc
through a target point: at each depth the locus cross-section containing the
previous spine point is bracketed by bisection and its midpoint recorded.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .core import AntiCubicReturn, UnicriticalAnti, critical_point, evaluate, iterate_jet
from .errors import ContractViolation, LostSpine, NoConvergence, NotOnArc
from .parabolic import ParabolicGerm, critical_ecalle_height, germ_at
from .renorm import RenormSeed, default_seed

FAMILIES = ("multicorn", "real-cubic")
HEIGHT_TOL = 1e-6
CUSP_HEIGHT = 1e3


@dataclass(frozen=True)
class ArcComponent:
    """Odd period ``period`` of the anti-holomorphic cycle; ``n`` is the
    number of cubic iterates in ``conj(g^n)`` for the real-cubic family."""

    period: int
    d: int = 2
    n: int = 1

    def __post_init__(self):
        if self.period < 1 or self.period % 2 == 0:
            raise ContractViolation("parabolic arcs need an odd period")


def _map(family: str, comp: ArcComponent, p) -> object:
    if family == "multicorn":
        return UnicriticalAnti(comp.d, complex(p[0], p[1]))
    if family == "real-cubic":
        return AntiCubicReturn(float(p[0]), float(p[1]), comp.n)
    raise ContractViolation(f"unknown arc family {family!r}; expected one of {FAMILIES}")


def _anti_return(family: str, comp: ArcComponent, x: np.ndarray) -> tuple:
    f = _map(family, comp, x[:2])
    return iterate_jet(f, complex(x[2], x[3]), comp.period)


def _residual(family: str, comp: ArcComponent, x: np.ndarray) -> np.ndarray:
    w, _, wzb = _anti_return(family, comp, x)
    r = w - complex(x[2], x[3])
    return np.array([r.real, r.imag, abs(wzb) ** 2 - 1.0])


def _jacobian(family: str, comp: ArcComponent, x: np.ndarray, h: float = 1e-8) -> np.ndarray:
    J = np.empty((3, 4))
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        J[:, i] = (_residual(family, comp, x + e) - _residual(family, comp, x - e)) / (2 * h)
    return J


def _tangent(J: np.ndarray, prev: Optional[np.ndarray] = None) -> np.ndarray:
    t = np.linalg.svd(J)[2][-1]
    if prev is not None and t @ prev < 0:
        t = -t
    return t


def _correct(family: str, comp: ArcComponent, x: np.ndarray, pred_dir: Optional[np.ndarray] = None,
             steps: int = 30, tol: float = 1e-13) -> np.ndarray:
    """Newton onto the arc; with ``pred_dir`` the update stays in the
    hyperplane through ``x`` orthogonal to it (pseudo-arclength)."""
    x0 = x.copy()
    x = x.copy()
    for _ in range(steps):
        r = _residual(family, comp, x)
        J = _jacobian(family, comp, x)
        if pred_dir is None:
            dx = np.linalg.lstsq(J, -r, rcond=None)[0]
        else:
            A = np.vstack([J, pred_dir])
            rhs = -np.append(r, pred_dir @ (x - x0))
            dx = np.linalg.solve(A, rhs)
        x = x + dx
        if not np.all(np.isfinite(x)):
            break
        if np.max(np.abs(dx)) < 1e-15 * (1 + np.max(np.abs(x))):
            break
    if not (np.all(np.isfinite(x)) and np.max(np.abs(_residual(family, comp, x))) < 1e-10):
        raise NoConvergence("arc corrector failed")
    # components below rounding level are noise (keeps real solutions real)
    x[np.abs(x) < 1e-15] = 0.0
    return x


@dataclass(frozen=True)
class ArcPoint:
    family: str
    component: ArcComponent
    params: Tuple[float, float]
    z: complex
    height: float
    parabolic: ParabolicGerm
    tangent: Tuple[float, float]
    cusp: bool = False

    @property
    def c(self) -> complex:
        return complex(*self.params)


def _arc_germ(family: str, comp: ArcComponent, x: np.ndarray) -> ParabolicGerm:
    return germ_at(_map(family, comp, x[:2]), complex(x[2], x[3]), comp.period)


def _height(family: str, comp: ArcComponent, x: np.ndarray) -> float:
    germ = _arc_germ(family, comp, x)
    if germ.petals != 1:
        raise NotOnArc(f"parabolic cusp at {tuple(x[:2])} ({germ.petals} petals)")
    return critical_ecalle_height(germ)


def _make_point(family: str, comp: ArcComponent, x: np.ndarray) -> ArcPoint:
    J = _jacobian(family, comp, x)
    t = _tangent(J)[:2]
    norm = math.hypot(t[0], t[1])
    germ = _arc_germ(family, comp, x)
    cusp = germ.petals != 1
    height = math.nan if cusp else critical_ecalle_height(germ)
    tangent = (float(t[0] / norm), float(t[1] / norm)) if norm > 1e-12 else (math.nan, math.nan)
    return ArcPoint(family, comp, (float(x[0]), float(x[1])), complex(x[2], x[3]),
                    height, germ, tangent, cusp)


def _cycle_point(family: str, comp: ArcComponent, params, z=None) -> complex:
    """Point of the slowly attracted cycle; the critical orbit limit by default."""
    if z is not None:
        return complex(z)
    f = _map(family, comp, params)
    w = evaluate(f, critical_point(f))
    for _ in range(4000 * comp.period):
        w = evaluate(f, w)
        if not abs(w) < 1e6:
            raise NoConvergence("critical orbit escapes; seed is not near the arc")
    return w


def _unpack_seed(family, comp, seed) -> np.ndarray:
    params, z = seed if len(seed) == 2 and not np.isscalar(seed[0]) else (seed, None)
    z = _cycle_point(family, comp, params, z)
    return np.array([float(params[0]), float(params[1]), z.real, z.imag])


def arc_point_at(family: str, component: ArcComponent, seed) -> ArcPoint:
    """Arc point nearest ``seed`` (``(params, z)`` or ``params``), without a
    height constraint; cusps are returned with ``cusp=True`` and NaN height."""
    x = _correct(family, component, _unpack_seed(family, component, seed))
    return _make_point(family, component, x)


def boundary_seed(family: str, component: ArcComponent, inside, direction,
                  max_radius: float = 0.5, bisections: int = 60):
    """``(params, z)`` on the boundary of the component containing ``inside``,
    reached along the ray in ``direction`` (an angle in radians)."""
    p0 = np.array([float(inside[0]), float(inside[1])])
    u = np.array([math.cos(direction), math.sin(direction)])
    z = _cycle_point(family, component, p0)

    def attracting(s, z):
        p = p0 + s * u
        f = _map(family, component, p)
        for _ in range(40):
            w, wz, wzb = iterate_jet(f, z, component.period)
            J = np.array([[(wz + wzb).real - 1, (1j * (wz - wzb)).real],
                          [(wz + wzb).imag, (1j * (wz - wzb)).imag - 1]])
            r = w - z
            try:
                d = np.linalg.solve(J, [-r.real, -r.imag])
            except np.linalg.LinAlgError:
                return False, z
            z = z + complex(d[0], d[1])
            if abs(d[0]) + abs(d[1]) < 1e-15:
                break
        w, _, wzb = iterate_jet(f, z, component.period)
        return abs(w - z) < 1e-9 and abs(wzb) < 1, z

    lo, hi = 0.0, None
    for s in np.geomspace(1e-7, max_radius, 400):
        ok, zn = attracting(s, z)
        if not ok:
            hi = s
            break
        lo, z = s, zn
    if hi is None:
        raise NoConvergence("ray never leaves the component")
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        ok, zn = attracting(mid, z)
        if ok:
            lo, z = mid, zn
        else:
            hi = mid
    p = p0 + lo * u
    return (float(p[0]), float(p[1])), z


def _arc_step(family, comp, x, tangent, ds) -> Tuple[np.ndarray, np.ndarray]:
    xn = _correct(family, comp, x + ds * tangent, pred_dir=tangent)
    return xn, _tangent(_jacobian(family, comp, xn), tangent)


def find_arc_point(family: str, component_descriptor: ArcComponent, target_height: float,
                   seed, max_steps: int = 400, initial_step: float = 1e-5,
                   tol: float = HEIGHT_TOL) -> ArcPoint:
    """Arc parameter whose critical Écalle height equals ``target_height``.

    ``seed`` is ``(params, z)`` or just ``params`` near the arc.  The arc is
    walked in the direction in which the height moves toward the target until
    the target is bracketed, then the height is solved by Brent's method in
    the arclength of the final step.
    """
    comp = component_descriptor
    t_goal = float(target_height)
    x = _correct(family, comp, _unpack_seed(family, comp, seed))
    h = _height(family, comp, x)
    tangent = _tangent(_jacobian(family, comp, x))
    if abs(h - t_goal) > tol:
        ds = initial_step
        xn, tn = _arc_step(family, comp, x, tangent, ds)
        hn = _height(family, comp, xn)
        if (hn - h) * (t_goal - h) < 0:
            tangent, ds = -tangent, ds
            xn, tn = _arc_step(family, comp, x, tangent, ds)
            hn = _height(family, comp, xn)
        for _ in range(max_steps):
            if (hn - t_goal) * (h - t_goal) <= 0:
                break
            if not abs(hn) < CUSP_HEIGHT:
                raise NotOnArc("height diverges: the arc runs into a cusp")
            if abs(hn - h) < 0.05:
                ds *= 2.0
            elif abs(hn - h) > 0.5:
                ds *= 0.5
            x, h, tangent = xn, hn, tn
            xn, tn = _arc_step(family, comp, x, tangent, ds)
            hn = _height(family, comp, xn)
        else:
            raise NoConvergence(f"target height {t_goal} not bracketed in {max_steps} steps")
        if abs(hn - t_goal) <= tol:
            x = xn
        else:
            base, direction = x, tangent

            def g(s):
                return _height(family, comp,
                               _correct(family, comp, base + s * direction, pred_dir=direction)
                               ) - t_goal

            s = brentq(g, 0.0, ds, xtol=1e-16, rtol=1e-14, maxiter=100)
            x = _correct(family, comp, base + s * direction, pred_dir=direction)
    point = _make_point(family, comp, x)
    if point.cusp:
        raise NotOnArc(f"parabolic cusp at {point.params}")
    if not abs(point.height - t_goal) < 1e-4:
        raise NoConvergence(f"height {point.height} misses target {t_goal}")
    return point


def arc_heights(family: str, comp: ArcComponent, start: ArcPoint, count: int,
                ds: float) -> List[Tuple[Tuple[float, float], float]]:
    """``count`` consecutive ``(params, height)`` samples along the arc."""
    x = np.array([start.params[0], start.params[1], start.z.real, start.z.imag])
    tangent = _tangent(_jacobian(family, comp, x))
    out = [(start.params, start.height)]
    for _ in range(count - 1):
        x, tangent = _arc_step(family, comp, x, tangent, ds)
        out.append(((float(x[0]), float(x[1])), _height(family, comp, x)))
    return out


# ---------------------------------------------------------------------------
# cords


@dataclass(frozen=True)
class Membership:
    """Bounded-orbit test used to locate the locus decoration."""

    family: str
    d: int = 2
    max_iter: int = 2000
    seed: Optional[RenormSeed] = None
    local_radius: Optional[float] = None

    def __call__(self, p) -> bool:
        if self.family == "multicorn":
            return bool(K.stays_bounded(K.ANTI, self.d, complex(p[0], p[1]), 1,
                                        self.max_iter, 0j, K.ESCAPE_RADIUS))
        if self.family == "real-cubic":
            seed = self.seed or default_seed()
            radius = seed.local_radius if self.local_radius is None else self.local_radius
            if not p[0] >= 0:
                return False
            return bool(K.stays_bounded(K.ANTI_CUBIC, 3, complex(p[0], p[1]), seed.n,
                                        self.max_iter, seed.center, radius))
        raise ContractViolation(f"unknown arc family {self.family!r}")


@dataclass(frozen=True)
class CordTrace:
    polyline: Tuple[Tuple[float, float], ...]
    target: ArcPoint
    transverse_displacements: Tuple[float, ...]
    depths: Tuple[float, ...] = field(default=())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = ["a", "b"] if self.target.family == "real-cubic" else ["re", "im"]
        w.writerow(["step_index", *names, "displacement"])
        for i, (p, d) in enumerate(zip(self.polyline, self.transverse_displacements)):
            w.writerow([i, repr(p[0]), repr(p[1]), repr(d)])
        return buf.getvalue()


def _axis(target: ArcPoint, start: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Unit normal (pointing to ``start``) and unit tangent at the target."""
    p = np.array(target.params)
    t = np.array(target.tangent)
    if not np.all(np.isfinite(t)):
        # cusps have no tangent; approach along the line to the start
        nrm = (start - p) / np.linalg.norm(start - p)
        return nrm, np.array([-nrm[1], nrm[0]])
    nrm = np.array([-t[1], t[0]])
    if nrm @ (start - p) < 0:
        nrm = -nrm
    return nrm, t


def _edge(inside, p, u, d_in: float, res: float, limit: float) -> float:
    """Transverse offset of the first exit from the locus going along ``u``."""
    step = res
    d_out = d_in + step
    while inside(p + d_out * u):
        d_in = d_out
        step *= 2.0
        d_out = d_in + step
        if abs(d_out) > limit:
            raise LostSpine("locus cross-section wider than the search window")
    while d_out - d_in > res:
        mid = 0.5 * (d_in + d_out)
        if inside(p + mid * u):
            d_in = mid
        else:
            d_out = mid
    return 0.5 * (d_in + d_out)


def trace_cord(target: ArcPoint, start, step: float, max_steps: int = 100000,
               membership: Optional[Membership] = None, resolution: Optional[float] = None,
               search: int = 8) -> CordTrace:
    """Follow the locus decoration from ``start`` toward ``target``.

    Depths run along the normal line through ``target`` in decrements of
    ``step``; at each depth the cross-section of the locus containing the
    previous spine point is bracketed along the tangent direction and its
    midpoint becomes the new spine point.  Its signed offset from the normal
    line is the transverse displacement.
    """
    if step <= 0:
        raise ContractViolation("step must be positive")
    inside = membership or Membership(target.family, target.component.d)
    p_t = np.array(target.params, dtype=float)
    start = np.array([float(start[0]), float(start[1])])
    nrm, tan = _axis(target, start)
    depth0 = float((start - p_t) @ nrm)
    offset = float((start - p_t) @ tan)
    res = resolution if resolution is not None else step * 1e-2
    count = int(math.floor(depth0 / step))
    if count > max_steps:
        raise ContractViolation(f"{count} steps needed; raise max_steps or the step")
    limit = max(depth0, 10 * step)
    poly: List[Tuple[float, float]] = []
    disp: List[float] = []
    depths: List[float] = []
    for i in range(count + 1):
        depth = depth0 - i * step
        if depth < 0:
            break
        base = p_t + depth * nrm
        if not inside(base + offset * tan):
            # look for the decoration near the last spine position
            for k in range(1, search + 1):
                hits = [o for o in (offset + k * res * 10, offset - k * res * 10)
                        if inside(base + o * tan)]
                if hits:
                    offset = hits[0]
                    break
            else:
                raise LostSpine(f"decoration lost at depth {depth:.3g}")
        hi = _edge(inside, base, tan, offset, res, limit)
        lo = -_edge(inside, base, -tan, -offset, res, limit)
        offset = 0.5 * (lo + hi)
        spine = base + offset * tan
        poly.append((float(spine[0]), float(spine[1])))
        disp.append(offset)
        depths.append(depth)
    return CordTrace(tuple(poly), target, tuple(disp), tuple(depths))


def wiggle_count(trace, threshold: float) -> int:
    """Sign changes of the displacement after discarding ``|d| < threshold``."""
    values = trace.transverse_displacements if isinstance(trace, CordTrace) else trace
    signs = [math.copysign(1.0, d) for d in values if abs(d) >= threshold]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def default_threshold(step: float) -> float:
    return 10.0 * step

"""``multicorn-lab`` command line.

Every subcommand prints one JSON line ``{command, params_digest, outputs,
metrics}``.  Exit status is 0 on success, 2 on a :class:`DynamicsError` and 1
on usage errors.  ``--config FILE`` reads ``key = value`` lines whose keys are
flag names; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import re
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import curves, parabolic, raster, renorm, umbilical
from .core import AntiCubicReturn, UnicriticalAnti, UnicriticalHolo
from .errors import DynamicsError

THREADS_ENV = "MULTICORN_LAB_THREADS"
# keys that must not influence the digest (they do not change artifacts)
_UNDIGESTED = {"threads", "config", "command", "handler"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)
        # let "-1.75,0" and "-0.5-0.2j" through as values, not flags
        self._negative_number_matcher = re.compile(r"^-\.?\d[\d.,eE+\-j]*$")

    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# value parsers


def _complex(text: str) -> complex:
    t = str(text).strip().replace(" ", "")
    if "," in t:
        re_, im_ = t.split(",", 1)
        return complex(float(re_), float(im_))
    try:
        return complex(t.replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def _floats(count: int) -> Callable[[str], List[float]]:
    def parse(text: str) -> List[float]:
        parts = [p for p in str(text).replace(" ", "").split(",") if p]
        if len(parts) != count:
            raise argparse.ArgumentTypeError(f"expected {count} comma-separated numbers")
        try:
            return [float(p) for p in parts]
        except ValueError:
            raise argparse.ArgumentTypeError(f"not numbers: {text!r}")
    return parse


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _cx(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


def read_config(path) -> Dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out: Dict[str, str] = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key = value")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


# ---------------------------------------------------------------------------
# shared option groups


def _add_render(p, window_default: Optional[str], size: int = 512):
    p.add_argument("--window", type=_floats(4), default=window_default,
                   help="x0,x1,y0,y1 parameter bounds")
    p.add_argument("--width-px", type=_positive_int, default=size)
    p.add_argument("--height-px", type=_positive_int, default=size)
    p.add_argument("--max-iter", type=_positive_int, default=1000)


def _add_map(p, default_family="multicorn"):
    p.add_argument("--family", default=default_family,
                   choices=["multibrot", "multicorn", "tricorn", "real-cubic"])
    p.add_argument("--d", type=_positive_int, default=2)
    p.add_argument("--c", type=_complex, default=None)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--n", type=_positive_int, default=1)
    p.add_argument("--period", type=_positive_int, default=1)


def _window(bounds) -> raster.Window:
    if bounds is None:
        raise UsageError("--window is required")
    x0, x1, y0, y1 = bounds
    return raster.Window.from_bounds(x0, x1, y0, y1)


def _map_from(args):
    fam = "multicorn" if args.family == "tricorn" else args.family
    if fam == "real-cubic":
        if args.a is None or args.b is None:
            raise UsageError("--a and --b are required for --family real-cubic")
        return AntiCubicReturn(args.a, args.b, args.n)
    if args.c is None:
        raise UsageError("--c is required")
    if fam == "multibrot":
        return UnicriticalHolo(args.d, args.c)
    return UnicriticalAnti(args.d, args.c)


def _seed(args) -> renorm.RenormSeed:
    if args.seed_a is None:
        s = renorm.default_seed()
        return s if args.seed_n == 1 else renorm.RenormSeed(s.a0, s.b0, args.seed_n)
    return renorm.RenormSeed(args.seed_a, args.seed_b, args.seed_n)


def _write(path, data) -> str:
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(path, mode) as fh:
        fh.write(data)
    return str(path)


def _census_metrics(r: raster.Raster, periods, connectivity: int) -> Dict[str, int]:
    return {str(p): raster.component_census(r, p, connectivity) for p in periods or []}


# ---------------------------------------------------------------------------
# commands: each returns (outputs, metrics)


def cmd_render_locus(args):
    fam = raster.parse_family("multicorn:%d" % args.d if args.family == "tricorn"
                              else ("real_cubic" if args.family == "real-cubic"
                                    else f"{args.family}:{args.d}"))
    r = raster.render_locus(fam, _window(args.window), args.width_px, args.height_px,
                            args.max_iter, threads=args.threads)
    outputs = []
    if args.out:
        outputs.append(_write(args.out, r.to_ppm()))
    if args.csv:
        coords = "a,b" if args.family == "real-cubic" else "re,im"
        outputs.append(_write(args.csv, r.to_csv(coords)))
    metrics = {"census": _census_metrics(r, args.census_period, args.connectivity),
               "interior_cells": int(np.count_nonzero(r.kinds == 1))}
    return outputs, metrics


def cmd_render_tricorn_like(args):
    seed = _seed(args)
    r = renorm.render_tricorn_like(seed, _window(args.window), args.width_px, args.height_px,
                                   args.max_iter, threads=args.threads,
                                   local_radius=args.local_radius)
    outputs = []
    if args.out:
        outputs.append(_write(args.out, r.to_ppm()))
    if args.csv:
        outputs.append(_write(args.csv, r.to_csv("a,b")))
    flipped = r.kinds[::-1, :]
    mismatch = int(np.count_nonzero((r.kinds != flipped)
                                    | ((r.kinds == 1) & (r.values != r.values[::-1, :]))))
    metrics = {"census": _census_metrics(r, args.census_period, args.connectivity),
               "b_symmetry_mismatches": mismatch, "local_radius": seed.local_radius
               if args.local_radius is None else args.local_radius}
    return outputs, metrics


def cmd_per_curve(args):
    if args.curve in ("per1-1", "per1_minus1"):
        lo, hi = 0.0, curves.INV_SQRT3
        point, residual = curves.per1_minus1_point, curves.per1_minus1_value
        cid = curves.PER1_MINUS1
    else:
        curve = curves.per2_1_polynomial()
        lo, hi = 0.0, 1.0
        cid = curves.PER2_1

        def point(a):
            return curves.per2_1_point(a)

        def residual(a, b):
            return curve.polynomial.normalized(a, b)
    if args.a_range is not None:
        lo, hi = args.a_range
    rows = []
    for a in np.linspace(lo, hi, args.samples):
        try:
            rows.append(point(float(a)))
        except DynamicsError:
            continue
    worst = max((abs(residual(p.a, p.b)) for p in rows), default=0.0)
    outputs = []
    if args.out:
        text = "a,b,curve_id\n" + "".join(f"{p.a!r},{p.b!r},{cid}\n" for p in rows)
        outputs.append(_write(args.out, text))
    return outputs, {"rows": len(rows), "max_residual": worst}


def cmd_find_center(args):
    if args.family == "real-cubic":
        if not args.bitransitive:
            raise UsageError("--family real-cubic needs --bitransitive")
        a, b = curves.bitransitive_center()
        return [], {"center": [a, b]}
    if args.period is None or args.c is None:
        raise UsageError("--period and --c (initial guess) are required")
    c = renorm.newton_center(args.c, args.period, args.d)
    return [], {"center": _cx(c)}


def cmd_find_parabolic(args):
    fam = "multicorn" if args.family == "tricorn" else args.family
    if args.seed_c is None or args.seed_z is None:
        raise UsageError("--seed-c and --seed-z are required")
    c, germ = parabolic.find_parabolic_parameter(fam, args.period, args.multiplier,
                                                 (args.seed_c, args.seed_z), d=args.d)
    return [], {"c": _cx(c), "z0": _cx(germ.z0), "petals": germ.petals,
                "return_period": germ.return_period}


def _germ(args) -> parabolic.ParabolicGerm:
    if args.polynomial is not None:
        coeffs = [_complex(t) for t in args.polynomial.split(";")]
        return parabolic.ParabolicGerm.from_polynomial(coeffs, args.z0 or 0j)
    return parabolic.parabolic_germ_for(_map_from(args), args.period, args.z0)


def _add_germ(p):
    _add_map(p)
    p.add_argument("--polynomial", default=None,
                   help="coefficients lowest degree first, ';'-separated (e.g. '0;1;1')")
    p.add_argument("--z0", type=_complex, default=None, help="parabolic point guess")


def cmd_fatou_chessboard(args):
    germ = _germ(args)
    r = parabolic.render_chessboard(germ, _window(args.window), args.width_px, args.height_px,
                                    args.max_iter)
    outputs = [_write(args.out, r.to_ppm())] if args.out else []
    return outputs, {"basin_cells": int(np.count_nonzero(r.kinds == 1))}


def cmd_fingerprint(args):
    germ = _germ(args)
    fp = parabolic.germ_fingerprint(germ)
    params = ([args.a, args.b] if args.family == "real-cubic"
              else (_cx(args.c) if args.c is not None else None))
    record = fp.to_json(args.family, params)
    outputs = [_write(args.out, record + "\n")] if args.out else []
    return outputs, json.loads(record)


def cmd_ecalle_height(args):
    germ = _germ(args)
    return [], {"ecalle_height": parabolic.critical_ecalle_height(germ)}


def cmd_straighten(args):
    seed = _seed(args)
    if args.a is None or args.b is None:
        raise UsageError("--a and --b are required")
    if args.target_center is None:
        raise UsageError("--target-center is required")
    if args.to is not None:
        pts = list(zip(np.linspace(args.a, args.to[0], args.samples),
                       np.linspace(args.b, args.to[1], args.samples)))
        samples = renorm.straighten_path([(float(a), float(b)) for a, b in pts], seed,
                                         args.target_center, d=args.d, max_iter=args.max_iter)
    else:
        samples = [renorm.straighten_sample(args.a, args.b, seed, args.target_center,
                                            d=args.d, max_iter=args.max_iter)]
    outputs = [_write(args.out, renorm.straightening_csv(samples))] if args.out else []
    return outputs, {"c": _cx(samples[-1].c), "samples": len(samples)}


def cmd_trace_cord(args):
    fam = "multicorn" if args.family == "tricorn" else args.family
    comp = umbilical.ArcComponent(args.period, args.d, args.n)
    seed = (tuple(args.arc_seed), args.arc_z) if args.arc_z is not None else tuple(args.arc_seed)
    if args.target_height is None:
        target = umbilical.arc_point_at(fam, comp, seed)
    else:
        target = umbilical.find_arc_point(fam, comp, args.target_height, seed)
    membership = umbilical.Membership(fam, args.d, args.max_iter)
    trace = umbilical.trace_cord(target, tuple(args.start), args.step, args.max_steps,
                                 membership=membership)
    threshold = args.threshold if args.threshold is not None else umbilical.default_threshold(args.step)
    outputs = [_write(args.out, trace.to_csv())] if args.out else []
    disp = trace.transverse_displacements
    return outputs, {
        "target": list(target.params), "target_height": target.height,
        "steps": len(trace.polyline), "max_abs_displacement": max(map(abs, disp), default=0.0),
        "wiggle_count": umbilical.wiggle_count(trace, threshold),
    }


def cmd_census(args):
    if args.family == "tricorn-like":
        seed = _seed(args)
        r = renorm.render_tricorn_like(seed, _window(args.window), args.width_px, args.height_px,
                                       args.max_iter, threads=args.threads)
    else:
        fam = raster.parse_family("real_cubic" if args.family == "real-cubic"
                                  else ("multicorn:2" if args.family == "tricorn"
                                        else f"{args.family}:{args.d}"))
        r = raster.render_locus(fam, _window(args.window), args.width_px, args.height_px,
                                args.max_iter, threads=args.threads)
    outputs = [_write(args.out, r.to_ppm())] if args.out else []
    return outputs, {"census": _census_metrics(r, args.period, args.connectivity)}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default=None, help="key = value file; flags override it")
    common.add_argument("--threads", type=_positive_int, default=None,
                        help=f"parallelism cap (falls back to ${THREADS_ENV})")
    common.add_argument("--rng-seed", type=int, default=0)
    common.add_argument("--out", default=None)

    parser = _Parser(prog="multicorn-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    parser.subcommands = {}

    def add(name, handler, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(handler=handler)
        parser.subcommands[name] = p
        return p

    p = add("render-locus", cmd_render_locus, "escape-time raster of a connectedness locus")
    p.add_argument("--family", default="tricorn",
                   choices=["multibrot", "multicorn", "tricorn", "real-cubic"])
    p.add_argument("--d", type=_positive_int, default=2)
    _add_render(p, "-2,1,-1.5,1.5")
    p.add_argument("--csv", default=None)
    p.add_argument("--census-period", type=_positive_int, nargs="*", default=[])
    p.add_argument("--connectivity", type=int, choices=[4, 8], default=8)

    p = add("render-tricorn-like", cmd_render_tricorn_like,
            "renormalization proxy raster around a real-cubic seed")
    _add_seed(p)
    _add_render(p, "0.45,0.95,-1.05,1.05")
    p.add_argument("--local-radius", type=_positive_float, default=None)
    p.add_argument("--csv", default=None)
    p.add_argument("--census-period", type=_positive_int, nargs="*", default=[])
    p.add_argument("--connectivity", type=int, choices=[4, 8], default=8)

    p = add("per-curve", cmd_per_curve, "sample Per1(-1) or Per2(1) in the (a, b) plane")
    p.add_argument("--curve", required=True, choices=["per1-1", "per1_minus1", "per2-1", "per2_1"])
    p.add_argument("--samples", type=_positive_int, default=100)
    p.add_argument("--a-range", type=_floats(2), default=None)

    p = add("find-center", cmd_find_center, "bitransitive cubic center or a multicorn center")
    p.add_argument("--family", default="real-cubic", choices=["real-cubic", "multicorn", "tricorn"])
    p.add_argument("--bitransitive", action="store_true")
    p.add_argument("--d", type=_positive_int, default=2)
    p.add_argument("--period", type=_positive_int, default=None)
    p.add_argument("--c", type=_complex, default=None)

    p = add("find-parabolic", cmd_find_parabolic, "solve for a parabolic parameter")
    p.add_argument("--family", default="multibrot", choices=["multibrot", "multicorn", "tricorn"])
    p.add_argument("--d", type=_positive_int, default=2)
    p.add_argument("--period", type=_positive_int, default=1)
    p.add_argument("--multiplier", type=_complex, default=1 + 0j)
    p.add_argument("--seed-c", type=_complex, default=None)
    p.add_argument("--seed-z", type=_complex, default=None)

    p = add("fatou-chessboard", cmd_fatou_chessboard, "attracting Fatou coordinate tiling")
    _add_germ(p)
    _add_render(p, None, 256)

    p = add("fingerprint", cmd_fingerprint, "germ fingerprint as a JSON-lines record")
    _add_germ(p)

    p = add("ecalle-height", cmd_ecalle_height, "critical Écalle height of an odd-period germ")
    _add_germ(p)

    p = add("straighten", cmd_straighten, "multicorn parameter hybrid-equivalent to (a, b)")
    _add_seed(p)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--to", type=_floats(2), default=None, help="end point of a straight path")
    p.add_argument("--samples", type=_positive_int, default=10)
    p.add_argument("--target-center", type=_complex, default=None)
    p.add_argument("--d", type=_positive_int, default=2)
    p.add_argument("--max-iter", type=_positive_int, default=4000)

    p = add("trace-cord", cmd_trace_cord, "trace the locus spine toward an arc point")
    p.add_argument("--family", default="multicorn", choices=["multicorn", "tricorn", "real-cubic"])
    p.add_argument("--d", type=_positive_int, default=2)
    p.add_argument("--n", type=_positive_int, default=1)
    p.add_argument("--period", type=_positive_int, default=1)
    p.add_argument("--arc-seed", type=_floats(2), required=True)
    p.add_argument("--arc-z", type=_complex, default=None)
    p.add_argument("--target-height", type=float, default=None)
    p.add_argument("--start", type=_floats(2), required=True)
    p.add_argument("--step", type=_positive_float, default=1e-3)
    p.add_argument("--max-steps", type=_positive_int, default=100000)
    p.add_argument("--max-iter", type=_positive_int, default=2000)
    p.add_argument("--threshold", type=_positive_float, default=None)

    p = add("census", cmd_census, "count hyperbolic components of given periods")
    p.add_argument("--family", default="tricorn",
                   choices=["multibrot", "multicorn", "tricorn", "real-cubic", "tricorn-like"])
    p.add_argument("--d", type=_positive_int, default=2)
    p.add_argument("--period", type=_positive_int, nargs="+", required=True)
    p.add_argument("--connectivity", type=int, choices=[4, 8], default=8)
    _add_seed(p)
    _add_render(p, "-2,1,-1.5,1.5", 1024)
    return parser


def _add_seed(p):
    p.add_argument("--seed-a", type=float, default=None)
    p.add_argument("--seed-b", type=float, default=0.0)
    p.add_argument("--seed-n", type=_positive_int, default=1)


def _digest(ns: argparse.Namespace) -> str:
    items = {k: v for k, v in vars(ns).items() if k not in _UNDIGESTED}

    def enc(v):
        if isinstance(v, complex):
            return [v.real, v.imag]
        if isinstance(v, (list, tuple)):
            return [enc(x) for x in v]
        return v

    blob = json.dumps({k: enc(v) for k, v in items.items()}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _apply_config(sub: argparse.ArgumentParser, cfg: Dict[str, str]) -> None:
    """Install config values as defaults; string defaults go through each
    option's ``type`` exactly like command-line text."""
    actions = {a.dest: a for a in sub._actions if a.option_strings}
    for key, value in cfg.items():
        action = actions.get(key)
        if action is None or key in ("help", "config"):
            raise UsageError(f"unknown config key {key!r}")
        if action.nargs == 0:
            action.default = value.lower() in ("1", "true", "yes", "on")
        elif action.nargs in ("+", "*"):
            try:
                action.default = [action.type(t) if action.type else t for t in value.split()]
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}")
        else:
            action.default = value
        action.required = False


def _parse(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config:
        command = argv[0] if argv and not argv[0].startswith("-") else None
        if command not in parser.subcommands:
            raise UsageError("--config needs a subcommand first")
        _apply_config(parser.subcommands[command], read_config(known.config))
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required")
    if args.threads is None and os.environ.get(THREADS_ENV):
        try:
            args.threads = _positive_int(os.environ[THREADS_ENV])
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{THREADS_ENV}: {exc}")
    return args


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
    except UsageError as exc:
        print(f"multicorn-lab: usage error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"multicorn-lab: cannot read config: {exc}", file=sys.stderr)
        return 1
    if args.out:
        parent = Path(args.out).resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            print(f"multicorn-lab: usage error: --out directory {parent} is not writable",
                  file=sys.stderr)
            return 1
    np.random.seed(args.rng_seed)
    try:
        outputs, metrics = args.handler(args)
    except UsageError as exc:
        print(f"multicorn-lab: usage error: {exc}", file=sys.stderr)
        return 1
    except DynamicsError as exc:
        print(json.dumps({"command": args.command, "params_digest": _digest(args),
                          "error": type(exc).__name__, "message": str(exc)}))
        return 2
    summary = {"command": args.command, "params_digest": _digest(args),
               "outputs": outputs, "metrics": metrics}
    print(json.dumps(summary, sort_keys=True, default=_json_default))
    return 0


def _json_default(v):
    if isinstance(v, complex):
        return _cx(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, float) and math.isnan(v):
        return None
    raise TypeError(f"cannot serialise {type(v).__name__}")


def main() -> None:
    sys.exit(run())

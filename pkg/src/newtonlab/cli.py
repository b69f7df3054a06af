"""Command-line front end: render, fixed-points, curve and audit subcommands.

Exit codes: 0 success (including FAIL verdicts), 2 bad input (formula,
curve file, flags), 3 I/O error, 4 analysis blocked by a precondition
(for instance a pole on the curve).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from typing import List, Optional

from . import curves as cv
from .dynamics import SPECIAL_LABELS, BasinGrid, default_palette, render_basins, write_image
from .expr import ParseError
from .fixedpoints import SubdivisionError, classify_fixed_point, fixed_point_defect, isolate_fixed_points
from .hypotheses import (
    check_index_hypotheses,
    check_map_out_twice,
    check_surround_and_map_out,
    poles_in_loops_search,
)
from .maps import build_map, build_newton_map
from .poly import RootFindingError
from .topology import annotated_image, audit_connectivity, audit_unboundedness, label_components
from .validation import check_resolution
from .window import Window

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_PRECONDITION = 0, 2, 3, 4
ACTIONS = ("push", "winding", "defect", "poles-in-loops", "check-index", "check-mapout", "check-mapout2")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------
# Argument parsing


def _pair(text: str, sep: str, what: str):
    parts = text.lower().split(sep)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"{what} must look like a{sep}b, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must be numeric, got {text!r}") from None


def _complex(text: str) -> complex:
    re, im = _pair(text, ",", "point")
    return complex(re, im)


def _size(text: str):
    w, h = _pair(text, "x", "size")
    if not (w > 0 and h > 0):
        raise argparse.ArgumentTypeError("size must be positive")
    return w, h


def _res(text: str):
    try:
        if "x" in text.lower():
            nx, ny = (int(v) for v in text.lower().split("x"))
        else:
            nx = ny = int(text)
        return check_resolution((nx, ny))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_view(p: argparse.ArgumentParser, res: bool = True) -> None:
    p.add_argument("--center", type=_complex, default=0j, metavar="RE,IM", help="window center (default 0,0)")
    p.add_argument("--size", type=_size, default=(4.0, 4.0), metavar="WxH", help="window size (default 4x4)")
    if res:
        p.add_argument("--res", type=_res, default=(512, 512), metavar="N|NXxNY", help="resolution (default 512)")
        p.add_argument("--max-iter", type=int, default=256)
        p.add_argument("--eps", type=float, default=1e-9)


def _add_function(p: argparse.ArgumentParser, allow_map: bool) -> None:
    if allow_map:
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--function", help="entire function g; its Newton map is analysed")
        g.add_argument("--map", help="meromorphic map f analysed directly")
    else:
        p.add_argument("--function", required=True, help="entire function g")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="newtonlab", description="Newton-map dynamics toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render a basin image (PPM) and JSON sidecar")
    _add_function(p, allow_map=False)
    _add_view(p)
    p.add_argument("--output", default="basins.ppm")
    p.add_argument("--sidecar", default=None, help="sidecar path (default: OUTPUT with .json suffix)")

    p = sub.add_parser("fixed-points", help="isolate and classify fixed points in a window")
    _add_function(p, allow_map=True)
    _add_view(p, res=False)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--output", default=None, help="JSON output path (default stdout)")

    p = sub.add_parser("curve", help="contour analysis of a curve file")
    p.add_argument("--curve", required=True, help="JSON array of [re, im] pairs")
    p.add_argument("--action", required=True, choices=ACTIONS)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--function")
    g.add_argument("--map")
    p.add_argument("--point", type=_complex, default=None, metavar="RE,IM")
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--output", default=None)

    p = sub.add_parser("audit", help="connectivity and unboundedness audit of a basin grid")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--function")
    src.add_argument("--grid", help="BasinGrid JSON file")
    _add_view(p)
    p.add_argument("--min-cells", type=int, default=64)
    p.add_argument("--output", default=None)
    p.add_argument("--image", default=None, help="annotated PPM outlining holey components")
    return parser


# --------------------------------------------------------------------------
# Output helpers


def atomic_write(path: str, data: bytes) -> None:
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from None


def _emit(obj, path: Optional[str]) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path:
        atomic_write(path, text.encode())
    else:
        sys.stdout.write(text)


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None


def _window(args) -> Window:
    w, h = args.size
    return Window(args.center, w, h)


def _newton(function: str, window: Window):
    try:
        return build_newton_map(function, window=window)
    except (ParseError, ValueError, ZeroDivisionError, RootFindingError) as exc:
        raise CliError(f"bad function {function!r}: {exc}", EXIT_INPUT) from None


def _target(args, window: Window):
    if getattr(args, "map", None):
        try:
            return build_map(args.map)
        except (ParseError, ValueError, ZeroDivisionError, RootFindingError) as exc:
            raise CliError(f"bad map {args.map!r}: {exc}", EXIT_INPUT) from None
    if not args.function:
        raise CliError("--function or --map is required for this action", EXIT_INPUT)
    return _newton(args.function, window)


def _roots(N, window: Window):
    return N.roots if N.roots is not None else N.roots_in(window)


def _root_list(roots) -> List[dict]:
    return [{"index": k, "re": r.real, "im": r.imag, "multiplicity": m} for k, (r, m) in enumerate(roots)]


# --------------------------------------------------------------------------
# Commands


def cmd_render(args) -> int:
    t0 = time.perf_counter()
    window = _window(args)
    N = _newton(args.function, window)
    roots = _roots(N, window)
    t1 = time.perf_counter()
    grid = render_basins(N, roots, window, args.res, max_iter=args.max_iter, eps=args.eps)
    t2 = time.perf_counter()
    data = write_image(grid, default_palette(len(roots)))
    atomic_write(args.output, data)
    labels = {str(k): f"root {k}" for k in range(len(roots))}
    labels.update({str(k): v for k, v in SPECIAL_LABELS.items()})
    sidecar = {
        "function": args.function,
        "kind": N.kind,
        "window": window.to_dict(),
        "resolution": list(args.res),
        "max_iter": args.max_iter,
        "eps": args.eps,
        "roots": _root_list(roots),
        "labels": labels,
        "stats": {str(k): v for k, v in grid.counts().items()},
        "image": os.path.basename(args.output),
        "timing": {"setup_s": t1 - t0, "render_s": t2 - t1, "total_s": time.perf_counter() - t0},
    }
    _emit(sidecar, args.sidecar or os.path.splitext(args.output)[0] + ".json")
    return EXIT_OK


def cmd_fixed_points(args) -> int:
    window = _window(args)
    f = _target(args, window)
    try:
        found = isolate_fixed_points(f, window, tol=args.tol)
        notes = []
    except SubdivisionError as exc:
        found, notes = exc.found, [str(exc)]
    points = sorted((classify_fixed_point(f, z, m) for z, m in found),
                    key=lambda p: (p.location.real, p.location.imag))
    if notes:
        print("warning: " + "; ".join(notes), file=sys.stderr)
    _emit([p.to_dict() for p in points], args.output)
    return EXIT_OK


def _curve_window(c: cv.Curve) -> Window:
    return c.bounding_window(0.5)


def cmd_curve(args) -> int:
    try:
        curve = cv.Curve.from_json(_read(args.curve))
    except (ValueError, cv.CurveError) as exc:
        if isinstance(exc, CliError):
            raise
        raise CliError(f"malformed curve: {exc}", EXIT_INPUT) from None
    action = args.action
    if action == "winding":
        if args.point is None:
            raise CliError("--point is required for winding", EXIT_INPUT)
        _emit({"winding": cv.winding_number(curve, args.point)}, args.output)
        return EXIT_OK
    f = _target(args, _curve_window(curve))
    if action == "push":
        img = cv.push_forward(f, curve)
        out = {"curve": [[p.real, p.imag] for p in img.points], "samples": len(img)}
    elif action == "defect":
        out = fixed_point_defect(f, curve).to_dict()
    elif action == "poles-in-loops":
        out = poles_in_loops_search(f, curve, args.nmax).to_dict()
    elif action == "check-index":
        out = check_index_hypotheses(f, curve).to_dict()
    elif action == "check-mapout":
        out = check_surround_and_map_out(f, curve).to_dict()
    else:
        out = check_map_out_twice(f, curve).to_dict()
    _emit(out, args.output)
    return EXIT_OK


def cmd_audit(args) -> int:
    if args.grid:
        try:
            grid = BasinGrid.from_dict(json.loads(_read(args.grid)))
        except (ValueError, KeyError, TypeError) as exc:
            if isinstance(exc, CliError):
                raise
            raise CliError(f"malformed grid: {exc}", EXIT_INPUT) from None
        rerender = None
    else:
        window = _window(args)
        N = _newton(args.function, window)
        roots = _roots(N, window)
        grid = render_basins(N, roots, window, args.res, max_iter=args.max_iter, eps=args.eps)
        nx, ny = args.res

        def rerender():
            return render_basins(N, roots, window, (2 * nx, 2 * ny), max_iter=args.max_iter, eps=args.eps)

    comps = label_components(grid)
    conn = audit_connectivity(grid, min_cells=args.min_cells, rerender=rerender, components=comps)
    out = {"connectivity": conn.to_dict()}
    ok = conn.passed
    if len(grid.roots):
        try:
            unb = audit_unboundedness(grid, components=comps)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_PRECONDITION) from None
        out["unboundedness"] = unb.to_dict()
        ok = ok and unb.passed
    out = {"pass": bool(ok), **out}
    if args.image:
        top = int(grid.labels.max(initial=-1))
        palette = default_palette(max(top + 1, len(grid.roots), 1))
        atomic_write(args.image, annotated_image(grid, palette, comps, conn.holey))
    _emit(out, args.output)
    return EXIT_OK


COMMANDS = {"render": cmd_render, "fixed-points": cmd_fixed_points, "curve": cmd_curve, "audit": cmd_audit}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (cv.PoleOnCurveError, cv.FixedPointOnCurveError, cv.PointOnCurveError, cv.RefinementError) as exc:
        print(f"error: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ParseError, cv.CurveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

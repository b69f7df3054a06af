"""Fixed-point counting, isolation and classification for meromorphic maps.

Counting uses the argument principle for ``f(z) - z`` along a sampled curve:
the winding of the difference vectors around 0 equals fixed points minus
poles enclosed, with multiplicity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .curves import (
    Curve,
    FixedPointOnCurveError,
    PoleOnCurveError,
    RefinementError,
    distance_to_polyline,
    refine,
    winding_numbers,
)
from .maps import ComplexMap
from .window import Window

POLE_TOL = 1e-9
FIXED_TOL = 1e-9
TURN_LIMIT = np.pi / 2
DRIFT_LIMIT = 0.5
MAX_POINTS = 200_000

SUPERATTRACTING = "superattracting"
ATTRACTING = "attracting"
PARABOLIC = "parabolic-derivative-1"
INDIFFERENT = "indifferent-other"
REPELLING = "repelling"
STABILITY_TOL = 1e-6


class NotFixedError(ValueError):
    """The point handed to :func:`classify_fixed_point` is not a fixed point."""


class SubdivisionError(RuntimeError):
    """Quadtree isolation could not resolve every box.

    Attributes
    ----------
    found : list of (complex, int)
        Fixed points isolated before giving up.
    unresolved : list of (Window, int)
        Boxes that could not be split consistently, with their counts.
    """

    def __init__(self, message: str, found, unresolved):
        super().__init__(message)
        self.found = found
        self.unresolved = unresolved


@dataclass(frozen=True)
class CountReport:
    defect: int
    poles_inside: int
    fixed_points_inside: int
    samples: int = 0
    curve: Optional[Curve] = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {"defect": self.defect, "poles": self.poles_inside, "fixed": self.fixed_points_inside,
                "samples": self.samples}


@dataclass(frozen=True)
class FixedPoint:
    location: complex
    multiplicity: int
    derivative: complex
    stability: str

    @property
    def weakly_repelling(self) -> bool:
        return self.stability in (REPELLING, PARABOLIC)

    def to_dict(self) -> dict:
        return {
            "re": self.location.real,
            "im": self.location.imag,
            "multiplicity": self.multiplicity,
            "stability": self.stability,
            "derivative": [self.derivative.real, self.derivative.imag],
        }


def _pole_list(f: ComplexMap, c: Curve) -> List[Tuple[complex, int]]:
    return list(f.poles_in(c.bounding_window(0.1)))


def _check_poles(poles, c: Curve) -> None:
    if poles:
        locs = np.array([p for p, _ in poles])
        d = distance_to_polyline(c.points, locs)
        if d.min() <= POLE_TOL:
            raise PoleOnCurveError(f"pole {locs[np.argmin(d)]} lies on the curve")


def _weighted_poles(poles, c: Curve) -> int:
    if not poles:
        return 0
    w = winding_numbers(c, [p for p, _ in poles])
    return int(sum(m * k for (_, m), k in zip(poles, w)))


def enclosed_poles(f: ComplexMap, c: Curve, poles=None) -> int:
    """Poles enclosed by ``c`` counted with order (and winding, for non-simple curves).

    The count is normalized to the curve's orientation, so a clockwise
    Jordan curve gives the same answer as its counter-clockwise reversal.
    """
    poles = _pole_list(f, c) if poles is None else list(poles)
    _check_poles(poles, c)
    return c.orientation() * _weighted_poles(poles, c)


def _turn_split(src, img, dimg=None):
    d = img - src
    small = np.abs(d) <= FIXED_TOL * (1 + np.abs(src))
    if small.any():
        raise FixedPointOnCurveError(f"fixed point on the curve near {src[np.argmax(small)]}")
    nxt = np.roll(src, -1)
    flags = np.abs(np.angle(np.roll(d, -1) / d)) >= TURN_LIMIT
    if dimg is not None:
        # first-order guard against aliasing: a segment may not change h = f - z
        # by more than half its size, so no pole or zero slips between samples
        with np.errstate(all="ignore"):
            rate = np.abs(dimg - 1) / np.abs(d)
        rate = np.where(np.isfinite(rate), rate, 0.0)
        flags |= np.abs(nxt - src) * np.maximum(rate, np.roll(rate, -1)) > DRIFT_LIMIT
    tiny = flags & (np.abs(nxt - src) <= 1e-13 * (1 + np.abs(src)))
    if tiny.any():
        raise FixedPointOnCurveError(f"fixed point on the curve near {src[np.argmax(tiny)]}")
    return flags


def difference_winding(f: ComplexMap, c: Curve, max_points: int = MAX_POINTS) -> Tuple[int, np.ndarray]:
    """Winding of ``f(p) - p`` around 0 after refinement; returns (winding, refined samples).

    Segments are split until consecutive difference vectors turn by less
    than a quarter turn and ``|h'| * length < |h| / 2`` at both ends, with
    ``h = f - z``. The second bound keeps poles and fixed points close to
    the curve from aliasing the count.
    """
    cache = {}

    def split(src, img):
        # derivatives are cached by sample so each refinement pass only evaluates new points
        todo = [z for z in src if z not in cache]
        if todo:
            cache.update(zip(todo, f.derivative(np.array(todo))))
        return _turn_split(src, img, np.array([cache[z] for z in src]))

    src, img = refine(f, c.points, split, max_points)
    d = img - src
    turns = np.sum(np.angle(np.roll(d, -1) / d)) / (2 * np.pi)
    return int(round(turns)), src


def fixed_point_defect(f: ComplexMap, c: Curve, max_points: int = MAX_POINTS, poles=None) -> CountReport:
    """Argument-principle count of fixed points enclosed by ``c``.

    Parameters
    ----------
    f : ComplexMap
        Any map exposing vectorized evaluation and ``poles_in``.
    c : Curve
        Closed curve free of poles and fixed points.
    poles : iterable of (complex, int), optional
        Pole inventory to use instead of ``f.poles_in``.

    Returns
    -------
    CountReport
        ``defect`` is the winding of ``f(p) - p``; ``fixed_points_inside``
        equals ``defect + poles_inside``. All three are normalized to the
        curve's orientation.

    Raises
    ------
    PoleOnCurveError, FixedPointOnCurveError, RefinementError
    """
    poles = _pole_list(f, c) if poles is None else list(poles)
    _check_poles(poles, c)
    wind, src = difference_winding(f, c, max_points)
    sign = c.orientation()
    defect = sign * wind
    inside = sign * _weighted_poles(poles, c)
    return CountReport(defect, inside, defect + inside, src.size, Curve.unchecked(src))


# --------------------------------------------------------------------------
# Classification


def _derivative_at(f: ComplexMap, z0: complex) -> complex:
    d = complex(f.derivative(np.array([z0]))[0])
    if getattr(f, "is_newton", False):
        dg = abs(complex(f.dg_values(np.array([z0]))[0]))
        if dg < 1e-7 * (1 + abs(z0)):
            d = complex("nan")  # multiple root: symbolic formula is 0/0
    if not np.isfinite(d):
        h = 1e-5 * (1 + abs(z0))
        fp, fm = f(np.array([z0 + h, z0 - h]))
        d = complex((fp - fm) / (2 * h))
    return d


def stability_of(d: complex) -> str:
    a = abs(d)
    if a < STABILITY_TOL:
        return SUPERATTRACTING
    if abs(d - 1) < STABILITY_TOL:
        return PARABOLIC
    if abs(a - 1) < STABILITY_TOL:
        return INDIFFERENT
    return ATTRACTING if a < 1 else REPELLING


def classify_fixed_point(f: ComplexMap, z0: complex, multiplicity: int = 1) -> FixedPoint:
    """Multiplier and stability of the fixed point ``z0``.

    Raises
    ------
    NotFixedError
        If ``|f(z0) - z0| >= 1e-8 (1 + |z0|)``.
    """
    z0 = complex(z0)
    w = f.evaluate(z0)
    if not (np.isfinite(w) and abs(w - z0) < 1e-8 * (1 + abs(z0))):
        raise NotFixedError(f"{z0} is not a fixed point (f(z0) = {w})")
    d = _derivative_at(f, z0)
    return FixedPoint(z0, int(multiplicity), d, stability_of(d))


# --------------------------------------------------------------------------
# Quadtree isolation


def polish(f: ComplexMap, z: complex, max_steps: int = 60) -> complex:
    """Damped Newton on ``h = f(z) - z``, halving rejected steps."""
    z = complex(z)

    def h(p):
        v = f.evaluate(p)
        return v - p if np.isfinite(v) else complex("inf")

    hz = h(z)
    for _ in range(max_steps):
        if abs(hz) < 1e-15 * (1 + abs(z)):
            break
        d = _derivative_at(f, z) - 1
        if not np.isfinite(d) or d == 0:
            break
        step = hz / d
        for _ in range(30):
            cand = z - step
            hc = h(cand)
            if abs(hc) < abs(hz):
                break
            step *= 0.5
        else:
            break
        if abs(cand - z) <= 1e-16 * (1 + abs(z)):
            z, hz = cand, hc
            break
        z, hz = cand, hc
    return z


_RATIOS = (0.5 + 0.0123, 0.5 - 0.0219, 0.5 + 0.0371, 0.5 - 0.0487, 0.5 + 0.0613, 0.5 - 0.0797)


def _count(f, box: Window, poles, per_side: int, max_points: int) -> int:
    rect = Curve.rectangle(box, per_side)
    return fixed_point_defect(f, rect, max_points, poles=poles).fixed_points_inside


def _split(box: Window, r: float):
    xmin, xmax, ymin, ymax = box.bounds
    xm = xmin + r * (xmax - xmin)
    ym = ymin + r * (ymax - ymin)
    return [
        Window.from_bounds(xmin, xm, ymin, ym),
        Window.from_bounds(xm, xmax, ymin, ym),
        Window.from_bounds(xmin, xm, ym, ymax),
        Window.from_bounds(xm, xmax, ym, ymax),
    ]


def _local_poles(poles, box: Window):
    grow = box.scaled(1.001)
    return [(p, m) for p, m in poles if grow.contains(p)]


def isolate_fixed_points(f: ComplexMap, window: Window, tol: float = 1e-6, per_side: int = 8,
                         max_boxes: int = 20_000, max_points: int = MAX_POINTS) -> List[Tuple[complex, int]]:
    """Locate all fixed points of ``f`` in ``window`` by counted quadtree subdivision.

    Parameters
    ----------
    f : ComplexMap
    window : Window
        Search region. Its boundary is perturbed by up to 1% if a pole or
        fixed point lies on it.
    tol : float
        Boxes smaller than this are polished and reported with their count
        as multiplicity.

    Returns
    -------
    list of (complex, int)
        Locations and multiplicities, sorted by (re, im).

    Raises
    ------
    SubdivisionError
        If some box cannot be split with consistent counts or the box budget
        runs out. Carries the partial result.
    """
    poles = list(f.poles_in(window.scaled(1.05)))
    root = None
    for k in range(12):
        sign = 1 if k % 2 == 0 else -1
        trial = window if k == 0 else Window(window.center + sign * 0.0007 * k * window.width,
                                             window.width * (1 + sign * 0.0009 * k),
                                             window.height * (1 + sign * 0.0009 * k))
        try:
            root = (trial, _count(f, trial, _local_poles(poles, trial), per_side, max_points))
            break
        except (PoleOnCurveError, FixedPointOnCurveError):
            continue
    if root is None:
        raise SubdivisionError("window boundary could not be freed of poles and fixed points", [], [(window, -1)])

    found: List[Tuple[complex, int]] = []
    unresolved: List[Tuple[Window, int]] = []
    queue = [root] if root[1] > 0 else []
    if root[1] < 0:
        unresolved.append(root)
    boxes = 0
    while queue:
        box, count = queue.pop(0)
        boxes += 1
        if boxes > max_boxes:
            unresolved.append((box, count))
            unresolved.extend(queue)
            break
        if count == 1 or max(box.width, box.height) < tol:
            z = polish(f, box.center)
            h = f.evaluate(z) - z
            ok = np.isfinite(h) and abs(h) < 1e-9 * (1 + abs(z))
            if ok and box.scaled(1 + 1e-9).contains(z):
                found.append((z, count))
                continue
            if max(box.width, box.height) < tol:
                if ok and box.scaled(3).contains(z):
                    found.append((z, count))
                else:
                    unresolved.append((box, count))
                continue
        children = None
        for r in _RATIOS:
            kids = _split(box, r)
            try:
                counts = [_count(f, k, _local_poles(poles, k), per_side, max_points) for k in kids]
            except (PoleOnCurveError, FixedPointOnCurveError, RefinementError):
                continue
            if sum(counts) == count and min(counts) >= 0:
                children = list(zip(kids, counts))
                break
        if children is None:
            unresolved.append((box, count))
            continue
        queue.extend((k, n) for k, n in children if n > 0)

    found = _merge(found, tol)
    if unresolved:
        raise SubdivisionError(f"{len(unresolved)} box(es) unresolved", found, unresolved)
    return found


def _merge(points, tol):
    out: List[List] = []
    for z, m in sorted(points, key=lambda t: (t[0].real, t[0].imag)):
        for item in out:
            if abs(item[0] - z) < tol:
                item[1] += m
                break
        else:
            out.append([z, m])
    return [(z, m) for z, m in sorted(out, key=lambda t: (t[0].real, t[0].imag))]


def find_fixed_points(f: ComplexMap, window: Window, tol: float = 1e-6) -> List[FixedPoint]:
    """Isolate and classify every fixed point in ``window``."""
    return [classify_fixed_point(f, z, m) for z, m in isolate_fixed_points(f, window, tol)]


__all__ = [
    "CountReport",
    "FixedPoint",
    "NotFixedError",
    "SubdivisionError",
    "enclosed_poles",
    "fixed_point_defect",
    "difference_winding",
    "classify_fixed_point",
    "isolate_fixed_points",
    "find_fixed_points",
    "polish",
    "stability_of",
    "SUPERATTRACTING",
    "ATTRACTING",
    "PARABOLIC",
    "INDIFFERENT",
    "REPELLING",
]

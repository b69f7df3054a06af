"""Numerical checks of curve-mapping hypotheses that force fixed points or poles.

Each checker returns a :class:`HypothesisReport`: per-hypothesis verdicts,
a conclusion, and any fixed points located where the hypotheses predict
them. Failed hypotheses are reported, not raised.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .curves import (
    Curve,
    CurveError,
    PoleOnCurveError,
    RefinementError,
    WallCellError,
    distance_to_polyline,
    filled_set_cells,
    filled_set_mask,
    is_degenerate,
    push_forward,
    push_forward_samples,
    winding_numbers,
)
from .fixedpoints import (
    FixedPoint,
    SubdivisionError,
    classify_fixed_point,
    enclosed_poles,
    fixed_point_defect,
    isolate_fixed_points,
)
from .maps import ComplexMap

NEAR_POLE = 1e-6


@dataclass
class Hypothesis:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "pass": bool(self.passed), "detail": self.detail}


@dataclass
class HypothesisReport:
    hypotheses: List[Hypothesis]
    conclusion: str
    fixed_points: List[FixedPoint] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(h.passed for h in self.hypotheses)

    def to_dict(self) -> dict:
        out = {
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "conclusion": self.conclusion,
            "fixed_points": [p.to_dict() for p in self.fixed_points],
        }
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _inside_mask(c: Curve, pts: np.ndarray) -> np.ndarray:
    """K(c) membership; points stuck in wall cells fall back to winding != 0."""
    try:
        return filled_set_mask(c, pts)
    except WallCellError:
        near = distance_to_polyline(c.points, pts) < 1e-12
        out = np.ones(pts.size, dtype=bool)
        out[~near] = winding_numbers(c, pts[~near]) != 0
        return out


def _fixed_points_in(f: ComplexMap, c: Curve, notes: list) -> List[FixedPoint]:
    """Classified fixed points lying in K(c)."""
    try:
        found = isolate_fixed_points(f, c.bounding_window(0.02))
    except SubdivisionError as exc:
        notes.append(f"fixed-point search incomplete: {exc}")
        found = exc.found
    except (CurveError, RefinementError) as exc:
        notes.append(f"fixed-point search failed: {exc}")
        return []
    if not found:
        return []
    locs = np.array([z for z, _ in found])
    keep = _inside_mask(c, locs)
    return [classify_fixed_point(f, z, m) for (z, m), k in zip(found, keep) if k]


def _fmt(z: complex) -> str:
    return f"{z.real:.6g}{z.imag:+.6g}i"


# --------------------------------------------------------------------------
# Fixed-point index count


def check_index_hypotheses(f: ComplexMap, boundary: Curve) -> HypothesisReport:
    """If ``f`` maps the boundary curve into its interior domain, count fixed points.

    With ``m`` poles enclosed, the domain must contain exactly ``m + 1``
    fixed points.
    """
    hyps: List[Hypothesis] = []
    extra: dict = {}
    try:
        _, img = push_forward_samples(f, boundary)
    except PoleOnCurveError as exc:
        hyps.append(Hypothesis("boundary maps inside", False, str(exc)))
        return HypothesisReport(hyps, "hypothesis not satisfied; no conclusion", extra=extra)
    inside = _inside_mask(boundary, img)
    n_out = int((~inside).sum())
    hyps.append(Hypothesis("boundary maps inside", n_out == 0,
                           f"{img.size - n_out}/{img.size} image samples inside the domain"))
    if n_out:
        return HypothesisReport(hyps, "hypothesis not satisfied; no conclusion", extra=extra)
    try:
        m = enclosed_poles(f, boundary)
        rep = fixed_point_defect(f, boundary)
    except (CurveError, RefinementError) as exc:
        hyps.append(Hypothesis("fixed points = m + 1", False, str(exc)))
        return HypothesisReport(hyps, "count not computable", extra=extra)
    extra.update({"m": m, "defect": rep.defect, "fixed_points_inside": rep.fixed_points_inside})
    ok = rep.fixed_points_inside == m + 1
    hyps.append(Hypothesis("fixed points = m + 1", ok,
                           f"m = {m}, defect = {rep.defect}, fixed points = {rep.fixed_points_inside}"))
    notes: list = []
    fps = _fixed_points_in(f, boundary, notes)
    if notes:
        extra["notes"] = notes
    concl = (f"domain contains exactly m + 1 = {m + 1} fixed points" if ok
             else f"count mismatch: expected {m + 1}, found {rep.fixed_points_inside}")
    return HypothesisReport(hyps, concl, fps, extra)


# --------------------------------------------------------------------------
# Poles in loops


@dataclass
class LoopSearchResult:
    found_at: Optional[int]
    pole: Optional[complex] = None
    pole_on_curve: bool = False
    collapsed: bool = False
    unresolved: bool = False
    iterations: int = 0
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "found_at": self.found_at,
            "pole": None if self.pole is None else [self.pole.real, self.pole.imag],
            "pole_on_curve": self.pole_on_curve,
            "collapsed": self.collapsed,
            "unresolved": self.unresolved,
            "iterations": self.iterations,
            "detail": self.detail,
        }


def poles_in_loops_search(f: ComplexMap, c: Curve, n_max: int, max_points: int = 200_000) -> LoopSearchResult:
    """Smallest ``n <= n_max`` such that K(f^n(c)) contains a pole of ``f``.

    A push-forward that lands exactly on a pole witnesses a prepole and is
    reported as success at that step with ``pole_on_curve`` set.
    """
    curve = c
    for n in range(n_max + 1):
        poles = list(f.poles_in(curve.bounding_window(0.2)))
        if poles:
            locs = np.array([p for p, _ in poles])
            d = distance_to_polyline(curve.points, locs)
            if d.min() <= 1e-9:
                p = complex(locs[np.argmin(d)])
                return LoopSearchResult(n, p, True, iterations=n, detail="pole on the curve")
            hit = _inside_mask(curve, locs)
            if hit.any():
                return LoopSearchResult(n, complex(locs[np.argmax(hit)]), iterations=n)
        if n == n_max:
            break
        try:
            curve = push_forward(f, curve, max_points=max_points)
        except PoleOnCurveError:
            # a sample of the current curve is itself a pole
            return LoopSearchResult(n, None, True, iterations=n, detail="image sample at infinity")
        except RefinementError as exc:
            return LoopSearchResult(None, unresolved=True, iterations=n,
                                    detail=f"push-forward refinement failed (max gap {exc.max_gap:.3g})")
        if is_degenerate(curve):
            return LoopSearchResult(None, collapsed=True, iterations=n + 1, detail="image collapsed to a point")
    return LoopSearchResult(None, iterations=n_max)


# --------------------------------------------------------------------------
# Map-out checks


def _near_poles(f: ComplexMap, X: Curve):
    poles = [p for p, _ in f.poles_in(X.bounding_window(0.5))]
    if not poles:
        return poles, np.array([])
    return poles, distance_to_polyline(X.points, np.array(poles))


def check_surround_and_map_out(f: ComplexMap, X: Curve) -> HypothesisReport:
    """Check that X avoids poles, surrounds one, and K(X) lies in ext(f(X)).

    When all three hold, a weakly repelling fixed point must exist in the
    interior of K(X); the report lists the fixed points found there.
    """
    hyps: List[Hypothesis] = []
    poles, dist = _near_poles(f, X)
    clear = not (dist.size and dist.min() <= NEAR_POLE)
    hyps.append(Hypothesis("no poles near X", clear,
                           "closest pole distance " + (f"{dist.min():.3g}" if dist.size else "n/a")))
    surrounded = []
    if clear and poles:
        mask = _inside_mask(X, np.array(poles))
        surrounded = [p for p, k in zip(poles, mask) if k]
    hyps.append(Hypothesis("X surrounds a pole", bool(surrounded),
                           ", ".join(_fmt(p) for p in surrounded) or "no pole in K(X)"))
    detail = ""
    ok = False
    if clear:
        try:
            fX = push_forward(f, X)
        except (PoleOnCurveError, RefinementError) as exc:
            detail = f"image not computable: {exc}"
        else:
            out_of_K = ~_inside_mask(X, fX.points)
            cells = np.concatenate([filled_set_cells(X), X.points])
            if is_degenerate(fX):
                in_ext = np.abs(cells - fX.points[0]) > 1e-12
            else:
                in_ext = ~_inside_mask(fX, cells)
            ok = bool(out_of_K.all() and in_ext.all())
            detail = (f"{int(out_of_K.sum())}/{out_of_K.size} image samples outside K(X); "
                      f"{int(in_ext.sum())}/{in_ext.size} K(X) cells in ext(f(X))")
    hyps.append(Hypothesis("K(X) maps out", ok, detail))
    rep = HypothesisReport(hyps, "hypotheses not met; no conclusion")
    if rep.passed:
        notes: list = []
        rep.fixed_points = _fixed_points_in(f, X, notes)
        rep.conclusion = _weak_conclusion(rep.fixed_points, "K(X)")
        if notes:
            rep.extra["notes"] = notes
    return rep


def check_map_out_twice(f: ComplexMap, X: Curve) -> HypothesisReport:
    """Check that X avoids poles, X lies in K(f(X)) and f^2(X) lies in ext(f(X))."""
    _, dist = _near_poles(f, X)
    clear = not (dist.size and dist.min() <= NEAR_POLE)
    a = Hypothesis("no poles near X", clear,
                   "closest pole distance " + (f"{dist.min():.3g}" if dist.size else "n/a"))
    b = Hypothesis("X inside K(f(X))", False, "not evaluated")
    c = Hypothesis("f^2(X) in ext(f(X))", False, "not evaluated")
    fX = None
    if clear:
        try:
            fX = push_forward(f, X)
        except (PoleOnCurveError, RefinementError) as exc:
            b.detail = f"image not computable: {exc}"
    if fX is not None and is_degenerate(fX):
        b.detail = "f(X) collapsed to a point"
        fX = None
    if fX is not None:
        inside = _inside_mask(fX, X.points)
        b.passed = bool(inside.all())
        b.detail = f"{int(inside.sum())}/{inside.size} samples of X in K(f(X))"
        try:
            f2 = push_forward(f, fX).points
            note = ""
        except (PoleOnCurveError, RefinementError):
            # infinity lies in ext(f(X)); test the finite samples only
            f2 = f(fX.points)
            f2 = f2[np.isfinite(f2)]
            note = " (f^2(X) passes through infinity)"
        outside = ~_inside_mask(fX, f2) if f2.size else np.array([True])
        c.passed = bool(outside.all())
        c.detail = f"{int(outside.sum())}/{outside.size} samples outside K(f(X))" + note
    rep = HypothesisReport([a, b, c], "hypotheses not met; no conclusion")
    if rep.passed:
        notes: list = []
        rep.fixed_points = _fixed_points_in(f, fX, notes)
        rep.conclusion = _weak_conclusion(rep.fixed_points, "K(f(X))")
        if notes:
            rep.extra["notes"] = notes
    return rep


def _weak_conclusion(points: List[FixedPoint], where: str) -> str:
    weak = [p for p in points if p.weakly_repelling]
    if weak:
        return (f"weakly repelling fixed point predicted in the interior of {where}; found "
                + ", ".join(_fmt(p.location) for p in weak))
    return f"hypotheses pass but no weakly repelling fixed point was found in {where}"


__all__ = [
    "Hypothesis",
    "HypothesisReport",
    "LoopSearchResult",
    "check_index_hypotheses",
    "poles_in_loops_search",
    "check_surround_and_map_out",
    "check_map_out_twice",
]

"""Sampled closed curves, winding numbers and raster filled-set membership.

A :class:`Curve` is the closed polyline through its samples. Winding numbers
are exact for that polyline. The filled set K(X) (the complement of the
unbounded complementary component) is approximated on a raster: cells hit by
the polyline are walls, the frame is flood-filled, and unreached cells form
K(X).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import ndimage

from .window import Window

#: Points closer than this to a polyline are considered on it.
ON_CURVE_TOL = 1e-12
DEFAULT_RASTER = 512
RETRY_RASTER = 2048


class CurveError(ValueError):
    """Malformed curve or curve-level precondition violated."""


class PointOnCurveError(CurveError):
    """A query point lies on the polyline."""


class PoleOnCurveError(CurveError):
    """A pole lies on (or an image point went to infinity along) the curve."""


class FixedPointOnCurveError(CurveError):
    """A fixed point lies on the curve."""


class RefinementError(ArithmeticError):
    """Adaptive refinement hit its point cap."""

    def __init__(self, message: str, max_gap: float = float("nan")):
        super().__init__(message)
        self.max_gap = max_gap


class WallCellError(ValueError):
    """A query point falls in a raster cell crossed by the curve."""


@dataclass(frozen=True, eq=False)
class Curve:
    """Closed sampled curve ``p_0 .. p_{n-1}`` (``p_n = p_0`` implied)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128).ravel()
        if pts.size < 8:
            raise CurveError(f"a curve needs at least 8 samples, got {pts.size}")
        if not np.all(np.isfinite(pts)):
            raise CurveError("curve samples must be finite")
        if np.any(pts == np.roll(pts, -1)):
            raise CurveError("consecutive samples must be distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def unchecked(cls, points) -> "Curve":
        """Wrap samples without validation (images of curves may degenerate)."""
        obj = object.__new__(cls)
        pts = np.asarray(points, dtype=np.complex128).ravel().copy()
        pts.setflags(write=False)
        object.__setattr__(obj, "points", pts)
        return obj

    @classmethod
    def circle(cls, center: complex = 0j, radius: float = 1.0, n: int = 64, turns: int = 1, phase: float = 0.0) -> "Curve":
        t = np.arange(n) / n
        return cls(center + radius * np.exp(1j * (2 * np.pi * turns * t + phase)))

    @classmethod
    def ellipse(cls, center: complex, a: float, b: float, angle: float = 0.0, n: int = 64, phase: float = 0.0,
                clockwise: bool = False) -> "Curve":
        t = 2 * np.pi * np.arange(n) / n + phase
        if clockwise:
            t = -t
        pts = a * np.cos(t) + 1j * b * np.sin(t)
        return cls(center + pts * np.exp(1j * angle))

    @classmethod
    def rectangle(cls, window: Window, per_side: int = 8) -> "Curve":
        """Counter-clockwise boundary of ``window``."""
        xmin, xmax, ymin, ymax = window.bounds
        s = np.arange(per_side) / per_side
        bottom = xmin + (xmax - xmin) * s + 1j * ymin
        right = xmax + 1j * (ymin + (ymax - ymin) * s)
        top = xmax - (xmax - xmin) * s + 1j * ymax
        left = xmin + 1j * (ymax - (ymax - ymin) * s)
        return cls(np.concatenate([bottom, right, top, left]))

    @classmethod
    def from_json(cls, text: str) -> "Curve":
        data = json.loads(text)
        try:
            arr = np.asarray(data, dtype=float)
        except (TypeError, ValueError) as exc:
            raise CurveError(f"curve JSON must be an array of [re, im] pairs: {exc}") from None
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise CurveError("curve JSON must be an array of [re, im] pairs")
        return cls(arr[:, 0] + 1j * arr[:, 1])

    def to_json(self) -> str:
        return json.dumps([[float(p.real), float(p.imag)] for p in self.points])

    def __len__(self) -> int:
        return self.points.size

    @property
    def closed(self) -> np.ndarray:
        return np.append(self.points, self.points[0])

    def bounding_window(self, margin: float = 0.0) -> Window:
        return Window.around(self.points, margin)

    def diameter(self) -> float:
        p = self.points
        return float(max(np.ptp(p.real), np.ptp(p.imag)))

    def signed_area(self) -> float:
        p = self.points
        q = np.roll(p, -1)
        return float(0.5 * np.sum(p.real * q.imag - q.real * p.imag))

    def orientation(self) -> int:
        """+1 for counter-clockwise (or degenerate), -1 for clockwise."""
        return -1 if self.signed_area() < 0 else 1


# --------------------------------------------------------------------------
# Distances


def distance_to_polyline(points: np.ndarray, P) -> np.ndarray:
    """Distance from each query point in ``P`` to the closed polyline through ``points``."""
    a = np.asarray(points, dtype=np.complex128)
    b = np.roll(a, -1)
    q = np.atleast_1d(np.asarray(P, dtype=np.complex128))
    ab = b - a
    L = np.abs(ab) ** 2
    out = np.empty(q.size)
    step = max(1, 2_000_000 // max(a.size, 1))
    for s in range(0, q.size, step):
        qq = q[s : s + step, None]
        with np.errstate(all="ignore"):
            t = np.clip(((qq - a) * np.conj(ab)).real / np.where(L > 0, L, 1), 0, 1)
        out[s : s + step] = np.min(np.abs(a + t * ab - qq), axis=1)
    return out


def _orient(a, b, c):
    return (b.real - a.real) * (c.imag - a.imag) - (b.imag - a.imag) * (c.real - a.real)


def polyline_distance(c1: Curve, c2: Curve) -> float:
    """Minimum distance between two closed polylines (0 if they cross)."""
    a1, b1 = c1.points[:, None], np.roll(c1.points, -1)[:, None]
    a2, b2 = c2.points[None, :], np.roll(c2.points, -1)[None, :]
    d1, d2 = _orient(a2, b2, a1), _orient(a2, b2, b1)
    d3, d4 = _orient(a1, b1, a2), _orient(a1, b1, b2)
    if np.any((d1 * d2 < 0) & (d3 * d4 < 0)):
        return 0.0
    return float(min(distance_to_polyline(c2.points, c1.points).min(), distance_to_polyline(c1.points, c2.points).min()))


# --------------------------------------------------------------------------
# Winding numbers


def _turning(d: np.ndarray) -> float:
    """Total signed turning of the vectors ``d_k`` (closed), in turns."""
    ang = np.angle(np.roll(d, -1) / d)
    return float(np.sum(ang) / (2 * np.pi))


def winding_number(c: Curve, P: complex) -> int:
    """Number of counter-clockwise turns of the polyline around ``P``."""
    P = complex(P)
    if distance_to_polyline(c.points, P)[0] < ON_CURVE_TOL:
        raise PointOnCurveError(f"point {P} lies on the curve")
    return int(round(_turning(c.points - P)))


def winding_numbers(c: Curve, Ps) -> np.ndarray:
    """Vectorized :func:`winding_number`; points on the curve raise."""
    Ps = np.atleast_1d(np.asarray(Ps, dtype=np.complex128))
    if Ps.size and distance_to_polyline(c.points, Ps).min() < ON_CURVE_TOL:
        raise PointOnCurveError("a query point lies on the curve")
    out = np.empty(Ps.size, dtype=int)
    p = c.points
    q = np.roll(p, -1)
    step = max(1, 2_000_000 // p.size)
    for s in range(0, Ps.size, step):
        P = Ps[s : s + step, None]
        ang = np.angle((q - P) / (p - P)).sum(axis=1)
        out[s : s + step] = np.round(ang / (2 * np.pi)).astype(int)
    return out


def relative_winding(sigma: Curve, gamma: Curve) -> int:
    """Winding number around 0 of the difference curve ``sigma_k - gamma_k``."""
    if len(sigma) != len(gamma):
        raise CurveError(f"sample counts differ: {len(sigma)} vs {len(gamma)}")
    d = sigma.points - gamma.points
    if np.any(np.abs(d) < ON_CURVE_TOL):
        raise CurveError("curves have coincident samples")
    seg = distance_to_polyline(d, 0j)[0]
    if seg < ON_CURVE_TOL:
        raise PointOnCurveError("difference curve passes through 0")
    return int(round(_turning(d)))


def disjoint_winding_sum(sigma: Curve, gamma: Curve) -> int:
    """``wind(gamma, Q) + wind(sigma, P)`` for samples ``Q`` of sigma and ``P`` of gamma.

    For disjoint closed curves this equals :func:`relative_winding`.
    """
    if polyline_distance(sigma, gamma) <= 0:
        raise CurveError("curves intersect")
    return winding_number(gamma, sigma.points[0]) + winding_number(sigma, gamma.points[0])


# --------------------------------------------------------------------------
# Raster filled sets


class FillRaster:
    """Square-cell raster over a box, used to flood-fill complements of polylines."""

    def __init__(self, box: Window, n: int):
        self.box = box
        self.n = int(n)
        xmin, xmax, ymin, ymax = box.bounds
        self.xmin, self.ymin = xmin, ymin
        self.cw = (xmax - xmin) / self.n
        self.ch = (ymax - ymin) / self.n

    @classmethod
    def for_curve(cls, c: Curve, n: int = DEFAULT_RASTER) -> "FillRaster":
        w = c.bounding_window()
        side = max(w.width, w.height, 1e-9)
        # degenerate extents padded so cells stay well-shaped
        box = Window(w.center, max(w.width, 1e-3 * side) * 1.2, max(w.height, 1e-3 * side) * 1.2)
        return cls(box, n)

    def cells(self, zs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(column, row) indices; row 0 at the bottom. Unclipped."""
        zs = np.asarray(zs, dtype=np.complex128)
        ix = np.floor((zs.real - self.xmin) / self.cw).astype(np.int64)
        iy = np.floor((zs.imag - self.ymin) / self.ch).astype(np.int64)
        return ix, iy

    def inside(self, ix, iy) -> np.ndarray:
        return (ix >= 0) & (ix < self.n) & (iy >= 0) & (iy < self.n)

    def walls(self, c: Curve) -> np.ndarray:
        """Cells visited by the polyline, sampled at half-cell steps (8-connected)."""
        a = c.points
        b = np.roll(a, -1)
        steps = np.maximum(np.abs(b.real - a.real) / self.cw, np.abs(b.imag - a.imag) / self.ch)
        counts = np.ceil(2 * steps).astype(np.int64) + 1
        seg = np.repeat(np.arange(a.size), counts)
        start = np.repeat(np.cumsum(counts) - counts, counts)
        t = (np.arange(seg.size) - start) / np.repeat(np.maximum(counts - 1, 1), counts)
        pts = a[seg] + t * (b[seg] - a[seg])
        ix, iy = self.cells(pts)
        keep = self.inside(ix, iy)
        grid = np.zeros((self.n, self.n), dtype=bool)
        grid[iy[keep], ix[keep]] = True
        return grid

    def exterior(self, walls: np.ndarray) -> np.ndarray:
        """Free cells 4-connected to the frame."""
        free = ~walls
        lab, _ = ndimage.label(free)
        border = np.unique(np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]]))
        border = border[border > 0]
        return np.isin(lab, border)

    def cell_centers(self, mask: np.ndarray) -> np.ndarray:
        iy, ix = np.nonzero(mask)
        return (self.xmin + (ix + 0.5) * self.cw) + 1j * (self.ymin + (iy + 0.5) * self.ch)


def filled_set_mask(c: Curve, points, raster_n: int = DEFAULT_RASTER, retry: Optional[int] = RETRY_RASTER) -> np.ndarray:
    """Membership of each point in K(c) (raster approximation).

    Raises :class:`WallCellError` when some point lies in a cell crossed by
    the polyline, after one retry at ``retry`` resolution if given.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=np.complex128))
    raster = FillRaster.for_curve(c, raster_n)
    walls = raster.walls(c)
    ext = raster.exterior(walls)
    ix, iy = raster.cells(pts)
    inside = raster.inside(ix, iy)
    out = np.zeros(pts.size, dtype=bool)
    jx, jy = ix[inside], iy[inside]
    wall_hit = walls[jy, jx]
    if wall_hit.any():
        if retry and retry > raster_n:
            return filled_set_mask(c, pts, retry, None)
        raise WallCellError(f"{int(wall_hit.sum())} point(s) fall in wall cells at raster {raster_n}")
    out[inside] = ~ext[jy, jx]
    return out


def filled_set_contains(c: Curve, P: complex, raster_n: int = DEFAULT_RASTER) -> bool:
    """True iff ``P`` lies in K(c): not reachable from the frame of a box 1.2x the curve's bounding box."""
    if distance_to_polyline(c.points, P)[0] < ON_CURVE_TOL:
        raise PointOnCurveError(f"point {P} lies on the curve")
    return bool(filled_set_mask(c, [P], raster_n, retry=None)[0])


def filled_set_cells(c: Curve, raster_n: int = DEFAULT_RASTER) -> np.ndarray:
    """Centers of all raster cells of K(c), wall cells included."""
    raster = FillRaster.for_curve(c, raster_n)
    walls = raster.walls(c)
    return raster.cell_centers(~raster.exterior(walls))


# --------------------------------------------------------------------------
# Push-forward and adaptive refinement


def refine(f: Callable, points: np.ndarray, split: Callable, max_points: int):
    """Insert midpoints until ``split(src, img)`` flags no segment.

    ``split`` receives closed-polyline samples and their images and returns a
    boolean per segment (k -> k+1). Returns refined ``(src, img)``.
    """
    src = np.asarray(points, dtype=np.complex128)
    img = f(src)
    if not np.all(np.isfinite(img)):
        raise PoleOnCurveError("curve passes through a pole (image at infinity)")
    while True:
        flags = np.asarray(split(src, img), dtype=bool)
        if not flags.any():
            return src, img
        if src.size + int(flags.sum()) > max_points:
            gap = float(np.max(np.abs(np.roll(img, -1) - img)))
            raise RefinementError(f"refinement exceeded {max_points} points", gap)
        nxt = np.roll(src, -1)
        mids = 0.5 * (src[flags] + nxt[flags])
        mimg = f(mids)
        if not np.all(np.isfinite(mimg)):
            raise PoleOnCurveError("curve passes through a pole (image at infinity)")
        pos = np.nonzero(flags)[0] + 1
        src = np.insert(src, pos, mids)
        img = np.insert(img, pos, mimg)


def push_forward_samples(f: Callable, c: Curve, tol: Optional[float] = None, max_points: int = 200_000):
    """Refined source samples and their images (see :func:`push_forward`)."""
    if tol is None:
        first = f(c.points)
        if not np.all(np.isfinite(first)):
            raise PoleOnCurveError("curve passes through a pole (image at infinity)")
        span = max(np.ptp(first.real), np.ptp(first.imag))
        tol = max(0.01 * span, 1e-12)

    def split(src, img):
        return np.abs(np.roll(img, -1) - img) >= tol

    return refine(f, c.points, split, max_points)


def push_forward(f: Callable, c: Curve, tol: Optional[float] = None, max_points: int = 200_000) -> Curve:
    """Image curve ``f(c)``, subdividing until adjacent image points are closer than ``tol``.

    ``tol`` defaults to 1% of the extent of the unrefined image. Consecutive
    duplicate image points are dropped; the result may be degenerate (for
    instance when the curve collapses onto an attracting fixed point).
    """
    _, img = push_forward_samples(f, c, tol, max_points)
    keep = img != np.roll(img, 1)
    if not keep.any():
        keep[0] = True
    return Curve.unchecked(img[keep])


def is_degenerate(c: Curve, tol: float = 1e-12) -> bool:
    pts = c.points
    return pts.size < 8 or max(np.ptp(pts.real), np.ptp(pts.imag)) < tol


__all__ = [
    "Curve",
    "CurveError",
    "PointOnCurveError",
    "PoleOnCurveError",
    "FixedPointOnCurveError",
    "RefinementError",
    "WallCellError",
    "winding_number",
    "winding_numbers",
    "relative_winding",
    "disjoint_winding_sum",
    "filled_set_contains",
    "filled_set_mask",
    "filled_set_cells",
    "push_forward",
    "push_forward_samples",
    "refine",
    "distance_to_polyline",
    "polyline_distance",
    "FillRaster",
]

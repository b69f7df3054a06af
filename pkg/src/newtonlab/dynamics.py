"""Orbit iteration, basin rendering and PPM output."""
from __future__ import annotations

import colorsys
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import expr as ex
from .maps import ComplexMap, build_newton_map
from .poly import RootSet
from .validation import check_points, check_positive, check_resolution, worker_count
from .window import Window

ESCAPED = -1
HIT_POLE = -2
UNDECIDED = -3
SPECIAL_LABELS = {ESCAPED: "escaped", HIT_POLE: "hit-pole", UNDECIDED: "undecided"}

DEFAULT_EPS = 1e-9
RENDER_MAX_ITER = 256
ORBIT_MAX_ITER = 10000
ESCAPE_RADIUS = 1e8
ESCAPE_STEPS = 3


@dataclass(frozen=True)
class OrbitResult:
    outcome: str  # converged | escaped | hit-pole | undecided
    iterations: int
    final: complex
    root_index: Optional[int] = None

    @property
    def label(self) -> int:
        if self.outcome == "converged":
            return self.root_index
        return {"escaped": ESCAPED, "hit-pole": HIT_POLE, "undecided": UNDECIDED}[self.outcome]


def convergence_radii(roots: RootSet, eps: float) -> np.ndarray:
    """Per-root capture radius: eps for simple roots, eps**(1/m) for m-fold roots.

    An m-fold root can only be approached to about (machine eps)**(1/m) in
    floating point, so a fixed eps would leave its basin undecided.
    """
    mult = roots.multiplicities if len(roots) else np.zeros(0)
    return np.array([eps ** (1.0 / m) if eps < 1 else eps for m in mult], dtype=float)


def _iterate(f: ComplexMap, z0: np.ndarray, roots: np.ndarray, radii: np.ndarray, max_iter: int,
             escape_radius: float, escape_steps: int):
    """Vectorized orbit classification; every element is processed independently."""
    n = z0.size
    labels = np.full(n, UNDECIDED, dtype=np.int32)
    iters = np.full(n, max_iter, dtype=np.int32)
    final = z0.astype(np.complex128).copy()

    idx = np.arange(n)
    zs = final.copy()
    streak = np.zeros(n, dtype=np.int32)
    for k in range(max_iter + 1):
        if idx.size == 0:
            break
        done = np.zeros(idx.size, dtype=bool)
        if roots.size:
            best = np.full(idx.size, np.inf)
            which = np.full(idx.size, -1, dtype=np.int32)
            for j, (r, rad) in enumerate(zip(roots, radii)):
                d = np.abs(zs - r)
                hit = (d < rad) & (d < best)
                best = np.where(hit, d, best)
                which = np.where(hit, j, which)
            conv = which >= 0
            labels[idx[conv]] = which[conv]
            done |= conv
        esc = ~done & (streak >= escape_steps)
        labels[idx[esc]] = ESCAPED
        done |= esc
        iters[idx[done]] = k
        final[idx[done]] = zs[done]

        keep = ~done
        idx, zs, streak = idx[keep], zs[keep], streak[keep]
        if k == max_iter or idx.size == 0:
            final[idx] = zs
            break

        w = f(zs)
        pole = ~np.isfinite(w)
        if pole.any():
            labels[idx[pole]] = HIT_POLE
            iters[idx[pole]] = k
            final[idx[pole]] = ex.INF
            keep = ~pole
            idx, w, streak = idx[keep], w[keep], streak[keep]
        zs = w
        streak = np.where(np.abs(zs) > escape_radius, streak + 1, 0)
    return labels, iters, final


def iterate_orbit(N: ComplexMap, z0: complex, roots: RootSet, max_iter: int = ORBIT_MAX_ITER, eps: float = DEFAULT_EPS,
                  escape_radius: float = ESCAPE_RADIUS, escape_steps: int = ESCAPE_STEPS) -> OrbitResult:
    """Follow z <- N(z) from ``z0`` until it settles on a root, escapes, hits a pole or runs out.

    Runs the same kernel as :func:`render_basins`, so a single orbit and the
    corresponding grid cell agree bit for bit.
    """
    max_iter = check_positive("max_iter", max_iter, integer=True)
    eps = check_positive("eps", eps)
    labels, iters, final = _iterate(N, np.array([complex(z0)]), roots.locations, convergence_radii(roots, eps),
                                    max_iter, escape_radius, escape_steps)
    lab, it, fin = int(labels[0]), int(iters[0]), complex(final[0])
    if lab >= 0:
        return OrbitResult("converged", it, fin, lab)
    return OrbitResult(SPECIAL_LABELS[lab], it, fin)


@dataclass
class BasinGrid:
    """Raster of orbit classifications over a window (row 0 at the top)."""

    window: Window
    labels: np.ndarray  # (ny, nx) int32
    iterations: np.ndarray  # (ny, nx) int32
    max_iter: int
    roots: RootSet = field(default_factory=RootSet)

    @property
    def nx(self) -> int:
        return self.labels.shape[1]

    @property
    def ny(self) -> int:
        return self.labels.shape[0]

    @property
    def shape(self):
        return self.labels.shape

    def points(self) -> np.ndarray:
        return self.window.pixel_centers(self.nx, self.ny)

    def counts(self) -> dict:
        vals, cnt = np.unique(self.labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}

    def to_dict(self) -> dict:
        return {
            "window": self.window.to_dict(),
            "max_iter": int(self.max_iter),
            "labels": self.labels.tolist(),
            "iterations": self.iterations.tolist(),
            "roots": [[r.real, r.imag, m] for r, m in self.roots],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BasinGrid":
        labels = np.asarray(d["labels"], dtype=np.int32)
        if labels.ndim != 2 or labels.size == 0:
            raise ValueError("labels must be a non-empty 2-D array")
        if "iterations" in d:
            iterations = np.asarray(d["iterations"], dtype=np.int32)
            if iterations.shape != labels.shape:
                raise ValueError("iterations must match labels in shape")
        else:
            iterations = np.zeros_like(labels)
        if "window" in d:
            window = Window.from_dict(d["window"])
        else:
            window = Window(0j, float(labels.shape[1]), float(labels.shape[0]))
        roots = RootSet.from_pairs((complex(r[0], r[1]), int(r[2]) if len(r) > 2 else 1) for r in d.get("roots", []))
        return cls(window, labels, iterations, int(d.get("max_iter", max(1, int(iterations.max(initial=1))))), roots)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def render_basins(N: ComplexMap, roots: RootSet, window: Window, resolution, max_iter: int = RENDER_MAX_ITER,
                  eps: float = DEFAULT_EPS, escape_radius: float = ESCAPE_RADIUS, escape_steps: int = ESCAPE_STEPS,
                  n_jobs: Optional[int] = None) -> BasinGrid:
    """Classify the orbit of every pixel center of ``window``.

    Work is split into row blocks across ``n_jobs`` threads (default from
    NEWTONLAB_THREADS); each cell is computed independently, so the output is
    identical for any worker count.
    """
    nx, ny = check_resolution(resolution)
    max_iter = check_positive("max_iter", max_iter, integer=True)
    eps = check_positive("eps", eps)
    pts = window.pixel_centers(nx, ny).ravel()
    locs, radii = roots.locations, convergence_radii(roots, eps)

    workers = worker_count(n_jobs)
    n_blocks = max(1, min(ny, 4 * workers)) if workers > 1 else 1
    bounds = np.linspace(0, pts.size, n_blocks + 1).astype(int)

    def run(b):
        lo, hi = bounds[b], bounds[b + 1]
        return _iterate(N, pts[lo:hi], locs, radii, max_iter, escape_radius, escape_steps)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    else:
        parts = [run(b) for b in range(n_blocks)]
    labels = np.concatenate([p[0] for p in parts]).reshape(ny, nx)
    iters = np.concatenate([p[1] for p in parts]).reshape(ny, nx)
    return BasinGrid(window, labels, iters, max_iter, roots)


# --------------------------------------------------------------------------
# Images

SPECIAL_COLORS = {ESCAPED: (255, 255, 255), HIT_POLE: (0, 0, 0), UNDECIDED: (0, 0, 0)}


def default_palette(n: int) -> list:
    """``n`` saturated, evenly spaced hues."""
    out = []
    for k in range(max(n, 1)):
        r, g, b = colorsys.hsv_to_rgb((k / max(n, 1) + 0.02) % 1.0, 0.85, 1.0)
        out.append((round(r * 255), round(g * 255), round(b * 255)))
    return out


def shade_factors(iterations: np.ndarray, max_iter: int) -> np.ndarray:
    """Linear dimming with iteration count, from 1 down to a floor of 0.3."""
    it = np.clip(np.asarray(iterations, dtype=float), 0, max_iter)
    return 1.0 - 0.7 * it / max(max_iter, 1)


def rgb_array(grid: BasinGrid, palette: Sequence, special_colors: Optional[dict] = None) -> np.ndarray:
    labels = grid.labels
    top = int(labels.max(initial=-1))
    if top >= len(palette):
        raise ValueError(f"palette has {len(palette)} colors but label {top} occurs")
    special = dict(SPECIAL_COLORS)
    if special_colors:
        special.update(special_colors)
    table = np.zeros((len(palette) + 3, 3), dtype=float)
    table[: len(palette)] = np.asarray(palette, dtype=float).reshape(-1, 3) if len(palette) else 0
    for lab, color in special.items():
        table[lab] = color  # negative labels index from the end
    base = table[labels]
    factor = shade_factors(grid.iterations, grid.max_iter)[..., None]
    return np.floor(base * factor + 0.5).astype(np.uint8)


def ppm_bytes(rgb: np.ndarray) -> bytes:
    ny, nx, _ = rgb.shape
    return f"P6\n{nx} {ny}\n255\n".encode("ascii") + np.ascontiguousarray(rgb, dtype=np.uint8).tobytes()


def write_image(grid: BasinGrid, palette: Sequence, special_colors: Optional[dict] = None) -> bytes:
    """Binary PPM (P6) of the grid: one palette color per root label, dimmed by iteration count."""
    return ppm_bytes(rgb_array(grid, palette, special_colors))


# --------------------------------------------------------------------------
# Estimator


class NewtonBasinClassifier(ClassifierMixin, TransformerMixin, BaseEstimator):
    """Classify points of the plane by the root their Newton orbit converges to.

    Parameters
    ----------
    function : str
        Formula for the entire function g.
    max_iter : int
        Iteration cap per orbit.
    eps : float
        Capture radius around simple roots.
    escape_radius, escape_steps : float, int
        An orbit has escaped once ``|z|`` exceeds the radius this many steps in a row.
    window : tuple or None
        ``(center_re, center_im, width, height)`` used to inventory roots and
        poles of transcendental g. When None, ``fit`` uses the bounding box
        of ``X`` (or [-4, 4]^2 without data).
    n_jobs : int or None
        Worker threads for :meth:`render`.

    Attributes
    ----------
    newton_map_ : NewtonMap
    roots_ : RootSet
    classes_ : ndarray
        Root indices followed by the special labels -1 (escaped), -2 (hit-pole), -3 (undecided).
    """

    def __init__(self, function="z^3-1", max_iter=RENDER_MAX_ITER, eps=DEFAULT_EPS, escape_radius=ESCAPE_RADIUS,
                 escape_steps=ESCAPE_STEPS, window=None, n_jobs=None):
        self.function = function
        self.max_iter = max_iter
        self.eps = eps
        self.escape_radius = escape_radius
        self.escape_steps = escape_steps
        self.window = window
        self.n_jobs = n_jobs

    def _fit_window(self, X) -> Window:
        if self.window is not None:
            cx, cy, w, h = self.window
            return Window(complex(cx, cy), w, h)
        if X is not None:
            pts = check_points(X)
            if pts.size:
                return Window.around(pts, margin=0.1)
        return Window.square(4.0)

    def fit(self, X=None, y=None):
        check_positive("max_iter", self.max_iter, integer=True)
        check_positive("eps", self.eps)
        window = self._fit_window(X)
        self.window_ = window
        self.newton_map_ = build_newton_map(self.function, window=window)
        roots = self.newton_map_.roots
        self.roots_ = roots if roots is not None else self.newton_map_.roots_in(window)
        self.classes_ = np.concatenate([np.arange(len(self.roots_)), [ESCAPED, HIT_POLE, UNDECIDED]])
        return self

    def _run(self, X):
        check_is_fitted(self, "newton_map_")
        pts = check_points(X)
        return _iterate(self.newton_map_, pts, self.roots_.locations, convergence_radii(self.roots_, self.eps),
                        int(self.max_iter), self.escape_radius, int(self.escape_steps))

    def predict(self, X) -> np.ndarray:
        """Root index per point, or a negative special label."""
        return self._run(X)[0]

    def transform(self, X) -> np.ndarray:
        """Iterations taken per point, shape (n, 1)."""
        return self._run(X)[1][:, None].astype(float)

    def final_points(self, X) -> np.ndarray:
        return self._run(X)[2]

    def render(self, window: Window, resolution) -> BasinGrid:
        check_is_fitted(self, "newton_map_")
        return render_basins(self.newton_map_, self.roots_, window, resolution, max_iter=self.max_iter, eps=self.eps,
                             escape_radius=self.escape_radius, escape_steps=self.escape_steps, n_jobs=self.n_jobs)


__all__ = [
    "BasinGrid",
    "NewtonBasinClassifier",
    "OrbitResult",
    "iterate_orbit",
    "render_basins",
    "write_image",
    "default_palette",
    "ESCAPED",
    "HIT_POLE",
    "UNDECIDED",
]

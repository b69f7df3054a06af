"""Evaluable maps of the plane: Newton maps of entire functions and generic meromorphic maps.

Every map exposes the same small surface used by the dynamics and contour
code: calling it on a complex ndarray returns the image (infinity as
:data:`~newtonlab.expr.INF`), ``derivative`` returns the derivative, and
``poles_in(window)`` lists the poles (with orders) inside a window.
"""
from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from . import expr as ex
from .poly import RootSet, as_polynomial, cluster, rational_poles, roots_ascending, to_rational, trim
from .window import Window

POLYNOMIAL = "polynomial"
TRANSCENDENTAL = "transcendental"
RATIONAL_SPECIAL = "rational-special"

#: Seeds per axis for window-local zero searches.
SEEDS_PER_AXIS = 24
#: Zeros found by the window-local search are merged within this distance.
DEDUP_TOL = 1e-7


class ComplexMap:
    """Base interface; subclasses implement ``__call__`` on complex arrays."""

    kind = "generic"
    is_newton = False

    def __call__(self, zs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, point: complex) -> complex:
        return complex(self(np.array([point], dtype=np.complex128))[0])

    def derivative(self, zs: np.ndarray) -> np.ndarray:
        """Central-difference derivative; subclasses with symbolic forms override."""
        zs = np.asarray(zs, dtype=np.complex128)
        h = 1e-6 * (1 + np.abs(zs))
        with np.errstate(all="ignore"):
            return ex.totalize((self(zs + h) - self(zs - h)) / (2 * h))

    def poles_in(self, window: Window) -> RootSet:
        return RootSet()


class CallableMap(ComplexMap):
    """Wrap a plain vectorized function (useful for synthetic test doubles)."""

    def __init__(self, fn: Callable, poles: Sequence = (), derivative: Optional[Callable] = None, name: str = "callable"):
        self.fn = fn
        self.poles = RootSet.from_pairs(poles)
        self._derivative = derivative
        self.name = name

    def __call__(self, zs):
        zs = np.asarray(zs, dtype=np.complex128)
        with np.errstate(all="ignore"):
            return ex.totalize(np.asarray(self.fn(zs), dtype=np.complex128))

    def derivative(self, zs):
        if self._derivative is None:
            return super().derivative(zs)
        zs = np.asarray(zs, dtype=np.complex128)
        with np.errstate(all="ignore"):
            return ex.totalize(np.asarray(self._derivative(zs), dtype=np.complex128))

    def poles_in(self, window: Window) -> RootSet:
        return _filter(self.poles, window)

    def __repr__(self):
        return f"CallableMap({self.name})"


def _filter(roots: RootSet, window: Window) -> RootSet:
    return RootSet(tuple((loc, m) for loc, m in roots if window.contains(loc)))


# --------------------------------------------------------------------------
# Window-local zero search for transcendental expressions


def find_zeros(h: Callable, dh: Callable, window: Window, seeds: int = SEEDS_PER_AXIS, max_iter: int = 60) -> np.ndarray:
    """Zeros of ``h`` inside ``window`` by Newton iteration from a grid of seeds."""
    grid = window.scaled(1.1).pixel_centers(seeds, seeds).ravel()
    zs = grid.copy()
    done = np.zeros(zs.size, dtype=bool)
    for _ in range(max_iter):
        with np.errstate(all="ignore"):
            step = h(zs) / dh(zs)
        step = np.where(np.isfinite(step), step, 0)
        zs = np.where(done, zs, zs - step)
        done |= np.abs(step) <= 1e-15 * (1 + np.abs(zs))
        if done.all():
            break
    hv = np.abs(h(zs))
    scale = 1 + np.abs(dh(zs)) * (1 + np.abs(zs))
    ok = done & np.isfinite(zs) & (hv < 1e-10 * scale) & window.contains(zs)
    found = zs[ok]
    if found.size == 0:
        return found
    return np.array([found[g].mean() for g in cluster(found, DEDUP_TOL)])


def zero_order(derivs: Sequence[Callable], point: complex, rtol: float = 1e-6) -> int:
    """Order of a zero given evaluators of h, h', h'', ... (at least 1)."""
    vals = [abs(complex(d(np.array([point]))[0])) for d in derivs[1:]]
    ref = max(vals) if vals else 0.0
    for k, v in enumerate(vals, start=1):
        if v > rtol * ref:
            return k
    return len(vals)


def _derivative_chain(e: ex.Expr, n: int) -> list:
    out = [e]
    for _ in range(n):
        out.append(ex.differentiate(out[-1]))
    return out


# --------------------------------------------------------------------------
# Generic meromorphic maps


class MeromorphicMap(ComplexMap):
    """Map given by an arbitrary formula; poles exact when the formula is rational."""

    def __init__(self, f: ex.ExprLike):
        self.expr = ex.as_expr(f)
        self.dexpr = ex.differentiate(self.expr)
        self._f = ex.compile_expr(self.expr)
        self._df = ex.compile_expr(self.dexpr)
        rat = to_rational(self.expr)
        self.rational = rat
        self.kind = "rational" if rat is not None else TRANSCENDENTAL
        if rat is None:
            self._poles = None
        elif trim(rat[1], 1e-14).size > 1:
            self._poles = rational_poles(*rat)
        else:
            self._poles = RootSet()
        self._cache: dict = {}

    def __call__(self, zs):
        return self._f(zs)

    def derivative(self, zs):
        return self._df(zs)

    def poles_in(self, window: Window) -> RootSet:
        if self._poles is not None:
            return _filter(self._poles, window)
        if window not in self._cache:
            self._cache[window] = self._numeric_poles(window)
        return self._cache[window]

    def _numeric_poles(self, window: Window) -> RootSet:
        found = []
        for node in ex.walk(self.expr):
            if isinstance(node, ex.Div) and not ex.is_constant(node.right):
                chain = [ex.compile_expr(d) for d in _derivative_chain(node.right, 4)]
                for p in find_zeros(chain[0], chain[1], window):
                    found.append((p, zero_order(chain, p)))
        merged = []
        if found:
            locs = [p for p, _ in found]
            for g in cluster(locs, DEDUP_TOL):
                p = complex(np.mean([locs[i] for i in g]))
                big = np.abs(self(p + 1e-9 * np.exp(1j * np.pi * np.arange(4) / 2)))
                if np.all(big > 1e6):
                    merged.append((p, max(found[i][1] for i in g)))
        return RootSet(tuple(merged)).sorted()

    def __repr__(self):
        return f"MeromorphicMap({ex.to_string(self.expr)!r})"


def build_map(f: ex.ExprLike) -> MeromorphicMap:
    """Generic map from a formula, bypassing Newton construction."""
    e = ex.as_expr(f)
    if ex.is_constant(e):
        raise ValueError("map must depend on z")
    return MeromorphicMap(e)


# --------------------------------------------------------------------------
# Newton maps


class NewtonMap(ComplexMap):
    """Newton's method N(z) = z - g(z)/g'(z) of an entire function g.

    Attributes
    ----------
    g, dg, d2g : Expr
        The function and its first two derivatives.
    kind : str
        ``"polynomial"``, ``"rational-special"`` (g = P exp(Q)) or ``"transcendental"``.
    poles : RootSet
        Poles of N with orders. Exact for the rational kinds; for the
        transcendental kind, the inventory for the window given at construction.
    numerator, denominator : ndarray or None
        Ascending coefficients of N as a rational function (rational kinds only).
    """

    is_newton = True

    def __init__(self, g: ex.Expr, kind: str, numerator=None, denominator=None, zeros: Optional[RootSet] = None,
                 window: Optional[Window] = None):
        self.g = g
        self.dg = ex.differentiate(g)
        self.d2g = ex.differentiate(self.dg)
        self.kind = kind
        self.numerator = numerator
        self.denominator = denominator
        self._g = ex.compile_expr(g)
        self._dg = ex.compile_expr(self.dg)
        self._d2g = ex.compile_expr(self.d2g)
        self._zeros = zeros
        self._cache: dict = {}
        self.window = window
        if kind == TRANSCENDENTAL:
            self.poles = self.poles_in(window or Window.square(4.0))
        else:
            self.poles = rational_poles(numerator, denominator)

    def step(self, zs: np.ndarray) -> np.ndarray:
        """The Newton correction g/g', with removable 0/0 at multiple roots set to 0."""
        zs = np.asarray(zs, dtype=np.complex128)
        with np.errstate(all="ignore"):
            gv = self._g(zs)
            dv = self._dg(zs)
            ratio = ex.safe_divide(gv, dv)
            both = (np.abs(gv) < ex.TINY) & (np.abs(dv) < ex.TINY)
        if both.any():
            ratio = np.where(both, 0, ratio)
        return ratio

    def __call__(self, zs):
        zs = np.asarray(zs, dtype=np.complex128)
        with np.errstate(all="ignore"):
            return ex.totalize(zs - self.step(zs))

    def derivative(self, zs):
        """N' = g g'' / g'^2."""
        zs = np.asarray(zs, dtype=np.complex128)
        with np.errstate(all="ignore"):
            dv = self._dg(zs)
            return ex.totalize(ex.safe_divide(self._g(zs) * self._d2g(zs), dv * dv))

    def g_values(self, zs):
        return self._g(np.asarray(zs, dtype=np.complex128))

    def dg_values(self, zs):
        return self._dg(np.asarray(zs, dtype=np.complex128))

    def roots_in(self, window: Window) -> RootSet:
        """Zeros of g (the finite fixed points of N) inside ``window``."""
        if self._zeros is not None:
            return _filter(self._zeros, window)
        key = ("roots", window)
        if key not in self._cache:
            chain = [ex.compile_expr(d) for d in _derivative_chain(self.g, 4)]
            pts = find_zeros(self._g, self._dg, window)
            self._cache[key] = RootSet(tuple((complex(p), zero_order(chain, p)) for p in pts)).sorted()
        return self._cache[key]

    @property
    def roots(self) -> Optional[RootSet]:
        """All zeros of g for the rational kinds; None for transcendental g."""
        return self._zeros

    def poles_in(self, window: Window) -> RootSet:
        if self.kind != TRANSCENDENTAL:
            return _filter(self.poles, window)
        key = ("poles", window)
        if key not in self._cache:
            chain = [ex.compile_expr(d) for d in _derivative_chain(self.dg, 4)]
            pts = find_zeros(self._dg, self._d2g, window)
            gv = np.abs(self._g(pts)) if pts.size else pts
            keep = [complex(p) for p, v in zip(pts, gv) if v > 1e-10 * (1 + abs(p))]
            self._cache[key] = RootSet(tuple((p, zero_order(chain, p)) for p in keep)).sorted()
        return self._cache[key]

    def __repr__(self):
        return f"NewtonMap({ex.to_string(self.g)!r}, kind={self.kind!r})"


def _product_factors(e: ex.Expr, out: list) -> None:
    if isinstance(e, ex.Mul):
        _product_factors(e.left, out)
        _product_factors(e.right, out)
    elif isinstance(e, ex.Neg):
        out.append(ex.Const(-1))
        _product_factors(e.arg, out)
    elif isinstance(e, ex.Div) and ex.is_constant(e.right) and not ex.is_transcendental(e.right):
        _product_factors(e.left, out)
        out.append(ex.Div(ex.Const(1), e.right))
    elif isinstance(e, ex.Pow) and isinstance(e.base, ex.Exp):
        out.append(ex.Exp(ex.Mul(ex.Const(e.exponent), e.base.arg)))
    else:
        out.append(e)


def split_exp_product(g: ex.Expr) -> Optional[tuple]:
    """Ascending coefficients (P, Q) when g has the shape P(z) exp(Q(z)), else None."""
    factors: list = []
    _product_factors(g, factors)
    p_coeffs = np.array([1 + 0j])
    q_coeffs = np.array([0j])
    seen_exp = False
    for f in factors:
        if isinstance(f, ex.Exp):
            q = as_polynomial(f.arg)
            if q is None:
                return None
            q_coeffs = P.polyadd(q_coeffs, q)
            seen_exp = True
            continue
        p = as_polynomial(f)
        if p is None:
            return None
        p_coeffs = P.polymul(p_coeffs, p)
    if not seen_exp:
        return None
    return trim(p_coeffs, 1e-14), trim(q_coeffs, 1e-14)


def build_newton_map(g: ex.ExprLike, window: Optional[Window] = None) -> NewtonMap:
    """Construct N = z - g/g' and classify g syntactically.

    ``window`` only matters for transcendental g, whose pole inventory is
    window-local (defaults to [-4, 4]^2).

    Raises
    ------
    ValueError
        g constant, a polynomial of degree 1, or not entire.
    """
    g = ex.simplify(ex.as_expr(g))
    if ex.is_constant(g):
        raise ValueError("g must not be constant")

    rat = to_rational(g)
    if rat is not None:
        coeffs = as_polynomial(g)
        if coeffs is None:
            raise ValueError("g must be entire (no non-constant denominators)")
        degree = coeffs.size - 1
        if degree < 1 or np.all(coeffs[1:] == 0):
            raise ValueError("g must not be constant")
        if degree == 1:
            raise ValueError("g has degree 1: its Newton map is constant")
        dcoeffs = P.polyder(coeffs)
        num = trim(P.polysub(P.polymul([0, 1], dcoeffs), coeffs), 1e-14)
        return NewtonMap(g, POLYNOMIAL, num, trim(dcoeffs), zeros=roots_ascending(coeffs))

    split = split_exp_product(g)
    if split is not None:
        pc, qc = split
        if np.all(pc == 0):
            raise ValueError("g must not be constant")
        den = trim(P.polyadd(P.polyder(pc), P.polymul(pc, P.polyder(qc))), 1e-14)
        if np.all(den == 0):
            raise ValueError("g must not be constant")
        num = trim(P.polysub(P.polymul([0, 1], den), pc), 1e-14)
        zeros = roots_ascending(pc) if pc.size > 1 else RootSet()
        return NewtonMap(g, RATIONAL_SPECIAL, num, den, zeros=zeros)

    return NewtonMap(g, TRANSCENDENTAL, window=window)


def rational_degree(m: NewtonMap) -> Optional[int]:
    """Degree of N as a rational map (rational kinds), after cancelling common roots."""
    if m.numerator is None:
        return None
    n, d = trim(m.numerator, 1e-14), trim(m.denominator, 1e-14)
    common = 0
    if n.size > 1 and d.size > 1:
        nr, dr = roots_ascending(n), roots_ascending(d)
        for loc, mult in dr:
            common += min(mult, sum(k for r, k in nr if abs(r - loc) < 1e-6 * (1 + abs(loc))))
    return max(n.size - 1, d.size - 1) - common


__all__ = [
    "ComplexMap",
    "CallableMap",
    "MeromorphicMap",
    "NewtonMap",
    "build_map",
    "build_newton_map",
    "split_exp_product",
    "find_zeros",
    "zero_order",
    "rational_degree",
    "POLYNOMIAL",
    "TRANSCENDENTAL",
    "RATIONAL_SPECIAL",
]

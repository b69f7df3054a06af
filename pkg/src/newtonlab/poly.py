"""Polynomial utilities: simultaneous root finding and rational normal forms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from . import expr as ex

#: Roots closer than this (after polishing) are merged into one multiple root.
CLUSTER_TOL = 1e-7


class RootFindingError(ArithmeticError):
    """Simultaneous iteration failed to reach the residual bound."""


@dataclass(frozen=True)
class RootSet:
    """Distinct roots with multiplicities."""

    roots: tuple = ()

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "RootSet":
        return cls(tuple((complex(loc), int(m)) for loc, m in pairs))

    @property
    def locations(self) -> np.ndarray:
        return np.array([r for r, _ in self.roots], dtype=np.complex128)

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([m for _, m in self.roots], dtype=int)

    @property
    def degree(self) -> int:
        return int(sum(m for _, m in self.roots))

    def __len__(self) -> int:
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def sorted(self) -> "RootSet":
        return RootSet(tuple(sorted(self.roots, key=lambda r: (round(r[0].real, 12), round(r[0].imag, 12)))))


def trim(coeffs: np.ndarray, rtol: float = 0.0) -> np.ndarray:
    """Drop vanishing top coefficients of an ascending coefficient array."""
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.size == 0:
        return np.zeros(1, dtype=np.complex128)
    scale = np.max(np.abs(c))
    n = c.size
    while n > 1 and abs(c[n - 1]) <= rtol * scale:
        n -= 1
    return c[:n].copy()


def cluster(points: Sequence[complex], tol: float = CLUSTER_TOL) -> list:
    """Single-linkage clusters of ``points``; returns lists of indices."""
    pts = np.asarray(points, dtype=np.complex128)
    n = pts.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if n:
        d = np.abs(pts[:, None] - pts[None, :])
        for i, j in zip(*np.nonzero(np.triu(d < tol, 1))):
            parent[find(i)] = find(j)
    groups: dict = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def _initial_guesses(a: np.ndarray) -> np.ndarray:
    # a: monic, descending
    n = a.size - 1
    center = -a[1] / n
    radius = max((abs(a[k]) ** (1.0 / k) for k in range(1, n + 1)), default=1.0)
    radius = max(radius, 1e-3)
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    return center + radius * np.exp(1j * angles)


def _aberth(a: np.ndarray, max_iter: int) -> np.ndarray:
    da = np.polyder(a)
    zs = _initial_guesses(a)
    for _ in range(max_iter):
        pv = np.polyval(a, zs)
        dv = np.polyval(da, zs)
        with np.errstate(all="ignore"):
            ratio = pv / dv
            diff = zs[:, None] - zs[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            step = ratio / (1.0 - ratio * s)
        bad = ~np.isfinite(step)
        if bad.any():
            # derivative vanished or two iterates collided: nudge them apart
            step[bad] = 1e-3 * (1 + np.abs(zs[bad])) * np.exp(1j * np.arange(bad.sum()))
        zs = zs - step
        if np.all(np.abs(step) <= 4e-16 * (1 + np.abs(zs))):
            break
    return zs


def _polish(a: np.ndarray, r: complex, mult: int) -> complex:
    # Newton on the (mult-1)-th derivative, where a multiple root is simple
    q = np.polyder(a, mult - 1) if mult > 1 else a
    dq = np.polyder(q)
    best, best_res = r, abs(np.polyval(a, r))
    for _ in range(8):
        d = np.polyval(dq, r)
        if d == 0:
            break
        r = r - np.polyval(q, r) / d
        res = abs(np.polyval(a, r))
        if res < best_res:
            best, best_res = r, res
    return best


def _merge_multiple(a: np.ndarray, approx: list) -> list:
    """Group approximations into (location, multiplicity) pairs.

    An m-fold root is only resolved to about eps**(1/m) by simultaneous
    iteration, so candidates are grouped loosely first. A group of m members
    counts as one root when its spread is within a small factor of the
    scatter that rounding alone produces around an m-fold root there;
    otherwise the members are clustered at CLUSTER_TOL.
    """
    pts = np.asarray(approx, dtype=np.complex128)
    n = a.size - 1
    loose = 1e-3 * (1 + np.max(np.abs(pts)))
    out = []
    for group in cluster(pts, loose):
        members = pts[group]
        m = len(group)
        if m > 1:
            center = complex(members.mean())
            spread = np.max(np.abs(members - center))
            noise = np.finfo(float).eps * np.sum(np.abs(a) * max(1.0, abs(center)) ** np.arange(n, -1, -1))
            lead = abs(np.polyval(np.polyder(a, m), center)) / math.factorial(m)
            if lead > 0 and spread <= 4 * (noise / lead) ** (1.0 / m):
                out.append((complex(_polish(a, center, m)), m))
                continue
        for sub in cluster(members):
            loc = complex(members[sub].mean())
            out.append((complex(_polish(a, loc, len(sub))), len(sub)))
    return out


def polynomial_roots(coeffs: Sequence[complex], max_iter: int = 1000) -> RootSet:
    """Roots of a polynomial given by coefficients, highest degree first.

    Aberth-Ehrlich simultaneous iteration, then merging of near-coincident
    approximations into multiple roots and Newton polishing of each on the
    appropriate derivative. Returned locations are pairwise farther apart
    than :data:`CLUSTER_TOL`.

    Raises
    ------
    ValueError
        Degree below 1 or vanishing leading coefficient.
    RootFindingError
        Some root misses the residual bound
        ``|p(r)| < 1e-10 * max|coeff| * (1 + |r|)**degree``.
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("need a polynomial of degree >= 1")
    if c[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be finite")
    n = c.size - 1
    a = c / c[0]

    # exact zero roots split off first; they otherwise slow Aberth down
    k = 0
    while k < n and c[n - k] == 0:
        k += 1
    approx = [0j] * k
    if n - k > 0:
        approx.extend(_aberth(a[: n - k + 1], max_iter))

    scale = np.max(np.abs(c))
    roots = []
    for loc, mult in _merge_multiple(a, approx):
        res = abs(np.polyval(c, loc))
        if not res < 1e-10 * scale * (1 + abs(loc)) ** n:
            raise RootFindingError(f"root {loc} has residual {res:.3e} after {max_iter} iterations")
        roots.append((loc, mult))
    return RootSet(tuple(roots)).sorted()


# --------------------------------------------------------------------------
# Rational normal form: expressions without transcendental nodes as num/den
# (ascending coefficient arrays).


def to_rational(e: ex.Expr) -> Optional[tuple]:
    """Return ``(num, den)`` ascending coefficients, or None if ``e`` is transcendental."""
    if ex.is_transcendental(e):
        return None
    return _rat(e)


def _rat(e: ex.Expr) -> tuple:
    one = np.array([1 + 0j])
    if isinstance(e, ex.Const):
        return np.array([e.value]), one
    if isinstance(e, ex.Var):
        return np.array([0j, 1 + 0j]), one
    if isinstance(e, ex.Neg):
        n, d = _rat(e.arg)
        return -n, d
    if isinstance(e, ex.Pow):
        n, d = _rat(e.base)
        return P.polypow(n, e.exponent), P.polypow(d, e.exponent)
    (a, b), (c, d) = _rat(e.left), _rat(e.right)
    if isinstance(e, ex.Add):
        return _add(a, b, c, d, 1)
    if isinstance(e, ex.Sub):
        return _add(a, b, c, d, -1)
    if isinstance(e, ex.Mul):
        return trim(P.polymul(a, c)), trim(P.polymul(b, d))
    return trim(P.polymul(a, d)), trim(P.polymul(b, c))


def _add(a, b, c, d, sign):
    if b.size == 1 and d.size == 1 and b[0] == d[0]:
        return trim(P.polyadd(a, sign * c)), b
    return trim(P.polyadd(P.polymul(a, d), sign * P.polymul(c, b))), trim(P.polymul(b, d))


def as_polynomial(e: ex.Expr) -> Optional[np.ndarray]:
    """Ascending coefficients if ``e`` is a polynomial in z, else None."""
    rat = to_rational(e)
    if rat is None:
        return None
    num, den = rat
    den = trim(den)
    if den.size != 1:
        return None
    return trim(num / den[0], rtol=1e-14)


def roots_ascending(coeffs: np.ndarray) -> RootSet:
    c = trim(coeffs, rtol=1e-14)
    if c.size < 2:
        return RootSet()
    return polynomial_roots(c[::-1])


def rational_poles(num: np.ndarray, den: np.ndarray, match_tol: float = 1e-6) -> RootSet:
    """Poles of num/den with orders, after cancelling roots shared with the numerator."""
    den_roots = roots_ascending(den)
    num_roots = roots_ascending(num) if trim(num, 1e-14).size > 1 else RootSet()
    poles = []
    for loc, mult in den_roots:
        shared = sum(m for r, m in num_roots if abs(r - loc) < match_tol * (1 + abs(loc)))
        if mult > shared:
            poles.append((loc, mult - shared))
    return RootSet(tuple(poles))

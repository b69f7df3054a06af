"""Shared oracles and generators for the test suite."""
import numpy as np

from newtonlab.curves import Curve


def crossing_winding(points, P):
    """Independent oracle: signed upward/downward crossings of a ray to the right."""
    a = np.asarray(points) - P
    b = np.roll(a, -1)
    total = 0
    for p, q in zip(a, b):
        cross = p.real * q.imag - q.real * p.imag
        if p.imag <= 0 < q.imag and cross > 0:
            total += 1
        elif q.imag <= 0 < p.imag and cross < 0:
            total -= 1
    return total


def random_disjoint_pair(rng):
    """Random pair of disjoint ellipses: nested either way or separated."""
    n = int(rng.integers(16, 129))
    kind = rng.integers(3)
    c1 = complex(*rng.uniform(-3, 3, 2))
    a1, b1 = rng.uniform(0.5, 2, 2)
    gamma = Curve.ellipse(c1, a1, b1, rng.uniform(0, np.pi), n, rng.uniform(0, 6), bool(rng.integers(2)))
    if kind == 0:  # sigma nested inside gamma
        s = rng.uniform(0.05, 0.4)
        sigma = Curve.ellipse(c1 + 0.1 * min(a1, b1) * complex(*rng.uniform(-1, 1, 2)), s * a1 * min(a1, b1) / max(a1, b1),
                              s * min(a1, b1), rng.uniform(0, np.pi), n, rng.uniform(0, 6), bool(rng.integers(2)))
    elif kind == 1:  # gamma nested inside sigma
        R = 2.5 * max(a1, b1)
        sigma = Curve.ellipse(c1, R, R * rng.uniform(0.9, 1.0), rng.uniform(0, np.pi), n, rng.uniform(0, 6),
                              bool(rng.integers(2)))
    else:  # separated
        d = 2.5 * max(a1, b1) + 2.5
        sigma = Curve.ellipse(c1 + d * np.exp(1j * rng.uniform(0, 6)), *rng.uniform(0.3, 2, 2), rng.uniform(0, np.pi),
                              n, rng.uniform(0, 6), bool(rng.integers(2)))
    return sigma, gamma

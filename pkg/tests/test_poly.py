import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newtonlab.poly import (
    RootSet,
    cluster,
    polynomial_roots,
    rational_poles,
    to_rational,
)
from newtonlab.expr import parse_function


def _locs(rs):
    return sorted(rs.locations, key=lambda c: (round(c.real, 6), round(c.imag, 6)))


def test_quadratic():
    rs = polynomial_roots([1, 0, -1])
    assert rs.multiplicities.tolist() == [1, 1]
    assert np.allclose(_locs(rs), [-1, 1])


def test_cube_roots_of_unity():
    rs = polynomial_roots([1, 0, 0, -1])
    expected = np.exp(2j * np.pi * np.arange(3) / 3)
    for r in expected:
        assert np.min(np.abs(rs.locations - r)) < 1e-12


def test_double_root():
    rs = polynomial_roots([1, -2, 1])
    assert len(rs) == 1
    (r, m), = rs
    assert m == 2 and abs(r - 1) < 1e-7


def test_mixed_multiplicities():
    # (z-1)^3 (z+2)^2
    coeffs = np.poly([1, 1, 1, -2, -2])
    rs = polynomial_roots(coeffs)
    got = {round(r.real, 6): m for r, m in rs}
    assert got == {1.0: 3, -2.0: 2}


def test_close_roots_stay_distinct():
    rs = polynomial_roots(np.poly([1, 1.0001, 1.0002]))
    assert rs.multiplicities.tolist() == [1, 1, 1]


def test_zero_roots_split_off():
    rs = polynomial_roots([1, -1, 0, 0])
    got = {round(r.real, 9): m for r, m in rs}
    assert got == {0.0: 2, 1.0: 1}


@pytest.mark.parametrize("coeffs", [[5], [0, 0, 1], []])
def test_rejects_degenerate_input(coeffs):
    with pytest.raises(ValueError):
        polynomial_roots(coeffs)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=3, max_size=11))
def test_residual_and_degree(coeffs):
    coeffs = [complex(1, 0.5)] + coeffs
    rs = polynomial_roots(coeffs)
    n = len(coeffs) - 1
    assert int(rs.multiplicities.sum()) == n
    scale = max(abs(c) for c in coeffs)
    for r, _ in rs:
        assert abs(np.polyval(coeffs, r)) < 1e-10 * scale * (1 + abs(r)) ** n


def test_random_against_numpy(rng):
    for _ in range(100):
        n = int(rng.integers(2, 11))
        roots = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
        rs = polynomial_roots(np.poly(roots))
        assert len(rs) == n
        for r in roots:
            assert np.min(np.abs(rs.locations - r)) < 1e-6


def test_locations_pairwise_separated(rng):
    for _ in range(20):
        rs = polynomial_roots(rng.normal(size=8) + 1j * rng.normal(size=8))
        d = np.abs(rs.locations[:, None] - rs.locations[None, :])
        assert np.all(d[~np.eye(len(rs), dtype=bool)] > 1e-7)


def test_cluster_single_linkage():
    groups = cluster([0, 6e-8, 1.2e-7, 1])
    assert sorted(len(g) for g in groups) == [1, 3]


def test_rootset_from_pairs_and_sorted():
    rs = RootSet.from_pairs([(1j, 1), (-1, 2)]).sorted()
    assert rs.degree == 3
    assert list(rs.locations) == [-1, 1j]


def test_rational_form_and_poles():
    num, den = to_rational(parse_function("z - (z^3-1)/(3*z^2)"))
    poles = rational_poles(num, den)
    assert len(poles) == 1
    (p, m), = poles
    assert abs(p) < 1e-12 and m == 2


def test_rational_poles_cancel_common_roots():
    # (z-1)(z+1) / ((z-1) z^2)
    poles = rational_poles(np.polynomial.polynomial.polyfromroots([1, -1]),
                           np.polynomial.polynomial.polyfromroots([1, 0, 0]))
    assert [(round(abs(p), 9), m) for p, m in poles] == [(0.0, 2)]


def test_transcendental_has_no_rational_form():
    assert to_rational(parse_function("sin(z)")) is None

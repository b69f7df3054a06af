import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newtonlab.curves import Curve, FixedPointOnCurveError, PoleOnCurveError
from newtonlab.expr import parse_function
from newtonlab.fixedpoints import (
    ATTRACTING,
    PARABOLIC,
    REPELLING,
    SUPERATTRACTING,
    INDIFFERENT,
    NotFixedError,
    classify_fixed_point,
    enclosed_poles,
    find_fixed_points,
    fixed_point_defect,
    isolate_fixed_points,
    stability_of,
)
from newtonlab.maps import CallableMap, build_newton_map
from newtonlab.poly import polynomial_roots
from newtonlab.window import Window


def half_plus_inverse():
    return CallableMap(lambda z: z / 2 + 1 / z, poles=[(0j, 1)],
                       derivative=lambda z: 0.5 - 1 / z**2, name="z/2+1/z")


class TestEnclosedPoles:
    def test_cubic_double_pole(self, N3):
        assert enclosed_poles(N3, Curve.circle(0, 2, 64)) == 2

    def test_pole_outside(self, N2):
        assert enclosed_poles(N2, Curve.circle(3, 0.5, 64)) == 0

    def test_simple_pole_inside(self, N2):
        assert enclosed_poles(N2, Curve.circle(0, 1, 64)) == 1

    def test_pole_on_curve(self, N2):
        sq = Curve(np.array([0, 1, 2, 2 + 1j, 1 + 1j, 1j, -1 + 1j, -1], dtype=complex))
        with pytest.raises(PoleOnCurveError):
            enclosed_poles(N2, sq)


class TestDefect:
    @pytest.mark.parametrize("center,radius,expected", [(0, 3, (1, 1, 2)), (1, 0.5, (1, 0, 1))])
    def test_quadratic(self, N2, center, radius, expected):
        rep = fixed_point_defect(N2, Curve.circle(center, radius, 64))
        assert (rep.defect, rep.poles_inside, rep.fixed_points_inside) == expected

    def test_cubic(self, N3):
        rep = fixed_point_defect(N3, Curve.circle(0, 2, 64))
        assert (rep.defect, rep.poles_inside, rep.fixed_points_inside) == (1, 2, 3)

    def test_clockwise_same_counts(self, N3):
        rep = fixed_point_defect(N3, Curve.ellipse(0, 2, 2, n=64, clockwise=True))
        assert (rep.defect, rep.poles_inside, rep.fixed_points_inside) == (1, 2, 3)

    def test_coarse_curve_refines(self, N3):
        # 8 samples are far too coarse for the turn-angle bound
        rep = fixed_point_defect(N3, Curve.circle(0, 2, 8))
        assert rep.fixed_points_inside == 3 and rep.samples >= 8

    def test_pole_near_edge_not_aliased(self):
        # triple pole 0.05 inside the edge of a box sampled every 0.125: the raw
        # turn angles alias, the box holds no fixed point
        N = build_newton_map(parse_function("z^4-1"))
        box = Window.from_bounds(-0.95, 0.05, -0.95, 0.05)
        rep = fixed_point_defect(N, Curve.rectangle(box, 8))
        assert (rep.defect, rep.poles_inside, rep.fixed_points_inside) == (-3, 3, 0)

    def test_fixed_point_on_curve(self, N2):
        with pytest.raises(FixedPointOnCurveError):
            fixed_point_defect(N2, Curve.circle(0, 1, 64))

    def test_report_dict(self, N2):
        d = fixed_point_defect(N2, Curve.circle(0, 3, 64)).to_dict()
        assert d["defect"] == 1 and d["poles"] == 1 and d["fixed"] == 2

    def test_generic_map(self):
        rep = fixed_point_defect(half_plus_inverse(), Curve.circle(0, 4, 64))
        assert rep.poles_inside == 1 and rep.fixed_points_inside == 2


class TestIsolate:
    def test_cube_roots(self, N3):
        found = isolate_fixed_points(N3, Window.square(2))
        expected = polynomial_roots([1, 0, 0, -1]).locations
        assert len(found) == 3
        for z, m in found:
            assert m == 1
            assert np.min(np.abs(expected - z)) < 1e-9
            assert abs(N3(z) - z) < 1e-9 * (1 + abs(z))

    def test_empty(self, N2):
        assert isolate_fixed_points(N2, Window.from_bounds(2, 3, -1, 1)) == []

    def test_generic(self):
        found = isolate_fixed_points(half_plus_inverse(), Window.square(4))
        locs = sorted(z.real for z, _ in found)
        assert locs == pytest.approx([-np.sqrt(2), np.sqrt(2)], abs=1e-10)

    def test_double_root_multiplicity(self):
        # N(z) - z = -(z-1)(z+1)/(3z+1) for g = (z-1)^2 (z+1): simple fixed points
        N = build_newton_map(parse_function("(z-1)^2*(z+1)"))
        found = isolate_fixed_points(N, Window.square(2))
        assert sorted(round(z.real, 8) for z, _ in found) == [-1, 1]

    def test_pole_on_boundary_perturbed(self, N2):
        # pole at 0 on the left edge of [0, 2] x [-1, 1]
        found = isolate_fixed_points(N2, Window.from_bounds(0, 2, -1, 1))
        assert [round(z.real, 9) for z, _ in found] == [1.0]

    def test_transcendental(self):
        N = build_newton_map(parse_function("z*exp(z)"), Window.square(4))
        found = isolate_fixed_points(N, Window.square(4))
        assert len(found) == 1 and abs(found[0][0]) < 1e-9


class TestClassify:
    def test_simple_root(self, N2):
        fp = classify_fixed_point(N2, 1)
        assert fp.stability == SUPERATTRACTING and abs(fp.derivative) < 1e-12

    def test_double_root(self):
        N = build_newton_map(parse_function("(z-1)^2*(z+1)"))
        fp = classify_fixed_point(N, 1)
        assert fp.stability == ATTRACTING
        assert fp.derivative == pytest.approx(0.5, abs=1e-6)
        # oracle: finite difference of N, stepping away from the 0/0 point
        h = 1e-4
        fd = (N(1 + 2 * h) - N(1 + h)) / h
        assert fd == pytest.approx(0.5, abs=1e-3)

    def test_generic_superattracting(self):
        fp = classify_fixed_point(half_plus_inverse(), np.sqrt(2))
        assert fp.stability == SUPERATTRACTING

    def test_numeric_derivative_fallback(self):
        f = CallableMap(lambda z: 3 * z * (1 - z))
        fp = classify_fixed_point(f, 0)
        assert fp.derivative == pytest.approx(3, abs=1e-6) and fp.stability == REPELLING
        assert fp.weakly_repelling

    def test_not_fixed(self, N2):
        with pytest.raises(NotFixedError):
            classify_fixed_point(N2, 2)

    @pytest.mark.parametrize("d,kind", [
        (0, SUPERATTRACTING), (5e-7, SUPERATTRACTING), (0.5j, ATTRACTING), (1 + 1e-8, PARABOLIC),
        (1j, INDIFFERENT), (-1, INDIFFERENT), (1.5, REPELLING), (2j, REPELLING),
    ])
    def test_stability_thresholds(self, d, kind):
        assert stability_of(d) == kind

    def test_to_dict(self, N2):
        d = classify_fixed_point(N2, -1).to_dict()
        assert d["re"] == -1 and d["im"] == 0 and d["multiplicity"] == 1 and d["stability"] == SUPERATTRACTING


def test_find_fixed_points_newton_never_weakly_repelling():
    for text, half in [("z^2-1", 2), ("z^3-1", 2), ("z^4-1", 2), ("z^3-2*z+2", 2), ("z*exp(z)", 4)]:
        N = build_newton_map(parse_function(text), Window.square(half))
        for fp in find_fixed_points(N, Window.square(half)):
            assert fp.stability in (SUPERATTRACTING, ATTRACTING), (text, fp)


coeff = st.tuples(st.floats(-1, 1), st.floats(-1, 1)).map(lambda t: complex(*t))


@settings(max_examples=25, deadline=None)
@given(st.lists(coeff, min_size=2, max_size=5), st.floats(0.1, 0.9))
def test_argument_principle_matches_root_count(roots, lead):
    """Fixed points inside a big circle equal the number of roots of g."""
    roots = np.array(roots)
    gaps = np.abs(roots[:, None] - roots[None, :]) + np.eye(roots.size)
    if gaps.min() < 1e-2:
        return
    coeffs = lead * np.poly(roots)
    terms = " + ".join(f"({float(c.real)!r}+{float(c.imag)!r}*i)*z^{k}" for k, c in enumerate(coeffs[::-1]))
    N = build_newton_map(parse_function(terms))
    rep = fixed_point_defect(N, Curve.circle(0, 10, 128))
    assert rep.fixed_points_inside == roots.size
    assert rep.poles_inside == roots.size - 1

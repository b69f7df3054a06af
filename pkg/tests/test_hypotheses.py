import json

import numpy as np
import pytest

from newtonlab.curves import Curve
from newtonlab.hypotheses import (
    check_index_hypotheses,
    check_map_out_twice,
    check_surround_and_map_out,
    poles_in_loops_search,
)
from newtonlab.maps import CallableMap


def names(report):
    return {h.name: h.passed for h in report.hypotheses}


class TestIndex:
    def test_half_plus_inverse(self, half_plus_inverse):
        rep = check_index_hypotheses(half_plus_inverse, Curve.circle(0, 4, 64))
        assert rep.passed
        assert rep.extra["m"] == 1 and rep.extra["fixed_points_inside"] == 2
        locs = sorted(p.location.real for p in rep.fixed_points)
        assert locs == pytest.approx([-np.sqrt(2), np.sqrt(2)], abs=1e-8)

    def test_quadratic_newton(self, N2):
        rep = check_index_hypotheses(N2, Curve.circle(0, 3, 64))
        assert rep.passed and rep.extra["m"] == 1 and rep.extra["fixed_points_inside"] == 2

    def test_expansion_fails(self):
        rep = check_index_hypotheses(CallableMap(lambda z: 2 * z), Curve.circle(0, 1, 64))
        assert not rep.passed
        assert "m" not in rep.extra

    def test_json(self, N2):
        d = json.loads(check_index_hypotheses(N2, Curve.circle(0, 3, 64)).to_json())
        assert d["hypotheses"][0]["pass"] is True and len(d["fixed_points"]) == 2


class TestPolesInLoops:
    def test_pole_inside_initially(self, N2):
        assert poles_in_loops_search(N2, Curve.circle(0, 0.1, 64), 50).found_at == 0

    def test_prepole(self, N3):
        w = -(2 ** (-1 / 3))
        # oracle: w maps exactly onto the pole
        assert abs(N3(w)) < 1e-12
        res = poles_in_loops_search(N3, Curve.circle(w, 0.05, 64), 50)
        assert res.found_at == 1 and res.pole == 0

    def test_basin_curve_contracts(self, N2):
        res = poles_in_loops_search(N2, Curve.circle(1, 0.1, 64), 50)
        assert res.found_at is None and not res.unresolved
        # oracle: the samples themselves converge to 1
        z = Curve.circle(1, 0.1, 64).points
        for _ in range(6):
            z = N2(z)
        assert np.max(np.abs(z - 1)) < 1e-12

    def test_curve_through_prepole(self, N3):
        w = -(2 ** (-1 / 3))
        pts = w + 0.05 * np.exp(2j * np.pi * np.arange(64) / 64) - 0.05
        # the prepole w is a sample, so the first image passes through the pole
        res = poles_in_loops_search(N3, Curve(pts), 3)
        assert res.found_at == 1 and res.pole_on_curve

    def test_n_max_zero(self, N3):
        assert poles_in_loops_search(N3, Curve.circle(2, 0.1, 64), 0).found_at is None


class TestMapOut:
    def test_surround_and_map_out_pass(self):
        f = CallableMap(lambda z: 1 / z**2 + 6, poles=[(0j, 2)], derivative=lambda z: -2 / z**3)
        rep = check_surround_and_map_out(f, Curve.circle(0, 0.5, 128))
        assert rep.passed
        weak = [p for p in rep.fixed_points if p.weakly_repelling]
        assert len(weak) == 2
        for p in weak:
            assert abs(f(p.location) - p.location) < 1e-9
            assert abs(p.location) < 0.5

    def test_surround_fails_on_newton(self, N3):
        rep = check_surround_and_map_out(N3, Curve.circle(0, 0.3, 128))
        assert names(rep) == {"no poles near X": True, "X surrounds a pole": True, "K(X) maps out": False}

    def test_no_pole_surrounded(self, N2):
        rep = check_surround_and_map_out(N2, Curve.circle(3, 0.5, 64))
        assert not names(rep)["X surrounds a pole"]

    def test_pole_near_curve(self, N2):
        rep = check_surround_and_map_out(N2, Curve.circle(1e-7, 1e-7 + 1e-12, 64))
        assert not names(rep)["no poles near X"]

    def test_inverse_outer(self):
        inv = CallableMap(lambda z: 1 / z, poles=[(0j, 1)])
        rep = check_map_out_twice(inv, Curve.circle(0, 3, 64))
        assert not names(rep)["X inside K(f(X))"]

    def test_inverse_inner(self):
        inv = CallableMap(lambda z: 1 / z, poles=[(0j, 1)])
        rep = check_map_out_twice(inv, Curve.circle(0, 1 / 3, 64))
        assert not rep.passed

    def test_three_rings(self):
        # X radius 1, f(X) radius 10, f^2(X) radius 100
        ring = CallableMap(lambda z: 10 * z, name="rings")
        rep = check_map_out_twice(ring, Curve.circle(0, 1, 64))
        assert rep.passed
        assert [p.location for p in rep.fixed_points] == [0]
        assert rep.fixed_points[0].weakly_repelling

    def test_map_out_twice_fails_on_newton(self, N2):
        rep = check_map_out_twice(N2, Curve.circle(0, 3, 64))
        assert not rep.passed
        assert rep.fixed_points == []

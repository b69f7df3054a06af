"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line."""
import time

import numpy as np
import pytest

from newtonlab.curves import Curve, disjoint_winding_sum, relative_winding
from newtonlab.dynamics import HIT_POLE, UNDECIDED, default_palette, render_basins, write_image
from newtonlab.fixedpoints import find_fixed_points, fixed_point_defect
from newtonlab.hypotheses import check_index_hypotheses, poles_in_loops_search
from newtonlab.maps import build_map, build_newton_map
from newtonlab.poly import polynomial_roots
from newtonlab.topology import audit_connectivity, audit_unboundedness, label_components
from newtonlab.window import Window

from helpers import random_disjoint_pair

AUDIT_SET = [("z^3-1", 2.0), ("z^4-1", 2.0), ("z^3-2*z+2", 2.0), ("z*exp(z)", 4.0)]
RES = 512


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok

    return emit


def _render(text, half, resolution, threads, monkeypatch):
    monkeypatch.setenv("NEWTONLAB_THREADS", str(threads))
    w = Window.square(half)
    N = build_newton_map(text, w)
    roots = N.roots_in(w)
    return N, render_basins(N, roots, w, resolution)


_AUDIT_RUNS = {}


@pytest.fixture(scope="module")
def audit_runs():
    """Render, label and audit each function of the connectivity set once at 512x512 (single thread)."""
    if not _AUDIT_RUNS:
        mp = pytest.MonkeyPatch()
        try:
            for text, half in AUDIT_SET:
                t0 = time.perf_counter()
                N, grid = _render(text, half, RES, 1, mp)
                comps = label_components(grid)
                conn = audit_connectivity(
                    grid, components=comps,
                    rerender=lambda N=N, grid=grid: render_basins(N, grid.roots, grid.window, 2 * RES))
                unb = audit_unboundedness(grid, components=comps)
                _AUDIT_RUNS[text] = {
                    "grid": grid, "conn": conn, "unb": unb, "seconds": time.perf_counter() - t0,
                    "ppm": write_image(grid, default_palette(len(grid.roots))),
                }
        finally:
            mp.undo()
    return _AUDIT_RUNS


def test_criterion_1_quadratic_conjugacy(verdict):
    t0 = time.perf_counter()
    w = Window.square(2)
    N = build_newton_map("z^2-1")
    grid = render_basins(N, N.roots, w, 256)
    rep = audit_connectivity(grid)
    comps = label_components(grid)
    large = comps.large(64)
    elapsed = time.perf_counter() - t0
    pixel = w.width / 256
    pts = grid.points()
    proxy = np.isin(grid.labels, (HIT_POLE, UNDECIDED))
    near_axis = bool(np.all(np.abs(pts[proxy].real) <= pixel))
    # every row switches basin exactly once, at the imaginary axis
    halves = bool(np.all(grid.labels[:, :128][~proxy[:, :128]] == grid.labels[0, 0])
                  and np.all(grid.labels[:, 128:][~proxy[:, 128:]] == grid.labels[0, -1]))
    ok = (rep.passed and len(large) == 2 and all(r.hole_count == 0 and r.touches_border for r in large)
          and near_axis and halves and elapsed < 5)
    verdict(1, ok, f"{len(large)} large components, {int(proxy.sum())} proxy cells, {elapsed:.2f} s")
    assert ok


def test_criterion_2_simple_connectivity_audit(audit_runs, verdict):
    lines = []
    ok = True
    for text, run in audit_runs.items():
        good = run["conn"].passed and run["seconds"] < 30
        ok &= good
        lines.append(f"{text}: {len(run['conn'].holey)} holey "
                     f"(raw {len(run['conn'].extra['raw_holey'])}), {run['seconds']:.1f} s")
    verdict(2, ok, "; ".join(lines))
    assert ok


def test_criterion_3_unbounded_basins(audit_runs, verdict):
    ok = True
    lines = []
    for text, run in audit_runs.items():
        roots = run["unb"].extra["roots"]
        ok &= run["unb"].passed and len(roots) == len(run["grid"].roots) > 0
        lines.append(f"{text}: {sum(r['pass'] for r in roots)}/{len(roots)}")
    verdict(3, ok, "; ".join(lines))
    assert ok


def _random_polynomial(rng):
    """Coefficients uniform in the unit box; |leading| >= 0.2 keeps every root and
    critical point inside |z| < 9 (Cauchy bound), and roots must be simple."""
    while True:
        deg = int(rng.integers(2, 6))
        coeffs = rng.uniform(-1, 1, deg + 1) + 1j * rng.uniform(-1, 1, deg + 1)
        if abs(coeffs[0]) < 0.2:
            continue
        roots = polynomial_roots(coeffs)
        if roots.degree == deg and len(roots) == deg:
            return coeffs, roots


def test_criterion_4_argument_principle(verdict):
    rng = np.random.default_rng(4)
    polys = [_random_polynomial(rng) for _ in range(50)]
    t0 = time.perf_counter()
    hits = 0
    for coeffs, roots in polys:
        deg = len(coeffs) - 1
        text = " + ".join(f"({c.real!r}+{c.imag!r}*i)*z^{deg - k}" for k, c in enumerate(coeffs.tolist()))
        N = build_newton_map(text)
        hits += fixed_point_defect(N, Curve.circle(0, 10, 256)).fixed_points_inside == len(roots)
    elapsed = time.perf_counter() - t0
    ok = hits == 50 and elapsed < 10
    verdict(4, ok, f"{hits}/50 exact, {elapsed:.2f} s")
    assert ok


def test_criterion_5_fixed_point_index(verdict):
    t0 = time.perf_counter()
    f = build_map("z/2+1/z")
    rep = check_index_hypotheses(f, Curve.circle(0, 4, 64))
    elapsed = time.perf_counter() - t0
    locs = sorted((p.location for p in rep.fixed_points), key=lambda z: z.real)
    close = len(locs) == 2 and max(abs(locs[0] + np.sqrt(2)), abs(locs[1] - np.sqrt(2))) < 1e-8
    ok = (rep.passed and rep.extra.get("m") == 1 and rep.extra.get("fixed_points_inside") == 2
          and close and elapsed < 1)
    verdict(5, ok, f"m = {rep.extra.get('m')}, fixed points = {rep.extra.get('fixed_points_inside')}, "
                   f"located {[complex(round(z.real, 10), round(z.imag, 10)) for z in locs]}, {elapsed:.3f} s")
    assert ok


def test_criterion_6_winding_formula(verdict):
    rng = np.random.default_rng(6)
    pairs = [random_disjoint_pair(rng) for _ in range(200)]
    t0 = time.perf_counter()
    agree = sum(relative_winding(s, g) == disjoint_winding_sum(s, g) for s, g in pairs)
    elapsed = time.perf_counter() - t0
    ok = agree == 200 and elapsed < 2
    verdict(6, ok, f"{agree}/200 equal, {elapsed:.2f} s")
    assert ok


def test_criterion_7_poles_in_loops(verdict):
    t0 = time.perf_counter()
    N = build_newton_map("z^3-1")
    res = poles_in_loops_search(N, Curve.circle(-(2 ** (-1 / 3)), 0.05, 64), 10)
    elapsed = time.perf_counter() - t0
    ok = res.found_at == 1 and elapsed < 1
    verdict(7, ok, f"found_at = {res.found_at}, {elapsed:.3f} s")
    assert ok


def test_criterion_8_attracting_only(verdict):
    functions = [("z^2-1", 2.0)] + AUDIT_SET
    total = 0
    weak = []
    for text, half in functions:
        w = Window.square(half)
        N = build_newton_map(text, w)
        points = find_fixed_points(N, w)
        assert len(points) == len(N.roots_in(w))
        total += len(points)
        weak += [(text, p.location) for p in points if p.weakly_repelling]
    ok = total > 0 and not weak
    verdict(8, ok, f"{total} fixed points, {len(weak)} weakly repelling")
    assert ok


def test_criterion_9_determinism(audit_runs, verdict, monkeypatch):
    same = []
    for text, half in AUDIT_SET:
        _, grid = _render(text, half, RES, 4, monkeypatch)
        same.append(write_image(grid, default_palette(len(grid.roots))) == audit_runs[text]["ppm"])
    ok = all(same)
    verdict(9, ok, f"{sum(same)}/{len(same)} PPMs byte-identical for 1 vs 4 threads")
    assert ok

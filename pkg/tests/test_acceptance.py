"""End-to-end acceptance checks, one test per numbered criterion.

Each test records a PASS/FAIL line that is printed as it runs (visible with
``-s``) and collected into the terminal summary.
"""

import time
import warnings
from fractions import Fraction

import numpy as np
import pytest

from specrewire.analytic import (
    cheeger_constant,
    eldan_add_scores,
    figure1_fixtures,
    verify_table_a1,
)
from specrewire.errors import NotConvergedWarning
from specrewire.graph import EdgeDelta, Graph, apply_delta, erdos_renyi_nm, ring
from specrewire.rewiring import RewirePlan, proxy_exact_correlation, rewire
from specrewire.smoothing import LabelConfig, class_mean_informativeness, smoothing_mse_curve
from specrewire.spectral import exact_gap, exact_spectrum, iterative_spectrum

from conftest import oracle_gap

RESULTS: dict[str, str] = {}

# regression value from an independent dense-eigenvector oracle
PROXY_EXACT_R = 0.8914929172310454


def report(key, ok, detail):
    line = f"criterion {key}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS[key] = line
    print(line)
    return ok


def test_criterion_01_ring_family_gaps():
    start = time.perf_counter()
    fx = figure1_fixtures()
    errs = {k: abs(exact_spectrum(g).gap - fx.reference_gaps[k]) for k, g in fx.graphs().items()}
    elapsed = time.perf_counter() - start
    worst = max(errs.values())
    ok = worst <= 5e-4 and elapsed < 1.0
    report("1", ok, f"max |gap - target| = {worst:.2e}, {elapsed:.3f} s")
    assert worst <= 5e-4
    assert elapsed < 1.0


def test_criterion_02_ring_closed_form():
    start = time.perf_counter()
    errs = [abs(exact_gap(ring(n)) - (1.0 - np.cos(2.0 * np.pi / n))) for n in range(3, 65)]
    elapsed = time.perf_counter() - start
    worst = max(errs)
    report("2", worst <= 1e-10 and elapsed < 5.0, f"max error {worst:.2e} over n=3..64, {elapsed:.3f} s")
    assert worst <= 1e-10
    assert elapsed < 5.0


def test_criterion_03_criterion_table():
    start = time.perf_counter()
    cells = verify_table_a1(tol=1e-5)
    elapsed = time.perf_counter() - start
    bad = [c for c in cells if not c["pass"]]
    detail = f"{len(cells) - len(bad)}/{len(cells)} cells within 1e-5, {elapsed:.3f} s"
    if bad:
        detail += "; off: " + ", ".join(
            f"row {c['row']} {c['cell']} expected {c['expected']} got {c['computed']:.7f}" for c in bad
        )
    report("3", not bad and elapsed < 1.0, detail)
    assert len(cells) == 12
    assert elapsed < 1.0
    assert not bad, detail


def test_criterion_04_eldan_soundness_sweep():
    start = time.perf_counter()
    checked = positive = 0
    violations = []
    for i in range(500):
        rng = np.random.default_rng([4, i])
        n = int(rng.integers(5, 25))
        m = int(rng.integers(n, min(3 * n, n * (n - 1) // 2) + 1))
        g = erdos_renyi_nm(n, m, seed=i)
        est = exact_spectrum(g)
        adj = g.adjacency().toarray()
        iu, iv = np.triu_indices(n, 1)
        keep = adj[iu, iv] == 0
        cand = np.column_stack([iu[keep], iv[keep]])
        scores = eldan_add_scores(g, est.gap, est.fiedler, cand)
        checked += len(cand)
        for (u, v), s in zip(cand, scores):
            if s > 0:
                positive += 1
                after = exact_gap(apply_delta(g, EdgeDelta.add(int(u), int(v))))
                if not after < est.gap:
                    violations.append((i, int(u), int(v), float(s), after - est.gap))
    elapsed = time.perf_counter() - start
    ok = not violations and elapsed < 120
    report("4", ok, f"{checked} additions, {positive} certified, {len(violations)} violations, {elapsed:.1f} s")
    assert not violations
    assert elapsed < 120


def seeded_connected_graph(seed):
    rng = np.random.default_rng([5, seed])
    n = int(rng.integers(3, 13))
    edges = {(int(rng.integers(0, v)), v) for v in range(1, n)}
    p = rng.uniform(0.0, 0.6)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.add((u, v))
    return Graph(n, sorted(edges))


def test_criterion_05_cheeger_sandwich():
    start = time.perf_counter()
    failures = []
    for i in range(200):
        g = seeded_connected_graph(i)
        lam = exact_gap(g)
        h = cheeger_constant(g)
        if not (2 * h >= lam - 1e-12 and lam >= h * h / 2 - 1e-12):
            failures.append((i, h, lam))
    elapsed = time.perf_counter() - start
    report("5", not failures and elapsed < 60, f"200 graphs, {len(failures)} failures, {elapsed:.2f} s")
    assert not failures
    assert elapsed < 60


def exact_trajectory(g, trace):
    gaps, cur = [], g
    for s in trace.steps:
        cur = apply_delta(cur, EdgeDelta.add(*s.edge))
        gaps.append(exact_gap(cur))
    return np.array(gaps)


def test_criterion_06_exact_greedy_dominates():
    g = erdos_renyi_nm(30, 58, seed=7)
    traj = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConvergedWarning)
        for strategy in ("exact", "proxy", "eldan"):
            _, trace = rewire(g, RewirePlan(direction="add", strategy=strategy, budget=15, seed=7))
            traj[strategy] = exact_trajectory(g, trace)
    r, count = proxy_exact_correlation(g)
    corr_ok = abs(r - PROXY_EXACT_R) <= 1e-9
    lost = [
        (name, int(k) + 1)
        for name in ("proxy", "eldan")
        for k in np.flatnonzero(traj["exact"] < traj[name])
    ]
    first = {name: min((k for nm, k in lost if nm == name), default=None) for name in ("proxy", "eldan")}
    detail = (
        f"final gaps exact {traj['exact'][-1]:.4f} proxy {traj['proxy'][-1]:.4f} eldan {traj['eldan'][-1]:.4f}; "
        f"first step exact trails: {first}; proxy/exact r = {r:.6f} over {count} deletions"
    )
    report("6", not lost and corr_ok, detail)
    assert corr_ok, r
    assert not lost, detail


def test_criterion_07_smoothing_ordering():
    start = time.perf_counter()
    graphs = figure1_fixtures().graphs()
    order = ["g_minus", "g", "g_plus", "g_plus_tilde"]
    curves1 = {k: smoothing_mse_curve(graphs[k], LabelConfig.named("config1"), 10, 200, seed=0).mse_mean for k in order}
    curves2 = {k: smoothing_mse_curve(graphs[k], LabelConfig.named("config2"), 10, 200, seed=0).mse_mean for k in order}
    elapsed = time.perf_counter() - start
    ordered = all(
        all(curves1[a][k] < curves1[b][k] for a, b in zip(order, order[1:])) for k in (1, 2, 3)
    )
    lowest = all(
        curves2["g_plus_tilde"][k] < min(curves2[o][k] for o in order[:3]) for k in range(1, 11)
    )
    ok = ordered and lowest and elapsed < 30
    report("7", ok, f"labels #1 ordered at k=1..3: {ordered}; labels #2 lowest curve: {lowest}; {elapsed:.2f} s")
    assert ordered
    assert lowest
    assert elapsed < 30


def test_criterion_08_class_mean_table():
    labels = LabelConfig.named("config1")
    graphs = figure1_fixtures().graphs()
    expected = {
        "g_minus": (Fraction(2, 3), Fraction(-2, 3)),
        "g": (Fraction(13, 24), Fraction(-13, 24)),
        "g_plus": (Fraction(7, 15), Fraction(-11, 24)),
        "g_plus_tilde": (Fraction(5, 12), Fraction(-5, 12)),
    }
    got = {k: class_mean_informativeness(graphs[k], labels) for k in expected}
    ok = got == expected
    report("8", ok, ", ".join(f"{k}=({a}, {b})" for k, (a, b) in got.items()))
    assert ok


def test_criterion_09_solver_agreement():
    start = time.perf_counter()
    errs, unconverged = [], 0
    for i in range(100):
        rng = np.random.default_rng([9, i])
        n = int(rng.integers(8, 65))
        m = int(rng.integers(n, min(3 * n, n * (n - 1) // 2) + 1))
        g = erdos_renyi_nm(n, m, seed=i)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotConvergedWarning)
            est = iterative_spectrum(g)
        unconverged += not est.converged
        errs.append(abs(est.gap - oracle_gap(g)))
    elapsed = time.perf_counter() - start
    worst = max(errs)
    report("9", worst <= 1e-8 and elapsed < 30,
           f"max |iterative - dense| = {worst:.2e}, {unconverged} hit the iteration cap, {elapsed:.2f} s")
    assert worst <= 1e-8
    assert elapsed < 30


def test_criterion_10_proxy_delete_speed():
    g = erdos_renyi_nm(2500, 10000, seed=0)
    plan = RewirePlan(direction="delete", strategy="proxy", budget=50, update_period=10)
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConvergedWarning)
        h, trace = rewire(g, plan)
    elapsed = time.perf_counter() - start
    steps = len(trace.steps)
    report("10", steps == 50 and elapsed < 10, f"{steps} deletions on ER(2500, 10000) in {elapsed:.2f} s")
    assert steps == 50 and h.num_edges == 9950
    assert elapsed < 10

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specrewire.errors import DegenerateSplit, ZeroDegreeNode, ZeroVectorRow
from specrewire.graph import Graph, path, ring
from specrewire.smoothing import (
    LabelConfig,
    class_mean_informativeness,
    dirichlet_energy,
    interclass_cosine_distance,
    mean_aggregate,
    ridge_fit,
    smoothing_mse_curve,
    stratified_split,
)

from conftest import connected_graphs


def star_with(center_label, neighbor_labels):
    n = 1 + len(neighbor_labels)
    g = Graph(n, [(0, k) for k in range(1, n)])
    return g, np.array([center_label, *neighbor_labels], dtype=float)


@pytest.mark.parametrize(
    "neighbors, expected",
    [((1, 1), 1.0), ((1, -1), 1 / 3), ((1, 1, -1), 1 / 2), ((1, -1, -1), 0.0), ((1, 1, -1, -1), 1 / 5)],
)
def test_aggregation_patterns(neighbors, expected):
    g, x = star_with(1, neighbors)
    assert mean_aggregate(g, x)[0] == pytest.approx(expected, abs=1e-15)


def test_g_plus_node0_pattern(fig1):
    x = np.array(fig1.labels, dtype=float)
    assert mean_aggregate(fig1.g_plus, x)[0] == pytest.approx(0.2, abs=1e-15)


def test_isolated_node_keeps_value():
    g = Graph(3, [(0, 1)])
    np.testing.assert_allclose(mean_aggregate(g, np.array([1.0, 3.0, 7.0])), [2.0, 2.0, 7.0])


@given(connected_graphs(max_nodes=12), st.integers(0, 2**31))
def test_aggregation_is_row_stochastic(g, seed):
    np.testing.assert_allclose(mean_aggregate(g, np.ones(g.num_nodes)), 1.0, atol=1e-15)
    X = np.random.default_rng(seed).standard_normal((g.num_nodes, 2))
    Y = mean_aggregate(g, X)
    assert np.all(Y >= X.min(axis=0) - 1e-12) and np.all(Y <= X.max(axis=0) + 1e-12)


def test_class_mean_table(fig1):
    L = LabelConfig.named("config1")
    got = {k: class_mean_informativeness(g, L) for k, g in fig1.graphs().items()}
    assert got["g_minus"] == (Fraction(2, 3), Fraction(-2, 3))
    assert got["g"] == (Fraction(13, 24), Fraction(-13, 24))
    assert got["g_plus"] == (Fraction(7, 15), Fraction(-11, 24))
    assert got["g_plus_tilde"] == (Fraction(5, 12), Fraction(-5, 12))


def test_class_mean_ordering(fig1):
    L = LabelConfig.named("#1")
    width = {k: class_mean_informativeness(g, L) for k, g in fig1.graphs().items()}
    width = {k: p - n for k, (p, n) in width.items()}
    assert width["g_minus"] > width["g"] > width["g_plus"] > width["g_plus_tilde"]


def test_label_configs():
    assert LabelConfig.named("config2").labels == (1, 1, 1, 1, -1, -1, -1, -1)
    assert LabelConfig.named("3").labels == (1, -1, -1, 1, 1, -1, -1, 1)
    assert LabelConfig.named("#4").labels == (1, -1, 1, -1, 1, -1, 1, -1)
    with pytest.raises(ValueError):
        LabelConfig.named("config9")
    with pytest.raises(ValueError):
        LabelConfig((1, 0, -1))
    with pytest.raises(DegenerateSplit):
        LabelConfig((1, 1, 1)).check_both_classes()


def test_dirichlet_examples():
    assert dirichlet_energy(path(2), np.array([1.0, -1.0])) == pytest.approx(2.0, abs=1e-15)
    g = ring(7)
    x = np.sqrt(g.degrees.astype(float))
    assert abs(dirichlet_energy(g, x)) < 1e-15
    with pytest.raises(ZeroDegreeNode):
        dirichlet_energy(Graph(3, [(0, 1)]), np.ones(3))


def test_dirichlet_decays_on_g(fig1):
    X = np.random.default_rng(0).standard_normal((8, 3))
    energies = []
    for _ in range(12):
        energies.append(dirichlet_energy(fig1.g, X))
        X = mean_aggregate(fig1.g, X)
    assert np.all(np.diff(energies[1:]) <= 1e-15)


@given(st.integers(3, 20), st.integers(0, 2**31), st.booleans())
def test_dirichlet_non_increasing_on_regular_graphs(n, seed, dense):
    # S commutes with L_sym on regular graphs and has spectrum in [-1, 1]
    g = Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)]) if dense else ring(n)
    X = np.random.default_rng(seed).standard_normal((n, 2))
    prev = dirichlet_energy(g, X)
    for _ in range(6):
        X = mean_aggregate(g, X)
        now = dirichlet_energy(g, X)
        assert now <= prev + 1e-12
        prev = now


def test_dirichlet_can_rise_on_irregular_graphs():
    # S^k X tends to a constant vector, which is not in the kernel of L_sym
    # unless the graph is regular, so the energy may climb back up
    g = path(3)
    X = mean_aggregate(g, np.array([0.0, 1.0, 0.0]))
    energies = []
    for _ in range(3):
        energies.append(dirichlet_energy(g, X))
        X = mean_aggregate(g, X)
    assert energies[2] > energies[1]


def test_cosine_examples():
    lab = np.array([1, 1, -1, -1])
    assert interclass_cosine_distance(np.array([[1, 0], [2, 0], [0, 3], [0, 1]]), lab) == pytest.approx(1.0)
    assert interclass_cosine_distance(np.ones((4, 2)), lab) == pytest.approx(0.0)
    assert interclass_cosine_distance(np.array([[1.0, 2], [1, 2], [-1, -2], [-1, -2]]), lab) == pytest.approx(2.0)
    with pytest.raises(ZeroVectorRow):
        interclass_cosine_distance(np.array([[1.0], [0.0], [1.0], [1.0]]), lab)


def test_ridge_fit_recovers_line():
    X = np.linspace(-1, 1, 9)[:, None]
    w, b = ridge_fit(X, 3 * X[:, 0] + 0.5, 0.0)
    assert w[0] == pytest.approx(3.0) and b == pytest.approx(0.5)


def test_stratified_split():
    lab = np.array(LabelConfig.named("config1").labels)
    tr, te = stratified_split(lab, np.random.default_rng(0))
    assert len(tr) == len(te) == 4
    assert sorted(np.concatenate([tr, te])) == list(range(8))
    assert (lab[tr] > 0).sum() == 2 and (lab[te] > 0).sum() == 2
    with pytest.raises(DegenerateSplit):
        stratified_split(np.array([1, -1, -1, -1]), np.random.default_rng(0))


def test_curve_batch_matches_per_trial_loop(fig1):
    L = LabelConfig.named("config1")
    rep = smoothing_mse_curve(fig1.g, L, 4, 5, ridge_alpha=0.5, seed=3)
    lab = L.array
    mses = []
    for t in range(5):
        rng = np.random.default_rng([3, t])
        X = lab[:, None] + rng.standard_normal((8, 1))
        tr, te = stratified_split(lab, rng)
        row = []
        for _ in range(5):
            w, b = ridge_fit(X[tr], lab[tr], 0.5)
            row.append(np.mean((X[te] @ w + b - lab[te]) ** 2))
            X = mean_aggregate(fig1.g, X)
        mses.append(row)
    np.testing.assert_allclose(rep.mse_mean, np.mean(mses, axis=0), rtol=1e-12)
    np.testing.assert_allclose(rep.mse_std, np.std(mses, axis=0), rtol=1e-10, atol=1e-15)


def test_order_zero_is_graph_independent(fig1):
    L = LabelConfig.named("config1")
    reps = [smoothing_mse_curve(g, L, 3, 20, seed=5) for g in fig1.graphs().values()]
    assert len({r.mse_mean[0] for r in reps}) == 1
    assert len({r.mse_std[0] for r in reps}) == 1


def test_curve_deterministic_and_single_trial(fig1):
    L = LabelConfig.named("config2")
    a = smoothing_mse_curve(fig1.g, L, 5, 1, seed=9)
    b = smoothing_mse_curve(fig1.g, L, 5, 1, seed=9)
    assert a.to_csv() == b.to_csv()
    assert np.all(a.mse_std == 0)
    lines = a.to_csv(("seed=9",)).splitlines()
    assert lines[:2] == ["# seed=9", "order,mse_mean,mse_std,dirichlet,cosine_dist"]
    assert len(lines) == 2 + 6


def test_curve_multi_dim(fig1):
    rep = smoothing_mse_curve(fig1.g, LabelConfig.named("config1"), 3, 10, dim=3)
    assert rep.class_means.shape == (4, 2, 3)
    assert np.all(np.isfinite(rep.mse_mean))


def test_curve_validation(fig1):
    L = LabelConfig.named("config1")
    with pytest.raises(ValueError):
        smoothing_mse_curve(fig1.g, L, -1, 5)
    with pytest.raises(ValueError):
        smoothing_mse_curve(fig1.g, L, 2, 0)
    with pytest.raises(ValueError):
        smoothing_mse_curve(ring(5), L, 2, 5)
    with pytest.raises(DegenerateSplit):
        smoothing_mse_curve(ring(4), LabelConfig((1, -1, -1, -1)), 2, 5)


def test_class_means_shrink_toward_each_other(fig1):
    rep = smoothing_mse_curve(fig1.g, LabelConfig.named("config1"), 8, 100, seed=2)
    gap = rep.class_means[:, 0, 0] - rep.class_means[:, 1, 0]
    assert gap[0] > gap[-1] > 0

"""Linear over-smoothing testbed.

Nodes carry Gaussian features centred on their class label (+1 or -1).
Features are smoothed by repeated self-inclusive mean aggregation and a
ridge regression from smoothed features to labels measures how much class
signal survives each order of smoothing.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateSplit, ZeroVectorRow
from .graph import Graph
from .spectral import normalized_laplacian_apply

# positive-class nodes of each ring labelling; the rest are negative
NAMED_LABELS = {
    "config1": (0, 1, 6, 7),
    "config2": (0, 1, 2, 3),
    "config3": (0, 3, 4, 7),
    "config4": (0, 2, 4, 6),
}
DEFAULT_RIDGE_ALPHA = 20.0


@dataclass(frozen=True)
class LabelConfig:
    labels: tuple[int, ...]
    name: str = "custom"

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        if any(x not in (1, -1) for x in labels):
            raise ValueError("labels must be +1 or -1")
        object.__setattr__(self, "labels", labels)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.labels, dtype=float)

    def check_both_classes(self) -> None:
        if 1 not in self.labels or -1 not in self.labels:
            raise DegenerateSplit(f"label config {self.name!r} has a single class")

    @classmethod
    def named(cls, name: str, num_nodes: int = 8) -> "LabelConfig":
        key = name.lower().lstrip("#")
        if key.isdigit():
            key = f"config{key}"
        if key not in NAMED_LABELS:
            raise ValueError(f"unknown label config {name!r}; choose from {sorted(NAMED_LABELS)}")
        pos = NAMED_LABELS[key]
        return cls(tuple(1 if k in pos else -1 for k in range(num_nodes)), key)


def mean_aggregate(g: Graph, X: np.ndarray) -> np.ndarray:
    """One round of ``(D + I)^-1 (A + I) X``; isolated nodes keep their value."""
    X = np.asarray(X, dtype=float)
    d = g.degrees.astype(float) + 1.0
    if X.ndim == 2:
        d = d[:, None]
    return (X + g.adjacency() @ X) / d


def class_mean_informativeness(g: Graph, labels: LabelConfig) -> tuple[Fraction, Fraction]:
    """Per-class average after aggregating the noiseless +/-1 features once, exactly."""
    labels.check_both_classes()
    lab = labels.labels
    sums = {1: Fraction(0), -1: Fraction(0)}
    counts = {1: 0, -1: 0}
    for u in range(g.num_nodes):
        total = lab[u] + sum(lab[v] for v in g.neighbors(u))
        sums[lab[u]] += Fraction(total, 1 + int(g.degrees[u]))
        counts[lab[u]] += 1
    return sums[1] / counts[1], sums[-1] / counts[-1]


def dirichlet_energy(g: Graph, X: np.ndarray) -> float:
    """``trace(X^T L_sym X) / n`` with the symmetric normalized Laplacian."""
    X = np.asarray(X, dtype=float)
    LX = normalized_laplacian_apply(g, X)
    return float(np.sum(X * LX)) / g.num_nodes


def interclass_cosine_distance(X: np.ndarray, labels) -> float:
    """Mean ``1 - cos(x_u, x_v)`` over all pairs with ``u`` and ``v`` in different classes."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    lab = labels.array if isinstance(labels, LabelConfig) else np.asarray(labels)
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0):
        raise ZeroVectorRow(f"row {int(np.flatnonzero(norms == 0)[0])} is the zero vector")
    U = X / norms[:, None]
    pos, neg = U[lab > 0], U[lab < 0]
    if len(pos) == 0 or len(neg) == 0:
        raise DegenerateSplit("both classes need at least one node")
    return float(1.0 - np.mean(pos @ neg.T))


def ridge_fit(X: np.ndarray, y: np.ndarray, alpha: float) -> tuple[np.ndarray, float]:
    """Closed-form ridge with an unpenalised intercept."""
    xm = X.mean(axis=0)
    ym = y.mean()
    Xc = X - xm
    w = np.linalg.solve(Xc.T @ Xc + alpha * np.eye(X.shape[1]), Xc.T @ (y - ym))
    return w, float(ym - xm @ w)


def stratified_split(labels: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    train, test = [], []
    for cls in (1, -1):
        idx = np.flatnonzero(labels == cls)
        if idx.size < 2:
            raise DegenerateSplit(f"class {cls:+d} needs at least two nodes to appear in train and test")
        idx = rng.permutation(idx)
        half = idx.size // 2
        train.append(idx[:half])
        test.append(idx[half:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


@dataclass
class SmoothingReport:
    """Per-order aggregates over trials; order 0 is the raw features."""

    orders: np.ndarray
    mse_mean: np.ndarray
    mse_std: np.ndarray
    dirichlet: np.ndarray
    cosine_dist: np.ndarray
    class_means: np.ndarray  # (orders, 2, dim): positive class first
    trials: int
    seed: int

    def to_csv(self, header: tuple[str, ...] = ()) -> str:
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["order", "mse_mean", "mse_std", "dirichlet", "cosine_dist"])
        for k in range(len(self.orders)):
            w.writerow([
                int(self.orders[k]),
                f"{self.mse_mean[k]:.17g}",
                f"{self.mse_std[k]:.17g}",
                f"{self.dirichlet[k]:.17g}",
                f"{self.cosine_dist[k]:.17g}",
            ])
        return buf.getvalue()


def _draw(lab: np.ndarray, seed: int, t: int, dim: int):
    rng = np.random.default_rng([seed, t])
    X = lab[:, None] + rng.standard_normal((lab.size, dim))
    train, test = stratified_split(lab, rng)
    return X, train, test


def _batched_ridge_mse(X, y, train, test, alpha):
    # X: (trials, n, dim); train/test: (trials, m) index arrays
    Xtr = np.take_along_axis(X, train[:, :, None], axis=1)
    Xte = np.take_along_axis(X, test[:, :, None], axis=1)
    ytr, yte = y[train], y[test]
    xm = Xtr.mean(axis=1, keepdims=True)
    ym = ytr.mean(axis=1, keepdims=True)
    Xc = Xtr - xm
    gram = np.einsum("tmi,tmj->tij", Xc, Xc) + alpha * np.eye(X.shape[2])
    rhs = np.einsum("tmi,tm->ti", Xc, ytr - ym)
    w = np.linalg.solve(gram, rhs[:, :, None])[:, :, 0]
    b = ym[:, 0] - np.einsum("ti,ti->t", xm[:, 0, :], w)
    pred = np.einsum("tmi,ti->tm", Xte, w) + b[:, None]
    return np.mean((pred - yte) ** 2, axis=1)


def _batched_cosine(X, lab):
    norms = np.linalg.norm(X, axis=2)
    out = np.full(X.shape[0], np.nan)
    ok = np.all(norms > 0, axis=1)
    U = X[ok] / norms[ok][:, :, None]
    pos, neg = U[:, lab > 0], U[:, lab < 0]
    out[ok] = 1.0 - np.einsum("tpi,tqi->tpq", pos, neg).mean(axis=(1, 2))
    return out


def smoothing_mse_curve(
    g: Graph,
    labels: LabelConfig,
    K: int,
    trials: int,
    ridge_alpha: float = DEFAULT_RIDGE_ALPHA,
    seed: int = 0,
    dim: int = 1,
) -> SmoothingReport:
    """Test MSE of ridge regression after k = 0..K rounds of mean aggregation.

    Features and the 50/50 stratified split of trial ``t`` depend only on
    ``(seed, t)``, so every graph sharing a labelling sees the same draws and
    the order-0 row does not depend on the graph. Trials are evaluated as
    one batch, so the result does not depend on evaluation order.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if len(labels.labels) != g.num_nodes:
        raise ValueError(f"{len(labels.labels)} labels for {g.num_nodes} nodes")
    labels.check_both_classes()
    lab = labels.array
    draws = [_draw(lab, seed, t, dim) for t in range(trials)]
    X = np.stack([d[0] for d in draws])
    train = np.stack([d[1] for d in draws])
    test = np.stack([d[2] for d in draws])
    with_energy = bool(np.all(g.degrees > 0))
    n = g.num_nodes

    mse = np.empty((K + 1, trials))
    energy = np.full((K + 1, trials), np.nan)
    cosine = np.empty((K + 1, trials))
    means = np.empty((K + 1, 2, dim))
    for k in range(K + 1):
        mse[k] = _batched_ridge_mse(X, lab, train, test, ridge_alpha)
        flat = X.transpose(1, 0, 2).reshape(n, trials * dim)
        if with_energy:
            LX = normalized_laplacian_apply(g, flat)
            energy[k] = np.sum((flat * LX).reshape(n, trials, dim), axis=(0, 2)) / n
        cosine[k] = _batched_cosine(X, lab)
        means[k, 0] = X[:, lab > 0].mean(axis=(0, 1))
        means[k, 1] = X[:, lab < 0].mean(axis=(0, 1))
        X = mean_aggregate(g, flat).reshape(n, trials, dim).transpose(1, 0, 2)

    finite = np.isfinite(cosine).any(axis=1)
    cos_mean = np.full(K + 1, np.nan)
    cos_mean[finite] = np.nanmean(cosine[finite], axis=1)
    return SmoothingReport(
        orders=np.arange(K + 1),
        mse_mean=mse.mean(axis=1),
        mse_std=mse.std(axis=1),
        dirichlet=energy.mean(axis=1),
        cosine_dist=cos_mean,
        class_means=means,
        trials=trials,
        seed=seed,
    )

"""Spectral gap of the symmetric normalized Laplacian.

Three routes to the same quantity:

* :func:`exact_spectrum` runs a dense symmetric eigensolve (test oracle).
* :func:`iterative_spectrum` refines one eigenpair by shifted, deflated power
  iteration and accepts a warm start, which is what the greedy loops use.
* :func:`proxy_gap_delta` is the first-order O(1) estimate of how the gap
  moves when one edge is added or removed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .errors import GraphTooLargeForDense, NotConverged, NotConvergedWarning, ZeroDegreeNode
from .graph import EdgeDelta, Graph, is_connected

DENSE_LIMIT = 4096
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule for :func:`iterative_spectrum`.

    ``method`` is ``"power"`` (deflated power iteration) or ``"lanczos"``
    (ARPACK on the same deflated operator, much faster on large graphs
    whose two smallest non-zero eigenvalues are close).
    """

    tolerance: float = 1e-10
    max_iterations: int = 5000
    warm_start: np.ndarray | None = None
    method: str = "power"

    def __post_init__(self):
        if self.method not in ("power", "lanczos"):
            raise ValueError(f"unknown solver method {self.method!r}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    """Spectral gap together with its eigenvector and the kernel vector.

    ``fiedler`` is the unit eigenvector for ``gap``; ``ground`` is the unit
    vector proportional to sqrt(degree), which spans the kernel of the
    normalized Laplacian on connected graphs.
    """

    gap: float
    fiedler: np.ndarray
    ground: np.ndarray
    residual: float
    iterations: int = 0
    converged: bool = True
    connected: bool = True
    method: str = field(default="exact")

    def to_record(self) -> dict:
        return {
            "gap": float(f"{self.gap:.17g}"),
            "residual": float(f"{self.residual:.17g}"),
            "fiedler": [float(f"{x:.17g}") for x in self.fiedler],
            "ground": [float(f"{x:.17g}") for x in self.ground],
        }


def _check_degrees(g: Graph) -> np.ndarray:
    d = g.degrees
    if g.num_nodes == 0:
        raise ZeroDegreeNode("empty graph has no normalized Laplacian")
    zero = np.flatnonzero(d == 0)
    if zero.size:
        raise ZeroDegreeNode(f"node {int(zero[0])} has degree 0; D^-1/2 is undefined")
    return d.astype(float)


def ground_vector(g: Graph) -> np.ndarray:
    """Unit kernel vector D^{1/2} 1 / ||D^{1/2} 1||."""
    s = np.sqrt(g.degrees.astype(float))
    return s / np.linalg.norm(s)


def normalized_adjacency(g: Graph) -> sp.csr_matrix:
    d = _check_degrees(g)
    inv = sp.diags(1.0 / np.sqrt(d))
    return (inv @ g.adjacency() @ inv).tocsr()


def normalized_laplacian_apply(g: Graph, x: np.ndarray) -> np.ndarray:
    """Matrix-free product ``y_u = x_u - sum_{v ~ u} x_v / sqrt(d_u d_v)``."""
    d = _check_degrees(g)
    x = np.asarray(x, dtype=float)
    if x.shape[0] != g.num_nodes:
        raise ValueError(f"vector length {x.shape[0]} != num_nodes {g.num_nodes}")
    s = 1.0 / np.sqrt(d)
    if x.ndim == 2:
        s = s[:, None]
    return x - s * (g.adjacency() @ (s * x))


def dense_normalized_laplacian(g: Graph) -> np.ndarray:
    d = _check_degrees(g)
    s = 1.0 / np.sqrt(d)
    return np.eye(g.num_nodes) - s[:, None] * g.adjacency().toarray() * s[None, :]


def orient(f: np.ndarray) -> np.ndarray:
    """Flip sign so the largest-magnitude entry is positive (lowest index on ties)."""
    a = np.abs(f)
    top = np.flatnonzero(a >= a.max() - _TIE_TOL)[0]
    return -f if f[top] < 0 else f


def exact_spectrum(g: Graph) -> SpectrumEstimate:
    """Dense ground truth for the spectral gap.

    On a disconnected graph the gap is reported as 0 and ``connected`` is
    False; the returned ``fiedler`` then lies in the kernel.
    """
    n = g.num_nodes
    if n > DENSE_LIMIT:
        raise GraphTooLargeForDense(f"{n} nodes exceeds the dense limit of {DENSE_LIMIT}")
    L = dense_normalized_laplacian(g)
    ground = ground_vector(g)
    if n == 1:
        return SpectrumEstimate(0.0, np.ones(1), ground, 0.0, connected=True)
    vals, vecs = np.linalg.eigh(L)
    connected = is_connected(g)
    f = vecs[:, 1]
    if connected:
        f = f - ground * (ground @ f)
        f /= np.linalg.norm(f)
        lam = float(f @ L @ f)
        gap = min(max(lam, 0.0), 2.0)
    else:
        gap = 0.0
    f = orient(f)
    residual = float(np.linalg.norm(L @ f - gap * f))
    return SpectrumEstimate(gap, f, ground, residual, 0, True, connected, "exact")


def exact_gap(g: Graph) -> float:
    """Second-smallest eigenvalue only (cheaper than :func:`exact_spectrum`)."""
    if g.num_nodes > DENSE_LIMIT:
        raise GraphTooLargeForDense(f"{g.num_nodes} nodes exceeds the dense limit of {DENSE_LIMIT}")
    if not is_connected(g):
        _check_degrees(g)
        return 0.0
    vals = np.linalg.eigvalsh(dense_normalized_laplacian(g))
    return float(min(max(vals[1], 0.0), 2.0))


def cold_start(g: Graph) -> np.ndarray:
    # Alternating signs alone are an exact top eigenvector of regular
    # bipartite graphs (eigenvalue 2), which B = 2I - L annihilates; the
    # ramp keeps every low-frequency mode in the start vector.
    n = g.num_nodes
    idx = np.arange(n, dtype=float)
    x = np.where(np.arange(n) % 2 == 0, 1.0, -1.0) + (2.0 * idx / max(n - 1, 1) - 1.0)
    ground = ground_vector(g)
    x -= ground * (ground @ x)
    nrm = np.linalg.norm(x)
    if nrm == 0:
        x = np.ones(n)
        x[0] = -1.0
        x -= ground * (ground @ x)
        nrm = np.linalg.norm(x)
    return x / nrm


def iterative_spectrum(
    g: Graph, cfg: SolverConfig | None = None, strict: bool = False
) -> SpectrumEstimate:
    """Refine the gap eigenpair by power iteration on ``2I - L`` with the kernel deflated.

    Iterates ``x <- (B - 2 f0 f0^T) x`` until the eigen-residual
    ``||L x - rq x||`` drops below ``cfg.tolerance``. When the iteration
    budget runs out the best iterate is returned with ``converged=False``
    and a :class:`NotConvergedWarning` is issued; ``strict=True`` raises
    :class:`NotConverged` instead. ``cfg.method="lanczos"`` hands the same
    deflated operator to ARPACK.
    """
    cfg = cfg or SolverConfig()
    d = _check_degrees(g)
    n = g.num_nodes
    ground = np.sqrt(d) / np.linalg.norm(np.sqrt(d))
    if n == 1:
        return SpectrumEstimate(0.0, np.ones(1), ground, 0.0, 0, True, True, cfg.method)
    M = normalized_adjacency(g)

    if cfg.warm_start is not None:
        x = np.array(cfg.warm_start, dtype=float)
        if x.shape != (n,):
            raise ValueError(f"warm start has shape {x.shape}, expected ({n},)")
        x -= ground * (ground @ x)
        nrm = np.linalg.norm(x)
        x = x / nrm if nrm > 0 else cold_start(g)
    else:
        x = cold_start(g)

    if cfg.method == "lanczos":
        x, it = _lanczos(M, ground, x, cfg)
        Lx = x - M @ x
        rq = float(x @ Lx)
        best = (x, rq, float(np.linalg.norm(Lx - rq * x)), it)
    else:
        best, it = _power(M, ground, x, cfg)

    x, rq, res, _ = best
    converged = res <= cfg.tolerance
    est = SpectrumEstimate(
        gap=min(max(rq, 0.0), 2.0),
        fiedler=orient(x),
        ground=ground,
        residual=res,
        iterations=it,
        converged=converged,
        connected=is_connected(g),
        method=cfg.method,
    )
    if not converged:
        msg = (
            f"{cfg.method} solver stopped after {it} steps with residual {res:.3e} "
            f"(tolerance {cfg.tolerance:.1e})"
        )
        if strict:
            raise NotConverged(msg, est)
        warnings.warn(msg, NotConvergedWarning, stacklevel=2)
    return est


def _power(M, ground, x, cfg):
    best = None
    it = 0
    while True:
        Lx = x - M @ x
        rq = float(x @ Lx)
        res = float(np.linalg.norm(Lx - rq * x))
        if best is None or res < best[2]:
            best = (x, rq, res, it)
        if res <= cfg.tolerance or it >= cfg.max_iterations:
            break
        # B x = 2x - Lx; the kernel direction is projected out explicitly
        x = 2.0 * x - Lx
        x -= ground * (ground @ x)
        x /= np.linalg.norm(x)
        it += 1
    return best, it


def _lanczos(M, ground, x, cfg):
    n = M.shape[0]
    if n < 3:
        return x, 0
    count = [0]

    def matvec(y):
        count[0] += 1
        y = np.ravel(y)
        out = y + M @ y  # (2I - L) y
        return out - 2.0 * ground * (ground @ y)

    op = sla.LinearOperator((n, n), matvec=matvec, dtype=float)
    try:
        _, vecs = sla.eigsh(op, k=1, which="LA", v0=x, tol=cfg.tolerance * 1e-2,
                            maxiter=cfg.max_iterations)
        y = vecs[:, 0]
    except sla.ArpackNoConvergence as exc:
        y = exc.eigenvectors[:, 0] if exc.eigenvectors.size else x
    y = y - ground * (ground @ y)
    return y / np.linalg.norm(y), count[0]


def proxy_gap_delta(est: SpectrumEstimate, g: Graph, delta: EdgeDelta) -> float:
    """First-order gap change for flipping one edge: ``w((f_u-f_v)^2 - gap (f_u^2+f_v^2))``."""
    u, v = delta.edge
    fu, fv = float(est.fiedler[u]), float(est.fiedler[v])
    return delta.weight * ((fu - fv) ** 2 - est.gap * (fu * fu + fv * fv))


def proxy_scores(est: SpectrumEstimate, edges: np.ndarray, weight: int) -> np.ndarray:
    """Vectorised :func:`proxy_gap_delta` over an ``(k, 2)`` edge array."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    fu = est.fiedler[edges[:, 0]]
    fv = est.fiedler[edges[:, 1]]
    return weight * ((fu - fv) ** 2 - est.gap * (fu * fu + fv * fv))


def perturbed_power_steps(
    g: Graph,
    start: np.ndarray,
    edges: np.ndarray,
    weight: int,
    steps: int,
    chunk: int = 256,
) -> tuple[np.ndarray, np.ndarray]:
    """Run ``steps`` deflated power iterations on each single-edge perturbation of ``g``.

    Column ``c`` of the result approximates the gap eigenvector of ``g`` with
    edge ``edges[c]`` flipped by ``weight``, warm-started from ``start``. The
    second return value holds the matching Rayleigh quotients. No graph is
    copied: the flip enters as a rank-two correction of the shared adjacency.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    n, k = g.num_nodes, edges.shape[0]
    A = g.adjacency()
    d = g.degrees.astype(float)
    vecs = np.empty((n, k))
    rqs = np.empty(k)
    for lo in range(0, k, chunk):
        e = edges[lo:lo + chunk]
        c = e.shape[0]
        cols = np.arange(c)
        u, v = e[:, 0], e[:, 1]
        dh = np.repeat(d[:, None], c, axis=1)
        dh[u, cols] += weight
        dh[v, cols] += weight
        if np.any(dh <= 0):
            raise ZeroDegreeNode("perturbation leaves a node with degree 0")
        s = 1.0 / np.sqrt(dh)
        f0 = np.sqrt(dh)
        f0 /= np.linalg.norm(f0, axis=0)

        def apply(X):
            Y = s * X
            Z = A @ Y
            Z[u, cols] += weight * Y[v, cols]
            Z[v, cols] += weight * Y[u, cols]
            return X - s * Z

        X = np.repeat(np.asarray(start, dtype=float)[:, None], c, axis=1)
        X -= f0 * np.sum(f0 * X, axis=0)
        X /= np.linalg.norm(X, axis=0)
        for _ in range(steps):
            X = 2.0 * X - apply(X)
            X -= f0 * np.sum(f0 * X, axis=0)
            X /= np.linalg.norm(X, axis=0)
        vecs[:, lo:lo + c] = X
        rqs[lo:lo + c] = np.sum(X * apply(X), axis=0)
    return vecs, rqs

"""Greedy spectral-gap rewiring by edge additions or deletions.

Every pass scores candidate edges against the current eigenpair, applies
the ``update_period`` best legal ones without re-scoring, then refreshes the
eigenpair with a warm-started :func:`~specrewire.spectral.iterative_spectrum`.

Strategies:

``proxy``
    first-order perturbation of the gap (O(1) per candidate).
``eldan``
    Eldan's sufficient condition. Additions pick the smallest criterion;
    deletions pick the largest criterion evaluated on the pruned graph,
    whose eigenvector is estimated by a few warm-started power steps.
    With ``stop_on_criterion`` a deletion is applied only after its
    criterion stays positive on a converged eigenpair of the pruned graph.
``exact``
    true gap change from a dense eigensolve per candidate (small graphs).
"""

from __future__ import annotations

import csv
import enum
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .analytic import EldanInputs, eldan_add_scores, eldan_criterion, eldan_delete_scores
from .errors import (
    AllCandidatesFiltered,
    DisconnectedGraph,
    NoCandidates,
    NotConvergedWarning,
    PlanError,
)
from .graph import Direction, Edge, EdgeDelta, Graph, apply_delta, is_connected
from .spectral import (
    DENSE_LIMIT,
    SolverConfig,
    SpectrumEstimate,
    exact_gap,
    exact_spectrum,
    iterative_spectrum,
    perturbed_power_steps,
    proxy_scores,
)

DEFAULT_CANDIDATE_CAP = 10_000
ELDAN_REFINE_STEPS = 8


class Strategy(str, enum.Enum):
    PROXY = "proxy"
    ELDAN = "eldan"
    EXACT = "exact"

    @classmethod
    def parse(cls, text) -> "Strategy":
        if isinstance(text, Strategy):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise PlanError(f"unknown strategy {text!r}; expected proxy, eldan or exact") from None


class TerminalReason(str, enum.Enum):
    BUDGET_EXHAUSTED = "BudgetExhausted"
    CRITERION_STOPPED = "CriterionStopped"
    NO_LEGAL_CANDIDATES = "NoLegalCandidates"


@dataclass(frozen=True)
class RewirePlan:
    direction: Direction = Direction.DELETE
    strategy: Strategy = Strategy.PROXY
    budget: int = 1
    update_period: int = 1
    candidate_cap: int | None = DEFAULT_CANDIDATE_CAP
    seed: int = 0
    stop_on_criterion: bool = False
    forbid_disconnect: bool = False
    allow_disconnected_input: bool = False
    eldan_refine_steps: int = ELDAN_REFINE_STEPS
    solver: SolverConfig = field(default_factory=SolverConfig)
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction.parse(self.direction))
        object.__setattr__(self, "strategy", Strategy.parse(self.strategy))

    def validate(self, g: Graph | None = None) -> None:
        if self.budget < 1:
            raise PlanError("budget must be >= 1")
        if self.update_period < 1:
            raise PlanError("update_period must be >= 1")
        if self.candidate_cap is not None and self.candidate_cap < 1:
            raise PlanError("candidate_cap must be >= 1 when given")
        if self.stop_on_criterion and self.strategy is not Strategy.ELDAN:
            raise PlanError("stop_on_criterion is only defined for the eldan strategy")
        if self.eldan_refine_steps < 0:
            raise PlanError("eldan_refine_steps must be >= 0")
        if self.threads < 1:
            raise PlanError("threads must be >= 1")
        if g is not None and self.strategy is Strategy.EXACT and g.num_nodes > DENSE_LIMIT:
            raise PlanError(f"exact strategy needs <= {DENSE_LIMIT} nodes")

    def to_dict(self) -> dict:
        return {
            "direction": self.direction.name.lower(),
            "strategy": self.strategy.value,
            "budget": self.budget,
            "update_period": self.update_period,
            "candidate_cap": self.candidate_cap,
            "seed": self.seed,
            "stop_on_criterion": self.stop_on_criterion,
            "forbid_disconnect": self.forbid_disconnect,
            "allow_disconnected_input": self.allow_disconnected_input,
            "eldan_refine_steps": self.eldan_refine_steps,
            "tolerance": self.solver.tolerance,
            "max_iterations": self.solver.max_iterations,
            "solver": self.solver.method,
        }


@dataclass(frozen=True)
class EdgeScore:
    edge: Edge
    direction: Direction
    value: float
    rank_basis: Strategy


@dataclass
class TraceStep:
    step: int
    edge: Edge
    score: float
    gap_after: float | None
    edges_total: int


@dataclass
class RewireTrace:
    initial_gap: float
    steps: list[TraceStep] = field(default_factory=list)
    terminal_reason: TerminalReason | None = None
    final_gap: float | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def edges(self) -> list[Edge]:
        return [s.edge for s in self.steps]

    def gaps(self) -> list[float]:
        """Refreshed gaps, one per eigenpair refinement."""
        return [s.gap_after for s in self.steps if s.gap_after is not None]

    def summary(self) -> dict:
        return {
            "initial_gap": self.initial_gap,
            "final_gap": self.final_gap,
            "steps": len(self.steps),
            "terminal_reason": self.terminal_reason.value if self.terminal_reason else None,
        }

    def to_csv(self, header: tuple[str, ...] = ()) -> str:
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "edge_u", "edge_v", "score", "gap_after", "edges_total"])
        for s in self.steps:
            gap = "" if s.gap_after is None else f"{s.gap_after:.17g}"
            w.writerow([s.step, s.edge[0], s.edge[1], f"{s.score:.17g}", gap, s.edges_total])
        return buf.getvalue()


# ------------------------------------------------------------- candidates

def _edge_keys(edges: np.ndarray, n: int) -> np.ndarray:
    return edges[:, 0] * n + edges[:, 1]


def _all_non_edges(g: Graph) -> np.ndarray:
    n = g.num_nodes
    if n <= 4096:
        mask = np.triu(np.ones((n, n), dtype=bool), k=1)
        e = g.edge_array()
        mask[e[:, 0], e[:, 1]] = False
        u, v = np.nonzero(mask)
        return np.stack([u, v], axis=1).astype(np.int64)
    return np.array(list(g.non_edges()), dtype=np.int64).reshape(-1, 2)


def sample_non_edges(g: Graph, cap: int | None, rng: np.random.Generator) -> np.ndarray:
    """Up to ``cap`` distinct non-edges, uniform without replacement, canonical order."""
    total = g.num_non_edges()
    if cap is None or total <= cap:
        return _all_non_edges(g)
    n = g.num_nodes
    if 2 * cap >= total and n <= 4096:
        pool = _all_non_edges(g)
        pick = np.sort(rng.choice(pool.shape[0], size=cap, replace=False))
        return pool[pick]
    existing = np.sort(_edge_keys(g.edge_array(), n))
    chosen = np.empty(0, dtype=np.int64)
    while chosen.size < cap:
        need = cap - chosen.size
        u = rng.integers(0, n, size=2 * need + 16)
        v = rng.integers(0, n, size=2 * need + 16)
        keep = u != v
        lo, hi = np.minimum(u, v)[keep], np.maximum(u, v)[keep]
        keys = lo * n + hi
        keys = keys[~np.isin(keys, existing)]
        # preserve draw order when removing duplicates so the sample stays seeded
        _, first = np.unique(keys, return_index=True)
        keys = keys[np.sort(first)]
        keys = keys[~np.isin(keys, chosen)]
        chosen = np.concatenate([chosen, keys[:need]])
    chosen = np.sort(chosen)
    return np.stack([chosen // n, chosen % n], axis=1)


def _deletable_edges(g: Graph) -> np.ndarray:
    e = g.edge_array()
    d = g.degrees
    keep = (d[e[:, 0]] > 1) & (d[e[:, 1]] > 1)
    return np.asarray(e[keep])


def _candidates(g: Graph, plan: RewirePlan, pass_index: int) -> np.ndarray:
    if plan.direction is Direction.DELETE:
        if g.num_edges == 0:
            raise NoCandidates("graph has no edges to delete")
        cand = _deletable_edges(g)
    else:
        if g.num_non_edges() == 0:
            raise NoCandidates("graph is complete; nothing to add")
        rng = np.random.default_rng([plan.seed, pass_index])
        cand = sample_non_edges(g, plan.candidate_cap, rng)
    if cand.shape[0] == 0:
        raise NoCandidates("every candidate deletion would isolate a node")
    return cand


def _exact_values(g: Graph, est: SpectrumEstimate, cand: np.ndarray, direction: Direction, threads: int):
    def one(row):
        h = apply_delta(g, EdgeDelta((int(row[0]), int(row[1])), direction), allow_isolation=False)
        return exact_gap(h) - est.gap

    rows = [cand[i] for i in range(cand.shape[0])]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(one, rows))
    else:
        vals = [one(r) for r in rows]
    return np.array(vals, dtype=float)


def score_arrays(
    g: Graph, est: SpectrumEstimate, plan: RewirePlan, pass_index: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Array form of :func:`score_candidates`: ``(edges (k, 2), values (k,))``."""
    cand = _candidates(g, plan, pass_index)
    w = int(plan.direction)
    if plan.strategy is Strategy.PROXY:
        vals = proxy_scores(est, cand, w)
    elif plan.strategy is Strategy.EXACT:
        vals = _exact_values(g, est, cand, plan.direction, plan.threads)
    elif plan.direction is Direction.ADD:
        vals = eldan_add_scores(g, est.gap, est.fiedler, cand)
    else:
        vecs, gaps = perturbed_power_steps(g, est.fiedler, cand, -1, plan.eldan_refine_steps)
        vals = eldan_delete_scores(g, vecs, gaps, cand)
    return cand, np.asarray(vals, dtype=float)


def score_candidates(
    g: Graph, est: SpectrumEstimate, plan: RewirePlan, pass_index: int = 0
) -> list[EdgeScore]:
    """Score every legal candidate in canonical edge order.

    Deletions that would leave a node with degree 0 are not candidates.
    Additions are drawn from the non-edges, sampled down to
    ``plan.candidate_cap`` with a generator seeded by ``(plan.seed, pass_index)``.
    """
    cand, vals = score_arrays(g, est, plan, pass_index)
    return [
        EdgeScore((int(u), int(v)), plan.direction, float(x), plan.strategy)
        for (u, v), x in zip(cand, vals)
    ]


def ranking_key(values: np.ndarray, plan: RewirePlan) -> np.ndarray:
    """Larger is better. Eldan additions minimise the criterion."""
    values = np.asarray(values, dtype=float)
    if plan.strategy is Strategy.ELDAN and plan.direction is Direction.ADD:
        return -values
    return values


def rank_order(edges: np.ndarray, values: np.ndarray, plan: RewirePlan) -> np.ndarray:
    """Indices sorted best first; ties fall back to canonical edge order."""
    key = ranking_key(values, plan)
    edges = np.asarray(edges).reshape(-1, 2)
    return np.lexsort((edges[:, 1], edges[:, 0], -key))


def select_best(scores: list[EdgeScore], plan: RewirePlan, graph: Graph | None = None) -> EdgeScore:
    """Best-ranked score; with ``plan.forbid_disconnect`` the best that keeps ``graph`` connected."""
    if not scores:
        raise NoCandidates("no scores to select from")
    edges = np.array([s.edge for s in scores], dtype=np.int64)
    vals = np.array([s.value for s in scores])
    for i in rank_order(edges, vals, plan):
        s = scores[i]
        if plan.forbid_disconnect and plan.direction is Direction.DELETE:
            if graph is None:
                raise PlanError("forbid_disconnect needs the graph to check connectivity")
            if not is_connected(graph, skip_edge=s.edge):
                continue
        return s
    raise AllCandidatesFiltered("every candidate deletion disconnects the graph")


# ---------------------------------------------------------------- driver

def _refine(g: Graph, est: SpectrumEstimate, plan: RewirePlan, trace: RewireTrace) -> SpectrumEstimate:
    cfg = replace(plan.solver, warm_start=est.fiedler)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NotConvergedWarning)
        new = iterative_spectrum(g, cfg)
    for w in caught:
        if issubclass(w.category, NotConvergedWarning):
            trace.warnings.append(f"step {len(trace.steps)}: {w.message}")
        else:
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    return new


def _certified_delete(g: Graph, edge: Edge, est: SpectrumEstimate, plan: RewirePlan) -> bool:
    """Re-evaluate the criterion for deleting ``edge`` with a converged eigenpair of the pruned graph.

    The few-step estimate used for ranking can be far off when the two
    lowest non-zero eigenvalues are close; only a converged eigenvector
    turns a positive criterion into a guarantee.
    """
    h = apply_delta(g, EdgeDelta.delete(*edge))
    if not is_connected(h):
        return False
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConvergedWarning)
        sparse = iterative_spectrum(h, replace(plan.solver, warm_start=est.fiedler))
    if not sparse.converged:
        return False
    return eldan_criterion(EldanInputs.build(h, sparse.gap, sparse.fiedler, edge)) > 0


def _legal(g: Graph, edge: Edge, plan: RewirePlan) -> bool:
    if plan.direction is Direction.ADD:
        return not g.has_edge(*edge)
    u, v = edge
    if not g.has_edge(u, v) or g.degrees[u] <= 1 or g.degrees[v] <= 1:
        return False
    if plan.forbid_disconnect and not is_connected(g, skip_edge=edge):
        return False
    return True


def rewire(g: Graph, plan: RewirePlan) -> tuple[Graph, RewireTrace]:
    """Run the greedy loop until the budget, the criterion or the candidates run out."""
    plan.validate(g)
    if not plan.allow_disconnected_input and not is_connected(g):
        raise DisconnectedGraph("input graph is disconnected; set allow_disconnected_input to proceed")

    trace = RewireTrace(initial_gap=float("nan"))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NotConvergedWarning)
        est = iterative_spectrum(g, plan.solver)
    trace.warnings.extend(f"initial: {w.message}" for w in caught if issubclass(w.category, NotConvergedWarning))
    trace.initial_gap = est.gap

    pass_index = 0
    reason = TerminalReason.BUDGET_EXHAUSTED
    while len(trace.steps) < plan.budget:
        try:
            cand, vals = score_arrays(g, est, plan, pass_index)
        except NoCandidates:
            reason = TerminalReason.NO_LEGAL_CANDIDATES
            break
        key = ranking_key(vals, plan)
        quota = min(plan.update_period, plan.budget - len(trace.steps))
        applied = 0
        stopped = False
        certify = plan.stop_on_criterion and plan.direction is Direction.DELETE
        rejected = False
        for i in rank_order(cand, vals, plan):
            if applied == quota:
                break
            if plan.stop_on_criterion and key[i] <= 0:
                stopped = True
                break
            edge = (int(cand[i, 0]), int(cand[i, 1]))
            if not _legal(g, edge, plan):
                continue
            if certify and not _certified_delete(g, edge, est, plan):
                rejected = True
                continue
            g = apply_delta(g, EdgeDelta(edge, plan.direction))
            applied += 1
            trace.steps.append(TraceStep(len(trace.steps) + 1, edge, float(vals[i]), None, g.num_edges))
        if applied:
            est = _refine(g, est, plan, trace)
            trace.steps[-1].gap_after = est.gap
            pass_index += 1
        if stopped or (rejected and not applied):
            reason = TerminalReason.CRITERION_STOPPED
            break
        if not applied:
            reason = TerminalReason.NO_LEGAL_CANDIDATES
            break

    trace.terminal_reason = reason
    trace.final_gap = est.gap
    return g, trace


def sparsity_budget(num_edges: int, target_fraction: float) -> int:
    return int(math.floor(target_fraction * num_edges + 0.5))


def prune_to_sparsity(g: Graph, target_fraction: float, plan: RewirePlan) -> tuple[Graph, RewireTrace]:
    """Delete ``round(target_fraction * |E|)`` edges with ``plan``'s strategy."""
    if not 0.0 < target_fraction < 1.0:
        raise PlanError("target_fraction must lie strictly between 0 and 1")
    if plan.direction is not Direction.DELETE:
        raise PlanError("pruning needs direction=delete")
    budget = sparsity_budget(g.num_edges, target_fraction)
    if budget == 0:
        est = iterative_spectrum(g, plan.solver)
        return g, RewireTrace(est.gap, [], TerminalReason.BUDGET_EXHAUSTED, est.gap)
    return rewire(g, replace(plan, budget=budget))


def proxy_exact_correlation(g: Graph, direction=Direction.DELETE) -> tuple[float, int]:
    """Pearson correlation between proxy scores and exact gap changes over every candidate.

    Uses the dense eigenpair, so both columns share the same reference gap.
    Returns ``(r, number_of_candidates)``.
    """
    est = exact_spectrum(g)
    proxy = RewirePlan(direction=direction, strategy=Strategy.PROXY, candidate_cap=None)
    cand, approx = score_arrays(g, est, proxy)
    exact = _exact_values(g, est, cand, proxy.direction, 1)
    if cand.shape[0] < 2:
        raise NoCandidates("correlation needs at least two candidates")
    return float(np.corrcoef(approx, exact)[0, 1]), int(cand.shape[0])

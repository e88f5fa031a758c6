"""Partially collapsed Gibbs sampler for a DP mixture of decomposable graphical models.

Each sweep reassigns every row (cluster tables integrated out), updates
each cluster's graph by a Metropolis-Hastings edge toggle, and refreshes
the DP concentration by the Escobar-West auxiliary-variable step.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from math import exp, isfinite, log
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .chordal import UndirectedGraph, clique_decomposition, enumerate_valid_moves, is_decomposable
from .data import CategoricalDataset
from .errors import NumericError, StateCorruptionError
from .predictive import ClusterSuffStats, _log_marginal_counts, log_prior_predictive
from .priors import (ConcentrationPriorSpec, GraphPriorSpec, HyperDirichletSpec,
                     log_graph_prior)

log_ = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplerConfig:
    iterations: int = 1000
    burn_in: int = 0
    thin: int = 1
    seed: int = 0
    aux_components: int = 1
    baseline_mode: bool = False
    hyper: HyperDirichletSpec = field(default_factory=HyperDirichletSpec)
    graph_prior: GraphPriorSpec = field(default_factory=GraphPriorSpec)
    alpha_prior: ConcentrationPriorSpec = field(default_factory=ConcentrationPriorSpec)
    progress_every: int = 0
    debug_checks: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must satisfy 0 <= burn_in < iterations")
        if self.thin < 1:
            raise ValueError("thin must be at least 1")
        if self.aux_components < 1:
            raise ValueError("aux_components must be at least 1")

    @property
    def n_draws(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


class ClusterState:
    """Cluster memberships, per-cluster graphs and statistics, and alpha."""

    def __init__(self, dataset: CategoricalDataset, clusters: list[ClusterSuffStats], alpha: float):
        self.dataset = dataset
        self.clusters = clusters
        self.alpha = alpha
        self.owner: list[ClusterSuffStats | None] = [None] * dataset.n
        for cl in clusters:
            for i in cl.members:
                self.owner[i] = cl
        self.proposed = 0
        self.accepted = 0

    @classmethod
    def single_cluster(cls, dataset: CategoricalDataset, spec: HyperDirichletSpec,
                       alpha: float) -> "ClusterState":
        cl = ClusterSuffStats(dataset, UndirectedGraph.empty(dataset.q), spec, range(dataset.n))
        return cls(dataset, [cl], alpha)

    @classmethod
    def from_partition(cls, dataset: CategoricalDataset, labels: Sequence[int],
                       graphs: Sequence[UndirectedGraph], alpha: float,
                       spec: HyperDirichletSpec) -> "ClusterState":
        """Build a state from labels ``1..K`` and one graph per label."""
        groups: dict[int, list[int]] = {}
        for i, lab in enumerate(labels):
            groups.setdefault(int(lab), []).append(i)
        clusters = [ClusterSuffStats(dataset, graphs[lab - 1], spec, rows)
                    for lab, rows in sorted(groups.items())]
        return cls(dataset, clusters, alpha)

    @property
    def K(self) -> int:
        return len(self.clusters)

    def canonical(self) -> tuple[list[int], list[ClusterSuffStats]]:
        """Labels 1..K with clusters ordered by their smallest member."""
        ordered = sorted(self.clusters, key=lambda cl: min(cl.members))
        index = {id(cl): k + 1 for k, cl in enumerate(ordered)}
        return [index[id(cl)] for cl in self.owner], ordered

    def check(self) -> None:
        if sum(cl.n for cl in self.clusters) != self.dataset.n:
            raise StateCorruptionError("cluster sizes do not sum to n")
        for cl in self.clusters:
            if cl.n == 0:
                raise StateCorruptionError("empty cluster retained in the state")
            cl.check_consistency()
        for i, cl in enumerate(self.owner):
            if i not in cl.members:
                raise StateCorruptionError(f"row {i} is not in its owning cluster")


def sample_graph_from_prior(q: int, spec: GraphPriorSpec, rng: np.random.Generator) -> UndirectedGraph:
    """Draw from the Beta-Bernoulli edge prior conditioned on decomposability.

    The whole (pi, edges) draw is repeated until the graph is chordal.
    """
    pairs = [(u, v) for u in range(q) for v in range(u + 1, q)]
    max_attempts = 10 * q * q
    for _ in range(max(max_attempts, 1)):
        pi = rng.beta(spec.a_g, spec.b_g)
        keep = rng.random(len(pairs)) < pi
        graph = UndirectedGraph(q, frozenset(p for p, k in zip(pairs, keep) if k))
        if is_decomposable(graph):
            return graph
    raise RuntimeError(f"no decomposable graph after {max_attempts} prior draws; "
                       f"try a smaller a_g/(a_g+b_g)")


def _sample_log_weights(weights: list[float], rng: np.random.Generator) -> int:
    top = max(weights)
    probs = [exp(w - top) for w in weights]
    u = rng.random() * sum(probs)
    acc = 0.0
    for k, p in enumerate(probs):
        acc += p
        if u < acc:
            return k
    return len(probs) - 1


def update_assignments(state: ClusterState, config: SamplerConfig, rng: np.random.Generator,
                       iteration: int = 0) -> ClusterState:
    """One sequential pass reassigning every row.

    New clusters use ``aux_components`` auxiliary graphs, each weighted
    alpha/m. The prior predictive of a row is the same under every graph
    (each vertex lies in one more clique than separator, so the cell
    parameters telescope to 1/|X|), so an auxiliary graph is only drawn once
    its component has been chosen; the chosen graph is still a prior draw.
    """
    ds = state.dataset
    spec = config.hyper
    m = config.aux_components
    log_new = log(state.alpha / m) + log_prior_predictive(ds.codes[0], UndirectedGraph.empty(ds.q),
                                                          spec, ds.levels)
    clusters, owner = state.clusters, state.owner
    for i in range(ds.n):
        cl = owner[i]
        cl.remove(i)
        if cl.n == 0:
            clusters.remove(cl)
        weights = [c.log_assignment_weight(i) for c in clusters]
        weights.extend([log_new] * m)
        if not isfinite(sum(weights)):
            raise NumericError(f"non-finite assignment weight at iteration {iteration}, row {i}; "
                               f"cluster sizes {[c.n for c in clusters]}, weights {weights}")
        k = _sample_log_weights(weights, rng)
        if k < len(clusters):
            target = clusters[k]
        else:
            if config.baseline_mode:
                graph = UndirectedGraph.empty(ds.q)
            else:
                graph = sample_graph_from_prior(ds.q, config.graph_prior, rng)
            target = ClusterSuffStats(ds, graph, spec)
            clusters.append(target)
        target.add(i)
        owner[i] = target
    return state


@lru_cache(maxsize=65536)
def _moves(graph: UndirectedGraph) -> tuple[tuple[int, int], ...]:
    return tuple((mv.u, mv.v) for mv in enumerate_valid_moves(graph, check=False))


def mh_graph_step(stats: ClusterSuffStats, prior: GraphPriorSpec, rng: np.random.Generator) -> bool:
    """Propose a uniform valid edge toggle for one cluster; return acceptance.

    Works for clusters of any size, including no rows at all.
    """
    graph = stats.graph
    moves = _moves(graph)
    if not moves:
        return False
    u, v = moves[int(rng.integers(len(moves)))]
    proposal = graph.toggle(u, v)
    new_terms = clique_decomposition(proposal).terms()
    old_terms = stats.decomposition.terms()
    current = {t[4]: t for t in stats.terms}
    spec, ds = stats.spec, stats.dataset
    a = spec.a
    tables = {}
    delta = 0.0
    for subset in set(new_terms) | set(old_terms):
        coef = new_terms.get(subset, 0) - old_terms.get(subset, 0)
        if subset in current:
            counts, cell = current[subset][1], current[subset][3]
        else:
            codes = ds.subset_codes(subset)
            counts = {}
            for i in stats.members:
                c = codes[i]
                counts[c] = counts.get(c, 0) + 1
            cell = a / ds.cell_count(subset)
        if subset in new_terms:
            tables[subset] = counts
        if coef and subset:
            delta += coef * _log_marginal_counts(counts.values(), stats.n, a, cell)
    delta += log_graph_prior(proposal, prior) - log_graph_prior(graph, prior)
    delta += log(len(moves)) - log(len(_moves(proposal)))
    if not isfinite(delta):
        raise NumericError(f"non-finite graph acceptance ratio for toggle ({u}, {v})")
    if delta >= 0 or rng.random() < exp(delta):
        stats.set_graph(proposal, tables)
        return True
    return False


def update_graphs(state: ClusterState, config: SamplerConfig, rng: np.random.Generator) -> ClusterState:
    if config.baseline_mode:
        return state
    for cl in state.clusters:
        if state.dataset.q < 2:
            continue
        state.proposed += 1
        state.accepted += mh_graph_step(cl, config.graph_prior, rng)
    return state


def alpha_mixture_weight(c: float, K: int, n: int, eta: float, d: float) -> float:
    """Weight of the Gamma(c + K, d - log eta) component."""
    odds = (c + K - 1) / (n * (d - log(eta)))
    return odds / (1 + odds)


def sample_alpha(alpha: float, K: int, n: int, spec: ConcentrationPriorSpec,
                 rng: np.random.Generator) -> float:
    """Escobar-West update of the DP concentration given K clusters among n rows."""
    eta = rng.beta(alpha + 1, n)
    rate = spec.d - log(eta)
    g = alpha_mixture_weight(spec.c, K, n, eta, spec.d)
    shape = spec.c + K if rng.random() < g else spec.c + K - 1
    return max(float(rng.gamma(shape, 1.0 / rate)), 1e-300)


def update_alpha(state: ClusterState, n: int, spec: ConcentrationPriorSpec,
                 rng: np.random.Generator) -> ClusterState:
    state.alpha = sample_alpha(state.alpha, state.K, n, spec, rng)
    return state


def sweep(state: ClusterState, config: SamplerConfig, rng: np.random.Generator,
          iteration: int = 0) -> ClusterState:
    update_assignments(state, config, rng, iteration)
    update_graphs(state, config, rng)
    update_alpha(state, state.dataset.n, config.alpha_prior, rng)
    if config.debug_checks:
        state.check()
    return state


@dataclass
class Draw:
    iter: int
    K: int
    alpha: float
    assignments: list[int]
    graphs: list[list[list[int]]]

    def to_json(self) -> dict:
        return {"iter": self.iter, "K": self.K, "alpha": self.alpha,
                "assignments": self.assignments, "graphs": self.graphs}


@dataclass
class Trace:
    n: int
    q: int
    draws: list[Draw] = field(default_factory=list)
    proposed: int = 0
    accepted: int = 0
    seed: int | None = None

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else 0.0

    def assignment_matrix(self) -> np.ndarray:
        return np.array([d.assignments for d in self.draws], dtype=np.int64).reshape(-1, self.n)

    def metadata(self) -> dict:
        return {"meta": {"n": self.n, "q": self.q, "draws": len(self.draws), "seed": self.seed,
                         "graph_moves_proposed": self.proposed,
                         "graph_moves_accepted": self.accepted,
                         "acceptance_rate": self.acceptance_rate}}

    def write_jsonl(self, path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for d in self.draws:
                fh.write(json.dumps(d.to_json(), separators=(",", ":")) + "\n")
            fh.write(json.dumps(self.metadata(), separators=(",", ":")) + "\n")

    @classmethod
    def read_jsonl(cls, path) -> "Trace":
        draws, meta = [], None
        with Path(path).open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                obj = json.loads(line)
                if "meta" in obj:
                    meta = obj["meta"]
                else:
                    draws.append(Draw(obj["iter"], obj["K"], obj["alpha"], obj["assignments"], obj["graphs"]))
        if meta is None:
            raise ValueError(f"{path}: missing trailing metadata line")
        return cls(meta["n"], meta["q"], draws, meta["graph_moves_proposed"],
                   meta["graph_moves_accepted"], meta.get("seed"))

    @classmethod
    def concatenate(cls, traces: Sequence["Trace"]) -> "Trace":
        if not traces:
            raise ValueError("no traces to merge")
        n, q = traces[0].n, traces[0].q
        for t in traces[1:]:
            if t.n != n or t.q != q:
                raise ValueError(f"trace dimensions differ: (n={n}, q={q}) vs (n={t.n}, q={t.q})")
        return cls(n, q, [d for t in traces for d in t.draws],
                   sum(t.proposed for t in traces), sum(t.accepted for t in traces))


def record(state: ClusterState, iteration: int) -> Draw:
    labels, ordered = state.canonical()
    return Draw(iteration, state.K, state.alpha, labels, [cl.graph.edge_list() for cl in ordered])


def run(dataset: CategoricalDataset, config: SamplerConfig,
        progress: Callable[[int, ClusterState], None] | None = None) -> Trace:
    """Run one chain from a single empty-graph cluster with alpha at its prior mean."""
    rng = np.random.default_rng(config.seed)
    state = ClusterState.single_cluster(dataset, config.hyper, config.alpha_prior.mean)
    trace = Trace(dataset.n, dataset.q, seed=config.seed)
    started = time.perf_counter()
    for t in range(1, config.iterations + 1):
        sweep(state, config, rng, t)
        if t > config.burn_in and (t - config.burn_in) % config.thin == 0:
            trace.draws.append(record(state, t))
        if config.progress_every and t % config.progress_every == 0:
            log_.info("iteration %d/%d: K=%d alpha=%.3f graph acceptance=%.3f (%.1fs)",
                      t, config.iterations, state.K, state.alpha,
                      state.accepted / max(state.proposed, 1), time.perf_counter() - started)
            if progress is not None:
                progress(t, state)
    trace.proposed, trace.accepted = state.proposed, state.accepted
    return trace

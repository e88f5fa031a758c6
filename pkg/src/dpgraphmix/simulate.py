"""Synthetic two-cluster data: graph-structured Gaussians cut at fixed quantiles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg
from scipy.stats import norm

from .chordal import UndirectedGraph, perturb_graph, random_decomposable_graph
from .data import CategoricalDataset

EIGEN_FLOOR = 0.1


@dataclass(frozen=True)
class ScenarioSpec:
    """Simulation settings.

    ``thresholds`` of None draws one quantile order per variable uniformly
    from ``threshold_range`` using the master seed only, so scenarios that
    share a seed share thresholds. ``keep_vars`` restricts the output to the
    first ``keep_vars`` columns after generation at full ``q``.
    """

    q: int = 20
    n_per_cluster: tuple[int, ...] = (200, 200)
    truth_edges: int = 20
    m_moves: int = 10
    thresholds: tuple[float, ...] | None = None
    threshold_range: tuple[float, float] = (0.35, 0.65)
    edge_weight: float = 0.4
    seed: int = 0
    keep_vars: int | None = None
    allow_nonchordal: bool = False

    def __post_init__(self):
        if len(self.n_per_cluster) != 2:
            raise ValueError("exactly two clusters are simulated")
        if any(n < 1 for n in self.n_per_cluster):
            raise ValueError("every cluster needs at least one row")
        if self.m_moves < 0:
            raise ValueError("m_moves must be nonnegative")
        if not 0 < self.edge_weight < 1:
            raise ValueError("edge_weight must lie in (0, 1)")
        if self.thresholds is not None:
            if len(self.thresholds) != self.q:
                raise ValueError(f"expected {self.q} thresholds, got {len(self.thresholds)}")
            if not all(0 < t < 1 for t in self.thresholds):
                raise ValueError("thresholds must lie in (0, 1)")
        if self.keep_vars is not None and not 1 <= self.keep_vars <= self.q:
            raise ValueError("keep_vars must lie in [1, q]")


@dataclass
class GroundTruth:
    graphs: list[UndirectedGraph]
    labels: np.ndarray
    thresholds: np.ndarray = field(default_factory=lambda: np.zeros(0))


def precision_from_graph(graph: UndirectedGraph, edge_weight: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-diagonal precision with random-sign entries on the graph's edges.

    The diagonal is raised just enough for the smallest eigenvalue to reach
    the floor; non-edges stay exactly zero.
    """
    omega = np.eye(graph.q)
    for u, v in sorted(graph.edges):
        omega[u, v] = omega[v, u] = edge_weight * (1 if rng.random() < 0.5 else -1)
    lowest = np.linalg.eigvalsh(omega)[0]
    if lowest < EIGEN_FLOOR:
        omega += (EIGEN_FLOOR - lowest) * np.eye(graph.q)
    return omega


def sample_discretized(n: int, precision: np.ndarray, thresholds: Sequence[float],
                       rng: np.random.Generator) -> CategoricalDataset:
    """Gaussian rows with the given precision, standardized, then split at normal quantiles."""
    try:
        chol = linalg.cholesky(precision, lower=True)
    except linalg.LinAlgError as exc:
        raise ValueError("precision matrix is not positive definite") from exc
    q = precision.shape[0]
    z = rng.standard_normal((q, n))
    # precision = L L^T, so y = L^{-T} z has covariance precision^{-1}
    y = linalg.solve_triangular(chol.T, z, lower=False).T
    if n >= 2:
        y = (y - y.mean(0)) / y.std(0, ddof=1)
    cut = norm.ppf(np.asarray(thresholds, dtype=float))
    codes = (y >= cut).astype(np.int64)
    return CategoricalDataset.from_codes(codes, [2] * q)


def scenario_thresholds(spec: ScenarioSpec) -> np.ndarray:
    if spec.thresholds is not None:
        return np.asarray(spec.thresholds, dtype=float)
    stream = np.random.default_rng(np.random.SeedSequence(spec.seed).spawn(3)[0])
    lo, hi = spec.threshold_range
    return stream.uniform(lo, hi, size=spec.q)


def _random_graph(q: int, edges: int, rng) -> UndirectedGraph:
    pairs = [(u, v) for u in range(q) for v in range(u + 1, q)]
    pick = rng.choice(len(pairs), size=edges, replace=False)
    return UndirectedGraph(q, frozenset(pairs[k] for k in pick))


def generate_scenario(spec: ScenarioSpec) -> tuple[CategoricalDataset, GroundTruth]:
    thresholds = scenario_thresholds(spec)
    _, graph_seed, data_seed = np.random.SeedSequence(spec.seed).spawn(3)
    graph_rng = np.random.default_rng(graph_seed)
    data_rng = np.random.default_rng(data_seed)

    if spec.allow_nonchordal:
        first = _random_graph(spec.q, spec.truth_edges, graph_rng)
        second = first
        for _ in range(spec.m_moves):
            u, v = sorted(graph_rng.choice(spec.q, size=2, replace=False).tolist())
            second = second.toggle(u, v)
    else:
        first = random_decomposable_graph(spec.q, spec.truth_edges, graph_rng)
        second = perturb_graph(first, spec.m_moves, graph_rng)
    graphs = [first, second]

    blocks, labels = [], []
    for k, n_k in enumerate(spec.n_per_cluster):
        graph = graphs[k]
        omega = precision_from_graph(graph, spec.edge_weight, data_rng)
        blocks.append(sample_discretized(n_k, omega, thresholds, data_rng).codes)
        labels.extend([k + 1] * n_k)
    codes = np.vstack(blocks)
    dataset = CategoricalDataset.from_codes(codes, [2] * spec.q)
    if spec.keep_vars is not None:
        dataset = dataset.select_columns(range(spec.keep_vars))
    return dataset, GroundTruth(graphs, np.asarray(labels), thresholds)

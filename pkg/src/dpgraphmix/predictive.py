"""Hyper-Dirichlet marginal likelihoods and predictive probabilities.

Every marginal table over a subset S uses the cell parameter a/|X_S|; the
empty subset is a one-cell table with parameter ``a`` whose marginal
likelihood is 1, so disconnected graphs need no special casing.
"""

from __future__ import annotations

from collections import Counter
from functools import lru_cache
from math import lgamma, log
from typing import Iterable, Sequence

from .chordal import UndirectedGraph, clique_decomposition
from .data import CategoricalDataset, MarginalCountTable, marginal_counts
from .errors import StateCorruptionError
from .priors import HyperDirichletSpec, hyperparameter


def _log_marginal_counts(counts: Iterable[int], n: int, a: float, cell: float) -> float:
    total = lgamma(a) - lgamma(a + n)
    lg_cell = lgamma(cell)
    for c in counts:
        total += lgamma(cell + c) - lg_cell
    return total


def log_marginal_subset(table: MarginalCountTable, spec: HyperDirichletSpec,
                        levels: Sequence[int]) -> float:
    """Log Dirichlet-multinomial marginal of one subset's count table."""
    if not table.subset:
        return 0.0
    cell = hyperparameter(spec, levels, table.subset)
    return _log_marginal_counts(table.counts.values(), table.total, spec.a, cell)


def log_marginal_graph(dataset: CategoricalDataset, rows: Iterable[int], graph: UndirectedGraph,
                       spec: HyperDirichletSpec) -> float:
    """Log marginal likelihood of the selected rows under a decomposable graph."""
    rows = list(rows)
    dec = clique_decomposition(graph)
    levels = dataset.levels
    total = 0.0
    for c in dec.cliques:
        total += log_marginal_subset(marginal_counts(dataset, rows, c), spec, levels)
    for s in dec.separators:
        total -= log_marginal_subset(marginal_counts(dataset, rows, s), spec, levels)
    return total


def log_prior_predictive(x: Sequence[int], graph: UndirectedGraph, spec: HyperDirichletSpec,
                         levels: Sequence[int]) -> float:
    """Log probability of a single row under a graph with no data seen."""
    dec = clique_decomposition(graph)
    total = (len(dec.separators) - len(dec.cliques)) * log(spec.a)
    for c in dec.cliques:
        total += log(hyperparameter(spec, levels, c))
    for s in dec.separators:
        total -= log(hyperparameter(spec, levels, s))
    return total


def _config_code(x: Sequence[int], subset: Sequence[int], levels: Sequence[int]) -> int:
    code = 0
    for j in subset:
        code = code * levels[j] + int(x[j])
    return code


@lru_cache(maxsize=1024)
def _scaled_log_table(offset: float, coef: int, length: int) -> tuple[float, ...]:
    """``coef * log(offset + k)`` for k = 0 .. length-1."""
    return tuple(coef * log(offset + k) if offset + k > 0 else float("-inf") for k in range(length))


class ClusterSuffStats:
    """Clique and separator count tables for the rows of one cluster.

    One table is kept per distinct subset together with its signed
    multiplicity in the decomposition (+1 per clique, -1 per separator
    occurrence). Tables are updated in place as rows join and leave.
    """

    def __init__(self, dataset: CategoricalDataset, graph: UndirectedGraph,
                 spec: HyperDirichletSpec, rows: Iterable[int] = ()):
        self.dataset = dataset
        self.spec = spec
        self.members: set[int] = set()
        self.n = 0
        self.graph = graph
        self._build(graph, None)
        for i in rows:
            self.add(i)

    def _build(self, graph: UndirectedGraph, tables: dict | None) -> None:
        dec = clique_decomposition(graph)
        self.graph = graph
        self.decomposition = dec
        self.size_factor = len(dec.separators) - len(dec.cliques)
        ds, a, levels = self.dataset, self.spec.a, self.dataset.levels
        terms = []
        for subset, coef in dec.terms().items():
            if coef == 0:
                continue
            codes = ds.subset_codes(subset)
            if tables is not None and subset in tables:
                counts = tables[subset]
            else:
                counts = Counter(codes[i] for i in self.members)
            cell = hyperparameter(self.spec, levels, subset)
            terms.append((codes, counts, coef, cell, subset))
        self.terms = terms
        # lookup tables replace log calls in the per-row hot path; the empty
        # subset always holds all n rows, so it folds into the size table
        length = ds.n + 2
        self._fast = [(codes, counts, _scaled_log_table(cell, coef, length))
                      for codes, counts, coef, cell, subset in terms if subset]
        size_tab = _scaled_log_table(a, self.size_factor, length)
        for _, _, coef, cell, subset in terms:
            if not subset:
                extra = _scaled_log_table(cell, coef, length)
                size_tab = tuple(x + y for x, y in zip(size_tab, extra))
        self._size_tab = size_tab
        self._weight_tab = (float("-inf"),) + tuple(x + log(k) for k, x in enumerate(size_tab) if k)

    def set_graph(self, graph: UndirectedGraph, tables: dict | None = None) -> None:
        """Switch to a new graph, reusing any precomputed tables by subset."""
        self._build(graph, tables)

    def add(self, i: int) -> None:
        for codes, counts, _, _, _ in self.terms:
            c = codes[i]
            counts[c] = counts.get(c, 0) + 1
        self.members.add(i)
        self.n += 1

    def remove(self, i: int) -> None:
        if i not in self.members:
            raise StateCorruptionError(f"row {i} is not a member of this cluster")
        for codes, counts, _, _, _ in self.terms:
            c = codes[i]
            k = counts[c] - 1
            if k:
                counts[c] = k
            else:
                del counts[c]
        self.members.discard(i)
        self.n -= 1

    def table(self, subset: tuple[int, ...]) -> dict:
        for _, counts, _, _, s in self.terms:
            if s == subset:
                return counts
        raise KeyError(subset)

    def log_predictive_row(self, i: int, includes: bool = False) -> float:
        """Log posterior predictive of dataset row ``i``.

        ``includes`` says whether row ``i`` is currently counted here; its
        contribution is then subtracted from every table.
        """
        if not includes:
            total = self._size_tab[self.n]
            for codes, counts, tab in self._fast:
                total += tab[counts.get(codes[i], 0)]
            return total
        ind = 1
        total = self.size_factor * log(self.spec.a + self.n - ind)
        for codes, counts, coef, cell, _ in self.terms:
            cnt = counts.get(codes[i], 0)
            if ind and not cnt:
                raise StateCorruptionError(f"row {i} is flagged as counted but its cell count is zero")
            total += coef * log(cell + cnt - ind)
        return total

    def log_assignment_weight(self, i: int) -> float:
        """log n_k plus the log predictive of uncounted row ``i``: the Gibbs weight of joining."""
        total = self._weight_tab[self.n]
        for codes, counts, tab in self._fast:
            total += tab[counts.get(codes[i], 0)]
        return total

    def log_predictive_config(self, x: Sequence[int], includes: bool = False) -> float:
        ind = 1 if includes else 0
        levels = self.dataset.levels
        total = self.size_factor * log(self.spec.a + self.n - ind)
        for _, counts, coef, cell, subset in self.terms:
            cnt = counts.get(_config_code(x, subset, levels), 0)
            if ind and not cnt:
                raise StateCorruptionError("x is flagged as counted but its cell count is zero")
            total += coef * log(cell + cnt - ind)
        return total

    def log_marginal(self) -> float:
        a = self.spec.a
        return sum(coef * _log_marginal_counts(counts.values(), self.n, a, cell)
                   for _, counts, coef, cell, subset in self.terms if subset)

    def check_consistency(self) -> None:
        """Recount every table from the member rows and compare."""
        for codes, counts, _, _, subset in self.terms:
            fresh = Counter(codes[i] for i in self.members)
            if fresh != Counter(counts):
                raise StateCorruptionError(f"count table for {subset} disagrees with a recount")
            if sum(counts.values()) != self.n:
                raise StateCorruptionError(f"count table for {subset} does not total n_k={self.n}")
        if len(self.members) != self.n:
            raise StateCorruptionError("member count disagrees with n_k")


def log_posterior_predictive(x: Sequence[int], stats: ClusterSuffStats,
                             spec: HyperDirichletSpec | None = None, includes_x: bool = False) -> float:
    """Log predictive of row ``x`` given the cluster's other rows.

    ``spec`` defaults to the one the statistics were built with.
    """
    if spec is not None and spec != stats.spec:
        raise ValueError("spec differs from the one the cluster statistics use")
    return stats.log_predictive_config(x, includes_x)

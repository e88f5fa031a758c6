"""Baseline-measure factors: Hyper-Dirichlet mass, graph prior, Gamma prior on alpha."""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, log
from typing import Sequence

from .chordal import UndirectedGraph


@dataclass(frozen=True)
class HyperDirichletSpec:
    """Total Dirichlet mass ``a``, spread uniformly over the cells of every
    marginal table; uniform allocation makes the clique priors hyperconsistent."""

    a: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")


@dataclass(frozen=True)
class GraphPriorSpec:
    a_g: float = 1.0
    b_g: float = 1.0

    def __post_init__(self):
        if not (self.a_g > 0 and self.b_g > 0):
            raise ValueError(f"a_g and b_g must be positive, got {self.a_g}, {self.b_g}")


@dataclass(frozen=True)
class ConcentrationPriorSpec:
    """Gamma(shape=c, rate=d) prior on the DP concentration."""

    c: float = 3.0
    d: float = 1.0

    def __post_init__(self):
        if not (self.c > 0 and self.d > 0):
            raise ValueError(f"c and d must be positive, got {self.c}, {self.d}")

    @property
    def mean(self) -> float:
        return self.c / self.d


def hyperparameter(spec: HyperDirichletSpec, levels: Sequence[int], subset: Sequence[int]) -> float:
    """Dirichlet parameter of one cell of the subset's marginal table."""
    cells = 1
    for j in subset:
        cells *= levels[j]
    return spec.a / cells


def log_graph_prior_edges(num_edges: int, q: int, spec: GraphPriorSpec) -> float:
    a_g, b_g = spec.a_g, spec.b_g
    pairs = q * (q - 1) // 2
    return (lgamma(a_g + num_edges) + lgamma(b_g + pairs - num_edges) - lgamma(pairs + a_g + b_g)
            + lgamma(a_g + b_g) - lgamma(a_g) - lgamma(b_g))


def log_graph_prior(graph: UndirectedGraph, spec: GraphPriorSpec) -> float:
    """Beta-Binomial log prior mass of a graph (unnormalised over chordal graphs)."""
    return log_graph_prior_edges(len(graph), graph.q, spec)


def log_gamma_density(x: float, spec: ConcentrationPriorSpec) -> float:
    return spec.c * log(spec.d) - lgamma(spec.c) + (spec.c - 1) * log(x) - spec.d * x

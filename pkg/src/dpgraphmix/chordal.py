"""Decomposable (chordal) undirected graphs.

Vertices are ``0..q-1``. Adjacency is kept as one integer bitmask per
vertex so the local legality checks used by the MCMC moves run in
O(q + |E|) without rebuilding a decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Literal

import numpy as np

from .errors import DomainError


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class UndirectedGraph:
    q: int
    edges: frozenset = frozenset()
    nbrs: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        edges = set()
        nbrs = [0] * self.q
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise DomainError(f"self-loop at vertex {u}")
            if not (0 <= u < self.q and 0 <= v < self.q):
                raise DomainError(f"edge ({u}, {v}) out of range for q={self.q}")
            u, v = min(u, v), max(u, v)
            edges.add((u, v))
            nbrs[u] |= 1 << v
            nbrs[v] |= 1 << u
        object.__setattr__(self, "edges", frozenset(edges))
        object.__setattr__(self, "nbrs", tuple(nbrs))

    @classmethod
    def empty(cls, q: int) -> "UndirectedGraph":
        return cls(q)

    @classmethod
    def complete(cls, q: int) -> "UndirectedGraph":
        return cls(q, frozenset((u, v) for u in range(q) for v in range(u + 1, q)))

    @classmethod
    def from_adjacency(cls, adjacency) -> "UndirectedGraph":
        a = np.asarray(adjacency, dtype=bool)
        if a.shape[0] != a.shape[1] or (a != a.T).any() or a.diagonal().any():
            raise DomainError("adjacency must be square, symmetric, with a false diagonal")
        u, v = np.nonzero(np.triu(a, 1))
        return cls(a.shape[0], frozenset(zip(u.tolist(), v.tolist())))

    def __len__(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.nbrs[u] >> v & 1)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.q, self.q), dtype=bool)
        for u, v in self.edges:
            a[u, v] = a[v, u] = True
        return a

    def edge_list(self) -> list[list[int]]:
        return [list(e) for e in sorted(self.edges)]

    def toggle(self, u: int, v: int) -> "UndirectedGraph":
        e = (min(u, v), max(u, v))
        return UndirectedGraph(self.q, self.edges ^ {e})

    def hamming(self, other: "UndirectedGraph") -> int:
        return len(self.edges ^ other.edges)

    def to_json(self) -> dict:
        return {"q": self.q, "edges": self.edge_list()}

    @classmethod
    def from_json(cls, obj: dict) -> "UndirectedGraph":
        return cls(int(obj["q"]), frozenset(tuple(e) for e in obj["edges"]))


@dataclass(frozen=True)
class CliqueDecomposition:
    """Cliques in running-intersection order and their separators.

    ``separators[k]`` belongs to ``cliques[k + 1]``; repeated and empty
    separators are kept.
    """

    cliques: tuple[tuple[int, ...], ...]
    separators: tuple[tuple[int, ...], ...]

    def terms(self) -> dict[tuple[int, ...], int]:
        """Signed multiplicity of each subset: +1 per clique, -1 per separator."""
        out: dict[tuple[int, ...], int] = {}
        for c in self.cliques:
            out[c] = out.get(c, 0) + 1
        for s in self.separators:
            out[s] = out.get(s, 0) - 1
        return out


@dataclass(frozen=True)
class GraphMove:
    kind: Literal["insertion", "deletion"]
    u: int
    v: int

    def __post_init__(self):
        if self.kind not in ("insertion", "deletion"):
            raise DomainError(f"unknown move kind {self.kind!r}")
        if self.u == self.v:
            raise DomainError("move endpoints must differ")
        if self.u > self.v:
            u, v = self.v, self.u
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "v", v)

    def inverse(self) -> "GraphMove":
        return GraphMove("deletion" if self.kind == "insertion" else "insertion", self.u, self.v)


def mcs_order(graph: UndirectedGraph) -> list[int]:
    """Maximum cardinality search, ties broken by smallest vertex index."""
    q = graph.q
    weight = [0] * q
    unnumbered = set(range(q))
    order = []
    for _ in range(q):
        v = max(unnumbered, key=lambda x: (weight[x], -x))
        order.append(v)
        unnumbered.discard(v)
        for w in _bits(graph.nbrs[v]):
            if w in unnumbered:
                weight[w] += 1
    return order


def is_decomposable(graph: UndirectedGraph) -> bool:
    """True iff every cycle of length >= 4 has a chord.

    Checks that the reverse MCS order is a perfect elimination ordering:
    the earlier-numbered neighbours of each vertex must form a clique.
    """
    order = mcs_order(graph)
    pos = {w: i for i, w in enumerate(order)}
    seen = 0
    for v in order:
        earlier = graph.nbrs[v] & seen
        if earlier:
            # the latest-numbered earlier neighbour must see all the others
            parent = max(_bits(earlier), key=pos.__getitem__)
            rest = earlier & ~(1 << parent)
            if rest & ~graph.nbrs[parent]:
                return False
        seen |= 1 << v
    return True


@lru_cache(maxsize=65536)
def clique_decomposition(graph: UndirectedGraph) -> CliqueDecomposition:
    if not is_decomposable(graph):
        raise DomainError("graph is not decomposable")
    order = mcs_order(graph)
    seen = 0
    candidates = []
    prev_size = -1
    for v in order:
        earlier = graph.nbrs[v] & seen
        size = bin(earlier).count("1")
        if candidates and size > prev_size:
            # cardinality grew: the previous candidate extends into this one
            candidates.pop()
        candidates.append(earlier | 1 << v)
        prev_size = size
        seen |= 1 << v
    cliques = tuple(tuple(_bits(c)) for c in candidates)
    separators = []
    history = 0
    for k, c in enumerate(candidates):
        if k:
            separators.append(tuple(_bits(c & history)))
        history |= c
    return CliqueDecomposition(cliques, tuple(separators))


def deletion_is_valid(graph: UndirectedGraph, u: int, v: int) -> bool:
    """Removing an edge of a chordal graph keeps it chordal iff the edge lies
    in a single maximal clique, i.e. the common neighbourhood is complete."""
    nbrs = graph.nbrs
    common = nbrs[u] & nbrs[v]
    for w in _bits(common):
        if common & ~nbrs[w] & ~(1 << w):
            return False
    return True


def insertion_is_valid(graph: UndirectedGraph, u: int, v: int) -> bool:
    """Adding a non-edge to a chordal graph keeps it chordal iff the common
    neighbourhood separates its endpoints (no chordless path of length >= 3)."""
    nbrs = graph.nbrs
    allowed = ((1 << graph.q) - 1) & ~(nbrs[u] & nbrs[v])
    reach = frontier = 1 << u
    target = 1 << v
    while frontier:
        grow = 0
        rest = frontier
        while rest:
            low = rest & -rest
            grow |= nbrs[low.bit_length() - 1]
            rest ^= low
        frontier = grow & allowed & ~reach
        if frontier & target:
            return False
        reach |= frontier
    return True


def move_is_valid(graph: UndirectedGraph, u: int, v: int) -> bool:
    if graph.has_edge(u, v):
        return deletion_is_valid(graph, u, v)
    return insertion_is_valid(graph, u, v)


def _require_decomposable(graph: UndirectedGraph) -> None:
    if not is_decomposable(graph):
        raise DomainError("graph is not decomposable")


def enumerate_valid_moves(graph: UndirectedGraph, check: bool = True) -> list[GraphMove]:
    """All single-edge toggles whose result is decomposable, ordered by endpoints."""
    if check:
        _require_decomposable(graph)
    moves = []
    nbrs = graph.nbrs
    for u in range(graph.q):
        for v in range(u + 1, graph.q):
            if nbrs[u] >> v & 1:
                if deletion_is_valid(graph, u, v):
                    moves.append(GraphMove("deletion", u, v))
            elif insertion_is_valid(graph, u, v):
                moves.append(GraphMove("insertion", u, v))
    return moves


@lru_cache(maxsize=65536)
def count_valid_moves(graph: UndirectedGraph) -> int:
    return len(enumerate_valid_moves(graph, check=False))


def apply_move(graph: UndirectedGraph, move: GraphMove, check: bool = True) -> UndirectedGraph:
    present = graph.has_edge(move.u, move.v)
    if (move.kind == "insertion") == present:
        raise DomainError(f"{move.kind} of ({move.u}, {move.v}) does not match the current edge set")
    if check:
        _require_decomposable(graph)
        if not move_is_valid(graph, move.u, move.v):
            raise DomainError(f"{move.kind} of ({move.u}, {move.v}) breaks decomposability")
    return graph.toggle(move.u, move.v)


def random_decomposable_graph(q: int, target_edges: int, rng: np.random.Generator) -> UndirectedGraph:
    """Grow a chordal graph from empty by uniformly chosen valid insertions."""
    max_edges = q * (q - 1) // 2
    if not 0 <= target_edges <= max_edges:
        raise ValueError(f"target_edges must lie in [0, {max_edges}]")
    graph = UndirectedGraph.empty(q)
    while len(graph) < target_edges:
        inserts = [m for m in enumerate_valid_moves(graph, check=False) if m.kind == "insertion"]
        # a chordal graph short of complete always admits a chordal insertion
        assert inserts, "no valid insertion below the complete graph"
        graph = graph.toggle(*_pick(inserts, rng))
    return graph


def perturb_graph(graph: UndirectedGraph, m: int, rng: np.random.Generator) -> UndirectedGraph:
    """Apply ``m`` consecutive uniformly chosen valid moves."""
    _require_decomposable(graph)
    for _ in range(m):
        moves = enumerate_valid_moves(graph, check=False)
        if not moves:
            break
        graph = graph.toggle(*_pick(moves, rng))
    return graph


def _pick(moves: list[GraphMove], rng) -> tuple[int, int]:
    m = moves[int(rng.integers(len(moves)))]
    return m.u, m.v


def all_graphs(q: int) -> Iterable[UndirectedGraph]:
    """Every labelled graph on ``q`` vertices (2 ** (q(q-1)/2) of them)."""
    pairs = [(u, v) for u in range(q) for v in range(u + 1, q)]
    for mask in range(1 << len(pairs)):
        yield UndirectedGraph(q, frozenset(p for k, p in enumerate(pairs) if mask >> k & 1))

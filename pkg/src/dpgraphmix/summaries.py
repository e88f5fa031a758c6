"""Posterior summaries of a sampler trace."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .chordal import UndirectedGraph
from .sampler import Trace


def canonical_labels(labels: Sequence) -> np.ndarray:
    """Relabel to 1..K in order of first occurrence."""
    seen: dict = {}
    return np.array([seen.setdefault(lab, len(seen) + 1) for lab in labels], dtype=np.int64)


def similarity_matrix(trace: Trace) -> np.ndarray:
    """Posterior co-clustering frequencies, one row and column per subject."""
    if not trace.draws:
        raise ValueError("trace has no draws")
    z = trace.assignment_matrix()
    sim = np.zeros((trace.n, trace.n))
    for labels in z:
        onehot = np.zeros((trace.n, labels.max()))
        onehot[np.arange(trace.n), labels - 1] = 1.0
        sim += onehot @ onehot.T
    return sim / len(z)


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def vi_distance(c1: Sequence, c2: Sequence) -> float:
    """Variation of information between two partitions, natural log."""
    if len(c1) != len(c2):
        raise ValueError(f"partitions differ in length: {len(c1)} vs {len(c2)}")
    a = canonical_labels(c1) - 1
    b = canonical_labels(c2) - 1
    n = len(a)
    joint = np.zeros((a.max() + 1, b.max() + 1))
    np.add.at(joint, (a, b), 1)
    h_a = _entropy(joint.sum(1), n)
    h_b = _entropy(joint.sum(0), n)
    h_ab = _entropy(joint.ravel(), n)
    return max(0.0, 2 * h_ab - h_a - h_b)


def vi_lower_bound(partition: Sequence, sim: np.ndarray) -> float:
    """Jensen lower bound of the posterior expected VI of ``partition``."""
    labels = canonical_labels(partition) - 1
    n = len(labels)
    onehot = np.zeros((n, labels.max() + 1))
    onehot[np.arange(n), labels] = 1.0
    sizes = onehot.sum(0)[labels]
    shared = (sim @ onehot)[np.arange(n), labels]
    return float(np.mean(np.log(sizes) + np.log(sim.sum(1)) - 2 * np.log(shared)))


def minvi_point_estimate(trace: Trace, sim: np.ndarray | None = None) -> np.ndarray:
    """Sampled partition with the smallest VI lower bound.

    Ties go to fewer clusters, then to the earliest draw.
    """
    if not trace.draws:
        raise ValueError("trace has no draws")
    if sim is None:
        sim = similarity_matrix(trace)
    best, best_key = None, None
    seen = set()
    for labels in trace.assignment_matrix():
        key = labels.tobytes()
        if key in seen:
            continue
        seen.add(key)
        score = (round(vi_lower_bound(labels, sim), 12), int(labels.max()))
        if best_key is None or score < best_key:
            best, best_key = labels, score
    return canonical_labels(best)


def ppi(trace: Trace, subject: int) -> np.ndarray:
    """Per-subject posterior edge-inclusion frequencies."""
    if not 0 <= subject < trace.n:
        raise IndexError(f"subject {subject} out of range for n={trace.n}")
    if not trace.draws:
        raise ValueError("trace has no draws")
    out = np.zeros((trace.q, trace.q))
    for d in trace.draws:
        for u, v in d.graphs[d.assignments[subject] - 1]:
            out[u, v] += 1
            out[v, u] += 1
    return out / len(trace.draws)


def threshold_graph(ppi_matrix: np.ndarray, z: float = 0.5) -> UndirectedGraph:
    """Edges whose inclusion frequency strictly exceeds ``z``."""
    if not 0 < z < 1:
        raise ValueError(f"z must lie in (0, 1), got {z}")
    a = np.asarray(ppi_matrix) > z
    np.fill_diagonal(a, False)
    return UndirectedGraph.from_adjacency(a | a.T)


def heatmap_order(partition: Sequence[int]) -> np.ndarray:
    """Subjects grouped by cluster, larger clusters first, members by index."""
    labels = np.asarray(partition)
    uniq, sizes = np.unique(labels, return_counts=True)
    rank = {lab: r for r, lab in enumerate(uniq[np.lexsort((uniq, -sizes))])}
    return np.array(sorted(range(len(labels)), key=lambda i: (rank[labels[i]], i)))


def write_pgm(sim: np.ndarray, path, order: Sequence[int] | None = None) -> None:
    """Binary graymap of the similarity matrix; dark means frequently co-clustered."""
    if order is not None:
        sim = sim[np.ix_(order, order)]
    pixels = np.round(255 * (1.0 - np.clip(sim, 0, 1))).astype(np.uint8)
    h, w = pixels.shape
    with Path(path).open("wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())

import itertools

import numpy as np
import pytest

from dpgraphmix.chordal import UndirectedGraph

FIGURE1_EDGES = [(1, 2), (2, 3), (2, 4), (4, 5), (3, 5), (2, 5), (5, 6)]


def graph_1based(q, edges):
    return UndirectedGraph(q, frozenset((u - 1, v - 1) for u, v in edges))


@pytest.fixture
def figure1():
    return graph_1based(6, FIGURE1_EDGES)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def has_chordless_cycle(graph):
    """Brute force: look for an induced cycle on four or more vertices."""
    q = graph.q
    for size in range(4, q + 1):
        for verts in itertools.combinations(range(q), size):
            first, rest = verts[0], verts[1:]
            for perm in itertools.permutations(rest):
                cycle = (first,) + perm
                if cycle[1] > cycle[-1]:
                    continue
                ok = all(graph.has_edge(cycle[k], cycle[(k + 1) % size]) for k in range(size))
                if not ok:
                    continue
                chord = any(graph.has_edge(cycle[a], cycle[b])
                            for a in range(size) for b in range(a + 2, size)
                            if not (a == 0 and b == size - 1))
                if not chord:
                    return True
    return False


def all_configs(levels):
    return itertools.product(*[range(l) for l in levels])


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one pass/fail line for the end-of-session acceptance summary."""
    def _record(number, passed, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)

from math import exp, log

import numpy as np
import pytest
from scipy import integrate, special, stats

from conftest import all_configs, graph_1based
from dpgraphmix.chordal import UndirectedGraph, clique_decomposition, random_decomposable_graph
from dpgraphmix.data import CategoricalDataset, marginal_counts
from dpgraphmix.errors import StateCorruptionError
from dpgraphmix.predictive import (ClusterSuffStats, log_marginal_graph, log_marginal_subset,
                                   log_posterior_predictive, log_prior_predictive)
from dpgraphmix.priors import HyperDirichletSpec

A1 = HyperDirichletSpec(1.0)


def beta_oracle(n1, n0, a=0.5, b=0.5):
    """Probability of one ordered binary sequence under a Beta(a, b) mixture, by quadrature."""
    f = lambda p: p ** n1 * (1 - p) ** n0 * stats.beta.pdf(p, a, b)
    return integrate.quad(f, 0, 1, points=[0.5])[0]


def dm_oracle(codes, cells, a):
    """Independent Dirichlet-multinomial marginal of a vector of cell codes."""
    counts = np.bincount(codes, minlength=cells)
    alpha = np.full(cells, a / cells)
    return float(special.gammaln(alpha.sum()) - special.gammaln(alpha.sum() + len(codes))
                 + np.sum(special.gammaln(alpha + counts) - special.gammaln(alpha)))


def termwise_oracle(codes, levels, graph, a):
    dec = clique_decomposition(graph)
    def part(subset):
        if not subset:
            return 0.0
        flat = np.ravel_multi_index(codes[:, list(subset)].T, [levels[j] for j in subset])
        return dm_oracle(flat, int(np.prod([levels[j] for j in subset])), a)
    return sum(part(c) for c in dec.cliques) - sum(part(s) for s in dec.separators)


def binary(rows):
    rows = np.asarray(rows)
    return CategoricalDataset.from_codes(rows, [2] * rows.shape[1])


def random_instance(rng, max_q=4):
    q = int(rng.integers(1, max_q + 1))
    levels = [int(rng.integers(2, 4)) for _ in range(q)]
    n = int(rng.integers(1, 9))
    codes = np.column_stack([rng.integers(0, l, size=n) for l in levels])
    graph = random_decomposable_graph(q, int(rng.integers(0, q * (q - 1) // 2 + 1)), rng)
    return CategoricalDataset.from_codes(codes, levels), graph, HyperDirichletSpec(float(rng.uniform(0.3, 3)))


def test_subset_marginal_examples():
    ds = binary([[0], [1], [0]])
    mixed = marginal_counts(ds, [0, 1], [0])
    same = marginal_counts(ds, [0, 2], [0])
    assert exp(log_marginal_subset(mixed, A1, ds.levels)) == pytest.approx(0.125, abs=1e-12)
    assert exp(log_marginal_subset(same, A1, ds.levels)) == pytest.approx(0.375, abs=1e-12)
    assert exp(log_marginal_subset(mixed, A1, ds.levels)) == pytest.approx(beta_oracle(1, 1), abs=1e-9)
    assert exp(log_marginal_subset(same, A1, ds.levels)) == pytest.approx(beta_oracle(0, 2), abs=1e-9)
    assert log_marginal_subset(marginal_counts(ds, [0, 1, 2], []), A1, ds.levels) == 0.0


def test_complete_graph_is_single_table(rng):
    codes = rng.integers(0, 2, size=(7, 3))
    ds = binary(codes)
    flat = np.ravel_multi_index(codes.T, [2, 2, 2])
    assert log_marginal_graph(ds, range(7), UndirectedGraph.complete(3), A1) == pytest.approx(
        dm_oracle(flat, 8, 1.0), abs=1e-12)


def test_empty_graph_product_of_marginals():
    ds = binary([[0, 0], [1, 1]])
    assert log_marginal_graph(ds, [0, 1], UndirectedGraph.empty(2), A1) == pytest.approx(
        2 * log(0.125), abs=1e-12)


def test_figure1_against_termwise_oracle(figure1, rng):
    codes = rng.integers(0, 2, size=(5, 6))
    ds = binary(codes)
    for a in (0.5, 1.0, 4.0):
        got = log_marginal_graph(ds, range(5), figure1, HyperDirichletSpec(a))
        assert got == pytest.approx(termwise_oracle(codes, ds.levels, figure1, a), abs=1e-10)


def test_prior_predictive_examples():
    assert exp(log_prior_predictive([1], UndirectedGraph.empty(1), A1, [2])) == pytest.approx(0.5)
    for x in all_configs([2, 2]):
        assert exp(log_prior_predictive(x, UndirectedGraph.complete(2), A1, [2, 2])) == pytest.approx(0.25)
        assert exp(log_prior_predictive(x, UndirectedGraph.empty(2), A1, [2, 2])) == pytest.approx(0.25)


def test_posterior_predictive_beta_binomial():
    ds = binary([[0], [0], [0]])
    st = ClusterSuffStats(ds, UndirectedGraph.empty(1), A1, range(3))
    assert exp(log_posterior_predictive([0], st)) == pytest.approx(0.875, abs=1e-12)
    assert exp(log_posterior_predictive([0], st)) == pytest.approx(beta_oracle(4, 0) / beta_oracle(3, 0), abs=1e-8)


def test_posterior_predictive_chain():
    ds = binary([[0, 0, 0]])
    chain = graph_1based(3, [(1, 2), (2, 3)])
    st = ClusterSuffStats(ds, chain, A1, [0])
    expected = 2.0 ** (1 - 2) * 1.25 * 1.25 / 1.5
    assert exp(log_posterior_predictive([0, 0, 0], st)) == pytest.approx(expected, abs=1e-12)
    ds2 = binary([[0, 0, 0], [0, 0, 0]])
    ratio = log_marginal_graph(ds2, [0, 1], chain, A1) - log_marginal_graph(ds2, [0], chain, A1)
    assert log(expected) == pytest.approx(ratio, abs=1e-12)


def test_includes_only_row_gives_prior_predictive(figure1, rng):
    row = rng.integers(0, 2, size=6)
    ds = binary([row])
    st = ClusterSuffStats(ds, figure1, A1, [0])
    assert log_posterior_predictive(row, st, includes_x=True) == pytest.approx(
        log_prior_predictive(row, figure1, A1, ds.levels), abs=1e-12)
    assert st.log_predictive_row(0, includes=True) == pytest.approx(
        log_prior_predictive(row, figure1, A1, ds.levels), abs=1e-12)


def test_includes_flag_with_absent_row_is_corruption():
    ds = binary([[0, 0]])
    st = ClusterSuffStats(ds, UndirectedGraph.complete(2), A1, [0])
    with pytest.raises(StateCorruptionError):
        log_posterior_predictive([1, 1], st, includes_x=True)


def test_spec_mismatch_rejected():
    ds = binary([[0]])
    st = ClusterSuffStats(ds, UndirectedGraph.empty(1), A1, [0])
    with pytest.raises(ValueError):
        log_posterior_predictive([0], st, HyperDirichletSpec(2.0))


def test_row_and_config_paths_agree(rng):
    for _ in range(30):
        ds, graph, spec = random_instance(rng)
        st = ClusterSuffStats(ds, graph, spec, range(ds.n))
        for i in range(ds.n):
            for inc in (False, True):
                assert st.log_predictive_row(i, inc) == pytest.approx(
                    st.log_predictive_config(ds.codes[i], inc), abs=1e-12)
            assert st.log_assignment_weight(i) == pytest.approx(
                log(ds.n) + st.log_predictive_config(ds.codes[i]), abs=1e-12)


def test_prior_predictive_normalizes(rng):
    for _ in range(50):
        ds, graph, spec = random_instance(rng)
        total = sum(exp(log_prior_predictive(x, graph, spec, ds.levels)) for x in all_configs(ds.levels))
        assert abs(total - 1) < 1e-10


def test_posterior_predictive_normalizes(rng):
    for _ in range(50):
        ds, graph, spec = random_instance(rng)
        st = ClusterSuffStats(ds, graph, spec, range(ds.n))
        total = sum(exp(log_posterior_predictive(x, st)) for x in all_configs(ds.levels))
        assert abs(total - 1) < 1e-10
        # with the indicator: remove the contribution of a counted row of identical pattern
        row = ds.codes[0]
        st_wo = ClusterSuffStats(ds, graph, spec, range(1, ds.n))
        assert log_posterior_predictive(row, st, includes_x=True) == pytest.approx(
            log_posterior_predictive(row, st_wo), abs=1e-12)


def test_ratio_of_marginals(rng):
    for _ in range(200):
        ds, graph, spec = random_instance(rng)
        rows = list(range(ds.n - 1))
        st = ClusterSuffStats(ds, graph, spec, rows)
        x = ds.codes[-1]
        ratio = log_marginal_graph(ds, rows + [ds.n - 1], graph, spec) - (
            log_marginal_graph(ds, rows, graph, spec) if rows else 0.0)
        assert log_posterior_predictive(x, st) == pytest.approx(ratio, abs=1e-9)


def test_sequential_coherence(rng):
    for _ in range(30):
        ds, graph, spec = random_instance(rng)
        st = ClusterSuffStats(ds, graph, spec)
        total = 0.0
        for i in range(ds.n):
            total += st.log_predictive_row(i)
            st.add(i)
        assert total == pytest.approx(log_marginal_graph(ds, range(ds.n), graph, spec), abs=1e-9)
        assert st.log_marginal() == pytest.approx(total, abs=1e-9)


def test_add_remove_consistency(rng):
    ds, graph, spec = random_instance(rng)
    st = ClusterSuffStats(ds, graph, spec, range(ds.n))
    for i in range(ds.n):
        st.remove(i)
        st.check_consistency()
    assert st.n == 0 and all(not t[1] for t in st.terms)
    with pytest.raises(StateCorruptionError):
        st.remove(0)

import itertools
from math import exp, log

import pytest

from conftest import all_configs
from dpgraphmix.chordal import UndirectedGraph, all_graphs
from dpgraphmix.priors import (ConcentrationPriorSpec, GraphPriorSpec, HyperDirichletSpec,
                               hyperparameter, log_gamma_density, log_graph_prior,
                               log_graph_prior_edges)


def test_hyperparameter_examples():
    spec = HyperDirichletSpec(1.0)
    assert hyperparameter(spec, [2, 2], [0]) == 0.5
    assert hyperparameter(spec, [2, 2], [0, 1]) == 0.25
    assert hyperparameter(spec, [2, 2], []) == 1.0
    assert hyperparameter(HyperDirichletSpec(3.0), [2, 3], [1]) == 1.0


def test_specs_reject_nonpositive():
    with pytest.raises(ValueError):
        HyperDirichletSpec(0)
    with pytest.raises(ValueError):
        GraphPriorSpec(1, -1)
    with pytest.raises(ValueError):
        ConcentrationPriorSpec(0, 1)


def test_graph_prior_q2_is_half():
    spec = GraphPriorSpec(1, 1)
    for g in all_graphs(2):
        assert log_graph_prior(g, spec) == pytest.approx(log(0.5), abs=1e-14)


def test_graph_prior_normalizes_over_q3():
    total = sum(exp(log_graph_prior(g, GraphPriorSpec(1, 1))) for g in all_graphs(3))
    assert abs(total - 1.0) < 1e-12


def test_graph_prior_ratio_sparse_setting():
    spec = GraphPriorSpec(1, 3)
    ratio = exp(log_graph_prior(UndirectedGraph.empty(3), spec)
                - log_graph_prior(UndirectedGraph.complete(3), spec))
    assert ratio == pytest.approx(10.0, rel=1e-12)


def test_graph_prior_depends_on_edge_count_only():
    spec = GraphPriorSpec(2, 5)
    by_size = {}
    for g in all_graphs(4):
        by_size.setdefault(len(g), set()).add(round(log_graph_prior(g, spec), 12))
    assert all(len(v) == 1 for v in by_size.values())


def test_graph_prior_favours_sparsity():
    spec = GraphPriorSpec(1, 3)
    # the step e -> e+1 multiplies the mass by (a_g + e) / (b_g + 45 - e - 1)
    for e in range(45):
        step = log_graph_prior_edges(e + 1, 10, spec) - log_graph_prior_edges(e, 10, spec)
        assert step == pytest.approx(log((1 + e) / (3 + 45 - e - 1)), abs=1e-10)
        if 1 + e < 3 + 45 - e - 1:
            assert step < 0
    # past the midpoint the per-graph mass rises again (fewer graphs share it)
    assert log_graph_prior_edges(45, 10, spec) > log_graph_prior_edges(30, 10, spec)


def test_gamma_density_integrates():
    from scipy import integrate
    spec = ConcentrationPriorSpec(3, 1)
    total, _ = integrate.quad(lambda x: exp(log_gamma_density(x, spec)), 0, 200)
    assert total == pytest.approx(1.0, abs=1e-8)
    assert spec.mean == 3.0


def _extension_mass(spec, levels, clique, fixed_vars, fixed_vals):
    other = [j for j in clique if j not in fixed_vars]
    cell = hyperparameter(spec, levels, clique)
    return cell * len(list(all_configs([levels[j] for j in other])))


def test_hyperconsistency_on_overlapping_subsets():
    spec = HyperDirichletSpec(1.7)
    levels = [2, 3, 2, 3, 2]
    subsets = [s for r in range(1, 5) for s in itertools.combinations(range(5), r)]
    for c1, c2 in itertools.combinations(subsets, 2):
        shared = sorted(set(c1) & set(c2))
        for vals in all_configs([levels[j] for j in shared]):
            assert _extension_mass(spec, levels, c1, shared, vals) == pytest.approx(
                _extension_mass(spec, levels, c2, shared, vals), rel=1e-14)

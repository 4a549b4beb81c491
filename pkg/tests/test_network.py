import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import covariance_corr, mst_weight_bruteforce
from ricci_market.exceptions import ValidationError
from ricci_market.network import (
    Origin,
    ThresholdNetwork,
    ThresholdNetworkBuilder,
    distance_matrix,
    mst_prim,
    pearson_matrix,
    threshold_network,
)


def test_perfect_correlation_and_anticorrelation(rng):
    x = rng.standard_normal(10)
    block = np.column_stack([x, x, -x, rng.standard_normal(10)])
    c = pearson_matrix(block)
    assert c[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert c[0, 2] == pytest.approx(-1.0, abs=1e-12)
    np.testing.assert_array_equal(np.diag(c), 1.0)


def test_pearson_matches_covariance_oracle(rng):
    block = rng.standard_normal((5, 3))
    np.testing.assert_allclose(pearson_matrix(block), covariance_corr(block), atol=1e-12)


def test_zero_variance_names_ticker():
    block = np.column_stack([np.arange(5.0), np.ones(5), np.arange(5.0) ** 2])
    with pytest.raises(ValidationError, match="BBB"):
        pearson_matrix(block, tickers=["AAA", "BBB", "CCC"])


def test_window_too_short():
    with pytest.raises(ValueError):
        pearson_matrix(np.ones((2, 3)))


@pytest.mark.parametrize("c, d", [(1.0, 0.0), (-1.0, 2.0), (0.0, np.sqrt(2.0))])
def test_distance_formula(c, d):
    corr = np.array([[1.0, c], [c, 1.0]])
    assert distance_matrix(corr)[0, 1] == pytest.approx(d, abs=1e-15)


def test_distance_is_decreasing_in_correlation(rng):
    c = pearson_matrix(rng.standard_normal((30, 8)))
    d = distance_matrix(c)
    iu = np.triu_indices(8, 1)
    assert list(np.argsort(-c[iu], kind="stable")) == list(np.argsort(d[iu], kind="stable"))
    np.testing.assert_array_equal(d, d.T)


def test_mst_two_nodes():
    assert mst_prim([[0, 1.5], [1.5, 0]]) == [(0, 1)]


def test_mst_three_nodes():
    d = np.array([[0, 1.0, 2.0], [1.0, 0, 3.0], [2.0, 3.0, 0]])
    edges = mst_prim(d)
    assert edges == [(0, 1), (0, 2)]
    assert sum(d[e] for e in edges) == 3.0


def test_mst_six_nodes_against_cayley_enumeration(rng):
    a = rng.uniform(0.1, 2, (6, 6))
    d = np.triu(a, 1) + np.triu(a, 1).T
    edges = mst_prim(d)
    assert len(edges) == 5
    assert sum(d[e] for e in edges) == pytest.approx(mst_weight_bruteforce(d), abs=1e-12)


def test_mst_tie_break_prefers_smallest_pair():
    # All distances equal: Prim from 0 must take (0,1), (0,2), (0,3).
    d = np.ones((4, 4)) - np.eye(4)
    assert mst_prim(d) == [(0, 1), (0, 2), (0, 3)]
    # Ties across different tree nodes: after (0,1), edges (0,2) and (1,2)
    # both weigh 1; (0,2) has the smaller pair.
    d = np.array([[0, 0.5, 1, 9], [0.5, 0, 1, 1], [1, 1, 0, 9], [9, 1, 9, 0]])
    assert mst_prim(d) == [(0, 1), (0, 2), (1, 3)]


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 7).flatmap(
    lambda n: arrays(float, (n, n), elements=st.floats(0.0, 2.0))))
def test_mst_weight_is_minimal(a):
    d = np.triu(a, 1) + np.triu(a, 1).T
    edges = mst_prim(d)
    g = nx.Graph(edges)
    assert len(edges) == d.shape[0] - 1 and nx.is_tree(g) and g.number_of_nodes() == d.shape[0]
    assert sum(d[e] for e in edges) == pytest.approx(mst_weight_bruteforce(d), abs=1e-12)


def _corr_4():
    c = np.array([
        [1.0, 0.9, 0.2, 0.1],
        [0.9, 1.0, 0.3, 0.0],
        [0.2, 0.3, 1.0, 0.5],
        [0.1, 0.0, 0.5, 1.0],
    ])
    return c, distance_matrix(c)


def test_threshold_network_four_nodes():
    c, d = _corr_4()
    net = threshold_network(c, d, 0.75)
    # MST by distance: (0,1) d=.447, (2,3) d=1.0, (1,2) d=1.183.
    assert net.edges == [(0, 1), (1, 2), (2, 3)]
    assert net.origin[(0, 1)] is Origin.BOTH
    assert net.origin[(1, 2)] is Origin.MST


def test_threshold_adds_non_tree_edge():
    c = np.array([
        [1.0, 0.95, 0.9, 0.1],
        [0.95, 1.0, 0.85, 0.2],
        [0.9, 0.85, 1.0, 0.3],
        [0.1, 0.2, 0.3, 1.0],
    ])
    net = threshold_network(c, distance_matrix(c), 0.75)
    # MST: (0,1), (0,2), (2,3); (1,2) at 0.85 > 0.75 joins as threshold-only.
    assert net.edges == [(0, 1), (0, 2), (1, 2), (2, 3)]
    assert net.origin[(1, 2)] is Origin.THRESHOLD
    assert net.origin[(2, 3)] is Origin.MST
    assert net.origin[(0, 2)] is Origin.BOTH


def test_theta_extremes(rng):
    c = pearson_matrix(rng.standard_normal((40, 6)))
    d = distance_matrix(c)
    assert threshold_network(c, d, 1.0).edges == mst_prim(d)
    assert threshold_network(c, d, -1.0).n_edges == 15


def test_threshold_is_strict():
    c = np.array([[1.0, 0.75, 0.0], [0.75, 1.0, 0.0], [0.0, 0.0, 1.0]])
    net = threshold_network(c, distance_matrix(c), 0.75)
    assert all(tag is not Origin.THRESHOLD for tag in net.origin.values())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.floats(-1, 1), st.floats(-1, 1))
def test_monotone_and_contains_mst(seed, t1, t2):
    rng = np.random.default_rng(seed)
    c = pearson_matrix(rng.standard_normal((22, 7)) + rng.standard_normal((22, 1)))
    d = distance_matrix(c)
    hi, lo = max(t1, t2), min(t1, t2)
    e_hi = set(threshold_network(c, d, hi).edges)
    e_lo = set(threshold_network(c, d, lo).edges)
    assert e_hi <= e_lo
    net = threshold_network(c, d, lo)
    mst_only = [e for e, tag in net.origin.items() if tag is not Origin.THRESHOLD]
    assert nx.is_connected(nx.Graph(mst_only)) and len(mst_only) == 6
    for (i, j), tag in net.origin.items():
        assert i < j
        if tag is Origin.THRESHOLD:
            assert c[i, j] > lo


def test_dump_round_trip(rng):
    c = pearson_matrix(rng.standard_normal((22, 5)))
    net = threshold_network(c, distance_matrix(c), 0.3, tickers=list("ABCDE"))
    text = net.dumps()
    head, first = text.splitlines()[:2]
    assert '"theta": 0.3' in head and '"tickers": ["A"' in head
    assert len(first.split()) == 5
    back = ThresholdNetwork.loads(text)
    assert back.origin == net.origin and back.tickers == net.tickers
    for i, j in net.edges:
        assert back.corr[i, j] == pytest.approx(c[i, j], rel=1e-9)


def test_builder_estimator(rng):
    x = rng.standard_normal((22, 5))
    b = ThresholdNetworkBuilder(theta=0.5).fit(x)
    assert b.get_params() == {"theta": 0.5}
    np.testing.assert_allclose(b.corr_, pearson_matrix(x))
    adj = b.transform(x)
    assert adj.shape == (5, 5) and adj.sum() == 2 * b.network_.n_edges

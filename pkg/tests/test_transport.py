import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_connected_graph
from oracles import lipschitz_vertices, w1_dual, w1_primal_vertices
from ricci_market.curvature import all_hop_distances, as_graph
from ricci_market.exceptions import ValidationError
from ricci_market.transport import NodeMeasure, neighbor_measure, wasserstein_w1


def _hops(g):
    return all_hop_distances(as_graph(g))


def test_identical_measures_cost_nothing():
    g = nx.cycle_graph(5)
    m = NodeMeasure.uniform([0, 2, 3])
    assert wasserstein_w1(m, m, _hops(g)) == pytest.approx(0.0, abs=1e-12)


def test_point_masses():
    g = nx.path_graph(4)
    assert wasserstein_w1(NodeMeasure.uniform([0]), NodeMeasure.uniform([3]), _hops(g)) == 3.0


def test_triangle_example():
    g = nx.complete_graph(3)
    hops = _hops(g)
    mu = neighbor_measure(as_graph(g), 0)   # uniform on {1, 2}
    mv = neighbor_measure(as_graph(g), 1)   # uniform on {0, 2}
    expected = w1_primal_vertices([0.5, 0.5], [0.5, 0.5], hops[np.ix_([1, 2], [0, 2])])
    assert expected == pytest.approx(0.5)
    assert wasserstein_w1(mu, mv, hops) == pytest.approx(expected, abs=1e-12)


def test_measure_validation():
    with pytest.raises(ValidationError):
        NodeMeasure((0, 1), (0.5, 0.6))
    with pytest.raises(ValidationError):
        NodeMeasure((), ())
    m = NodeMeasure.uniform(range(7))
    assert sum(m.mass) == pytest.approx(1.0, abs=1e-12) and m.is_uniform


def test_neighbor_measure_excludes_node():
    g = as_graph(nx.star_graph(3))
    m = neighbor_measure(g, 0)
    assert m.support == (1, 2, 3) and 0 not in m.support


def test_lp_and_assignment_paths_agree(rng):
    # Degrees 11 and 13 force the LP branch; compare with the dual oracle on a small metric.
    g = nx.gnp_random_graph(8, 0.6, seed=3)
    hops = _hops(g)
    verts = lipschitz_vertices(nx.to_numpy_array(g) > 0)
    for _ in range(20):
        a = rng.dirichlet(np.ones(4))
        b = rng.dirichlet(np.ones(5))
        su = rng.choice(8, 4, replace=False)
        sv = rng.choice(8, 5, replace=False)
        mu = NodeMeasure(tuple(su.tolist()), tuple((a / a.sum()).tolist()))
        mv = NodeMeasure(tuple(sv.tolist()), tuple((b / b.sum()).tolist()))
        got = wasserstein_w1(mu, mv, hops)
        want = w1_dual(nx.to_numpy_array(g) > 0, dict(zip(mu.support, mu.mass)),
                       dict(zip(mv.support, mv.mass)), verts)
        assert got == pytest.approx(want, abs=1e-9)


def test_large_uniform_supports_use_lp():
    hops = np.abs(np.subtract.outer(np.arange(40), np.arange(40))).astype(float)
    mu = NodeMeasure.uniform(range(0, 19))
    mv = NodeMeasure.uniform(range(10, 30))
    # 1-D: W1 equals the area between the CDFs.
    grid = np.arange(40)
    cdf_u = np.clip((grid + 1) / 19, 0, 1)
    cdf_v = np.clip((grid - 9) / 20, 0, 1)
    assert wasserstein_w1(mu, mv, hops) == pytest.approx(np.abs(cdf_u - cdf_v).sum(), abs=1e-9)


def _random_measure(rng, n):
    k = int(rng.integers(1, n + 1))
    support = rng.choice(n, k, replace=False)
    w = rng.dirichlet(np.ones(k))
    w[-1] = 1.0 - w[:-1].sum()
    w = np.clip(w, 0, None)
    return NodeMeasure(tuple(support.tolist()), tuple((w / w.sum()).tolist()))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_metric_axioms(seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, 2, 8)
    hops = _hops(g)
    n = g.number_of_nodes()
    a, b, c = (_random_measure(rng, n) for _ in range(3))
    ab = wasserstein_w1(a, b, hops)
    assert ab == pytest.approx(wasserstein_w1(b, a, hops), abs=1e-9)
    assert ab <= wasserstein_w1(a, c, hops) + wasserstein_w1(c, b, hops) + 1e-9
    assert ab >= -1e-12

"""Exact Wasserstein-1 distance between small discrete measures."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog
from scipy.sparse import coo_matrix

from .exceptions import NumericError, ValidationError

# Uniform measures whose common refinement has at most this many atoms are
# solved as an assignment problem; larger ones go to the LP solver.
_ASSIGNMENT_MAX_ATOMS = 96


@dataclass(frozen=True)
class NodeMeasure:
    support: tuple
    mass: tuple

    def __post_init__(self):
        if len(self.support) != len(self.mass) or not self.support:
            raise ValidationError("measure needs a nonempty support with one mass per node")
        if any(m < 0 for m in self.mass) or abs(math.fsum(self.mass) - 1.0) > 1e-12:
            raise ValidationError("masses must be non-negative and sum to 1")

    @classmethod
    def uniform(cls, nodes) -> "NodeMeasure":
        nodes = tuple(int(n) for n in nodes)
        return cls(nodes, (1.0 / len(nodes),) * len(nodes))

    @property
    def is_uniform(self) -> bool:
        return len(set(self.mass)) == 1


def neighbor_measure(graph, node: int) -> NodeMeasure:
    """Uniform measure on the neighbours of ``node``, the node itself excluded."""
    return NodeMeasure.uniform(graph.neighbors[node])


def _transport_lp(a, b, cost) -> float:
    m, n = cost.shape
    rows = np.concatenate([np.repeat(np.arange(m), n), m + np.tile(np.arange(n), m)])
    cols = np.concatenate([np.arange(m * n), np.arange(m * n)])
    a_eq = coo_matrix((np.ones(2 * m * n), (rows, cols)), shape=(m + n, m * n)).tocsr()
    b_eq = np.concatenate([a, b])
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise NumericError(f"transport LP failed: {res.message}")
    return float(res.fun)


def _transport_assignment(m: int, n: int, cost) -> float:
    # Uniform marginals: split both sides into lcm(m, n) equal atoms; the
    # transport polytope's vertices are then permutation matrices.
    atoms = math.lcm(m, n)
    blown = np.repeat(np.repeat(cost, atoms // m, axis=0), atoms // n, axis=1)
    r, c = linear_sum_assignment(blown)
    return float(blown[r, c].sum() / atoms)


def wasserstein_w1(mu: NodeMeasure, mv: NodeMeasure, dist) -> float:
    """Optimal transport cost between ``mu`` and ``mv`` under ground metric ``dist``.

    ``dist`` is indexed by node id, e.g. an all-pairs hop-count matrix.
    """
    d = np.asarray(dist, dtype=float)
    cost = d[np.ix_(mu.support, mv.support)]
    a = np.asarray(mu.mass)
    b = np.asarray(mv.mass)
    m, n = cost.shape
    if m == 1:
        return float(cost[0] @ b)
    if n == 1:
        return float(a @ cost[:, 0])
    if mu.is_uniform and mv.is_uniform and math.lcm(m, n) <= _ASSIGNMENT_MAX_ATOMS:
        return _transport_assignment(m, n, cost)
    return _transport_lp(a, b, cost)

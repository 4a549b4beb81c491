"""Correlation, distance, minimum spanning tree and threshold networks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array

from .exceptions import ValidationError
from .market_data import MIN_WINDOW


class Origin(str, Enum):
    MST = "MST"
    THRESHOLD = "Threshold"
    BOTH = "Both"


def pearson_matrix(window, tickers: Optional[Sequence[str]] = None) -> np.ndarray:
    """Sample Pearson correlation of the columns of a ``tau x N`` return block."""
    x = check_array(window, dtype=float, ensure_min_samples=MIN_WINDOW,
                    ensure_min_features=2)
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    var = np.diag(cov).copy()
    scale = np.maximum(np.abs(x).max(axis=0), 1e-300)
    flat = var <= (1e-14 * scale) ** 2
    if flat.any():
        k = int(np.flatnonzero(flat)[0])
        name = tickers[k] if tickers is not None else f"column {k}"
        raise ValidationError(f"zero-variance return series for {name}")
    sd = np.sqrt(var)
    corr = cov / np.outer(sd, sd)
    corr = np.clip((corr + corr.T) / 2, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def distance_matrix(corr) -> np.ndarray:
    c = np.asarray(corr, dtype=float)
    d = np.sqrt(np.maximum(2.0 * (1.0 - c), 0.0))
    np.fill_diagonal(d, 0.0)
    return d


def mst_prim(dist) -> list[tuple[int, int]]:
    """Dense O(N^2) Prim's algorithm rooted at node 0.

    Ties between equal-weight cut edges go to the lexicographically smallest
    ``(min(i, j), max(i, j))`` pair, so the tree is fully deterministic.
    """
    d = np.asarray(dist, dtype=float)
    n = d.shape[0]
    if d.ndim != 2 or d.shape[1] != n or n < 2:
        raise ValidationError("distance matrix must be square with N >= 2")

    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = d[0].copy()
    lo = np.zeros(n, dtype=np.int64)       # smaller endpoint of best edge
    hi = np.arange(n, dtype=np.int64)      # larger endpoint of best edge
    edges = []
    for _ in range(n - 1):
        cand = np.flatnonzero(~in_tree)
        order = np.lexsort((hi[cand], lo[cand], best[cand]))
        v = int(cand[order[0]])
        edges.append((int(lo[v]), int(hi[v])))
        in_tree[v] = True
        out = np.flatnonzero(~in_tree)
        if out.size == 0:
            break
        new_d = d[v, out]
        new_lo = np.minimum(out, v)
        new_hi = np.maximum(out, v)
        better = (new_d < best[out]) | (
            (new_d == best[out])
            & ((new_lo < lo[out]) | ((new_lo == lo[out]) & (new_hi < hi[out])))
        )
        upd = out[better]
        best[upd] = new_d[better]
        lo[upd] = new_lo[better]
        hi[upd] = new_hi[better]
    return sorted(edges)


@dataclass(frozen=True, eq=False)
class ThresholdNetwork:
    """Unweighted undirected graph: MST edges plus all pairs with ``c_ij > theta``.

    ``origin`` maps each ``(i, j)`` with ``i < j`` to an :class:`Origin` tag.
    The correlation and distance matrices are kept for reporting only.
    """

    n_nodes: int
    origin: dict
    theta: float = float("nan")
    corr: Optional[np.ndarray] = field(default=None, repr=False)
    dist: Optional[np.ndarray] = field(default=None, repr=False)
    tickers: Optional[tuple] = None

    @classmethod
    def from_edges(cls, n_nodes: int, edges) -> "ThresholdNetwork":
        """Plain graph wrapper, used for curvature on arbitrary edge lists."""
        origin = {}
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValidationError(f"self-loop at node {u}")
            origin[(min(u, v), max(u, v))] = Origin.THRESHOLD
        return cls(n_nodes=n_nodes, origin=origin)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.origin)

    @property
    def n_edges(self) -> int:
        return len(self.origin)

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes), dtype=bool)
        if self.origin:
            idx = np.array(self.edges)
            a[idx[:, 0], idx[:, 1]] = True
            a[idx[:, 1], idx[:, 0]] = True
        a.setflags(write=False)
        return a

    @cached_property
    def neighbors(self) -> tuple:
        return tuple(tuple(np.flatnonzero(row).tolist()) for row in self.adjacency)

    def degree(self, node: int) -> int:
        return len(self.neighbors[node])

    def to_networkx(self):
        """Edge list as a networkx graph with ``origin`` edge attributes (needs the ``graph`` extra)."""
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n_nodes))
        for (u, v), tag in sorted(self.origin.items()):
            g.add_edge(u, v, origin=tag.value)
        return g

    def dumps(self) -> str:
        """Edge-list text: one JSON header line then ``i j c_ij d_ij origin`` rows."""
        header = {"n_nodes": self.n_nodes, "theta": self.theta,
                  "tickers": list(self.tickers) if self.tickers else None}
        lines = [json.dumps(header, sort_keys=True)]
        for (i, j) in self.edges:
            c = self.corr[i, j] if self.corr is not None else float("nan")
            d = self.dist[i, j] if self.dist is not None else float("nan")
            lines.append(f"{i} {j} {c:.10g} {d:.10g} {self.origin[(i, j)].value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ThresholdNetwork":
        head, *rows = [ln for ln in text.splitlines() if ln.strip()]
        meta = json.loads(head)
        n = meta["n_nodes"]
        corr = np.full((n, n), np.nan)
        dist = np.full((n, n), np.nan)
        np.fill_diagonal(corr, 1.0)
        np.fill_diagonal(dist, 0.0)
        origin = {}
        for row in rows:
            i, j, c, d, tag = row.split()
            i, j = int(i), int(j)
            corr[i, j] = corr[j, i] = float(c)
            dist[i, j] = dist[j, i] = float(d)
            origin[(i, j)] = Origin(tag)
        tickers = tuple(meta["tickers"]) if meta.get("tickers") else None
        return cls(n_nodes=n, origin=origin, theta=meta["theta"], corr=corr,
                   dist=dist, tickers=tickers)


def threshold_network(corr, dist, theta: float = 0.75,
                      tickers: Optional[Sequence[str]] = None) -> ThresholdNetwork:
    c = np.asarray(corr, dtype=float)
    d = np.asarray(dist, dtype=float)
    if c.shape != d.shape or c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValidationError("correlation and distance matrices must be paired")
    if not -1.0 <= theta <= 1.0:
        raise ValidationError(f"theta={theta} outside [-1, 1]")
    origin = {e: Origin.MST for e in mst_prim(d)}
    iu, ju = np.triu_indices(c.shape[0], k=1)
    strong = c[iu, ju] > theta
    for i, j in zip(iu[strong].tolist(), ju[strong].tolist()):
        origin[(i, j)] = Origin.BOTH if (i, j) in origin else Origin.THRESHOLD
    return ThresholdNetwork(n_nodes=c.shape[0], origin=origin, theta=float(theta),
                            corr=c, dist=d,
                            tickers=tuple(tickers) if tickers is not None else None)


def build_network(window, theta: float = 0.75, tickers=None) -> ThresholdNetwork:
    corr = pearson_matrix(window, tickers)
    return threshold_network(corr, distance_matrix(corr), theta, tickers)


class ThresholdNetworkBuilder(TransformerMixin, BaseEstimator):
    """Turn a single ``tau x N`` return window into a :class:`ThresholdNetwork`.

    ``fit`` computes the correlation matrix, distance matrix and network and
    stores them as ``corr_``, ``dist_`` and ``network_``.
    """

    def __init__(self, theta=0.75):
        self.theta = theta

    def fit(self, X, y=None):
        X = check_array(X, dtype=float, ensure_min_samples=MIN_WINDOW,
                        ensure_min_features=2)
        self.n_features_in_ = X.shape[1]
        self.network_ = build_network(X, self.theta)
        self.corr_ = self.network_.corr
        self.dist_ = self.network_.dist
        return self

    def transform(self, X):
        """Adjacency matrix of the threshold network built on ``X``."""
        return np.asarray(build_network(X, self.theta).adjacency, dtype=float)

"""Ollivier, Forman, Menger and Haantjes Ricci curvature of unweighted graphs.

All four curvatures treat the network as unweighted: edge lengths are hop
counts and every node/edge weight is 1.
"""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.sparse.csgraph import shortest_path
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import RicciMarketError, ValidationError
from .market_data import ReturnMatrix, make_schedule
from .network import ThresholdNetwork, build_network
from .transport import neighbor_measure, wasserstein_w1

KINDS = ("or", "fr", "mr", "hr")
MAX_PATH_LENGTH = 4
# Menger curvature of a triangle with three unit sides.
UNIT_TRIANGLE_MR = math.sqrt(1.5 * 0.5 ** 3)


def as_graph(g) -> ThresholdNetwork:
    """Accept a ThresholdNetwork, a networkx graph or a square adjacency matrix."""
    if isinstance(g, ThresholdNetwork):
        return g
    if hasattr(g, "nodes") and hasattr(g, "edges"):
        nodes = sorted(g.nodes)
        if nodes != list(range(len(nodes))):
            raise ValidationError("networkx graph nodes must be 0..n-1")
        return ThresholdNetwork.from_edges(len(nodes), g.edges)
    a = np.asarray(g)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("adjacency matrix must be square")
    iu, ju = np.nonzero(np.triu(a != 0, k=1))
    return ThresholdNetwork.from_edges(a.shape[0], zip(iu.tolist(), ju.tolist()))


def _check_edge(g: ThresholdNetwork, e) -> tuple[int, int]:
    u, v = int(e[0]), int(e[1])
    if not g.adjacency[u, v]:
        raise ValidationError(f"({u}, {v}) is not an edge of the graph")
    return u, v


def hop_distances(g, source: int) -> np.ndarray:
    """BFS hop counts from ``source``; unreachable nodes get ``inf``."""
    g = as_graph(g)
    dist = np.full(g.n_nodes, np.inf)
    dist[source] = 0
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y in g.neighbors[x]:
            if dist[y] == np.inf:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def all_hop_distances(g) -> np.ndarray:
    g = as_graph(g)
    return shortest_path(g.adjacency.astype(float), method="D", unweighted=True)


def or_curvature(g, e, hops: Optional[np.ndarray] = None) -> float:
    """``1 - W1(m_u, m_v) / d(u, v)`` with uniform neighbour measures."""
    g = as_graph(g)
    u, v = _check_edge(g, e)
    if hops is None:
        hops = all_hop_distances(g)
    w1 = wasserstein_w1(neighbor_measure(g, u), neighbor_measure(g, v), hops)
    return 1.0 - w1 / hops[u, v]


def fr_curvature(g, e, node_weight=None, edge_weight=None) -> float:
    """Forman curvature of edge ``e``.

    ``node_weight(x)`` and ``edge_weight(x, y)`` default to 1, which reduces
    the expression to ``4 - deg(u) - deg(v)``.
    """
    g = as_graph(g)
    u, v = _check_edge(g, e)
    wn = node_weight or (lambda x: 1.0)
    we = edge_weight or (lambda x, y: 1.0)
    w_e, w_u, w_v = we(u, v), wn(u), wn(v)
    spread = sum(w_u / math.sqrt(w_e * we(u, x)) for x in g.neighbors[u] if x != v)
    spread += sum(w_v / math.sqrt(w_e * we(v, x)) for x in g.neighbors[v] if x != u)
    return w_e * (w_u / w_e + w_v / w_e - spread)


def enumerate_triangles(g, e) -> list[tuple[int, int, int]]:
    g = as_graph(g)
    u, v = _check_edge(g, e)
    common = np.flatnonzero(g.adjacency[u] & g.adjacency[v])
    return [(u, v, int(w)) for w in common]


def menger_triangle(a: float, b: float, c: float) -> float:
    """Heron area over the product of the sides."""
    p = (a + b + c) / 2
    return math.sqrt(max(p * (p - a) * (p - b) * (p - c), 0.0)) / (a * b * c)


def mr_curvature(g, e) -> float:
    # Triangle sides are graph edges, so every side has unit length.
    return sum(menger_triangle(1.0, 1.0, 1.0) for _ in enumerate_triangles(g, e))


def enumerate_paths(g, e, max_len: int = MAX_PATH_LENGTH) -> list[tuple[int, ...]]:
    """Simple ``u -> v`` paths with 2..max_len edges (the edge itself excluded)."""
    g = as_graph(g)
    u, v = _check_edge(g, e)
    paths = []
    stack = [(u, (u,))]
    while stack:
        x, path = stack.pop()
        if len(path) - 1 >= max_len:
            continue
        for y in g.neighbors[x]:
            if y in path:
                continue
            if y == v:
                if len(path) >= 2:
                    paths.append(path + (v,))
                continue
            stack.append((y, path + (y,)))
    return sorted(paths, key=lambda p: (len(p), p))


def count_paths(g, e, max_len: int = MAX_PATH_LENGTH) -> dict[int, int]:
    """Number of simple ``u -> v`` paths of each length 2..max_len.

    Lengths up to 4 use closed-form adjacency counts; longer bounds fall
    back to explicit enumeration.
    """
    g = as_graph(g)
    u, v = _check_edge(g, e)
    if max_len > 4:
        counts = {k: 0 for k in range(2, max_len + 1)}
        for p in enumerate_paths(g, (u, v), max_len):
            counts[len(p) - 1] += 1
        return counts
    a = g.adjacency.astype(np.int64)
    return _count_short_paths(a, a @ a, u, v, max_len)


def _count_short_paths(a, a2, u, v, max_len) -> dict[int, int]:
    counts = {}
    if max_len >= 2:
        counts[2] = int(a2[u, v])
    if max_len < 3:
        return counts
    nu = np.flatnonzero(a[u])
    nu = nu[nu != v]
    nv = np.flatnonzero(a[v])
    nv = nv[nv != u]
    # u-x-y-v: y is a common neighbour of x and v other than u.
    counts[3] = int(a2[nu, v].sum() - nu.size)
    if max_len >= 4:
        # u-x-w-y-v with x != y and the middle node w outside {u, v}.
        block = a2[np.ix_(nu, nv)] - a[u, nv][None, :] - a[nu, v][:, None]
        same = nu[:, None] == nv[None, :]
        counts[4] = int(block[~same].sum())
    return counts


def haantjes_path(length: int, chord: float = 1.0, squared: bool = False) -> float:
    h2 = (length - chord) / chord ** 3
    return h2 if squared else math.sqrt(h2)


def hr_curvature(g, e, max_len: int = MAX_PATH_LENGTH, squared: bool = False) -> float:
    """Sum of Haantjes path curvatures over alternative paths of at most ``max_len`` edges.

    ``squared=True`` sums ``(l - d) / d**3`` instead of its square root.
    """
    counts = count_paths(g, e, max_len)
    return sum(n * haantjes_path(k, 1.0, squared) for k, n in counts.items())


def edge_curvatures(g, kinds: Sequence[str] = KINDS, max_path_length: int = MAX_PATH_LENGTH,
                    hr_squared: bool = False) -> dict[str, np.ndarray]:
    """Per-edge curvatures, aligned with ``g.edges``."""
    g = as_graph(g)
    kinds = _check_kinds(kinds)
    edges = g.edges
    out = {}
    if "or" in kinds:
        hops = all_hop_distances(g)
        out["or"] = np.array([or_curvature(g, e, hops) for e in edges])
    if "fr" in kinds:
        out["fr"] = np.array([fr_curvature(g, e) for e in edges])
    a = g.adjacency.astype(np.int64)
    a2 = a @ a
    if "mr" in kinds:
        common = np.array([a2[u, v] for u, v in edges], dtype=float)
        out["mr"] = common * UNIT_TRIANGLE_MR
    if "hr" in kinds:
        vals = []
        for u, v in edges:
            if max_path_length > 4:
                counts = count_paths(g, (u, v), max_path_length)
            else:
                counts = _count_short_paths(a, a2, u, v, max_path_length)
            vals.append(sum(n * haantjes_path(k, 1.0, hr_squared) for k, n in counts.items()))
        out["hr"] = np.array(vals)
    return {k: out[k] for k in kinds}


def average_curvatures(g, kinds: Sequence[str] = KINDS, max_path_length: int = MAX_PATH_LENGTH,
                       hr_squared: bool = False) -> dict[str, float]:
    g = as_graph(g)
    if g.n_edges == 0:
        raise ValidationError("cannot average curvature over an empty edge set")
    per_edge = edge_curvatures(g, kinds, max_path_length, hr_squared)
    return {k: float(np.mean(vals)) for k, vals in per_edge.items()}


def _check_kinds(kinds) -> tuple:
    if isinstance(kinds, str):
        kinds = [k.strip() for k in kinds.split(",") if k.strip()]
    kinds = tuple(k.lower() for k in kinds)
    bad = [k for k in kinds if k not in KINDS]
    if bad or not kinds:
        raise ValidationError(f"unknown curvature kinds {bad}; choose from {KINDS}")
    return tuple(k for k in KINDS if k in kinds)


@dataclass(frozen=True)
class CurvatureSeries:
    """Network-average curvature per window, labelled by window end date."""

    dates: tuple
    values: dict  # kind -> np.ndarray, all the same length as dates

    def __post_init__(self):
        for k, v in self.values.items():
            if len(v) != len(self.dates):
                raise ValidationError(f"series {k!r} is not aligned with the dates")

    @property
    def kinds(self) -> tuple:
        return tuple(k for k in KINDS if k in self.values)

    def __len__(self):
        return len(self.dates)

    def __getitem__(self, kind: str) -> np.ndarray:
        return self.values[kind]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["window_end_date", *self.kinds])
        for i, date in enumerate(self.dates):
            w.writerow([date, *(repr(float(self.values[k][i])) for k in self.kinds)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, source) -> "CurvatureSeries":
        text = source if isinstance(source, str) else source.read()
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][:1] != ["window_end_date"]:
            raise ValidationError("curvature CSV must start with a window_end_date header")
        kinds = _check_kinds(rows[0][1:])
        body = [r for r in rows[1:] if r]
        try:
            values = {k: np.array([float(r[1 + i]) for r in body])
                      for i, k in enumerate(rows[0][1:])}
        except (ValueError, IndexError) as exc:
            raise ValidationError(f"malformed curvature CSV: {exc}") from None
        return cls(dates=tuple(r[0] for r in body), values={k: values[k] for k in kinds})


def _window_average(network, date, kinds, max_path_length, hr_squared):
    try:
        return average_curvatures(network, kinds, max_path_length, hr_squared)
    except RicciMarketError as exc:
        raise type(exc)(f"window ending {date}: {exc}") from exc


def curvature_series(networks: Sequence, dates: Sequence, kinds=KINDS,
                     max_path_length: int = MAX_PATH_LENGTH, hr_squared: bool = False,
                     n_jobs: Optional[int] = None) -> CurvatureSeries:
    if len(networks) != len(dates):
        raise ValidationError("need exactly one network per window")
    kinds = _check_kinds(kinds)
    rows = Parallel(n_jobs=n_jobs)(
        delayed(_window_average)(net, d, kinds, max_path_length, hr_squared)
        for net, d in zip(networks, dates)
    )
    values = {k: np.array([r[k] for r in rows]) for k in kinds}
    return CurvatureSeries(dates=tuple(dates), values=values)


def window_networks(returns: ReturnMatrix, schedule, theta: float = 0.75) -> list:
    nets = []
    for start, end in schedule:
        try:
            nets.append(build_network(returns.returns[start:end], theta, returns.tickers))
        except RicciMarketError as exc:
            raise type(exc)(f"window ending {returns.dates[end - 1]}: {exc}") from exc
    return nets


class RicciCurvatureTransformer(TransformerMixin, BaseEstimator):
    """Map a ``T x N`` log-return matrix to per-window network-average curvatures.

    ``transform`` returns an array with one row per window and one column per
    entry of ``kinds`` (in ``or, fr, mr, hr`` order).
    """

    def __init__(self, scheme="non-overlapping", tau=22, delta=5, theta=0.75,
                 kinds=KINDS, max_path_length=MAX_PATH_LENGTH, hr_squared=False,
                 n_jobs=None):
        self.scheme = scheme
        self.tau = tau
        self.delta = delta
        self.theta = theta
        self.kinds = kinds
        self.max_path_length = max_path_length
        self.hr_squared = hr_squared
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        if isinstance(X, ReturnMatrix):
            X = X.returns
        X = check_array(X, dtype=float, ensure_min_features=2)
        self.n_features_in_ = X.shape[1]
        self.kinds_ = _check_kinds(self.kinds)
        self.schedule_ = make_schedule(X.shape[0], self.scheme, self.tau, self.delta)
        return self

    def _series(self, X) -> CurvatureSeries:
        check_is_fitted(self)
        if isinstance(X, ReturnMatrix):
            returns = X
        else:
            x = check_array(X, dtype=float, ensure_min_features=2)
            returns = ReturnMatrix(dates=tuple(range(1, x.shape[0] + 1)),
                                   tickers=tuple(f"x{k}" for k in range(x.shape[1])),
                                   returns=x)
        schedule = make_schedule(returns.n_rows, self.scheme, self.tau, self.delta)
        nets = window_networks(returns, schedule, self.theta)
        return curvature_series(nets, schedule.end_dates(returns), self.kinds_,
                                self.max_path_length, self.hr_squared, self.n_jobs)

    def transform(self, X):
        series = self._series(X)
        return np.column_stack([series[k] for k in series.kinds])

    def series(self, returns: ReturnMatrix) -> CurvatureSeries:
        """Like ``transform`` but keeps the window end dates."""
        return self._series(returns)

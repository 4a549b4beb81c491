"""Acceptance checks, one test per numbered criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import time
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from conftest import random_connected_graph, random_tree, record_acceptance
from oracles import (
    lipschitz_vertices,
    mst_weight_bruteforce,
    w1_dual,
    w1_primal_vertices,
)
from ricci_market.cli import main
from ricci_market.curvature import (
    all_hop_distances,
    as_graph,
    curvature_series,
    edge_curvatures,
    or_curvature,
    window_networks,
)
from ricci_market.forecast import lstm_forecast, named_stream, wd_lstm_forecast
from ricci_market.lstm import LSTMParams, TrainConfig, gradient_check
from ricci_market.market_data import log_returns, make_schedule
from ricci_market.network import mst_prim
from ricci_market.synthetic import crash_scenario, curvature_like_series
from ricci_market.transport import neighbor_measure, wasserstein_w1
from ricci_market.wavelet import dwt_multilevel, reconstruct

FIXTURE = Path(__file__).parent / "fixtures" / "prices.csv"


def _finish(number, ok, text, elapsed, budget):
    ok = ok and elapsed < budget
    record_acceptance(number, ok, f"{text} [{elapsed:.1f}s / {budget:.0f}s]")
    assert ok, text


def test_criterion_01_forman_closed_form():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    bad = edges = 0
    for _ in range(200):
        g = random_connected_graph(rng, 2, 30, p=None)
        fr = edge_curvatures(g, ["fr"])["fr"]
        want = [4 - g.degree[u] - g.degree[v] for u, v in sorted(map(sorted, g.edges))]
        bad += int(np.sum(fr != np.array(want)))
        edges += len(want)
    _finish(1, bad == 0, f"fr = 4 - deg u - deg v on {edges - bad}/{edges} edges of 200 graphs",
            time.perf_counter() - t0, 10)


def _w1_graph_errors(g, primal_limit=12):
    """Max |W1 - oracle| and |OR - oracle OR| over every edge of ``g``."""
    net = as_graph(g)
    adj = net.adjacency
    hops = all_hop_distances(net)
    verts = lipschitz_vertices(adj)
    worst = 0.0
    for u, v in net.edges:
        mu, mv = neighbor_measure(net, u), neighbor_measure(net, v)
        got = wasserstein_w1(mu, mv, hops)
        want = w1_dual(adj, dict(zip(mu.support, mu.mass)), dict(zip(mv.support, mv.mass)), verts)
        if len(mu.support) * len(mv.support) <= primal_limit:
            primal = w1_primal_vertices(mu.mass, mv.mass, hops[np.ix_(mu.support, mv.support)])
            worst = max(worst, abs(primal - want))
        worst = max(worst, abs(got - want), abs(or_curvature(net, (u, v), hops) - (1 - want)))
    return worst


def test_criterion_02_transport_oracle():
    t0 = time.perf_counter()
    atlas = [g for g in nx.graph_atlas_g()
             if 2 <= g.number_of_nodes() <= 6 and g.number_of_edges() and nx.is_connected(g)]
    worst = max(_w1_graph_errors(g) for g in atlas)
    rng = np.random.default_rng(202)
    randoms = [random_connected_graph(rng, 2, 8) for _ in range(500)]
    worst = max(worst, max(_w1_graph_errors(g) for g in randoms))
    _finish(2, worst < 1e-7,
            f"W1 and OR match the brute-force oracle on {len(atlas)} enumerated + 500 random "
            f"graphs (max error {worst:.1e})", time.perf_counter() - t0, 300)


def test_criterion_03_trees():
    t0 = time.perf_counter()
    rng = np.random.default_rng(303)
    n_edges = or_bad = other_bad = 0
    or_min = 0.0
    for _ in range(100):
        t = random_tree(rng, 2, 50)
        c = edge_curvatures(t)
        deg = np.array([[t.degree[u], t.degree[v]] for u, v in as_graph(t).edges])
        n_edges += len(deg)
        or_bad += int(np.sum(np.abs(c["or"]) > 1e-9))
        or_min = min(or_min, float(c["or"].min()))
        other_bad += int(np.sum(c["mr"] != 0) + np.sum(c["hr"] != 0)
                         + np.sum(c["fr"] != 4 - deg.sum(axis=1)))
    text = (f"{n_edges} tree edges: mr = hr = 0 and fr closed form fail on {other_bad}; "
            f"or != 0 on {or_bad} edges (min or {or_min:.4f})")
    _finish(3, or_bad == 0 and other_bad == 0, text, time.perf_counter() - t0, 30)


def test_criterion_04_mst_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 8))
        a = rng.uniform(0, 2, (n, n))
        d = np.triu(a, 1) + np.triu(a, 1).T
        w = sum(d[e] for e in mst_prim(d))
        worst = max(worst, abs(w - mst_weight_bruteforce(d)))
    _finish(4, worst < 1e-12, f"Prim weight equals Cayley-enumeration minimum on 200 matrices "
            f"(max diff {worst:.1e})", time.perf_counter() - t0, 30)


def test_criterion_05_dwt_reconstruction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(505)
    worst = 0.0
    for _ in range(1000):
        x = rng.standard_normal(int(rng.integers(33, 513))) * rng.uniform(0.1, 10)
        dec = dwt_multilevel(x)
        worst = max(worst, float(np.max(np.abs(reconstruct(dec) - x))),
                    float(np.max(np.abs(dec.bands.sum(axis=1) - x))))
    _finish(5, worst < 1e-8, f"max reconstruction error {worst:.1e} over 1000 series",
            time.perf_counter() - t0, 60)


def test_criterion_06_gradient_check():
    t0 = time.perf_counter()
    errs = []
    for seed in range(5):
        rng = np.random.default_rng(seed)
        p = LSTMParams.init(int(rng.integers(1, 5)), 1, rng)
        n = int(rng.integers(2, 9))
        errs.append(gradient_check(p, rng.uniform(size=(n, 1)), rng.uniform(size=n)))
    _finish(6, max(errs) < 1e-4, f"max relative gradient error {max(errs):.1e} over 5 seeds",
            time.perf_counter() - t0, 60)


def _crash_means(seed):
    sc = crash_scenario(rng=seed)
    r = log_returns(sc.prices)
    sched = make_schedule(r.n_rows, "non-overlapping", 22)
    s = curvature_series(window_networks(r, sched, 0.75), sched.end_dates(r))
    inside = np.array([a >= sc.regime[0] and b <= sc.regime[1] for a, b in sched])
    clear = np.array([b <= sc.regime[0] or a >= sc.regime[1] for a, b in sched])
    return {k: (s[k][inside].mean(), s[k][clear].mean()) for k in s.kinds}


def _iqr(v):
    return np.percentile(v, [25, 75])


@pytest.mark.slow
def test_criterion_07_crash_direction():
    t0 = time.perf_counter()
    runs = [_crash_means(seed) for seed in range(20)]
    parts, ok = [], True
    for kind, higher in (("fr", False), ("mr", True), ("hr", True)):
        crash = np.array([r[kind][0] for r in runs])
        calm = np.array([r[kind][1] for r in runs])
        (c25, c75), (n25, n75) = _iqr(crash), _iqr(calm)
        good = c25 > n75 if higher else c75 < n25
        ok &= bool(good)
        parts.append(f"{kind} {np.median(crash):.3g} vs {np.median(calm):.3g}")
    or_crash = np.median([r["or"][0] for r in runs])
    or_calm = np.median([r["or"][1] for r in runs])
    parts.append(f"or (not asserted) {or_crash:.3g} vs {or_calm:.3g}")
    _finish(7, ok, "regime vs normal medians, IQRs disjoint: " + "; ".join(parts),
            time.perf_counter() - t0, 600)


@pytest.mark.slow
def test_criterion_08_wd_lstm_beats_lstm():
    t0 = time.perf_counter()
    cfg = TrainConfig()
    wd, plain = [], []
    for seed in range(10):
        x = curvature_like_series(400, rng=seed)
        wd.append(wd_lstm_forecast(x, cfg=cfg, stream=named_stream(seed, "WD-LSTM")).r2)
        plain.append(lstm_forecast(x, cfg, stream=named_stream(seed, "LSTM")).r2)
    wins = sum(a > b for a, b in zip(wd, plain))
    med = float(np.median(wd))
    _finish(8, wins >= 8 and med > 0.8,
            f"WD-LSTM R2 beats LSTM in {wins}/10 seeds; median WD-LSTM R2 {med:.3f}, "
            f"median LSTM R2 {np.median(plain):.3f}", time.perf_counter() - t0, 900)


def _full_run(out: Path):
    base = ["--out", str(out), "--seed", "7"]
    assert main(["analyze", "--input", str(FIXTURE), *base]) == 0
    assert main(["forecast", "--baseline", *base]) == 0
    assert main(["report", *base]) == 0
    return {p.relative_to(out).as_posix(): p.read_bytes() for p in sorted(out.rglob("*"))
            if p.is_file()}


@pytest.fixture(scope="module")
def two_runs(tmp_path_factory):
    t0 = time.perf_counter()
    a = _full_run(tmp_path_factory.mktemp("run_a"))
    b = _full_run(tmp_path_factory.mktemp("run_b"))
    return a, b, time.perf_counter() - t0


def test_criterion_09_end_to_end_determinism(two_runs):
    a, b, elapsed = two_runs
    same = sorted(a) == sorted(b) and all(a[k] == b[k] for k in a)
    _finish(9, same, f"{len(a)} output files byte-identical across two seed-7 runs",
            elapsed, 300)


def test_criterion_10_report_shape(two_runs):
    t0 = time.perf_counter()
    rows = [r.split(",") for r in two_runs[0]["report.csv"].decode().splitlines()]
    blocks = [rows[0:4], rows[4:8]]
    ok = len(rows) == 8
    for block, model in zip(blocks, ("WD-LSTM", "LSTM")):
        ok &= block[0] == ["model", "metric", "OR", "MR", "HR", "FR"]
        ok &= [r[:2] for r in block[1:]] == [[model, "MAE"], [model, "MSE"], [model, "R2"]]
        ok &= all(len(r) == 6 for r in block)
    _finish(10, bool(ok), "two 3-metric x 4-curvature blocks (WD-LSTM, LSTM)",
            time.perf_counter() - t0, 60)

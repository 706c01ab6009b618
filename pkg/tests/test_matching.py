import itertools

import numpy as np
import pytest

from obddkit.graphs import Graph, decode_graph, encode_graph, gnp_graph, random_density_graph
from obddkit.matching import (
    InnerLoopLimitExceeded, MatchingWorkspace, RmConfig, distributed_mis_sim,
    maximal_matching_rm, run_inner_loop, verify_matching, verify_mis,
)

PAIRS5 = list(itertools.combinations(range(5), 2))


def graph5(mask):
    return Graph.from_edges(5, [e for b, e in enumerate(PAIRS5) if (mask >> b) & 1])


def run(g, seed=0, sparsify=False, **kw):
    return maximal_matching_rm(encode_graph(g), RmConfig(sparsify=sparsify, seed=seed, **kw))


def test_empty_graph():
    res = run(Graph.from_edges(4, []))
    assert res.edges == set()
    assert res.stats.outer_iterations == 0
    assert res.chi_m.is_false


def test_single_edge():
    res = run(Graph.from_edges(2, [(0, 1)]))
    assert res.edges == {(0, 1)}
    assert res.stats.outer_iterations == 1
    assert res.stats.inner_iterations == 0


def test_path_and_star():
    star = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    for seed in range(10):
        res = run(star, seed)
        assert len(res.edges) == 1 and verify_matching(star, res.edges) == (True, True)
    p4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    for seed in range(10):
        res = run(p4, seed, sparsify=bool(seed % 2))
        assert verify_matching(p4, res.edges) == (True, True)


@pytest.mark.parametrize('sparsify', [False, True])
def test_five_node_sample(sparsify):
    # every 16th graph on five labelled nodes; the full sweep is an acceptance check
    for mask in range(0, 1024, 16):
        g = graph5(mask)
        res = run(g, mask, sparsify)
        assert verify_matching(g, res.edges) == (True, True), mask


def test_chi_m_is_symmetric_matching():
    g = gnp_graph(40, 0.15, np.random.default_rng(4))
    eg = encode_graph(g)
    res = maximal_matching_rm(eg, RmConfig(seed=4))
    m = eg.mgr
    assert m.reorder_args(res.chi_m, [eg.x, eg.y], [1, 0]) is res.chi_m
    assert set(m.support(res.chi_m)) <= set(eg.xy)
    assert eg.mgr.sat_count(res.chi_m, eg.xy) == 2 * len(res.edges)


def test_monotone_progress_and_stats():
    g = gnp_graph(60, 0.1, np.random.default_rng(5))
    res = run(g, 5, sparsify=True)
    st = res.stats
    assert st.edges_remaining == sorted(st.edges_remaining, reverse=True)
    assert st.matching_sizes == sorted(st.matching_sizes)
    assert st.edges_remaining[-1] == 0
    assert st.matching_sizes[-1] == len(res.edges)
    assert st.inner_iterations == sum(st.inner_per_outer)
    assert len(st.inner_per_outer) == st.outer_iterations
    assert st.func_ops > 0 and st.peak_live_nodes > 0


def test_runs_are_deterministic():
    g = gnp_graph(30, 0.2, np.random.default_rng(6))
    a, b = run(g, 11), run(g, 11)
    assert a.edges == b.edges
    assert (a.stats.func_ops, a.stats.peak_live_nodes, a.stats.inner_iterations) == \
        (b.stats.func_ops, b.stats.peak_live_nodes, b.stats.inner_iterations)


def test_implicit_random_graph():
    rng = np.random.default_rng(7)
    for _ in range(3):
        eg = random_density_graph(6, 0.2, 30, rng)
        g = decode_graph(eg)
        res = maximal_matching_rm(eg, RmConfig(seed=1))
        assert verify_matching(g, res.edges) == (True, True)


def test_inner_loop_isolates_every_edge():
    # after the loop no node has two incident edges
    g = gnp_graph(24, 0.3, np.random.default_rng(8))
    eg = encode_graph(g)
    ws = MatchingWorkspace(eg)
    rest, isolated, _ = run_inner_loop(ws, eg.chi, np.random.default_rng(0), 500)
    assert ws.multi_degree(rest).is_false
    assert eg.mgr.apply(rest, isolated, 'diff').is_false


def test_multi_degree():
    g = Graph.from_edges(4, [(0, 1), (0, 2), (2, 3)])
    eg = encode_graph(g)
    ws = MatchingWorkspace(eg)
    t = ws.multi_degree(eg.chi)
    m = eg.mgr
    deg2 = set()
    for v in range(4):
        a = [0] * m.num_vars
        for i, var in enumerate(eg.x):
            a[var] = (v >> i) & 1
        if m.evaluate(t, a):
            deg2.add(v)
    assert deg2 == {0, 2}


def test_inner_cap():
    star = Graph.from_edges(32, [(0, v) for v in range(1, 32)])
    with pytest.raises(InnerLoopLimitExceeded):
        run(star, 0, max_inner_iterations=1)
    with pytest.raises(ValueError):
        RmConfig(max_inner_iterations=0)


def test_verify_matching_examples():
    p3 = Graph.from_edges(3, [(0, 1), (1, 2)])
    p4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert verify_matching(Graph.from_edges(3, []), set()) == (True, True)
    assert verify_matching(p3, set()) == (True, False)
    assert verify_matching(p4, {(1, 2)}) == (True, True)
    assert verify_matching(p4, {(0, 1), (2, 1)}) == (False, True)
    with pytest.raises(ValueError):
        verify_matching(p4, {(0, 3)})


def test_verify_mis_examples():
    empty = Graph.from_edges(4, [])
    star = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    assert verify_mis(empty, set()) == (True, False)
    assert verify_mis(empty, {0, 1, 2, 3}) == (True, True)
    assert verify_mis(star, {0}) == (True, True)
    assert verify_mis(star, {0, 1}) == (False, True)
    assert verify_mis(Graph.from_edges(0, []), set()) == (True, True)


def test_mis_isolated_nodes():
    res = distributed_mis_sim(Graph.from_edges(6, []), np.random.default_rng(0))
    assert res.independent_set == set(range(6))
    assert res.rounds == 1


def test_mis_single_edge():
    g = Graph.from_edges(2, [(0, 1)])
    for seed in range(30):
        res = distributed_mis_sim(g, np.random.default_rng(seed), seed)
        assert len(res.independent_set) == 1
        assert res.seed == seed


def test_mis_random_graphs():
    rng = np.random.default_rng(9)
    for _ in range(20):
        g = gnp_graph(80, 0.08, rng)
        res = distributed_mis_sim(g, rng)
        assert verify_mis(g, res.independent_set) == (True, True)
        assert res.rank_bits_mean >= 1
        assert res.bits_per_channel_max >= 0

"""Randomized implicit maximal matching and a distributed MIS simulation.

The matching algorithm works on ``chi_E`` only.  Each outer round copies the
remaining edges, repeatedly deletes every edge with probability 1/2 (using two
fresh 3-wise independent parity functions) until no node has two incident
edges, collects the edges that were isolated along the way, adds them to the
matching and removes every edge touching a matched node.

With ``sparsify`` the working copy is first thinned ``D`` times, ``D``
starting at ``ceil(log2 |E|)`` and decreasing by one per outer round.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .bdd import ObddError
from .builders import build_gt, build_neq
from .graphs import decode_edges
from .randfuncs import random_func_3wise


class InnerLoopLimitExceeded(ObddError, RuntimeError):
    """The deletion loop ran longer than the configured cap."""


@dataclass(frozen=True)
class RmConfig:
    sparsify: bool = False
    max_inner_iterations: int = None
    max_outer_iterations: int = None
    seed: int = None

    def __post_init__(self):
        for name in ('max_inner_iterations', 'max_outer_iterations'):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f'{name} must be at least 1')


@dataclass
class RunStats:
    outer_iterations: int = 0
    inner_iterations: int = 0
    func_ops: int = 0
    peak_live_nodes: int = 0
    seed: int = None
    inner_per_outer: list = field(default_factory=list)
    edges_remaining: list = field(default_factory=list)
    matching_sizes: list = field(default_factory=list)


@dataclass
class MatchingResult:
    chi_m: object
    edges: set
    stats: RunStats


class MatchingWorkspace:
    """Helper functions of one encoded graph, built once per run."""

    def __init__(self, eg):
        self.eg = eg
        self.mgr = mgr = eg.mgr
        self.x, self.y, self.z = eg.x, eg.y, eg.z
        with mgr.untracked():
            self.x_gt_y = build_gt(mgr, self.x, self.y)
            self.y_neq_z = build_neq(mgr, self.y, self.z)

    def swap_xy(self, f):
        return self.mgr.reorder_args(f, [self.x, self.y], [1, 0])

    def delete_half(self, chi, rng):
        """Keep each undirected edge with probability 1/2."""
        f1, _ = random_func_3wise(self.mgr, self.x, rng)
        f2, _ = random_func_3wise(self.mgr, self.y, rng)
        keep = self.x_gt_y & (f1 ^ f2)
        keep = keep | self.swap_xy(keep)
        return chi & keep

    def multi_degree(self, chi):
        """``T(x) = exists y, z: y != z & chi(x, y) & chi(x, z)``."""
        mgr = self.mgr
        chi_xz = mgr.reorder_args(chi, [self.y, self.z], [1, 0])
        other = mgr.and_exists(chi_xz, self.y_neq_z, self.z)
        return mgr.and_exists(chi, other, self.y)

    def isolated(self, chi, t):
        return chi & ~t & ~self.swap_xy(t)


def run_inner_loop(ws, chi, rng, cap):
    """Delete edges until no node has degree two or more.

    Returns ``(remaining, isolated_edges, iterations)``; ``isolated_edges``
    gathers every edge that was isolated at some point, starting with the
    ones isolated before the first deletion.
    """
    t = ws.multi_degree(chi)
    collected = ws.isolated(chi, t)
    iterations = 0
    while not t.is_false:
        if iterations >= cap:
            raise InnerLoopLimitExceeded(
                f'inner loop exceeded {cap} iterations '
                f'({ws.mgr.sat_count(chi, ws.x + ws.y) // 2} edges left)')
        iterations += 1
        chi = ws.delete_half(chi, rng)
        t = ws.multi_degree(chi)
        collected = collected | ws.isolated(chi, t)
    return chi, collected, iterations


def maximal_matching_rm(eg, cfg=None, rng=None):
    """Maximal matching of the implicit graph ``eg``."""
    cfg = cfg or RmConfig()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    mgr = eg.mgr
    xy = eg.x + eg.y
    inner_cap = cfg.max_inner_iterations or 64 * (eg.n + 2)
    outer_cap = cfg.max_outer_iterations or 256 * (eg.n + 2)
    ws = MatchingWorkspace(eg)
    stats = RunStats(seed=cfg.seed)
    ops_start = mgr.op_count
    mgr.reset_peak()

    chi = eg.chi
    chi_m = mgr.false
    edge_count = mgr.sat_count(chi, xy) // 2
    rounds = math.ceil(math.log2(edge_count)) if cfg.sparsify and edge_count > 0 else 0
    while not chi.is_false:
        if stats.outer_iterations >= outer_cap:
            raise InnerLoopLimitExceeded(f'outer loop exceeded {outer_cap} iterations')
        stats.outer_iterations += 1
        work = chi
        for _ in range(rounds):
            work = ws.delete_half(work, rng)
        work, new_edges, iterations = run_inner_loop(ws, work, rng, inner_cap)
        stats.inner_iterations += iterations
        stats.inner_per_outer.append(iterations)
        chi_m = chi_m | new_edges
        matched = mgr.exists(chi_m, eg.y)
        chi = chi & ~matched & ~ws.swap_xy(matched)
        rounds = max(0, rounds - 1)
        stats.edges_remaining.append(mgr.sat_count(chi, xy) // 2)
        stats.matching_sizes.append(mgr.sat_count(chi_m, xy) // 2)
        del work, new_edges, matched
        mgr.collect_garbage()

    stats.func_ops = mgr.op_count - ops_start
    stats.peak_live_nodes = mgr.peak_live_nodes
    return MatchingResult(chi_m, decode_edges(eg, chi_m), stats)


def verify_matching(g, matching):
    """Return ``(is_matching, is_maximal)`` for an explicit edge set."""
    m = {(min(u, v), max(u, v)) for u, v in matching}
    extra = m - g.edges
    if extra:
        raise ValueError(f'matching contains non-edges {sorted(extra)[:5]}')
    covered = set()
    is_matching = True
    for u, v in m:
        if u in covered or v in covered:
            is_matching = False
        covered.update((u, v))
    is_maximal = all(u in covered or v in covered for u, v in g.edges)
    return is_matching, is_maximal


# ----------------------------------------------------------------------
# maximal independent set

@dataclass
class MisResult:
    independent_set: set
    rounds: int
    rank_draws: int
    rank_bits_mean: float
    bits_per_channel_mean: float
    bits_per_channel_max: int
    seed: int = None


def distributed_mis_sim(g, rng, seed=None):
    """Synchronous simulation of the geometric-rank MIS protocol.

    Every active node draws bits until it sees a 0; the number of bits is its
    rank.  Ranks go to active neighbours, strict local minima join the set and
    leave together with their neighbours.  Ties retry in the next round.
    """
    adj = g.adjacency()
    active = set(range(g.num_nodes))
    chosen = set()
    channel = {}
    rounds = draws = bits = 0
    while active:
        rounds += 1
        nodes = sorted(active)
        ranks = dict(zip(nodes, rng.geometric(0.5, size=len(nodes)).tolist()))
        draws += len(nodes)
        bits += sum(ranks.values())
        winners = []
        for v in nodes:
            rv = ranks[v]
            strict_min = True
            for u in adj[v]:
                if u in active:
                    channel[(v, u)] = channel.get((v, u), 0) + rv
                    if ranks[u] <= rv:
                        strict_min = False
            if strict_min:
                winners.append(v)
        for v in winners:
            chosen.add(v)
            active.discard(v)
            active.difference_update(adj[v])
    num_channels = 2 * len(g.edges)
    total_channel = sum(channel.values())
    return MisResult(
        independent_set=chosen,
        rounds=rounds,
        rank_draws=draws,
        rank_bits_mean=bits / draws if draws else 0.0,
        bits_per_channel_mean=total_channel / num_channels if num_channels else 0.0,
        bits_per_channel_max=max(channel.values(), default=0),
        seed=seed,
    )


def verify_mis(g, nodes):
    """Return ``(independent, maximal)``."""
    nodes = set(nodes)
    adj = g.adjacency()
    independent = all(not (u in nodes and v in nodes) for u, v in g.edges)
    maximal = all(v in nodes or adj[v] & nodes for v in range(g.num_nodes))
    return independent, maximal

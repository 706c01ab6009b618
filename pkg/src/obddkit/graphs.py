"""Explicit graphs, file formats, and their characteristic functions.

Node ``v`` is encoded with ``n = ceil(log2 N)`` bits, least significant first.
A graph manager holds three interleaved blocks ``x, y, z`` of ``n`` variables
each (order ``x0 y0 z0 x1 y1 z1 ...``); ``chi_E`` lives on ``x, y`` and ``z``
is scratch space for the matching algorithm.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .bdd import Manager, UsageError
from .builders import build_eq, build_gt
from .randfuncs import import_layered, sample_layered

logger = logging.getLogger(__name__)

EDGELIST = 'edgelist'
DIMACS = 'dimacs'
MATRIXMARKET = 'matrixmarket'
FORMATS = (EDGELIST, DIMACS, MATRIXMARKET)


class GraphFormatError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f'line {line}: {message}' if line is not None else message)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes ``0..num_nodes-1``; edges are ``(u, v)`` with ``u < v``."""

    num_nodes: int
    edges: frozenset
    dropped_self_loops: int = field(default=0, compare=False)

    @classmethod
    def from_edges(cls, num_nodes, edges):
        loops = 0
        norm = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < num_nodes and 0 <= v < num_nodes):
                raise ValueError(f'edge ({u}, {v}) has an endpoint outside 0..{num_nodes - 1}')
            if u == v:
                loops += 1
                continue
            norm.add((min(u, v), max(u, v)))
        if loops:
            logger.warning('dropped %d self-loops', loops)
        return cls(num_nodes, frozenset(norm), loops)

    def adjacency(self):
        adj = [set() for _ in range(self.num_nodes)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def degree(self, v):
        return sum(1 for e in self.edges if v in e)


def gnp_graph(num_nodes, p, rng):
    """Erdos-Renyi ``G(N, p)``."""
    iu, ju = np.triu_indices(num_nodes, k=1)
    keep = rng.random(iu.size) < p
    return Graph.from_edges(num_nodes, zip(iu[keep].tolist(), ju[keep].tolist()))


# ----------------------------------------------------------------------
# file formats

def _ints(parts, lineno, count):
    try:
        return [int(p) for p in parts[:count]]
    except ValueError:
        raise GraphFormatError(f'expected {count} integers, got {" ".join(parts)!r}', lineno) from None


def _parse_edgelist(lines):
    num_nodes = None
    edges = []
    for lineno, line in enumerate(lines, 1):
        text = line.strip()
        if text.startswith('#'):
            header = text[1:].strip().replace(' ', '')
            if header.upper().startswith('N='):
                try:
                    num_nodes = int(header[2:])
                except ValueError:
                    raise GraphFormatError(f'bad node-count header {text!r}', lineno) from None
            continue
        if not text:
            continue
        parts = text.split()
        if len(parts) < 2:
            raise GraphFormatError(f'expected "u v", got {text!r}', lineno)
        u, v = _ints(parts, lineno, 2)
        if u < 0 or v < 0:
            raise GraphFormatError('negative node id', lineno)
        if num_nodes is not None and max(u, v) >= num_nodes:
            raise GraphFormatError(f'endpoint {max(u, v)} >= N={num_nodes}', lineno)
        edges.append((u, v))
    if num_nodes is None:
        num_nodes = 1 + max((max(e) for e in edges), default=-1)
    return Graph.from_edges(num_nodes, edges)


def _parse_dimacs(lines):
    num_nodes = None
    edges = []
    for lineno, line in enumerate(lines, 1):
        parts = line.split()
        if not parts or parts[0] == 'c':
            continue
        if parts[0] == 'p':
            if len(parts) < 4:
                raise GraphFormatError('expected "p edge N M"', lineno)
            num_nodes, _ = _ints(parts[2:], lineno, 2)
        elif parts[0] in ('e', 'a'):
            if num_nodes is None:
                raise GraphFormatError('edge line before the "p" header', lineno)
            if len(parts) < 3:
                raise GraphFormatError('expected "e u v"', lineno)
            u, v = _ints(parts[1:], lineno, 2)
            if not (1 <= u <= num_nodes and 1 <= v <= num_nodes):
                raise GraphFormatError(f'endpoint outside 1..{num_nodes}', lineno)
            edges.append((u - 1, v - 1))
        else:
            raise GraphFormatError(f'unknown line type {parts[0]!r}', lineno)
    if num_nodes is None:
        raise GraphFormatError('missing "p" header')
    return Graph.from_edges(num_nodes, edges)


def _parse_matrixmarket(lines):
    it = iter(enumerate(lines, 1))
    try:
        lineno, banner = next(it)
    except StopIteration:
        raise GraphFormatError('empty file') from None
    head = banner.lower().split()
    if not head or head[0] != '%%matrixmarket' or 'coordinate' not in head:
        raise GraphFormatError('expected a coordinate %%MatrixMarket banner', lineno)
    num_nodes = None
    edges = []
    for lineno, line in it:
        text = line.strip()
        if not text or text.startswith('%'):
            continue
        parts = text.split()
        if num_nodes is None:
            if len(parts) < 3:
                raise GraphFormatError('expected "rows cols nnz"', lineno)
            rows, cols, _ = _ints(parts, lineno, 3)
            num_nodes = max(rows, cols)
            continue
        if len(parts) < 2:
            raise GraphFormatError('expected "i j [value]"', lineno)
        i, j = _ints(parts, lineno, 2)
        if not (1 <= i <= num_nodes and 1 <= j <= num_nodes):
            raise GraphFormatError(f'entry outside 1..{num_nodes}', lineno)
        edges.append((i - 1, j - 1))
    if num_nodes is None:
        raise GraphFormatError('missing size line')
    return Graph.from_edges(num_nodes, edges)


_PARSERS = {EDGELIST: _parse_edgelist, DIMACS: _parse_dimacs, MATRIXMARKET: _parse_matrixmarket}


def parse_graph(path, fmt=EDGELIST):
    try:
        parser = _PARSERS[fmt.lower()]
    except KeyError:
        raise ValueError(f'unknown format {fmt!r}; expected one of {FORMATS}') from None
    with open(path) as fh:
        return parser(fh.readlines())


def write_edgelist(graph, path):
    with open(path, 'w') as fh:
        fh.write(f'# N={graph.num_nodes}\n')
        for u, v in sorted(graph.edges):
            fh.write(f'{u} {v}\n')


# ----------------------------------------------------------------------
# implicit representation

@dataclass
class EncodedGraph:
    mgr: Manager
    n: int
    num_nodes: int
    x: list
    y: list
    z: list
    chi: object

    @property
    def xy(self):
        return self.x + self.y

    def edge_count(self):
        return self.mgr.sat_count(self.chi, self.xy) // 2


def node_bits(num_nodes):
    return max(1, math.ceil(math.log2(num_nodes))) if num_nodes > 1 else 1


def graph_manager(n):
    """Manager with interleaved ``x, y, z`` blocks; returns ``(mgr, x, y, z)``."""
    x = list(range(n))
    y = list(range(n, 2 * n))
    z = list(range(2 * n, 3 * n))
    order = [v for triple in zip(x, y, z) for v in triple]
    return Manager(3 * n, order), x, y, z


def encode_graph(g, mgr=None):
    """Characteristic function of the symmetric edge relation of ``g``."""
    if g.num_nodes == 0:
        raise ValueError('graph has no nodes')
    n = node_bits(g.num_nodes)
    if mgr is None:
        mgr, x, y, z = graph_manager(n)
    else:
        if mgr.num_vars != 3 * n:
            raise UsageError(f'manager must have {3 * n} variables')
        x, y, z = list(range(n)), list(range(n, 2 * n)), list(range(2 * n, 3 * n))
    rows = []
    for u, v in g.edges:
        bu = [(u >> i) & 1 for i in range(n)]
        bv = [(v >> i) & 1 for i in range(n)]
        rows.append(bu + bv)
        rows.append(bv + bu)
    chi = mgr.from_rows(x + y, rows)
    return EncodedGraph(mgr, n, g.num_nodes, x, y, z, chi)


def decode_edges(eg, chi=None):
    """Undirected edge set of ``chi`` (default ``eg.chi``)."""
    chi = eg.chi if chi is None else chi
    n = eg.n
    xy = eg.xy
    edges = set()
    for cube in eg.mgr.cubes(chi):
        free = [v for v in xy if v not in cube]
        for values in itertools.product((0, 1), repeat=len(free)):
            bits = dict(cube)
            bits.update(zip(free, values))
            u = sum(bits[eg.x[i]] << i for i in range(n))
            v = sum(bits[eg.y[i]] << i for i in range(n))
            if u != v:
                edges.add((min(u, v), max(u, v)))
    return edges


def decode_graph(eg, chi=None):
    return Graph.from_edges(eg.num_nodes, decode_edges(eg, chi))


def random_density_graph(n, p_sink, width, rng, mgr=None):
    """Implicit random graph on ``2**n`` nodes with edge density about ``p_sink``.

    A layered random diagram ``f`` over the interleaved ``x, y`` variables is
    restricted to ``|x| > |y|`` and mirrored, so each unordered pair is an
    edge with probability ``p_sink`` and there are no self-loops.
    """
    if mgr is None:
        mgr, x, y, z = graph_manager(n)
    else:
        x, y, z = list(range(n)), list(range(n, 2 * n)), list(range(2 * n, 3 * n))
    block = sorted(x + y, key=mgr.level_of)
    diagram = sample_layered(len(block), width, p_sink, rng)
    with mgr.untracked():
        f = import_layered(mgr, block, diagram)
        lower = f & build_gt(mgr, x, y)
        chi = lower | mgr.reorder_args(lower, [x, y], [1, 0])
        chi = chi & ~build_eq(mgr, x, y)
    return EncodedGraph(mgr, n, 1 << n, x, y, z, chi)


def density(eg):
    N = eg.num_nodes
    if N < 2:
        return 0.0
    return eg.edge_count() / (N * (N - 1) / 2)

"""Random Boolean functions with limited independence, as OBDDs.

* :func:`random_func_3wise` -- parity of a random subset of the inputs plus a
  random constant; the values over all ``2**n`` inputs are 3-wise independent
  and the diagram has width 2.
* :func:`random_func_biased` -- success probability close to a target ``p``
  from ``t`` independent parity bits compared against a threshold.
* :func:`random_priority` -- a random pairwise independent ranking ``v_x`` and
  the comparison ``|v_x| > |v_y|`` built with functional operations.
* :func:`random_layered_obdd` -- a random fixed-width layered diagram, almost
  k-wise independent once the width is large enough.

Every sampler takes an explicit :class:`numpy.random.Generator` and returns
the seed it drew so that a run can be replayed.
"""
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bdd import ConfigurationError, Manager, UsageError
from .builders import (
    bits_of, build_const_eq, build_gt, build_ip_const, value_of,
)


def _bits_hex(bits):
    return format(value_of(bits), 'x')


def _draw_bits(rng, count):
    return tuple(int(b) for b in rng.integers(0, 2, size=count))


# ----------------------------------------------------------------------
# 3-wise independent functions

@dataclass(frozen=True)
class Seed3Wise:
    r: tuple
    r_n: int

    @classmethod
    def from_int(cls, n, value):
        """Seed whose bits ``0..n-1`` are ``r`` and bit ``n`` is ``r_n``."""
        return cls(bits_of(value, n), (value >> n) & 1)

    def to_int(self):
        return value_of(self.r) | (self.r_n << len(self.r))

    def hex(self):
        return format(self.to_int(), 'x')

    def value(self, x):
        """Function value on the input with integer encoding ``x``."""
        return (bin(value_of(self.r) & x).count('1') + self.r_n) & 1


def alg1_function(mgr, block, seed):
    return build_ip_const(mgr, block, seed.r, seed.r_n)


def random_func_3wise(mgr, block, rng):
    bits = _draw_bits(rng, len(block) + 1)
    seed = Seed3Wise(bits[:-1], bits[-1])
    return alg1_function(mgr, block, seed), seed


# ----------------------------------------------------------------------
# biased functions

@dataclass(frozen=True)
class BiasedSeed:
    """``rows[j]`` and ``offsets[j]`` define prefix bit ``j`` (most significant first)."""

    rows: tuple
    offsets: tuple

    def hex(self):
        bits = [b for row in self.rows for b in row] + list(self.offsets)
        return _bits_hex(bits)


def biased_parameters(n, p, eps):
    """Return ``(s, t)``: the threshold ``ceil(p 2^n)`` and the prefix length."""
    if not 1 / 2 ** n <= p <= 0.5:
        raise ConfigurationError(f'p must lie in [2^-{n}, 1/2], got {p}')
    if eps <= 0:
        raise ConfigurationError(f'eps must be positive, got {eps}')
    s = math.ceil(round(p * 2 ** n, 9))
    t = max(1, math.ceil(round(-math.log2(p) - math.log2(eps), 9)))
    if t >= n:
        raise ConfigurationError(
            f'prefix length t={t} is not below n={n}; increase eps or n')
    return s, t


def biased_probability(n, p, eps):
    """Exact ``Pr[f(x) = 1]`` of the biased construction, for every ``x``."""
    s, t = biased_parameters(n, p, eps)
    return Fraction((s >> (n - t)) + 1, 2 ** t)


def biased_function(mgr, block, seed, s, t):
    """Product of the ``t`` parity automata followed by the prefix threshold."""
    n = len(block)
    if len(seed.rows) != t or any(len(row) != n for row in seed.rows):
        raise UsageError('seed does not match block length and t')
    top = s >> (n - t)
    positions = sorted(range(n), key=lambda k: mgr.level_of(block[k]))
    cols = [sum(seed.rows[j][k] << j for j in range(t)) for k in positions]
    leaves = [mgr.constant(_prefix(state, t) <= top) for state in range(1 << t)]
    memo = {}

    def build(d, state):
        if d == n:
            return leaves[state]
        key = (d, state)
        f = memo.get(key)
        if f is None:
            lo = build(d + 1, state)
            hi = build(d + 1, state ^ cols[d])
            f = lo if lo == hi else mgr.node(block[positions[d]], lo, hi)
            memo[key] = f
        return f

    start = sum(b << j for j, b in enumerate(seed.offsets))
    return build(0, start)


def _prefix(state, t):
    # bit j of state is prefix bit j, j = 0 most significant
    return sum(((state >> j) & 1) << (t - 1 - j) for j in range(t))


def random_func_biased(mgr, block, p, eps, rng):
    n = len(block)
    s, t = biased_parameters(n, p, eps)
    rows = tuple(_draw_bits(rng, n) for _ in range(t))
    seed = BiasedSeed(rows, _draw_bits(rng, t))
    return biased_function(mgr, block, seed, s, t), seed


# ----------------------------------------------------------------------
# priorities

@dataclass(frozen=True)
class PrioritySeed:
    """``columns[i]`` is the coefficient vector of bit ``i`` of ``v_x``."""

    columns: tuple
    offset: tuple = None

    def vector(self, x):
        v = 0
        for i, col in enumerate(self.columns):
            bit = bin(value_of(col) & x).count('1') & 1
            if self.offset is not None:
                bit ^= self.offset[i]
            v |= bit << i
        return v

    def hex(self):
        bits = [b for col in self.columns for b in col]
        if self.offset is not None:
            bits += list(self.offset)
        return _bits_hex(bits)


@dataclass
class PriorityFunctions:
    g: object
    gt: object
    index_function: object
    seed: PrioritySeed


def index_bits(n):
    return math.ceil(math.log2(n)) if n > 1 else 0


def priority_layout(n):
    """Manager with index blocks ``i, j`` interleaved on top of ``x, y``.

    Returns ``(mgr, xblock, yblock, iblock, jblock)``.
    """
    if n < 1:
        raise ConfigurationError('n must be positive')
    m = index_bits(n)
    iblock = list(range(0, m))
    jblock = list(range(m, 2 * m))
    xblock = list(range(2 * m, 2 * m + n))
    yblock = list(range(2 * m + n, 2 * m + 2 * n))
    order = [v for pair in zip(iblock, jblock) for v in pair]
    order += [v for pair in zip(xblock, yblock) for v in pair]
    return Manager(2 * m + 2 * n, order), xblock, yblock, iblock, jblock


def priority_functions(mgr, xblock, yblock, iblock, jblock, seed, p):
    """Build ``g_A`` and ``GT_A`` for a fixed seed.

    ``GT_A(x, y) = exists i: f(x,i) & ~f(y,i) & forall j > i: f(x,j) <-> f(y,j)``
    where ``f(x, i)`` is bit ``i`` of ``v_x``; ``g_A`` replaces ``f(y, .)`` by
    the bits of ``ceil(p 2^n) - 1`` and negates, so ``g_A(x) = 1`` iff
    ``|v_x| < ceil(p 2^n)``.
    """
    n = len(xblock)
    if n == 0:
        raise ConfigurationError('blocks must not be empty')
    if len(yblock) != n or len(seed.columns) != n:
        raise UsageError('x/y blocks and seed must have the same length')
    if len(iblock) != index_bits(n) or len(jblock) != len(iblock):
        raise UsageError(f'index blocks must have {index_bits(n)} variables')
    if not 1 / 2 ** n <= p <= 0.5:
        raise ConfigurationError(f'p must lie in [2^-{n}, 1/2], got {p}')
    threshold = math.ceil(round(p * 2 ** n, 9)) - 1
    offset = seed.offset or (0,) * n

    with mgr.untracked():
        index_fn = mgr.false
        bound = mgr.false
        for i, col in enumerate(seed.columns):
            at_i = build_const_eq(mgr, iblock, i)
            index_fn = index_fn | (at_i & build_ip_const(mgr, xblock, col, offset[i]))
            if (threshold >> i) & 1:
                bound = bound | at_i
        j_above_i = build_gt(mgr, jblock, iblock)

    def greater(other):
        # exists i: f(x,i) & ~other(i) & forall j > i: f(x,j) <-> other(j)
        agree = mgr.apply(index_fn, other, 'equiv')
        agree_j = mgr.reorder_args(agree, [iblock, jblock], [1, 0])
        above = mgr.forall(mgr.apply(j_above_i, agree_j, 'implies'), jblock)
        first = mgr.apply(index_fn, other, 'diff') & above
        return mgr.exists(first, iblock)

    index_fn_y = mgr.reorder_args(index_fn, [xblock, yblock], [1, 0])
    gt = greater(index_fn_y)
    g = ~greater(bound)
    return PriorityFunctions(g, gt, index_fn, seed)


def random_priority(mgr, xblock, yblock, iblock, jblock, p, rng, affine=True):
    n = len(xblock)
    if n == 0:
        raise ConfigurationError('blocks must not be empty')
    columns = tuple(_draw_bits(rng, n) for _ in range(n))
    offset = _draw_bits(rng, n) if affine else None
    seed = PrioritySeed(columns, offset)
    return priority_functions(mgr, xblock, yblock, iblock, jblock, seed, p)


# ----------------------------------------------------------------------
# layered random diagrams

def layered_width_bound(n, k, eps):
    """Width from which the layered process is (eps, k)-wise independent."""
    return math.ceil(round(k + n * k * (k + 1) / eps, 9))


@dataclass(frozen=True)
class LayeredObddSpec:
    n: int
    width: int
    p_sink: float = 0.5
    seed: int = None

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError('n must be positive')
        if self.width < 1:
            raise ConfigurationError('width must be at least 1')
        if not 0 <= self.p_sink <= 1:
            raise ConfigurationError('p_sink must be a probability')


@dataclass
class LayeredDiagram:
    """Raw sampled diagram: ``successors[i, u, b]`` is the ``b``-successor in
    layer ``i + 1`` of node ``u`` of layer ``i``; ``sinks[u, b]`` the sink
    reached from layer ``n - 1``."""

    successors: np.ndarray
    sinks: np.ndarray
    root: int

    @property
    def n(self):
        return self.successors.shape[0] + 1

    @property
    def width(self):
        return self.sinks.shape[0]

    def evaluate(self, x):
        """Value on the input with integer encoding ``x`` (bit i = x_i)."""
        u = self.root
        for i in range(self.n - 1):
            u = self.successors[i, u, (x >> i) & 1]
        return int(self.sinks[u, (x >> (self.n - 1)) & 1])

    def truth_table(self):
        return layered_truth_tables(self.successors[None], self.sinks[None],
                                    np.array([self.root]))[0]


def sample_layered(n, width, p_sink, rng, count=None):
    """Sample one diagram, or arrays for ``count`` diagrams at once."""
    shape = () if count is None else (count,)
    dtype = np.int32
    successors = rng.integers(0, width, size=shape + (n - 1, width, 2), dtype=dtype)
    sinks = (rng.random(size=shape + (width, 2)) < p_sink).astype(np.uint8)
    root = rng.integers(0, width, size=shape, dtype=dtype)
    if count is None:
        return LayeredDiagram(successors, sinks, int(root))
    return successors, sinks, root


def layered_truth_tables(successors, sinks, roots):
    """Truth tables ``(count, 2**n)`` of a batch of layered diagrams."""
    count = roots.shape[0]
    n = successors.shape[1] + 1
    xs = np.arange(1 << n)
    rows = np.arange(count)[:, None]
    state = np.broadcast_to(roots[:, None], (count, xs.size))
    for i in range(n - 1):
        state = successors[rows, i, state, (xs >> i) & 1]
    return sinks[rows, state, (xs >> (n - 1)) & 1]


def import_layered(mgr, block, diagram):
    """Canonical handle of a raw diagram; layer ``i`` tests ``block[i]``."""
    n = diagram.n
    if len(block) != n:
        raise UsageError('block length does not match the diagram')
    levels = [mgr.level_of(v) for v in block]
    if levels != sorted(levels):
        raise UsageError('block must be listed in manager order')
    sink = [mgr.false, mgr.true]
    below = [mgr.node(block[-1], sink[lo], sink[hi]) if lo != hi else sink[lo]
             for lo, hi in diagram.sinks.tolist()]
    for i in range(n - 2, -1, -1):
        below = [below[lo] if lo == hi else mgr.node(block[i], below[lo], below[hi])
                 for lo, hi in diagram.successors[i].tolist()]
    return below[diagram.root]


def random_layered_obdd(spec, mgr=None, block=None, rng=None):
    """Sample a layered diagram per ``spec`` and import it.

    Without ``mgr`` a fresh identity-order manager on ``spec.n`` variables is
    used.  Returns ``(function, raw_diagram)``.
    """
    if mgr is None:
        mgr = Manager(spec.n)
        block = list(range(spec.n))
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    diagram = sample_layered(spec.n, spec.width, spec.p_sink, rng)
    return import_layered(mgr, block, diagram), diagram

"""Shared reduced ordered binary decision diagrams.

All nodes of a :class:`Manager` live in one store (a shared OBDD).  Nodes are
hash-consed on ``(level, low, high)`` and redundant tests are never created, so
the store is canonical: two :class:`Function` handles of the same manager are
equal iff they represent the same Boolean function.

Sinks are the node ids ``0`` and ``1``; both sit at level ``num_vars``.
Complemented edges are not used, negation is a memoized traversal.

The manager counts *functional operations* the way implicit graph algorithms
are usually analysed: one per synthesis, negation and restriction, one per
quantified variable, and ``3 (k - 1) n`` per argument reordering of ``k``
blocks of ``n`` variables.  Constructions that build a diagram directly
(:meth:`Manager.node`, :meth:`Manager.from_rows`, and everything done inside
:meth:`Manager.untracked`) are not counted.
"""
import weakref
from contextlib import contextmanager
from dataclasses import dataclass, field

from ._pystore import PyStore

# Binary operators as 4-bit truth tables: bit (2*a + b) holds op(a, b).
FALSE_OP = 0b0000
NOR = 0b0001
AND = 0b1000
DIFF = 0b0100  # a and not b
XOR = 0b0110
OR = 0b1110
NAND = 0b0111
EQUIV = 0b1001
IMPLIES = 0b1011
TRUE_OP = 0b1111

OPERATORS = {
    'and': AND, '&': AND,
    'or': OR, '|': OR,
    'xor': XOR, '^': XOR,
    'nand': NAND,
    'nor': NOR,
    'equiv': EQUIV, '<->': EQUIV,
    'implies': IMPLIES, '->': IMPLIES,
    'diff': DIFF,
}

EXISTS = 'exists'
FORALL = 'forall'


class ObddError(Exception):
    """Base class for errors raised by the OBDD engine."""


class ConfigurationError(ObddError, ValueError):
    """Invalid manager or construction parameters."""


class UsageError(ObddError, ValueError):
    """An operation was called with arguments violating its contract."""


def _as_op(op):
    if isinstance(op, str):
        try:
            return OPERATORS[op.lower()]
        except KeyError:
            raise UsageError(f'unknown operator {op!r}') from None
    if isinstance(op, int) and 0 <= op < 16:
        return op
    raise UsageError(f'operator must be a name or a 4-bit truth table, got {op!r}')


class Function:
    """Handle to a node of a :class:`Manager`.

    Handles are interned per node, so ``f is g`` and ``f == g`` coincide for
    handles of one manager.  The Python operators ``~ & | ^`` map to counted
    functional operations.
    """

    __slots__ = ('manager', 'node', '__weakref__')

    def __init__(self, manager, node):
        self.manager = manager
        self.node = node

    def __repr__(self):
        if self.node < 2:
            return f'Function({self.node})'
        return f'Function(node={self.node}, var={self.var})'

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Function):
            return NotImplemented
        return self.manager is other.manager and self.node == other.node

    def __hash__(self):
        return hash((id(self.manager), self.node))

    def __invert__(self):
        return self.manager.negate(self)

    def __and__(self, other):
        return self.manager.apply(self, other, AND)

    def __or__(self, other):
        return self.manager.apply(self, other, OR)

    def __xor__(self, other):
        return self.manager.apply(self, other, XOR)

    def __call__(self, assignment):
        return self.manager.evaluate(self, assignment)

    @property
    def is_false(self):
        return self.node == 0

    @property
    def is_true(self):
        return self.node == 1

    @property
    def level(self):
        return self.manager._store.level(self.node)

    @property
    def var(self):
        """Variable tested at the root, ``None`` for a constant."""
        if self.node < 2:
            return None
        return self.manager.order[self.manager._store.level(self.node)]

    @property
    def low(self):
        return self.manager._handle(self.manager._store.low(self.node))

    @property
    def high(self):
        return self.manager._handle(self.manager._store.high(self.node))


@dataclass(frozen=True)
class SizeStats:
    live_nodes: int
    peak_live_nodes: int
    op_count: int
    widths: dict = field(default=None)


class Manager:
    """Functional operations, counters and handles over one node store.

    ``order[level]`` is the variable tested at that level; ``order`` defaults
    to the identity.  ``backend`` picks the node store: ``'c'`` (compiled),
    ``'python'``, or ``None`` for the compiled one when it is available.
    A manager and its handles must stay on one thread.
    """

    def __init__(self, num_vars, order=None, backend=None):
        if not isinstance(num_vars, int) or num_vars < 0:
            raise ConfigurationError(f'num_vars must be a non-negative int, got {num_vars!r}')
        order = tuple(range(num_vars)) if order is None else tuple(order)
        if sorted(order) != list(range(num_vars)):
            raise ConfigurationError(
                f'order must be a permutation of 0..{num_vars - 1}, got {order!r}')
        self.num_vars = num_vars
        self.order = order
        self._var_level = [0] * num_vars
        for level, var in enumerate(order):
            self._var_level[var] = level
        self._store = _make_store(num_vars, backend)
        self.backend = 'python' if isinstance(self._store, PyStore) else 'c'
        self._handles = weakref.WeakValueDictionary()
        self._counting = True
        self.op_count = 0
        self.peak_live_nodes = 2

    def __repr__(self):
        return (f'Manager(num_vars={self.num_vars}, live={self.live_nodes}, '
                f'ops={self.op_count})')

    # ------------------------------------------------------------------
    # store plumbing

    @property
    def live_nodes(self):
        return self._store.live

    @property
    def false(self):
        return self._handle(0)

    @property
    def true(self):
        return self._handle(1)

    def constant(self, value):
        return self._handle(1 if value else 0)

    def level_of(self, var):
        self._check_var(var)
        return self._var_level[var]

    def _handle(self, node):
        h = self._handles.get(node)
        if h is None:
            h = Function(self, node)
            self._handles[node] = h
        return h

    def _check(self, f):
        if not isinstance(f, Function):
            raise UsageError(f'expected a Function, got {type(f).__name__}')
        if f.manager is not self:
            raise UsageError('function belongs to a different manager')

    def _check_var(self, var):
        if not isinstance(var, int) or not 0 <= var < self.num_vars:
            raise UsageError(f'variable index {var!r} out of range 0..{self.num_vars - 1}')

    def _levels(self, variables):
        variables = set(variables)
        for v in variables:
            self._check_var(v)
        return variables, [self._var_level[v] for v in variables]

    def _result(self, node, cost=1):
        if self._counting:
            self.op_count += cost
        live = self._store.live
        if live > self.peak_live_nodes:
            self.peak_live_nodes = live
        return self._handle(node)

    @contextmanager
    def untracked(self):
        """Suspend functional-operation counting (peak size is still sampled)."""
        prev = self._counting
        self._counting = False
        try:
            yield self
        finally:
            self._counting = prev

    def reset_peak(self):
        self.peak_live_nodes = self.live_nodes

    def collect_garbage(self):
        """Free every node not reachable from a live handle; clear caches.

        Returns the number of freed nodes.
        """
        return self._store.gc([h.node for h in list(self._handles.values())])

    # ------------------------------------------------------------------
    # direct construction (not counted)

    def var(self, i):
        """Projection function of variable ``i``."""
        self._check_var(i)
        return self._result(self._store.mk(self._var_level[i], 0, 1), cost=0)

    def node(self, var, low, high):
        """Function ``var ? high : low``; both children must lie below ``var``."""
        self._check_var(var)
        self._check(low)
        self._check(high)
        level = self._var_level[var]
        store = self._store
        if store.level(low.node) <= level or store.level(high.node) <= level:
            raise UsageError(f'children must be below variable {var} in the order')
        return self._result(store.mk(level, low.node, high.node), cost=0)

    def from_rows(self, variables, rows):
        """Disjunction of the minterms ``rows`` over ``variables``.

        Each row is a sequence of bits aligned with ``variables``.  Built by a
        single recursive split, so the cost is linear in the number of rows.
        """
        variables = list(variables)
        for v in variables:
            self._check_var(v)
        if len(set(variables)) != len(variables):
            raise UsageError('variables must be distinct')
        cols = sorted(range(len(variables)), key=lambda j: self._var_level[variables[j]])
        levels = [self._var_level[variables[j]] for j in cols]
        depth = len(cols)
        mk = self._store.mk

        def build(d, rs):
            if not rs:
                return 0
            if d == depth:
                return 1
            c = cols[d]
            zeros = [r for r in rs if not r[c]]
            ones = [r for r in rs if r[c]]
            return mk(levels[d], build(d + 1, zeros), build(d + 1, ones))

        rows = [tuple(r) for r in rows]
        for r in rows:
            if len(r) != len(variables):
                raise UsageError('row length does not match the variable list')
        return self._result(build(0, rows), cost=0)

    # ------------------------------------------------------------------
    # functional operations (counted)

    def apply(self, f, g, op):
        """Synthesis ``f op g`` for a binary operator name or truth table."""
        op = _as_op(op)
        self._check(f)
        self._check(g)
        return self._result(self._store.apply(op, f.node, g.node))

    def negate(self, f):
        self._check(f)
        return self._result(self._store.not_(f.node))

    def restrict(self, f, var, value):
        """Subfunction with variable ``var`` replaced by the constant ``value``."""
        self._check(f)
        self._check_var(var)
        return self._result(self._store.restrict(f.node, self._var_level[var], value))

    def quantify(self, f, variables, q=EXISTS):
        """Quantify ``variables`` away; costs one operation per variable."""
        self._check(f)
        if q not in (EXISTS, FORALL):
            raise UsageError(f'quantifier must be {EXISTS!r} or {FORALL!r}, got {q!r}')
        variables, levels = self._levels(variables)
        if not variables:
            return f
        node = self._store.quant(f.node, levels, q == EXISTS)
        return self._result(node, cost=len(variables))

    def and_exists(self, f, g, variables):
        """``exists variables: f & g`` in one pass.

        Charged as the conjunction plus one operation per variable, i.e. the
        same as ``exists(f & g, variables)``, but the conjunction is never
        materialized.
        """
        self._check(f)
        self._check(g)
        variables, levels = self._levels(variables)
        if not variables:
            return self.apply(f, g, AND)
        node = self._store.and_exists(f.node, g.node, levels)
        return self._result(node, cost=1 + len(variables))

    def exists(self, f, variables):
        return self.quantify(f, variables, EXISTS)

    def forall(self, f, variables):
        return self.quantify(f, variables, FORALL)

    def reorder_args(self, f, blocks, rho):
        """Argument reordering: slot ``j`` of ``f`` receives block ``rho[j]``.

        ``blocks`` are disjoint, equal-length variable lists; variables outside
        the blocks are left alone.  Implemented as one renaming pass; charged
        ``3 (k - 1) n`` operations where ``k`` counts the blocks that move.
        """
        self._check(f)
        blocks = [list(b) for b in blocks]
        rho = list(rho)
        if sorted(rho) != list(range(len(blocks))):
            raise UsageError(f'rho must permute 0..{len(blocks) - 1}, got {rho!r}')
        if blocks and len({len(b) for b in blocks}) != 1:
            raise UsageError('blocks must have equal length')
        flat = [v for b in blocks for v in b]
        for v in flat:
            self._check_var(v)
        if len(set(flat)) != len(flat):
            raise UsageError('blocks overlap')
        moved = sum(1 for j, target in enumerate(rho) if target != j)
        if moved == 0:
            return f
        n = len(blocks[0])
        level_map = list(range(self.num_vars + 1))
        for j, block in enumerate(blocks):
            for t, v in enumerate(block):
                level_map[self._var_level[v]] = self._var_level[blocks[rho[j]][t]]
        node = self._store.rename(f.node, level_map)
        return self._result(node, cost=3 * (moved - 1) * n)

    # ------------------------------------------------------------------
    # queries (not counted)

    def equal(self, f, g):
        self._check(f)
        self._check(g)
        return f.node == g.node

    def evaluate(self, f, assignment):
        """Value of ``f`` where ``assignment[i]`` is the value of variable ``i``."""
        self._check(f)
        if len(assignment) != self.num_vars:
            raise UsageError(
                f'assignment has length {len(assignment)}, expected {self.num_vars}')
        by_level = [assignment[v] for v in self.order]
        return self._store.evaluate(f.node, by_level)

    def nodes(self, f):
        """Nodes of ``f`` as ``(id, level, low, high)``, children first."""
        self._check(f)
        return self._store.dump(f.node)

    def support(self, f):
        """Set of variables ``f`` depends on essentially."""
        return {self.order[lv] for u, lv, _, _ in self.nodes(f) if u > 1}

    def dag_size(self, f):
        """Number of nodes of the diagram of ``f``, sinks included."""
        return len(self.nodes(f))

    def widths(self, f):
        """Map ``variable -> number of nodes of f labelled by it``."""
        out = {}
        for u, lv, _, _ in self.nodes(f):
            if u > 1:
                var = self.order[lv]
                out[var] = out.get(var, 0) + 1
        return out

    def width(self, f):
        return max(self.widths(f).values(), default=0)

    def sat_count(self, f, support):
        """Number of satisfying assignments over ``support``.

        ``support`` is either a variable count (variables ``0..k-1``) or an
        iterable of variable indices; it must contain the support of ``f``.
        """
        self._check(f)
        scope = set(range(support)) if isinstance(support, int) else set(support)
        for v in scope:
            self._check_var(v)
        nodes = self.nodes(f)
        missing = {self.order[lv] for u, lv, _, _ in nodes if u > 1} - scope
        if missing:
            raise UsageError(f'support is missing essential variables {sorted(missing)}')
        level = {0: self.num_vars, 1: self.num_vars}
        count = {0: 0, 1: 1}
        for u, lu, lo, hi in nodes:
            level[u] = lu
            if u > 1:
                count[u] = ((count[lo] << (level[lo] - lu - 1))
                            + (count[hi] << (level[hi] - lu - 1)))
        root = f.node
        total = count[root] << level[root]
        return total >> (self.num_vars - len(scope))

    def cubes(self, f):
        """Yield the root-to-1 paths of ``f`` as dicts ``var -> bit``."""
        self._check(f)
        table = {u: (lv, lo, hi) for u, lv, lo, hi in self._store.dump(f.node)}
        order = self.order

        def walk(u, path):
            if u == 0:
                return
            if u == 1:
                yield dict(path)
                return
            lv, lo, hi = table[u]
            var = order[lv]
            path.append((var, 0))
            yield from walk(lo, path)
            path[-1] = (var, 1)
            yield from walk(hi, path)
            path.pop()

        yield from walk(f.node, [])

    def stats(self, f=None):
        return SizeStats(self.live_nodes, self.peak_live_nodes, self.op_count,
                         None if f is None else self.widths(f))


def _make_store(num_vars, backend):
    if backend not in (None, 'c', 'python'):
        raise ConfigurationError(f"backend must be 'c', 'python' or None, got {backend!r}")
    if backend != 'python':
        try:
            from ._cstore import CStore
        except ImportError:
            if backend == 'c':
                raise ConfigurationError('compiled store is not built') from None
        else:
            return CStore(num_vars)
    return PyStore(num_vars)


def mk_manager(num_vars, order=None, backend=None):
    return Manager(num_vars, order, backend)

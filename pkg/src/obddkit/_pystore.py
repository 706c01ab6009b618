"""Pure Python node store, used when the compiled store is unavailable.

Both stores expose the same interface on integer node ids; ``0`` and ``1``
are the sinks and sit at level ``num_vars``.
"""

AND = 0b1000
OR = 0b1110


class PyStore:
    def __init__(self, num_vars):
        self.num_vars = num_vars
        self._level = [num_vars, num_vars]
        self._low = [0, 1]
        self._high = [0, 1]
        self._unique = {}
        self._free = []
        self.clear_caches()

    def clear_caches(self):
        self._apply_cache = {}
        self._and_cache = {}
        self._or_cache = {}
        self._not_cache = {}
        self._ite_cache = {}

    @property
    def live(self):
        return len(self._unique) + 2

    def level(self, u):
        return self._level[u]

    def low(self, u):
        return self._low[u]

    def high(self, u):
        return self._high[u]

    def mk(self, level, low, high):
        if low == high:
            return low
        key = (level, low, high)
        u = self._unique.get(key)
        if u is None:
            if self._free:
                u = self._free.pop()
                self._level[u] = level
                self._low[u] = low
                self._high[u] = high
            else:
                u = len(self._level)
                self._level.append(level)
                self._low.append(low)
                self._high.append(high)
            self._unique[key] = u
        return u

    def gc(self, roots):
        """Free every node not reachable from ``roots``; returns the count."""
        low, high = self._low, self._high
        marked = {0, 1}
        stack = list(roots)
        while stack:
            u = stack.pop()
            if u in marked:
                continue
            marked.add(u)
            stack.append(low[u])
            stack.append(high[u])
        dead = [key for key, u in self._unique.items() if u not in marked]
        for key in dead:
            self._free.append(self._unique.pop(key))
        self._free.sort(reverse=True)
        self.clear_caches()
        return len(dead)

    def dump(self, root):
        """Reachable nodes as ``(u, level, low, high)``, children before parents."""
        out = []
        seen = set()
        stack = [(root, False)]
        level, low, high = self._level, self._low, self._high
        while stack:
            u, expanded = stack.pop()
            if expanded:
                out.append((u, level[u], low[u], high[u]))
                continue
            if u in seen:
                continue
            seen.add(u)
            stack.append((u, True))
            if u > 1:
                stack.append((high[u], False))
                stack.append((low[u], False))
        return out

    def evaluate(self, u, level_values):
        level, low, high = self._level, self._low, self._high
        while u > 1:
            u = high[u] if level_values[level[u]] else low[u]
        return u

    # ------------------------------------------------------------------
    # kernels

    def not_(self, u):
        if u < 2:
            return 1 - u
        cache = self._not_cache
        r = cache.get(u)
        if r is None:
            r = self.mk(self._level[u], self.not_(self._low[u]), self.not_(self._high[u]))
            cache[u] = r
            cache[r] = u
        return r

    def _unary(self, code, u):
        # code bit 0: value for input 0, bit 1: value for input 1
        if code == 0:
            return 0
        if code == 3:
            return 1
        if code == 2:
            return u
        return self.not_(u)

    def and_(self, u, v):
        if u == 0 or v == 0:
            return 0
        if u == 1 or u == v:
            return v
        if v == 1:
            return u
        if u > v:
            u, v = v, u
        key = (u << 32) | v
        cache = self._and_cache
        r = cache.get(key)
        if r is not None:
            return r
        level = self._level
        lu = level[u]
        lv = level[v]
        if lu == lv:
            r = self.mk(lu, self.and_(self._low[u], self._low[v]),
                        self.and_(self._high[u], self._high[v]))
        elif lu < lv:
            r = self.mk(lu, self.and_(self._low[u], v), self.and_(self._high[u], v))
        else:
            r = self.mk(lv, self.and_(u, self._low[v]), self.and_(u, self._high[v]))
        cache[key] = r
        return r

    def or_(self, u, v):
        if u == 1 or v == 1:
            return 1
        if u == 0 or u == v:
            return v
        if v == 0:
            return u
        if u > v:
            u, v = v, u
        key = (u << 32) | v
        cache = self._or_cache
        r = cache.get(key)
        if r is not None:
            return r
        level = self._level
        lu = level[u]
        lv = level[v]
        if lu == lv:
            r = self.mk(lu, self.or_(self._low[u], self._low[v]),
                        self.or_(self._high[u], self._high[v]))
        elif lu < lv:
            r = self.mk(lu, self.or_(self._low[u], v), self.or_(self._high[u], v))
        else:
            r = self.mk(lv, self.or_(u, self._low[v]), self.or_(u, self._high[v]))
        cache[key] = r
        return r

    def apply(self, op, u, v):
        if op == AND:
            return self.and_(u, v)
        if op == OR:
            return self.or_(u, v)
        if u < 2:
            if v < 2:
                return (op >> (2 * u + v)) & 1
            return self._unary((op >> (2 * u)) & 3, v)
        if v < 2:
            return self._unary(((op >> v) & 1) | (((op >> (2 + v)) & 1) << 1), u)
        if u == v:
            return self._unary((op & 1) | (((op >> 3) & 1) << 1), u)
        if u > v and ((op >> 1) ^ (op >> 2)) & 1 == 0:
            u, v = v, u
        key = (op, u, v)
        cache = self._apply_cache
        r = cache.get(key)
        if r is not None:
            return r
        level = self._level
        lu = level[u]
        lv = level[v]
        if lu == lv:
            top = lu
            u0, u1 = self._low[u], self._high[u]
            v0, v1 = self._low[v], self._high[v]
        elif lu < lv:
            top = lu
            u0, u1 = self._low[u], self._high[u]
            v0 = v1 = v
        else:
            top = lv
            u0 = u1 = u
            v0, v1 = self._low[v], self._high[v]
        r = self.mk(top, self.apply(op, u0, v0), self.apply(op, u1, v1))
        cache[key] = r
        return r

    def restrict(self, u, level, value):
        memo = {}

        def rec(u):
            lu = self._level[u]
            if lu > level:
                return u
            if lu == level:
                return self._high[u] if value else self._low[u]
            r = memo.get(u)
            if r is None:
                r = self.mk(lu, rec(self._low[u]), rec(self._high[u]))
                memo[u] = r
            return r

        return rec(u)

    def _quant(self, u, levels, last, is_or, memo):
        lu = self._level[u]
        if lu > last:
            return u
        r = memo.get(u)
        if r is None:
            lo = self._quant(self._low[u], levels, last, is_or, memo)
            if lu in levels and lo == (1 if is_or else 0):
                r = lo
            else:
                hi = self._quant(self._high[u], levels, last, is_or, memo)
                if lu in levels:
                    r = self.or_(lo, hi) if is_or else self.and_(lo, hi)
                else:
                    r = self.mk(lu, lo, hi)
            memo[u] = r
        return r

    def quant(self, u, levels, is_or):
        levels = frozenset(levels)
        return self._quant(u, levels, max(levels), is_or, {})

    def _and_exists(self, u, v, levels, last, memo, qmemo):
        if u == 0 or v == 0:
            return 0
        if u == 1 or u == v:
            return self._quant(v, levels, last, True, qmemo)
        if v == 1:
            return self._quant(u, levels, last, True, qmemo)
        if u > v:
            u, v = v, u
        key = (u, v)
        r = memo.get(key)
        if r is not None:
            return r
        level = self._level
        lu = level[u]
        lv = level[v]
        top = lu if lu < lv else lv
        if top > last:
            r = self.and_(u, v)
        else:
            u0, u1 = (self._low[u], self._high[u]) if lu == top else (u, u)
            v0, v1 = (self._low[v], self._high[v]) if lv == top else (v, v)
            r0 = self._and_exists(u0, v0, levels, last, memo, qmemo)
            if top in levels:
                if r0 == 1:
                    r = 1
                else:
                    r = self.or_(r0, self._and_exists(u1, v1, levels, last, memo, qmemo))
            else:
                r = self.mk(top, r0, self._and_exists(u1, v1, levels, last, memo, qmemo))
        memo[key] = r
        return r

    def and_exists(self, u, v, levels):
        levels = frozenset(levels)
        return self._and_exists(u, v, levels, max(levels), {}, {})

    def _ite_var(self, level, lo, hi):
        # function "x_level ? hi : lo" for arbitrary lo, hi
        if lo == hi:
            return lo
        node_level = self._level
        ll = node_level[lo]
        lh = node_level[hi]
        if level < ll and level < lh:
            return self.mk(level, lo, hi)
        key = (level, lo, hi)
        r = self._ite_cache.get(key)
        if r is not None:
            return r
        top = ll if ll < lh else lh
        if top == level:
            lo0 = self._low[lo] if ll == level else lo
            hi1 = self._high[hi] if lh == level else hi
            r = self.mk(level, lo0, hi1)
        else:
            lo0, lo1 = (self._low[lo], self._high[lo]) if ll == top else (lo, lo)
            hi0, hi1 = (self._low[hi], self._high[hi]) if lh == top else (hi, hi)
            r = self.mk(top, self._ite_var(level, lo0, hi0), self._ite_var(level, lo1, hi1))
        self._ite_cache[key] = r
        return r

    def rename(self, u, level_map):
        """Relabel level ``l`` as ``level_map[l]`` (a permutation of levels)."""
        memo = {}

        def rec(u):
            if u < 2:
                return u
            r = memo.get(u)
            if r is None:
                lo = rec(self._low[u])
                hi = rec(self._high[u])
                r = self._ite_var(level_map[self._level[u]], lo, hi)
                memo[u] = r
            return r

        return rec(u)

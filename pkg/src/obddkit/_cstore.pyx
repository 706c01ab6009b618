# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled node store with the same interface as :class:`PyStore`.

Nodes live in flat arrays, the unique table is a chained hash table, and the
operation caches are direct-mapped and lossy (a miss only costs time).
Per-call memo tables are tagged with a generation counter so that they never
need clearing between calls.
"""
from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memset
from libc.stdint cimport int32_t, int64_t, uint32_t, uint64_t

ctypedef int32_t nid

cdef struct Entry:
    nid a
    nid b
    nid r
    uint32_t tag

cdef enum:
    AND_OP = 0b1000
    OR_OP = 0b1110
    NOT_TAG = 16
    ITE_TAG = 32          # ITE_TAG + level
    K_RESTRICT = 1
    K_QUANT = 2
    K_ANDEX = 3
    K_RENAME = 4
    MIN_CACHE_BITS = 16
    MAX_CACHE_BITS = 22


cdef inline uint64_t _hash(uint64_t a, uint64_t b, uint64_t c) nogil:
    cdef uint64_t x = (a * <uint64_t>0x9E3779B97F4A7C15ULL) ^ (b * <uint64_t>0xC2B2AE3D27D4EB4FULL) \
        ^ (c * <uint64_t>0x165667B19E3779F9ULL)
    x ^= x >> 31
    x *= <uint64_t>0xBF58476D1CE4E5B9ULL
    x ^= x >> 29
    return x


cdef Entry* _new_table(uint64_t size) except NULL:
    cdef Entry* t = <Entry*>malloc(size * sizeof(Entry))
    if t == NULL:
        raise MemoryError()
    memset(t, 0xFF, size * sizeof(Entry))
    return t


cdef class CStore:
    cdef readonly int num_vars
    cdef nid* _lv
    cdef nid* _lo
    cdef nid* _hi
    cdef nid* _next
    cdef nid* _bucket
    cdef uint64_t _nbuckets
    cdef nid _size
    cdef nid _cap
    cdef nid* _free
    cdef nid _nfree
    cdef nid _free_cap
    cdef int64_t _live
    cdef Entry* _cache
    cdef uint64_t _cache_size
    cdef Entry* _memo
    cdef uint64_t _memo_size
    cdef uint32_t _gen
    cdef char* _qlevels
    cdef nid _qlast
    cdef bint _qor
    cdef nid* _lmap
    cdef nid _rlevel
    cdef int _rvalue

    def __cinit__(self, int num_vars):
        self.num_vars = num_vars
        self._cap = 1024
        self._lv = <nid*>malloc(self._cap * sizeof(nid))
        self._lo = <nid*>malloc(self._cap * sizeof(nid))
        self._hi = <nid*>malloc(self._cap * sizeof(nid))
        self._next = <nid*>malloc(self._cap * sizeof(nid))
        self._free_cap = 1024
        self._free = <nid*>malloc(self._free_cap * sizeof(nid))
        self._nbuckets = 1024
        self._bucket = <nid*>malloc(self._nbuckets * sizeof(nid))
        self._qlevels = <char*>malloc(num_vars + 1)
        self._lmap = <nid*>malloc((num_vars + 1) * sizeof(nid))
        if (self._lv == NULL or self._lo == NULL or self._hi == NULL or self._next == NULL
                or self._free == NULL or self._bucket == NULL or self._qlevels == NULL
                or self._lmap == NULL):
            raise MemoryError()
        memset(self._bucket, 0, self._nbuckets * sizeof(nid))
        for u in range(2):
            self._lv[u] = num_vars
            self._lo[u] = u
            self._hi[u] = u
            self._next[u] = 0
        self._size = 2
        self._nfree = 0
        self._live = 2
        self._cache_size = 1 << MIN_CACHE_BITS
        self._cache = _new_table(self._cache_size)
        self._memo_size = 1 << MIN_CACHE_BITS
        self._memo = _new_table(self._memo_size)
        self._gen = 1

    def __dealloc__(self):
        free(self._lv)
        free(self._lo)
        free(self._hi)
        free(self._next)
        free(self._free)
        free(self._bucket)
        free(self._cache)
        free(self._memo)
        free(self._qlevels)
        free(self._lmap)

    # ------------------------------------------------------------------
    # plumbing

    @property
    def live(self):
        return self._live

    def level(self, nid u):
        self._check_id(u)
        return self._lv[u]

    def low(self, nid u):
        self._check_id(u)
        return self._lo[u]

    def high(self, nid u):
        self._check_id(u)
        return self._hi[u]

    cdef int _check_id(self, nid u) except -1:
        if u < 0 or u >= self._size or self._lv[u] < 0:
            raise IndexError(f'no live node {u}')
        return 0

    cdef int _grow_nodes(self) except -1:
        cdef nid cap = self._cap * 2
        cdef nid* lv = <nid*>realloc(self._lv, cap * sizeof(nid))
        if lv == NULL:
            raise MemoryError()
        self._lv = lv
        cdef nid* lo = <nid*>realloc(self._lo, cap * sizeof(nid))
        if lo == NULL:
            raise MemoryError()
        self._lo = lo
        cdef nid* hi = <nid*>realloc(self._hi, cap * sizeof(nid))
        if hi == NULL:
            raise MemoryError()
        self._hi = hi
        cdef nid* nx = <nid*>realloc(self._next, cap * sizeof(nid))
        if nx == NULL:
            raise MemoryError()
        self._next = nx
        self._cap = cap
        return 0

    cdef int _rehash(self, uint64_t nbuckets) except -1:
        cdef nid* b = <nid*>malloc(nbuckets * sizeof(nid))
        if b == NULL:
            raise MemoryError()
        memset(b, 0, nbuckets * sizeof(nid))
        cdef uint64_t mask = nbuckets - 1
        cdef uint64_t h
        cdef nid u
        for u in range(2, self._size):
            if self._lv[u] >= 0:
                h = _hash(self._lv[u], self._lo[u], self._hi[u]) & mask
                self._next[u] = b[h]
                b[h] = u
        free(self._bucket)
        self._bucket = b
        self._nbuckets = nbuckets
        return 0

    cdef nid _mk(self, nid level, nid lo, nid hi) except -1:
        if lo == hi:
            return lo
        cdef uint64_t h = _hash(level, lo, hi) & (self._nbuckets - 1)
        cdef nid u = self._bucket[h]
        while u != 0:
            if self._lv[u] == level and self._lo[u] == lo and self._hi[u] == hi:
                return u
            u = self._next[u]
        if self._nfree > 0:
            self._nfree -= 1
            u = self._free[self._nfree]
        else:
            if self._size == self._cap:
                self._grow_nodes()
            u = self._size
            self._size += 1
        self._lv[u] = level
        self._lo[u] = lo
        self._hi[u] = hi
        self._next[u] = self._bucket[h]
        self._bucket[h] = u
        self._live += 1
        if <uint64_t>self._live > self._nbuckets:
            self._rehash(self._nbuckets * 2)
        return u

    def mk(self, nid level, nid low, nid high):
        return self._mk(level, low, high)

    cdef int _fit_tables(self) except -1:
        # called at the start of a public operation, never during recursion
        cdef uint64_t want = self._cache_size
        while want < <uint64_t>self._live and want < (1ULL << MAX_CACHE_BITS):
            want *= 2
        if want != self._cache_size:
            free(self._cache)
            self._cache = NULL
            self._cache_size = want
            self._cache = _new_table(want)
        want = self._memo_size
        while want < <uint64_t>self._live and want < (1ULL << MAX_CACHE_BITS):
            want *= 2
        if want != self._memo_size:
            free(self._memo)
            self._memo = NULL
            self._memo_size = want
            self._memo = _new_table(want)
            self._gen = 1
        return 0

    cdef int _next_gen(self) except -1:
        self._fit_tables()
        self._gen += 1
        if self._gen >= (1U << 28):
            memset(self._memo, 0xFF, self._memo_size * sizeof(Entry))
            self._gen = 1
        return 0

    def clear_caches(self):
        memset(self._cache, 0xFF, self._cache_size * sizeof(Entry))
        memset(self._memo, 0xFF, self._memo_size * sizeof(Entry))
        self._gen = 1

    def gc(self, roots):
        """Free every node not reachable from ``roots``; returns the count."""
        cdef char* marked = <char*>malloc(self._size)
        if marked == NULL:
            raise MemoryError()
        memset(marked, 0, self._size)
        marked[0] = 1
        marked[1] = 1
        stack = []
        cdef nid u
        cdef nid freed = 0
        try:
            for r in roots:
                stack.append(int(r))
            while stack:
                u = stack.pop()
                if marked[u]:
                    continue
                marked[u] = 1
                stack.append(self._lo[u])
                stack.append(self._hi[u])
            for u in range(self._size - 1, 1, -1):
                if self._lv[u] >= 0 and not marked[u]:
                    self._lv[u] = -1
                    self._push_free(u)
                    freed += 1
        finally:
            free(marked)
        self._live -= freed
        self._rehash(self._nbuckets)
        self.clear_caches()
        return freed

    cdef int _push_free(self, nid u) except -1:
        cdef nid* f
        if self._nfree == self._free_cap:
            f = <nid*>realloc(self._free, 2 * self._free_cap * sizeof(nid))
            if f == NULL:
                raise MemoryError()
            self._free = f
            self._free_cap *= 2
        self._free[self._nfree] = u
        self._nfree += 1
        return 0

    def dump(self, nid root):
        """Reachable nodes as ``(u, level, low, high)``, children before parents."""
        self._check_id(root)
        out = []
        seen = set()
        stack = [(root, False)]
        while stack:
            u, expanded = stack.pop()
            if expanded:
                out.append((u, self._lv[u], self._lo[u], self._hi[u]))
                continue
            if u in seen:
                continue
            seen.add(u)
            stack.append((u, True))
            if u > 1:
                stack.append((self._hi[u], False))
                stack.append((self._lo[u], False))
        return out

    def evaluate(self, nid u, level_values):
        self._check_id(u)
        while u > 1:
            u = self._hi[u] if level_values[self._lv[u]] else self._lo[u]
        return u

    # ------------------------------------------------------------------
    # kernels

    cdef inline Entry* _slot(self, nid a, nid b, uint32_t tag):
        return &self._cache[_hash(a, b, tag) & (self._cache_size - 1)]

    cdef inline Entry* _mslot(self, nid a, nid b, uint32_t tag):
        return &self._memo[_hash(a, b, tag) & (self._memo_size - 1)]

    cdef nid _not(self, nid u) except -1:
        if u < 2:
            return 1 - u
        cdef Entry* e = self._slot(u, 0, NOT_TAG)
        if e.a == u and e.b == 0 and e.tag == NOT_TAG:
            return e.r
        cdef nid r0 = self._not(self._lo[u])
        cdef nid r1 = self._not(self._hi[u])
        cdef nid r = self._mk(self._lv[u], r0, r1)
        e = self._slot(u, 0, NOT_TAG)
        e.a = u
        e.b = 0
        e.r = r
        e.tag = NOT_TAG
        return r

    cdef nid _and(self, nid u, nid v) except -1:
        cdef nid t, top, r0, r1, r
        if u == 0 or v == 0:
            return 0
        if u == 1 or u == v:
            return v
        if v == 1:
            return u
        if u > v:
            t = u
            u = v
            v = t
        cdef Entry* e = self._slot(u, v, AND_OP)
        if e.a == u and e.b == v and e.tag == AND_OP:
            return e.r
        cdef nid lu = self._lv[u]
        cdef nid lv = self._lv[v]
        if lu == lv:
            top = lu
            r0 = self._and(self._lo[u], self._lo[v])
            r1 = self._and(self._hi[u], self._hi[v])
        elif lu < lv:
            top = lu
            r0 = self._and(self._lo[u], v)
            r1 = self._and(self._hi[u], v)
        else:
            top = lv
            r0 = self._and(u, self._lo[v])
            r1 = self._and(u, self._hi[v])
        r = self._mk(top, r0, r1)
        e = self._slot(u, v, AND_OP)
        e.a = u
        e.b = v
        e.r = r
        e.tag = AND_OP
        return r

    cdef nid _or(self, nid u, nid v) except -1:
        cdef nid t, top, r0, r1, r
        if u == 1 or v == 1:
            return 1
        if u == 0 or u == v:
            return v
        if v == 0:
            return u
        if u > v:
            t = u
            u = v
            v = t
        cdef Entry* e = self._slot(u, v, OR_OP)
        if e.a == u and e.b == v and e.tag == OR_OP:
            return e.r
        cdef nid lu = self._lv[u]
        cdef nid lv = self._lv[v]
        if lu == lv:
            top = lu
            r0 = self._or(self._lo[u], self._lo[v])
            r1 = self._or(self._hi[u], self._hi[v])
        elif lu < lv:
            top = lu
            r0 = self._or(self._lo[u], v)
            r1 = self._or(self._hi[u], v)
        else:
            top = lv
            r0 = self._or(u, self._lo[v])
            r1 = self._or(u, self._hi[v])
        r = self._mk(top, r0, r1)
        e = self._slot(u, v, OR_OP)
        e.a = u
        e.b = v
        e.r = r
        e.tag = OR_OP
        return r

    cdef nid _unary(self, int code, nid u) except -1:
        if code == 0:
            return 0
        if code == 3:
            return 1
        if code == 2:
            return u
        return self._not(u)

    cdef nid _apply(self, int op, nid u, nid v) except -1:
        cdef nid t, top, u0, u1, v0, v1, r0, r1, r
        if op == AND_OP:
            return self._and(u, v)
        if op == OR_OP:
            return self._or(u, v)
        if u < 2:
            if v < 2:
                return (op >> (2 * u + v)) & 1
            return self._unary((op >> (2 * u)) & 3, v)
        if v < 2:
            return self._unary(((op >> v) & 1) | (((op >> (2 + v)) & 1) << 1), u)
        if u == v:
            return self._unary((op & 1) | (((op >> 3) & 1) << 1), u)
        if u > v and ((op >> 1) ^ (op >> 2)) & 1 == 0:
            t = u
            u = v
            v = t
        cdef Entry* e = self._slot(u, v, op)
        if e.a == u and e.b == v and e.tag == <uint32_t>op:
            return e.r
        cdef nid lu = self._lv[u]
        cdef nid lv = self._lv[v]
        if lu == lv:
            top = lu
            u0 = self._lo[u]
            u1 = self._hi[u]
            v0 = self._lo[v]
            v1 = self._hi[v]
        elif lu < lv:
            top = lu
            u0 = self._lo[u]
            u1 = self._hi[u]
            v0 = v
            v1 = v
        else:
            top = lv
            u0 = u
            u1 = u
            v0 = self._lo[v]
            v1 = self._hi[v]
        r0 = self._apply(op, u0, v0)
        r1 = self._apply(op, u1, v1)
        r = self._mk(top, r0, r1)
        e = self._slot(u, v, op)
        e.a = u
        e.b = v
        e.r = r
        e.tag = op
        return r

    def not_(self, nid u):
        self._check_id(u)
        self._fit_tables()
        return self._not(u)

    def and_(self, nid u, nid v):
        self._check_id(u)
        self._check_id(v)
        self._fit_tables()
        return self._and(u, v)

    def or_(self, nid u, nid v):
        self._check_id(u)
        self._check_id(v)
        self._fit_tables()
        return self._or(u, v)

    def apply(self, int op, nid u, nid v):
        self._check_id(u)
        self._check_id(v)
        self._fit_tables()
        return self._apply(op, u, v)

    # per-call traversals ----------------------------------------------

    cdef nid _restrict(self, nid u) except -1:
        cdef nid lu = self._lv[u]
        if lu > self._rlevel:
            return u
        if lu == self._rlevel:
            return self._hi[u] if self._rvalue else self._lo[u]
        cdef uint32_t tag = (self._gen << 3) | K_RESTRICT
        cdef Entry* e = self._mslot(u, 0, tag)
        if e.a == u and e.tag == tag:
            return e.r
        cdef nid r0 = self._restrict(self._lo[u])
        cdef nid r1 = self._restrict(self._hi[u])
        cdef nid r = self._mk(lu, r0, r1)
        e = self._mslot(u, 0, tag)
        e.a = u
        e.b = 0
        e.r = r
        e.tag = tag
        return r

    def restrict(self, nid u, nid level, value):
        self._check_id(u)
        self._next_gen()
        self._rlevel = level
        self._rvalue = 1 if value else 0
        return self._restrict(u)

    cdef int _set_levels(self, levels) except -1:
        memset(self._qlevels, 0, self.num_vars + 1)
        self._qlast = -1
        for l in levels:
            if not 0 <= l < self.num_vars:
                raise ValueError(f'level {l} out of range')
            self._qlevels[<nid>l] = 1
            if l > self._qlast:
                self._qlast = l
        return 0

    cdef nid _quant(self, nid u) except -1:
        cdef nid lu = self._lv[u]
        if lu > self._qlast:
            return u
        cdef uint32_t tag = (self._gen << 3) | K_QUANT
        cdef Entry* e = self._mslot(u, 0, tag)
        if e.a == u and e.tag == tag:
            return e.r
        cdef nid lo = self._quant(self._lo[u])
        cdef nid hi
        cdef nid r
        if self._qlevels[lu] and ((self._qor and lo == 1) or (not self._qor and lo == 0)):
            r = lo
        else:
            hi = self._quant(self._hi[u])
            if self._qlevels[lu]:
                r = self._or(lo, hi) if self._qor else self._and(lo, hi)
            else:
                r = self._mk(lu, lo, hi)
        e = self._mslot(u, 0, tag)
        e.a = u
        e.b = 0
        e.r = r
        e.tag = tag
        return r

    def quant(self, nid u, levels, is_or):
        self._check_id(u)
        self._next_gen()
        self._set_levels(levels)
        self._qor = bool(is_or)
        return self._quant(u)

    cdef nid _and_exists(self, nid u, nid v) except -1:
        cdef nid t, top, u0, u1, v0, v1, r0, r1, r
        if u == 0 or v == 0:
            return 0
        if u == 1 or u == v:
            return self._quant(v)
        if v == 1:
            return self._quant(u)
        if u > v:
            t = u
            u = v
            v = t
        cdef uint32_t tag = (self._gen << 3) | K_ANDEX
        cdef Entry* e = self._mslot(u, v, tag)
        if e.a == u and e.b == v and e.tag == tag:
            return e.r
        cdef nid lu = self._lv[u]
        cdef nid lv = self._lv[v]
        top = lu if lu < lv else lv
        if top > self._qlast:
            r = self._and(u, v)
        else:
            if lu == top:
                u0 = self._lo[u]
                u1 = self._hi[u]
            else:
                u0 = u
                u1 = u
            if lv == top:
                v0 = self._lo[v]
                v1 = self._hi[v]
            else:
                v0 = v
                v1 = v
            r0 = self._and_exists(u0, v0)
            if self._qlevels[top]:
                if r0 == 1:
                    r = 1
                else:
                    r1 = self._and_exists(u1, v1)
                    r = self._or(r0, r1)
            else:
                r1 = self._and_exists(u1, v1)
                r = self._mk(top, r0, r1)
        e = self._mslot(u, v, tag)
        e.a = u
        e.b = v
        e.r = r
        e.tag = tag
        return r

    def and_exists(self, nid u, nid v, levels):
        self._check_id(u)
        self._check_id(v)
        self._next_gen()
        self._set_levels(levels)
        self._qor = True
        return self._and_exists(u, v)

    cdef nid _ite_var(self, nid level, nid lo, nid hi) except -1:
        # function "x_level ? hi : lo" for arbitrary lo, hi
        cdef nid top, lo0, lo1, hi0, hi1, r0, r1, r
        if lo == hi:
            return lo
        cdef nid ll = self._lv[lo]
        cdef nid lh = self._lv[hi]
        if level < ll and level < lh:
            return self._mk(level, lo, hi)
        cdef uint32_t tag = ITE_TAG + level
        cdef Entry* e = self._slot(lo, hi, tag)
        if e.a == lo and e.b == hi and e.tag == tag:
            return e.r
        top = ll if ll < lh else lh
        if top == level:
            lo0 = self._lo[lo] if ll == level else lo
            hi1 = self._hi[hi] if lh == level else hi
            r = self._mk(level, lo0, hi1)
        else:
            if ll == top:
                lo0 = self._lo[lo]
                lo1 = self._hi[lo]
            else:
                lo0 = lo
                lo1 = lo
            if lh == top:
                hi0 = self._lo[hi]
                hi1 = self._hi[hi]
            else:
                hi0 = hi
                hi1 = hi
            r0 = self._ite_var(level, lo0, hi0)
            r1 = self._ite_var(level, lo1, hi1)
            r = self._mk(top, r0, r1)
        e = self._slot(lo, hi, tag)
        e.a = lo
        e.b = hi
        e.r = r
        e.tag = tag
        return r

    cdef nid _rename(self, nid u) except -1:
        if u < 2:
            return u
        cdef uint32_t tag = (self._gen << 3) | K_RENAME
        cdef Entry* e = self._mslot(u, 0, tag)
        if e.a == u and e.tag == tag:
            return e.r
        cdef nid lo = self._rename(self._lo[u])
        cdef nid hi = self._rename(self._hi[u])
        cdef nid r = self._ite_var(self._lmap[self._lv[u]], lo, hi)
        e = self._mslot(u, 0, tag)
        e.a = u
        e.b = 0
        e.r = r
        e.tag = tag
        return r

    def rename(self, nid u, level_map):
        """Relabel level ``l`` as ``level_map[l]`` (a permutation of levels)."""
        self._check_id(u)
        if len(level_map) < self.num_vars:
            raise ValueError('level_map too short')
        self._next_gen()
        for l in range(self.num_vars):
            self._lmap[l] = level_map[l]
        self._lmap[self.num_vars] = self.num_vars
        return self._rename(u)

"""Direct constructions of the helper functions used by implicit algorithms.

Blocks are lists of variable indices, least significant bit first, so a block
``x`` encodes the value ``sum(x_i * 2**i)``.  Nothing here is charged to the
manager's operation counter.
"""
from .bdd import UsageError


def bits_of(value, length):
    """Little-endian bit tuple of ``value``."""
    return tuple((value >> i) & 1 for i in range(length))


def value_of(bits):
    return sum(b << i for i, b in enumerate(bits))


def _same_length(a, b):
    if len(a) != len(b):
        raise UsageError(f'blocks have different lengths ({len(a)} and {len(b)})')


def build_ip_const(mgr, block, r, r_n=0):
    """Parity ``XOR_i (r_i AND x_i) XOR r_n`` as a width-2 diagram.

    Only the variables with ``r_i = 1`` appear, two nodes per level (one per
    parity of the prefix read so far), built bottom-up in the manager order.
    """
    if len(r) != len(block):
        raise UsageError('coefficient vector and block differ in length')
    active = sorted((v for v, bit in zip(block, r) if bit), key=mgr.level_of)
    even = mgr.constant(r_n)
    odd = mgr.constant(1 - r_n)
    for v in reversed(active):
        even, odd = mgr.node(v, even, odd), mgr.node(v, odd, even)
    return even


def build_gt(mgr, xblock, yblock):
    """``|x| > |y|`` for two blocks of equal length."""
    _same_length(xblock, yblock)
    with mgr.untracked():
        gt = mgr.false
        for xv, yv in zip(xblock, yblock):
            x, y = mgr.var(xv), mgr.var(yv)
            # bit i is more significant than everything folded so far
            gt = mgr.apply(x, y, 'diff') | (~(x ^ y) & gt)
    return gt


def build_neq(mgr, ablock, bblock):
    """``a != b`` bitwise."""
    _same_length(ablock, bblock)
    with mgr.untracked():
        neq = mgr.false
        for av, bv in zip(ablock, bblock):
            neq = neq | (mgr.var(av) ^ mgr.var(bv))
    return neq


def build_eq(mgr, ablock, bblock):
    with mgr.untracked():
        return ~build_neq(mgr, ablock, bblock)


def build_threshold_le(mgr, block, s):
    """``|c| <= |s|`` where ``c`` is read from ``block``.

    ``s`` is a bit sequence of the block's length or an int.
    """
    if isinstance(s, int):
        if s >= 1 << len(block):
            return mgr.true
        s = bits_of(s, len(block))
    if len(s) != len(block):
        raise UsageError('threshold and block differ in length')
    with mgr.untracked():
        le = mgr.true
        for v, bit in zip(block, s):
            c = mgr.var(v)
            le = (~c | le) if bit else (~c & le)
    return le


def build_const_eq(mgr, block, value):
    """``|c| = value`` as a single cube."""
    if not 0 <= value < 1 << len(block):
        return mgr.false
    bits = bits_of(value, len(block))
    f = mgr.true
    for v, bit in sorted(zip(block, bits), key=lambda vb: mgr.level_of(vb[0]), reverse=True):
        f = mgr.node(v, mgr.false, f) if bit else mgr.node(v, f, mgr.false)
    return f

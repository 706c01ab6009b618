import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from obddkit.bdd import Manager, UsageError
from obddkit.builders import (
    bits_of, build_const_eq, build_eq, build_gt, build_ip_const, build_neq,
    build_threshold_le, value_of,
)

from _oracle import table_of


def interleaved(n):
    x, y = list(range(n)), list(range(n, 2 * n))
    order = [v for pair in zip(x, y) for v in pair]
    return Manager(2 * n, order), x, y


def split(n):
    idx = np.arange(1 << 2 * n)
    return idx & ((1 << n) - 1), idx >> n


@given(st.integers(0, 2 ** 20 - 1))
def test_bits_round_trip(v):
    assert value_of(bits_of(v, 20)) == v
    assert bits_of(6, 4) == (0, 1, 1, 0)


@pytest.mark.parametrize('n', range(1, 7))
def test_comparators_exhaustive(n):
    m, x, y = interleaved(n)
    xv, yv = split(n)
    assert np.array_equal(table_of(m, build_gt(m, x, y)), xv > yv)
    assert np.array_equal(table_of(m, build_gt(m, y, x)), yv > xv)
    assert np.array_equal(table_of(m, build_neq(m, x, y)), xv != yv)
    assert np.array_equal(table_of(m, build_eq(m, x, y)), xv == yv)
    assert m.op_count == 0
    # interleaved comparators stay linear in n
    assert m.dag_size(build_gt(m, x, y)) <= 3 * 2 * n + 2


@pytest.mark.parametrize('n', range(1, 7))
def test_threshold_and_constant(n):
    m = Manager(n)
    block = list(range(n))
    values = np.arange(1 << n)
    rng = np.random.default_rng(n)
    cases = range((1 << n) + 1) if n <= 4 else rng.integers(0, (1 << n) + 1, 12).tolist()
    for s in cases:
        assert np.array_equal(table_of(m, build_threshold_le(m, block, s)), values <= s)
        if s < 1 << n:
            assert np.array_equal(table_of(m, build_threshold_le(m, block, bits_of(s, n))),
                                  values <= s)
            assert np.array_equal(table_of(m, build_const_eq(m, block, s)), values == s)
    assert build_const_eq(m, block, 1 << n).is_false


@pytest.mark.parametrize('n', range(1, 7))
def test_ip_const_exhaustive(n):
    m = Manager(n)
    block = list(range(n))
    xs = np.arange(1 << n)
    seeds = range(1 << n) if n <= 4 else np.random.default_rng(0).integers(0, 1 << n, 16).tolist()
    for r in seeds:
        for r_n in (0, 1):
            f = build_ip_const(m, block, bits_of(r, n), r_n)
            expect = np.array([(bin(r & x).count('1') + r_n) & 1 for x in xs])
            assert np.array_equal(table_of(m, f), expect)
            assert m.width(f) <= 2
            assert m.dag_size(f) <= 2 * n + 2


def test_ip6_constant_vector_shape():
    # IP_6 with the constant vector (1,0,1,1,0,1)
    m = Manager(6)
    f = build_ip_const(m, list(range(6)), (1, 0, 1, 1, 0, 1))
    assert m.widths(f) == {0: 1, 2: 2, 3: 2, 5: 2}
    assert m.width(f) == 2
    assert m.dag_size(f) == 9


def test_length_mismatch():
    m, x, y = interleaved(3)
    with pytest.raises(UsageError):
        build_gt(m, x, y[:2])
    with pytest.raises(UsageError):
        build_ip_const(m, x, (1, 0))

import itertools
from fractions import Fraction

import numpy as np
import pytest

from obddkit.bdd import ConfigurationError, Manager
from obddkit.randfuncs import (
    BiasedSeed, LayeredDiagram, LayeredObddSpec, PrioritySeed, Seed3Wise, biased_function,
    biased_parameters, biased_probability, import_layered, layered_truth_tables,
    layered_width_bound, priority_functions, priority_layout, random_func_3wise,
    random_func_biased, random_layered_obdd, random_priority, sample_layered,
)
from obddkit.builders import value_of

from _oracle import table_of


def test_3wise_seed_values_match_diagram():
    n = 4
    m = Manager(n)
    block = list(range(n))
    rng = np.random.default_rng(0)
    for _ in range(20):
        f, seed = random_func_3wise(m, block, rng)
        table = table_of(m, f)
        assert table.tolist() == [seed.value(x) for x in range(1 << n)]
        assert m.width(f) <= 2 and m.dag_size(f) <= 2 * n + 2
        assert Seed3Wise.from_int(n, seed.to_int()) == seed
        assert int(seed.hex(), 16) == seed.to_int()


def test_3wise_each_input_balanced():
    n = 3
    counts = np.zeros(1 << n, dtype=int)
    for s in range(1 << (n + 1)):
        seed = Seed3Wise.from_int(n, s)
        counts += [seed.value(x) for x in range(1 << n)]
    assert counts.tolist() == [8] * 8


def test_3wise_seeds_are_replayable():
    m = Manager(5)
    a, sa = random_func_3wise(m, list(range(5)), np.random.default_rng(42))
    b, sb = random_func_3wise(m, list(range(5)), np.random.default_rng(42))
    assert sa == sb and a is b


@pytest.mark.parametrize('n,p,eps,s,t,prob', [
    (6, 0.3, 0.5, 20, 3, Fraction(3, 8)),
    (6, 0.25, 1.0, 16, 2, Fraction(1, 2)),
    (8, 0.1, 0.5, 26, 5, Fraction(4, 32)),
    (6, 0.5, 1.0, 32, 1, Fraction(1, 1)),
])
def test_biased_parameters(n, p, eps, s, t, prob):
    assert biased_parameters(n, p, eps) == (s, t)
    assert biased_probability(n, p, eps) == prob
    lo = Fraction(s, 2 ** n)
    assert lo <= prob
    if t > 1:
        assert prob <= (1 + Fraction(eps)) * lo


def test_biased_parameter_errors():
    with pytest.raises(ConfigurationError):
        biased_parameters(6, 0.6, 0.5)
    with pytest.raises(ConfigurationError):
        biased_parameters(6, 0.001, 0.5)
    with pytest.raises(ConfigurationError):
        biased_parameters(6, 0.3, 0)
    with pytest.raises(ConfigurationError):
        biased_parameters(4, 1 / 16, 0.1)


def _biased_value(seed, s, t, n, x):
    top = s >> (n - t)
    prefix = 0
    for row, off in zip(seed.rows, seed.offsets):
        bit = (bin(value_of(row) & x).count('1') + off) & 1
        prefix = (prefix << 1) | bit
    return int(prefix <= top)


def test_biased_diagram_semantics_and_size():
    n, p, eps = 6, 0.3, 0.5
    s, t = biased_parameters(n, p, eps)
    m = Manager(n, [3, 0, 5, 1, 4, 2])
    block = list(range(n))
    rng = np.random.default_rng(7)
    for _ in range(40):
        f, seed = random_func_biased(m, block, p, eps, rng)
        assert table_of(m, f).tolist() == [_biased_value(seed, s, t, n, x) for x in range(1 << n)]
        assert m.dag_size(f) <= 2 * n * 2 ** t
    assert m.op_count == 0


def test_biased_exact_probability_small():
    # n = 4, t = 2: all 2^10 seeds
    n, p, eps = 4, 0.25, 1.0
    s, t = biased_parameters(n, p, eps)
    m = Manager(n)
    block = list(range(n))
    ones = np.zeros(1 << n, dtype=int)
    total = 0
    for bits in itertools.product((0, 1), repeat=t * (n + 1)):
        rows = tuple(tuple(bits[j * n:(j + 1) * n]) for j in range(t))
        seed = BiasedSeed(rows, tuple(bits[t * n:]))
        ones += table_of(m, biased_function(m, block, seed, s, t))
        total += 1
    prob = biased_probability(n, p, eps)
    assert all(Fraction(int(c), total) == prob for c in ones)


def _priority_truth(seed, n, threshold):
    gt = {(x, y): int(seed.vector(x) > seed.vector(y))
          for x in range(1 << n) for y in range(1 << n)}
    g = {x: int(seed.vector(x) <= threshold) for x in range(1 << n)}
    return gt, g


def _assign(mgr, block_values):
    a = [0] * mgr.num_vars
    for block, value in block_values:
        for i, v in enumerate(block):
            a[v] = (value >> i) & 1
    return a


@pytest.mark.parametrize('affine', [False, True])
def test_priority_exhaustive_n2(affine):
    n, p = 2, 0.5
    mgr, x, y, i, j = priority_layout(n)
    offsets = list(itertools.product((0, 1), repeat=n)) if affine else [None]
    for cols in itertools.product(itertools.product((0, 1), repeat=n), repeat=n):
        for off in offsets:
            seed = PrioritySeed(tuple(cols), off)
            pf = priority_functions(mgr, x, y, i, j, seed, p)
            gt, g = _priority_truth(seed, n, 1)
            for xv in range(4):
                assert mgr.evaluate(pf.g, _assign(mgr, [(x, xv)])) == g[xv]
                for yv in range(4):
                    assert mgr.evaluate(pf.gt, _assign(mgr, [(x, xv), (y, yv)])) == gt[xv, yv]
            assert not set(mgr.support(pf.gt)) - set(x + y)


def test_priority_is_strict_order_n3():
    n = 3
    mgr, x, y, i, j = priority_layout(n)
    rng = np.random.default_rng(3)
    for _ in range(6):
        pf = random_priority(mgr, x, y, i, j, 0.25, rng)
        rel = [[mgr.evaluate(pf.gt, _assign(mgr, [(x, a), (y, b)])) for b in range(8)]
               for a in range(8)]
        rel = np.array(rel, dtype=bool)
        assert not rel.diagonal().any()
        assert not (rel & rel.T).any()
        assert not ((rel.astype(int) @ rel.astype(int) > 0) & ~rel).any()
        v = [pf.seed.vector(a) for a in range(8)]
        assert rel.tolist() == [[v[a] > v[b] for b in range(8)] for a in range(8)]
        for a in range(8):
            assert mgr.evaluate(pf.g, _assign(mgr, [(x, a)])) == int(v[a] <= 1)


def test_affine_values_pairwise_uniform():
    n = 2
    for xa, xb in itertools.permutations(range(4), 2):
        counts = np.zeros((4, 4), dtype=int)
        for bits in itertools.product((0, 1), repeat=n * n + n):
            seed = PrioritySeed((bits[0:2], bits[2:4]), bits[4:6])
            counts[seed.vector(xa), seed.vector(xb)] += 1
        assert (counts == 4).all()


def test_linear_mode_pins_zero():
    seed = PrioritySeed(((1, 0), (1, 1)))
    assert seed.vector(0) == 0


def test_priority_ops_linear_in_n():
    per_n = []
    for n in range(2, 8):
        mgr, x, y, i, j = priority_layout(n)
        random_priority(mgr, x, y, i, j, 0.5, np.random.default_rng(n))
        per_n.append(mgr.op_count / n)
    assert max(per_n) <= 2 * min(per_n) + 10


def test_priority_rejects_empty():
    with pytest.raises(ConfigurationError):
        priority_layout(0)


def test_layered_width_bound():
    assert layered_width_bound(6, 2, 0.25) == 146
    assert layered_width_bound(20, 2, 0.25) == 482


def test_layered_spec_validation():
    for bad in [dict(n=0, width=3), dict(n=3, width=0), dict(n=3, width=2, p_sink=1.5)]:
        with pytest.raises(ConfigurationError):
            LayeredObddSpec(**bad)


def test_layered_import_matches_raw():
    rng = np.random.default_rng(9)
    for width in (1, 2, 5, 30):
        spec = LayeredObddSpec(n=8, width=width, p_sink=0.4, seed=int(rng.integers(1 << 30)))
        m = Manager(8)
        f, raw = random_layered_obdd(spec, m, list(range(8)))
        table = table_of(m, f)
        assert table.tolist() == [raw.evaluate(x) for x in range(256)]
        assert np.array_equal(raw.truth_table(), table)
        # reduction never widens a layer
        assert m.width(f) <= width
    again = random_layered_obdd(spec)[1]
    assert np.array_equal(again.successors, random_layered_obdd(spec)[1].successors)


def test_layered_zero_sink():
    rng = np.random.default_rng(0)
    m = Manager(6)
    for _ in range(10):
        d = sample_layered(6, 4, 0.0, rng)
        assert import_layered(m, list(range(6)), d).is_false


def test_layered_batch_tables():
    rng = np.random.default_rng(1)
    succ, sinks, roots = sample_layered(5, 7, 0.5, rng, count=4)
    tables = layered_truth_tables(succ, sinks, roots)
    m = Manager(5)
    for k in range(4):
        d = LayeredDiagram(succ[k], sinks[k], int(roots[k]))
        assert np.array_equal(table_of(m, import_layered(m, list(range(5)), d)), tables[k])

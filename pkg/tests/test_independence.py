import math
from fractions import Fraction

import numpy as np
import pytest

from obddkit.bdd import ConfigurationError
from obddkit.independence import (
    EXACT, VIOLATED, WITHIN_EPS, Alg1Family, BiasedFamily, ConstantFamily,
    layered_generator, uniform_generator, verify_eps_kwise_mc, verify_kwise_exact,
)


@pytest.mark.parametrize('n', [2, 3, 4])
def test_alg1_three_wise_exact(n):
    rep = verify_kwise_exact(Alg1Family(n), 3)
    assert rep.verdict == EXACT
    assert rep.max_deviation == 0
    assert rep.num_samples == 2 ** (n + 1)
    assert len(rep.tuples) == math.comb(2 ** n, 3)


def test_alg1_not_four_wise():
    fam = Alg1Family(3)
    rep = verify_kwise_exact(fam, 4, tuples=[(0, 1, 2, 3)])
    assert rep.verdict == VIOLATED
    assert rep.witness == (0, 1, 2, 3)
    # the xor of the four values is the same bit for every seed
    tables = fam.truth_tables(0, fam.seed_count)
    assert len(set((tables[:, 0] ^ tables[:, 1] ^ tables[:, 2] ^ tables[:, 3]).tolist())) == 1
    assert rep.max_deviation == Fraction(1, 16)


def test_alg1_full_k4_scan_finds_witness():
    rep = verify_kwise_exact(Alg1Family(3), 4)
    assert rep.verdict == VIOLATED
    a, b, c, d = rep.witness
    assert a ^ b ^ c ^ d == 0


def test_constant_family_violates_k1():
    rep = verify_kwise_exact(ConstantFamily(3), 1)
    assert rep.verdict == VIOLATED
    assert rep.max_deviation == Fraction(1, 2)


@pytest.mark.parametrize('p,eps,t', [(0.3, 2.0, 1), (0.25, 1.0, 2)])
def test_biased_family_three_wise_n3(p, eps, t):
    # both settings accept exactly when the leading parity bit is 0
    fam = BiasedFamily(3, p, eps)
    assert fam.t == t
    tables = fam.truth_tables(0, fam.seed_count)
    assert np.all(tables.mean(axis=0) == 0.5)
    rep = verify_kwise_exact(fam, 3)
    assert rep.verdict == EXACT


def test_biased_family_trivial_threshold():
    # p = 1/2 with eps = 1: t = 1 and every prefix is at most top_1(s) = 1
    fam = BiasedFamily(3, 0.5, 1.0)
    assert fam.t == 1
    assert np.all(fam.truth_tables(0, fam.seed_count) == 1)


def test_exact_refuses_huge_seed_space():
    fam = ConstantFamily(4, seed_count=2 ** 24 + 1)
    with pytest.raises(ConfigurationError):
        verify_kwise_exact(fam, 2)


def test_mc_uniform_control():
    rep = verify_eps_kwise_mc(uniform_generator(6), 6, 2, 0.01, 10_000, 50,
                              np.random.default_rng(0))
    assert rep.verdict == WITHIN_EPS
    assert len(rep.tuples) == 50
    assert len(set(rep.tuples)) == 50


def test_mc_detects_constant():
    gen = lambda rng, count: np.zeros((count, 16), dtype=np.uint8)
    rep = verify_eps_kwise_mc(gen, 4, 2, 0.1, 2000, 10, np.random.default_rng(1))
    assert rep.verdict == VIOLATED
    assert rep.witness is not None


def test_mc_sigma_scaling():
    # quadrupling the samples roughly halves the spread of the estimate
    gen = uniform_generator(4)
    spreads = []
    for samples in (1000, 4000):
        devs = []
        for s in range(60):
            rep = verify_eps_kwise_mc(gen, 4, 1, 0.5, samples, 1, np.random.default_rng(s))
            devs.append(rep.max_deviation)
        spreads.append(np.sqrt(np.mean(np.square(devs))))
    assert 1.5 < spreads[0] / spreads[1] < 2.7


def test_mc_needs_enough_samples():
    with pytest.raises(ConfigurationError):
        verify_eps_kwise_mc(uniform_generator(3), 3, 2, 0.1, 500, 5, np.random.default_rng(0))


def test_layered_small_width_is_dependent():
    # width 1 makes the value depend only on the last input bit
    rep = verify_eps_kwise_mc(layered_generator(4, 1), 4, 2, 0.05, 4000, 120,
                              np.random.default_rng(2))
    assert rep.verdict == VIOLATED


def test_report_text_and_csv():
    rep = verify_kwise_exact(Alg1Family(2), 2)
    assert 'verdict=exact' in rep.to_text()
    row = rep.to_csv_row().split(',')
    assert len(row) == len(rep.csv_header().split(','))
    assert row[5] == EXACT

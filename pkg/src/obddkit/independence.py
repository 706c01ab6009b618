"""Exact and Monte Carlo checks of (almost) k-wise independence.

A *family* is anything with ``n``, ``seed_count`` and ``truth_tables(start,
stop)`` returning a ``(stop - start, 2**n)`` 0/1 array, one row per seed.
Exact verification tallies every seed with integer counts; the Monte Carlo
verifier takes a ``generator(rng, count)`` returning truth tables of sampled
functions.
"""
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bdd import ConfigurationError, Manager
from .randfuncs import (
    BiasedSeed, Seed3Wise, alg1_function, biased_function, biased_parameters,
    layered_truth_tables, sample_layered,
)

EXACT = 'exact'
WITHIN_EPS = 'within-eps'
VIOLATED = 'violated'

MAX_EXACT_SEEDS = 2 ** 24


@dataclass
class IndependenceReport:
    k: int
    tuples: list
    max_deviation: object
    verdict: str
    num_samples: int
    eps: float = 0.0
    witness: tuple = None
    deviations: list = field(default_factory=list, repr=False)

    def to_text(self):
        line = (f'k={self.k} tuples={len(self.tuples)} samples={self.num_samples} '
                f'max_deviation={float(self.max_deviation):.6g} verdict={self.verdict}')
        if self.witness is not None:
            line += f' witness={self.witness}'
        return line

    def csv_header(self):
        return 'k,num_tuples,num_samples,eps,max_deviation,verdict,witness'

    def to_csv_row(self):
        witness = '' if self.witness is None else ' '.join(map(str, self.witness))
        return (f'{self.k},{len(self.tuples)},{self.num_samples},{self.eps},'
                f'{float(self.max_deviation):.9g},{self.verdict},{witness}')


def _pattern_counts(tables, tup):
    idx = np.zeros(tables.shape[0], dtype=np.int64)
    for j, col in enumerate(tup):
        idx |= tables[:, col].astype(np.int64) << j
    return np.bincount(idx, minlength=1 << len(tup))


def _all_tuples(n, k):
    return list(itertools.combinations(range(1 << n), k))


def verify_kwise_exact(family, k, tuples=None, chunk=1 << 12):
    """Enumerate every seed; exact iff each pattern has probability ``2**-k``."""
    if family.seed_count > MAX_EXACT_SEEDS:
        raise ConfigurationError(
            f'{family.seed_count} seeds exceed the exact limit; use verify_eps_kwise_mc')
    n = family.n
    tuples = _all_tuples(n, k) if tuples is None else [tuple(t) for t in tuples]
    counts = {t: np.zeros(1 << k, dtype=np.int64) for t in tuples}
    for start in range(0, family.seed_count, chunk):
        tables = family.truth_tables(start, min(start + chunk, family.seed_count))
        for t in tuples:
            counts[t] += _pattern_counts(tables, t)
    total = family.seed_count
    target = Fraction(1, 1 << k)
    deviations = []
    worst, witness = Fraction(0), None
    for t in tuples:
        dev = max(abs(Fraction(int(c), total) - target) for c in counts[t])
        deviations.append(dev)
        if dev > worst:
            worst, witness = dev, t
    verdict = EXACT if worst == 0 else VIOLATED
    return IndependenceReport(k, tuples, worst, verdict, total, 0.0, witness, deviations)


def verify_eps_kwise_mc(generator, n, k, eps, num_samples, num_tuples, rng, batch=2000):
    """Estimate pattern probabilities on random index tuples.

    The verdict is within-eps iff every deviation is at most
    ``eps + 3 sigma`` with ``sigma`` the binomial standard error at ``2**-k``.
    """
    if num_samples < 1000:
        raise ConfigurationError('num_samples must be at least 1000')
    size = 1 << n
    tuples = []
    seen = set()
    limit = math.comb(size, k)
    while len(tuples) < min(num_tuples, limit):
        t = tuple(sorted(int(v) for v in rng.choice(size, size=k, replace=False)))
        if t not in seen:
            seen.add(t)
            tuples.append(t)
    counts = {t: np.zeros(1 << k, dtype=np.int64) for t in tuples}
    done = 0
    while done < num_samples:
        m = min(batch, num_samples - done)
        tables = np.asarray(generator(rng, m))
        for t in tuples:
            counts[t] += _pattern_counts(tables, t)
        done += m
    q = 1.0 / (1 << k)
    sigma = math.sqrt(q * (1 - q) / num_samples)
    deviations = []
    worst, witness = 0.0, None
    for t in tuples:
        dev = float(np.max(np.abs(counts[t] / num_samples - q)))
        deviations.append(dev)
        if dev > worst:
            worst, witness = dev, t
    verdict = WITHIN_EPS if worst <= eps + 3 * sigma else VIOLATED
    return IndependenceReport(k, tuples, worst, verdict, num_samples, eps,
                              witness if verdict == VIOLATED else None, deviations)


# ----------------------------------------------------------------------
# families

class Alg1Family:
    """Parity functions ``f_r``; each seed is built as an OBDD and tabulated."""

    def __init__(self, n):
        self.n = n
        self.seed_count = 1 << (n + 1)
        self.mgr = Manager(n)
        self.block = list(range(n))
        self._inputs = [[(x >> i) & 1 for i in range(n)] for x in range(1 << n)]

    def function(self, seed_index):
        return alg1_function(self.mgr, self.block, Seed3Wise.from_int(self.n, seed_index))

    def truth_tables(self, start, stop):
        out = np.zeros((stop - start, 1 << self.n), dtype=np.uint8)
        for row, s in enumerate(range(start, stop)):
            f = self.function(s)
            out[row] = [self.mgr.evaluate(f, a) for a in self._inputs]
        return out


class BiasedFamily:
    """Biased construction; seeds enumerate all ``t (n + 1)`` random bits."""

    def __init__(self, n, p, eps):
        self.n = n
        self.s, self.t = biased_parameters(n, p, eps)
        self.seed_count = 1 << (self.t * (n + 1))
        self.mgr = Manager(n)
        self.block = list(range(n))
        self._inputs = [[(x >> i) & 1 for i in range(n)] for x in range(1 << n)]

    def seed(self, index):
        n, t = self.n, self.t
        rows = tuple(tuple((index >> (j * n + i)) & 1 for i in range(n)) for j in range(t))
        offsets = tuple((index >> (t * n + j)) & 1 for j in range(t))
        return BiasedSeed(rows, offsets)

    def function(self, index):
        return biased_function(self.mgr, self.block, self.seed(index), self.s, self.t)

    def truth_tables(self, start, stop):
        out = np.zeros((stop - start, 1 << self.n), dtype=np.uint8)
        for row, s in enumerate(range(start, stop)):
            f = self.function(s)
            out[row] = [self.mgr.evaluate(f, a) for a in self._inputs]
        return out


class ConstantFamily:
    """Degenerate family: every seed gives the same constant function."""

    def __init__(self, n, value=0, seed_count=2):
        self.n = n
        self.value = value
        self.seed_count = seed_count

    def truth_tables(self, start, stop):
        return np.full((stop - start, 1 << self.n), self.value, dtype=np.uint8)


def layered_generator(n, width, p_sink=0.5):
    """Generator of truth tables of raw layered random diagrams."""
    def generate(rng, count):
        succ, sinks, roots = sample_layered(n, width, p_sink, rng, count)
        return layered_truth_tables(succ, sinks, roots)
    return generate


def uniform_generator(n):
    """Control: fully independent fair coins per input."""
    def generate(rng, count):
        return rng.integers(0, 2, size=(count, 1 << n), dtype=np.uint8)
    return generate

"""Command line front end and benchmark harness.

Subcommands: ``match``, ``gen``, ``mis``, ``verify-independence``, ``bench``.
Exit codes: 0 success, 2 usage, 3 input error, 4 invariant violation.
"""
import argparse
import logging
import os
import sys
import time
from dataclasses import astuple, dataclass, fields

import numpy as np

from .bdd import ObddError
from .graphs import (
    FORMATS, GraphFormatError, decode_graph, density, encode_graph, parse_graph,
    random_density_graph, write_edgelist,
)
from .independence import (
    EXACT, MAX_EXACT_SEEDS, Alg1Family, BiasedFamily, layered_generator,
    verify_eps_kwise_mc, verify_kwise_exact,
)
from .matching import (
    RmConfig, distributed_mis_sim, maximal_matching_rm, verify_matching, verify_mis,
)
from .randfuncs import layered_width_bound

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_INVARIANT = 4

DEFAULT_BENCH_WIDTH = 146
DEFAULT_DENSITY_TOL = 0.02
MAX_GRAPH_DRAWS = 200


class InvariantViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class BenchRow:
    graph_id: str
    n: int
    N: int
    M: int
    seed: int
    outer_iters: int
    inner_iters_total: int
    func_ops: int
    peak_live_nodes: int
    matching_size: int
    wall_time_ms: int

    def __post_init__(self):
        for f in fields(self)[1:]:
            if getattr(self, f.name) < 0:
                raise ValueError(f'{f.name} must be non-negative')
        if self.matching_size > self.M:
            raise ValueError('matching_size exceeds M')

    @staticmethod
    def header():
        return ','.join(f.name for f in fields(BenchRow))

    def to_csv(self):
        return ','.join(str(v) for v in astuple(self))


def append_rows(path, rows):
    """Append rows to a CSV file, writing the header first if the file is new or empty."""
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, 'a') as fh:
        if new:
            fh.write(BenchRow.header() + '\n')
        for row in rows:
            fh.write(row.to_csv() + '\n')


def run_matching(eg, graph, graph_id, seed, sparsify=False, max_inner=None):
    """Run the matching on ``eg`` and check the result against ``graph``."""
    cfg = RmConfig(sparsify=sparsify, max_inner_iterations=max_inner, seed=seed)
    start = time.perf_counter()
    result = maximal_matching_rm(eg, cfg)
    wall = int(round((time.perf_counter() - start) * 1000))
    ok = verify_matching(graph, result.edges)
    if ok != (True, True):
        raise InvariantViolation(f'{graph_id} seed {seed}: verify_matching returned {ok}')
    st = result.stats
    row = BenchRow(graph_id, eg.n, eg.num_nodes, len(graph.edges), seed, st.outer_iterations,
                   st.inner_iterations, st.func_ops, st.peak_live_nodes, len(result.edges), wall)
    return row, result


def sample_bench_graph(n, p, width, rng, tol=DEFAULT_DENSITY_TOL):
    """Random-density graph whose realized density is within ``tol`` of ``p``.

    Fixed-width layered diagrams give densities that scatter around ``p``;
    redrawing keeps a sweep at the density it claims.  ``tol=None`` disables it.
    """
    for _ in range(MAX_GRAPH_DRAWS):
        eg = random_density_graph(n, p, width, rng)
        if tol is None or abs(density(eg) - p) <= tol:
            return eg
    raise InvariantViolation(
        f'no graph within {tol} of density {p} after {MAX_GRAPH_DRAWS} draws (n={n}, width={width})')


def bench_seed(seed, n, p, rep):
    return int(np.random.SeedSequence([seed, n, int(round(p * 10 ** 6)), rep]).generate_state(1)[0])


def run_bench(ns, densities, reps, width=DEFAULT_BENCH_WIDTH, seed=0, sparsify=False,
              tol=DEFAULT_DENSITY_TOL, max_inner=None):
    """Yield one :class:`BenchRow` per (n, density, repetition)."""
    for n in ns:
        for p in densities:
            for rep in range(reps):
                run_seed = bench_seed(seed, n, p, rep)
                eg = sample_bench_graph(n, p, width, np.random.default_rng(run_seed), tol)
                graph = decode_graph(eg)
                graph_id = f'rd-n{n}-p{p:g}-w{width}-r{rep}'
                row, _ = run_matching(eg, graph, graph_id, run_seed, sparsify, max_inner)
                yield row


# ----------------------------------------------------------------------
# subcommands

def _cmd_match(args):
    graph = parse_graph(args.input, args.format)
    if graph.num_nodes == 0:
        raise GraphFormatError('graph has no nodes')
    eg = encode_graph(graph)
    graph_id = os.path.basename(args.input)
    row, _ = run_matching(eg, graph, graph_id, args.seed, args.sparsify, args.max_inner_iters)
    print(BenchRow.header())
    print(row.to_csv())
    if args.csv:
        append_rows(args.csv, [row])
    return EXIT_OK


def _cmd_gen(args):
    rng = np.random.default_rng(args.seed)
    eg = random_density_graph(args.n, args.density, args.width, rng)
    graph = decode_graph(eg)
    if args.out:
        write_edgelist(graph, args.out)
    else:
        print(f'# N={graph.num_nodes}')
        for u, v in sorted(graph.edges):
            print(u, v)
    print(f'N={graph.num_nodes} M={len(graph.edges)} density={density(eg):.4f}', file=sys.stderr)
    return EXIT_OK


def _cmd_mis(args):
    graph = parse_graph(args.input, args.format)
    result = distributed_mis_sim(graph, np.random.default_rng(args.seed), seed=args.seed)
    ok = verify_mis(graph, result.independent_set)
    if ok != (True, True):
        raise InvariantViolation(f'verify_mis returned {ok}')
    print(f'size={len(result.independent_set)} rounds={result.rounds} '
          f'rank_bits_mean={result.rank_bits_mean:.4f} '
          f'bits_per_channel_mean={result.bits_per_channel_mean:.4f} '
          f'bits_per_channel_max={result.bits_per_channel_max}')
    if args.out:
        with open(args.out, 'w') as fh:
            fh.write(''.join(f'{v}\n' for v in sorted(result.independent_set)))
    return EXIT_OK


def _cmd_verify(args):
    rng = np.random.default_rng(args.seed)
    if args.family == 'alg1':
        report = verify_kwise_exact(Alg1Family(args.n), args.k)
    elif args.family == 'biased':
        family = BiasedFamily(args.n, args.p, args.eps)
        if family.seed_count <= MAX_EXACT_SEEDS:
            report = verify_kwise_exact(family, args.k)
        else:
            report = verify_eps_kwise_mc(family_sampler(family), args.n, args.k, args.eps,
                                         args.samples, args.tuples, rng)
    else:
        width = args.width or layered_width_bound(args.n, args.k, args.eps)
        report = verify_eps_kwise_mc(layered_generator(args.n, width), args.n, args.k,
                                     args.eps, args.samples, args.tuples, rng)
    print(report.verdict)
    print(report.to_text())
    return EXIT_OK


def family_sampler(family):
    """Monte Carlo generator drawing uniform seeds of an enumerable family."""
    def generate(rng, count):
        idx = rng.integers(0, family.seed_count, size=count)
        return np.vstack([family.truth_tables(int(i), int(i) + 1) for i in idx])
    return generate


def _cmd_bench(args):
    out = open(args.csv, 'a') if args.csv else None
    try:
        if out is not None and out.tell() == 0:
            out.write(BenchRow.header() + '\n')
        print(BenchRow.header())
        tol = None if args.density_tol < 0 else args.density_tol
        for row in run_bench(range(args.n_min, args.n_max + 1), args.density, args.reps,
                             args.width, args.seed, args.sparsify, tol, args.max_inner_iters):
            print(row.to_csv(), flush=True)
            if out is not None:
                out.write(row.to_csv() + '\n')
                out.flush()
    finally:
        if out is not None:
            out.close()
    return EXIT_OK


def _positive(value):
    v = int(value)
    if v < 1:
        raise argparse.ArgumentTypeError(f'expected a positive integer, got {value}')
    return v


def _probability(value):
    v = float(value)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f'expected a value in [0, 1], got {value}')
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f'{self.prog}: error: {message}', file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser():
    parser = _Parser(prog='obddkit', description='Implicit OBDD graph algorithms.')
    parser.add_argument('-v', '--verbose', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    p = sub.add_parser('match', help='maximal matching of a graph file')
    p.add_argument('--input', required=True)
    p.add_argument('--format', choices=FORMATS, default='edgelist')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--sparsify', action='store_true')
    p.add_argument('--max-inner-iters', type=_positive, default=None)
    p.add_argument('--csv')
    p.set_defaults(func=_cmd_match)

    p = sub.add_parser('gen', help='random-density graph as an edge list')
    p.add_argument('--n', type=_positive, required=True, help='bits per node, N = 2**n')
    p.add_argument('--density', type=_probability, required=True)
    p.add_argument('--width', type=_positive, default=DEFAULT_BENCH_WIDTH)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out')
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser('mis', help='distributed maximal independent set simulation')
    p.add_argument('--input', required=True)
    p.add_argument('--format', choices=FORMATS, default='edgelist')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out')
    p.set_defaults(func=_cmd_mis)

    p = sub.add_parser('verify-independence', help='check k-wise independence of a family')
    p.add_argument('--family', choices=('alg1', 'biased', 'layered'), required=True)
    p.add_argument('--n', type=_positive, required=True)
    p.add_argument('--k', type=_positive, required=True)
    p.add_argument('--eps', type=float, default=0.25)
    p.add_argument('--samples', type=int, default=10_000)
    p.add_argument('--tuples', type=_positive, default=100)
    p.add_argument('--p', type=_probability, default=0.5, help='target probability (biased)')
    p.add_argument('--width', type=_positive, default=None, help='layer width (layered)')
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser('bench', help='matching sweep over N and density')
    p.add_argument('--n-min', type=_positive, default=6)
    p.add_argument('--n-max', type=_positive, default=10)
    p.add_argument('--density', type=_probability, nargs='+', default=[0.1])
    p.add_argument('--reps', type=_positive, default=5)
    p.add_argument('--width', type=_positive, default=DEFAULT_BENCH_WIDTH)
    p.add_argument('--density-tol', type=float, default=DEFAULT_DENSITY_TOL,
                   help='redraw graphs farther than this from the target density; negative disables')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--sparsify', action='store_true')
    p.add_argument('--max-inner-iters', type=_positive, default=None)
    p.add_argument('--csv')
    p.set_defaults(func=_cmd_bench)
    return parser


def run_cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    if getattr(args, 'n_min', 0) and args.n_min > args.n_max:
        print('error: --n-min exceeds --n-max', file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (OSError, GraphFormatError) as exc:
        print(f'error: {exc}', file=sys.stderr)
        return EXIT_INPUT
    except InvariantViolation as exc:
        print(f'invariant violated: {exc}', file=sys.stderr)
        return EXIT_INVARIANT
    except (ObddError, ValueError) as exc:
        print(f'error: {exc}', file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run_cli())

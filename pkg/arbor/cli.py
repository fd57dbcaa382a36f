"""
The ``arbor`` command line tool.

Exit codes: 0 for success, 1 for a domain or statistical failure,
2 for a problem reading input or running a check at all.
"""
import logging
import sys
from argparse import ArgumentParser, Namespace
from collections import Counter
from pathlib import Path
from typing import Any, Iterator, Sequence

import numpy as np

from .arborescence import ENUMERATION_CAP, tree_distribution, tree_theorem_stationary
from .chain import (
    ChainError, ReducibleChain, TransitionMatrix, lift_two_state, lifted_stationary,
    simulate_trajectory, stationary_solve, validate,
)
from .chainfile import SpecError, dumps, read_chain_spec, write_json, write_json_lines
from .config import (
    DEFAULT_MAX_BLOCKS, DEFAULT_SIGNIFICANCE, INIT_POLICIES, MODES, ConfigError, RunConfig,
    check_significance,
)
from .replication import InitPolicy, iter_replications
from .rng import RngStream
from .sampler import Sampler, UnsuitableChain
from .stats import CellMergeRequired, FrequencyTable, chi_square_gof
from .verification import verify

logger = logging.getLogger(__name__)

OK = 0
FAILED = 1
BROKEN = 2


class Abort(Exception):

    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def load(chain_path: Path) -> TransitionMatrix:
    try:
        return read_chain_spec(chain_path).matrix()
    except SpecError as e:
        raise Abort(BROKEN, str(e))
    except ChainError as e:
        raise Abort(FAILED, f'{chain_path}: {e}')


def emit(data: Any) -> None:
    print(dumps(data))


def cmd_validate(chain_path: Path) -> int:
    try:
        spec = read_chain_spec(chain_path)
        report = validate(spec.entries)
    except ChainError as e:
        logger.error('%s', e)
        return BROKEN
    warnings = []
    if not report.aperiodic:
        warnings.append(
            f'chain is not aperiodic (period {report.period}): '
            f'general mode needs --allow-periodic'
        )
    if not report.assumption_a:
        warnings.append('Assumption A does not hold: only general mode can be used')
    for warning in warnings:
        logger.warning('%s', warning)
    emit({**report.as_dict(), 'warnings': warnings})
    return OK if report.row_stochastic and report.irreducible else FAILED


def cmd_dist(chain_path: Path, output_path: Path | None, stationary_only: bool = False) -> int:
    P = load(chain_path)
    try:
        by_trees = tree_theorem_stationary(P)
        by_solve = stationary_solve(P)
    except ReducibleChain as e:
        raise Abort(FAILED, str(e))
    if P.n > ENUMERATION_CAP and not stationary_only:
        raise Abort(
            FAILED,
            f'{P.n} states is above the enumeration cap of {ENUMERATION_CAP}, '
            f'use --stationary-only',
        )
    data: dict[str, Any] = {
        'n': P.n,
        'stationary': {
            'tree_theorem': by_trees.probs.tolist(),
            'linear_solve': by_solve.probs.tolist(),
            'discrepancy': by_trees.distance(by_solve),
        },
    }
    if not stationary_only:
        distribution = tree_distribution(P)
        data['total_weight'] = distribution.total_weight
        data['trees'] = distribution.as_json()
    if output_path is None:
        emit(data)
    else:
        write_json(output_path, data)
    return OK


def init_policy(config: RunConfig) -> InitPolicy:
    if config.init_policy == 'fixed':
        assert config.init_vector is not None
        return InitPolicy.fixed(config.init_vector)
    if config.init_policy == 'random':
        return InitPolicy.random()
    return InitPolicy.all_ones()


def prepare(config: RunConfig, sampler: Sampler | None = None) -> tuple[TransitionMatrix, Sampler]:
    P = load(config.chain_path)
    report = validate(P)
    if not report.irreducible:
        raise Abort(FAILED, f'{config.chain_path}: chain is reducible')
    sampler = sampler or config.sampler()
    try:
        sampler.check(report)
    except UnsuitableChain as e:
        raise Abort(FAILED, str(e))
    return P, sampler


def cmd_sample(config: RunConfig) -> int:
    P, sampler = prepare(config)
    censored = 0
    taus = []
    roots: Counter[int] = Counter()

    def records() -> Iterator[dict[str, Any]]:
        nonlocal censored
        for replication in iter_replications(
                sampler, P, init_policy(config), config.replications, config.seed, config.threads
        ):
            if replication.result is None:
                censored += 1
            else:
                taus.append(replication.result.tau)
                roots[replication.result.root] += 1
            yield replication.as_dict()

    if config.output_path is None:
        for record in records():
            emit(record)
    else:
        write_json_lines(config.output_path, records())
    emit({
        'replications': config.replications,
        'censored': censored,
        'mean_tau': float(np.mean(taus)) if taus else None,
        'root_frequencies': {
            str(root): roots[root] / len(taus) for root in sorted(roots)
        },
    })
    return OK


def cmd_verify(config: RunConfig, sampler: Sampler | None = None) -> int:
    P, sampler = prepare(config, sampler)
    if P.n > ENUMERATION_CAP:
        raise Abort(FAILED, f'{P.n} states is above the enumeration cap of {ENUMERATION_CAP}')
    try:
        results = verify(
            P, sampler, config.replications, config.seed, init_policy(config),
            config.significance, config.threads,
        )
    except Exception as e:
        logger.exception('verification could not be run')
        raise Abort(BROKEN, repr(e))
    for result in results:
        status = 'ERROR' if result.error else 'pass' if result.passed else 'FAIL'
        p = f'{result.report.p_value:.4g}' if result.report is not None else '-'
        print(f'{result.name:<18} {status:<5} p={p:<10} {result.error or result.detail}')
    if any(not result.passed and not result.error for result in results):
        return FAILED
    return BROKEN if any(result.error for result in results) else OK


def cmd_lift_demo(
        chain_path: Path,
        n: int,
        steps: int,
        seed: int,
        significance: float = DEFAULT_SIGNIFICANCE,
) -> int:
    check_significance(significance)
    P = load(chain_path)
    if P.n != 2:
        raise Abort(FAILED, f'{chain_path}: need a two-state chain, got {P.n} states')
    if n < 3:
        raise Abort(FAILED, f'can only lift to 3 or more states, not {n}')
    report = validate(P)
    if not (report.irreducible and report.aperiodic):
        raise Abort(FAILED, f'{chain_path}: chain must be irreducible and aperiodic')
    pi = stationary_solve(P)
    rng = RngStream(seed)
    start, = rng.substream(0).choice(pi.probs, 1)
    trajectory = simulate_trajectory(P, start, steps, rng.substream(1))
    lifted = lift_two_state(trajectory, n, rng.substream(2))
    assert all((a == 1) == (b == 1) for a, b in zip(trajectory, lifted)), 'state 1 moved'
    counts = np.bincount(lifted, minlength=n + 1)[1:]
    predicted = lifted_stationary(pi, n)
    observed = FrequencyTable({state: int(c) for state, c in enumerate(counts, start=1)})
    try:
        report_ = chi_square_gof(observed, predicted.as_mapping())
    except CellMergeRequired as e:
        raise Abort(FAILED, f'{steps} steps are too few to test: {e}') from None
    emit({
        'n': n,
        'steps': steps,
        'predicted': predicted.probs.tolist(),
        'observed': (counts / counts.sum()).tolist(),
        'gof': report_.as_dict(),
    })
    return FAILED if report_.rejects(significance) else OK


def parse_vector(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(','))


def parser() -> ArgumentParser:
    parser = ArgumentParser(prog='arbor', description=__doc__)
    parser.add_argument('-v', '--verbose', action='count', default=0)
    commands = parser.add_subparsers(dest='command', required=True)

    command = commands.add_parser('validate', help='check a chain spec')
    command.add_argument('chain', type=Path)

    command = commands.add_parser('dist', help='exact tree and stationary distributions')
    command.add_argument('chain', type=Path)
    command.add_argument('-o', '--output', type=Path)
    command.add_argument('--stationary-only', action='store_true')

    for name, help_ in ('sample', 'run a sampler'), ('verify', 'run the acceptance suites'):
        command = commands.add_parser(name, help=help_)
        command.add_argument('chain', type=Path)
        command.add_argument('--mode', choices=MODES, default='restricted')
        command.add_argument('-r', '--replications', type=int, default=1000)
        command.add_argument('--seed', type=int, default=0)
        command.add_argument('--max-blocks', type=int, default=DEFAULT_MAX_BLOCKS)
        command.add_argument('--init', choices=INIT_POLICIES, default='all-ones')
        command.add_argument('--init-vector', type=parse_vector)
        command.add_argument('--allow-periodic', action='store_true')
        command.add_argument('--alpha', type=float, default=DEFAULT_SIGNIFICANCE)
        if name == 'sample':
            command.add_argument('-o', '--output', type=Path)

    command = commands.add_parser('lift-demo', help='lift a two-state chain to n states')
    command.add_argument('chain', type=Path)
    command.add_argument('--n', type=int, required=True)
    command.add_argument('--steps', type=int, default=10 ** 6)
    command.add_argument('--seed', type=int, default=0)
    command.add_argument('--alpha', type=float, default=DEFAULT_SIGNIFICANCE)
    return parser


def run_config(args: Namespace) -> RunConfig:
    return RunConfig(
        chain_path=args.chain,
        mode=args.mode,
        replications=args.replications,
        seed=args.seed,
        max_blocks=args.max_blocks,
        init_policy=args.init,
        init_vector=args.init_vector,
        output_path=getattr(args, 'output', None),
        significance=args.alpha,
        allow_periodic=args.allow_periodic,
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format='%(levelname)s %(message)s')
    try:
        if args.command == 'validate':
            return cmd_validate(args.chain)
        if args.command == 'dist':
            return cmd_dist(args.chain, args.output, args.stationary_only)
        if args.command == 'lift-demo':
            return cmd_lift_demo(args.chain, args.n, args.steps, args.seed, args.alpha)
        config = run_config(args)
        if args.command == 'sample':
            return cmd_sample(config)
        return cmd_verify(config)
    except ConfigError as e:
        logger.error('%s', e)
        return BROKEN
    except Abort as e:
        logger.error('%s', e.message)
        return e.code


if __name__ == '__main__':
    sys.exit(main())

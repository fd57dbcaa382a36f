from pathlib import Path

from testfixtures import compare, not_there, replace_in_environ, ShouldRaise

from arbor.config import ConfigError, RunConfig, threads_from_environment
from arbor.samplers.general import GeneralSampler
from arbor.samplers.restricted import RestrictedSampler

CHAIN = Path('chain.json')


class TestThreadsFromEnvironment:

    def test_not_set(self):
        with replace_in_environ('ARBOR_THREADS', not_there):
            compare(threads_from_environment(), expected=1)

    def test_set(self):
        with replace_in_environ('ARBOR_THREADS', '4'):
            compare(threads_from_environment(), expected=4)

    def test_other_name(self):
        with replace_in_environ('PROJECT_THREADS', '3'):
            compare(threads_from_environment('PROJECT_THREADS'), expected=3)

    def test_default(self):
        with replace_in_environ('ARBOR_THREADS', not_there):
            compare(threads_from_environment(default=2), expected=2)

    def test_not_integer(self):
        with replace_in_environ('ARBOR_THREADS', 'lots'):
            with ShouldRaise(ConfigError("ARBOR_THREADS must be an integer, got 'lots'")):
                threads_from_environment()

    def test_zero(self):
        with replace_in_environ('ARBOR_THREADS', '0'):
            with ShouldRaise(ConfigError('ARBOR_THREADS must be at least 1, got 0')):
                threads_from_environment()


class TestRunConfig:

    def test_defaults(self):
        with replace_in_environ('ARBOR_THREADS', not_there):
            config = RunConfig(CHAIN)
        compare(config, expected=RunConfig(
            chain_path=CHAIN,
            mode='restricted',
            replications=1000,
            seed=0,
            max_blocks=10 ** 6,
            init_policy='all-ones',
            init_vector=None,
            output_path=None,
            significance=0.001,
            allow_periodic=False,
            threads=1,
        ))

    def test_threads_from_environment(self):
        with replace_in_environ('ARBOR_THREADS', '8'):
            compare(RunConfig(CHAIN).threads, expected=8)

    def test_restricted_sampler(self):
        sampler = RunConfig(CHAIN, max_blocks=5, threads=1).sampler()
        assert isinstance(sampler, RestrictedSampler)
        compare(sampler.max_blocks, expected=5)

    def test_general_sampler(self):
        sampler = RunConfig(CHAIN, mode='general', allow_periodic=True, threads=1).sampler()
        assert isinstance(sampler, GeneralSampler)
        compare(sampler.allow_periodic, expected=True)

    def test_bad_mode(self):
        with ShouldRaise(ConfigError("mode must be one of restricted, general, got 'fast'")):
            RunConfig(CHAIN, mode='fast', threads=1)

    def test_bad_replications(self):
        with ShouldRaise(ConfigError('replications must be at least 1, got 0')):
            RunConfig(CHAIN, replications=0, threads=1)

    def test_bad_significance(self):
        with ShouldRaise(ConfigError('significance must be in (0, 0.5), got 0.7')):
            RunConfig(CHAIN, significance=0.7, threads=1)

    def test_bad_init_policy(self):
        with ShouldRaise(ConfigError(
                "init policy must be one of all-ones, fixed, random, got 'zeros'"
        )):
            RunConfig(CHAIN, init_policy='zeros', threads=1)

    def test_fixed_needs_vector(self):
        with ShouldRaise(ConfigError(
                'an initial vector is needed for, and only for, the fixed policy'
        )):
            RunConfig(CHAIN, init_policy='fixed', threads=1)

    def test_vector_needs_fixed(self):
        with ShouldRaise(ConfigError):
            RunConfig(CHAIN, init_vector=(1, 2), threads=1)

    def test_bad_max_blocks(self):
        with ShouldRaise(ConfigError('max blocks must be at least 1, got 0')):
            RunConfig(CHAIN, max_blocks=0, threads=1)

    def test_unlimited_blocks(self):
        compare(RunConfig(CHAIN, max_blocks=None, threads=1).sampler().max_blocks, expected=None)

    def test_bad_threads(self):
        with ShouldRaise(ConfigError('threads must be at least 1, got 0')):
            RunConfig(CHAIN, threads=0)

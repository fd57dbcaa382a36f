import os
from dataclasses import dataclass, field
from pathlib import Path

from .samplers.general import GeneralSampler
from .samplers.restricted import RestrictedSampler
from .sampler import Sampler

DEFAULT_SIGNIFICANCE = 0.001
DEFAULT_MAX_BLOCKS = 10 ** 6

MODES = ('restricted', 'general')
INIT_POLICIES = ('all-ones', 'fixed', 'random')


class ConfigError(ValueError):
    """
    A run was configured with values that can't be used together.
    """


def check_significance(significance: float) -> float:
    if not 0 < significance < 0.5:
        raise ConfigError(f'significance must be in (0, 0.5), got {significance}')
    return significance


def threads_from_environment(name: str = 'ARBOR_THREADS', default: int = 1) -> int:
    """
    The cap on parallelism, from the environment variable ``name`` if set.
    """
    value = os.environ.get(name)
    if value is None:
        return default
    try:
        threads = int(value)
    except ValueError:
        raise ConfigError(f'{name} must be an integer, got {value!r}') from None
    if threads < 1:
        raise ConfigError(f'{name} must be at least 1, got {threads}')
    return threads


@dataclass(frozen=True)
class RunConfig:
    """
    Everything needed to reproduce a sampling or verification run.
    """
    chain_path: Path
    mode: str = 'restricted'
    replications: int = 1000
    seed: int = 0
    max_blocks: int | None = DEFAULT_MAX_BLOCKS
    init_policy: str = 'all-ones'
    init_vector: tuple[int, ...] | None = None
    output_path: Path | None = None
    significance: float = DEFAULT_SIGNIFICANCE
    allow_periodic: bool = False
    threads: int = field(default_factory=threads_from_environment)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f'mode must be one of {", ".join(MODES)}, got {self.mode!r}')
        if self.replications < 1:
            raise ConfigError(f'replications must be at least 1, got {self.replications}')
        check_significance(self.significance)
        if self.init_policy not in INIT_POLICIES:
            raise ConfigError(
                f'init policy must be one of {", ".join(INIT_POLICIES)}, got {self.init_policy!r}'
            )
        if (self.init_policy == 'fixed') != (self.init_vector is not None):
            raise ConfigError('an initial vector is needed for, and only for, the fixed policy')
        if self.max_blocks is not None and self.max_blocks < 1:
            raise ConfigError(f'max blocks must be at least 1, got {self.max_blocks}')
        if self.threads < 1:
            raise ConfigError(f'threads must be at least 1, got {self.threads}')

    def sampler(self) -> Sampler:
        if self.mode == 'restricted':
            return RestrictedSampler(self.max_blocks)
        return GeneralSampler(self.max_blocks, self.allow_periodic)

from testfixtures import compare, ShouldRaise

from arbor.arborescence import Arborescence
from arbor.ensemble import SimulatedEnsemble
from arbor.sampler import (
    BlockWindow, BudgetExhausted, EventTrace, OffsetVector, Sampler, SampleResult, WindowError,
    block_chunks, check_permutation,
)
from arbor.rng import RngStream
from .chains import FAST3, ScriptedEnsemble, uniform


class TestEventTrace:

    def test_success(self):
        compare(EventTrace(True, True, True, True).success, expected=True)

    def test_any_missing(self):
        for i in range(4):
            flags = [True] * 4
            flags[i] = False
            compare(EventTrace(*flags).success, expected=False)


class TestOffsetVector:

    def test_basic(self):
        u = OffsetVector((1, 3, 2, 3))
        compare(u.n, expected=3)
        compare(u[0], expected=1)
        compare(u[3], expected=3)

    def test_out_of_range(self):
        with ShouldRaise(WindowError('offset 3 outside 1..2')):
            OffsetVector((1, 3, 2))

    def test_zero(self):
        with ShouldRaise(WindowError('offset 0 outside 1..2')):
            OffsetVector((0, 1, 2))

    def test_too_short(self):
        with ShouldRaise(WindowError('need at least 2 offsets, got 1')):
            OffsetVector((1,))


class TestSampleResult:

    def test_as_dict(self):
        result = SampleResult(Arborescence(2, (2, 0)), tau=6, blocks_examined=3, a_blocks=2)
        compare(result.root, expected=2)
        compare(result.as_dict(), expected={
            'tau': 6,
            'root': 2,
            'tree': '2:2,0',
            'blocks': 3,
            'censored': False,
            'offsets': None,
        })

    def test_as_dict_with_offsets(self):
        result = SampleResult(
            Arborescence(1, (0, 1)), tau=4, blocks_examined=1, offsets=OffsetVector((2, 1, 2))
        )
        compare(result.as_dict()['offsets'], expected=[2, 1, 2])


class TestBlockWindow:

    def test_fill(self):
        window = BlockWindow(3)
        compare(window.current_time, expected=-1)
        window.push((1, 1))
        compare(window.full, expected=False)
        window.fill(ScriptedEnsemble([(1, 2), (2, 1), (2, 2)]), 3)
        compare(window.full, expected=True)
        compare(len(window), expected=3)
        compare(window.current_time, expected=3)
        compare(list(window), expected=[(1, 2), (2, 1), (2, 2)])
        compare(list(window.vectors), expected=[(1, 2), (2, 1), (2, 2)])


def test_check_permutation():
    compare(check_permutation([3, 1, 2], 3), expected=True)
    compare(check_permutation([1, 1, 2], 3), expected=False)
    compare(check_permutation([1, 2], 3), expected=False)


def test_budget_exhausted():
    e = BudgetExhausted(10, 20, 3)
    compare(str(e), expected='no success in 10 blocks, t=20')
    compare((e.blocks_examined, e.tau, e.a_blocks), expected=(10, 20, 3))


def test_base_sampler():
    sampler = Sampler(max_blocks=5)
    compare(repr(sampler), expected='<Sampler: max_blocks=5>')
    with ShouldRaise(NotImplementedError):
        sampler.run(ScriptedEnsemble([]), RngStream(0))
    with ShouldRaise(NotImplementedError):
        sampler.success_probability(uniform(2))


class TestBlockChunks:

    def test_unbounded(self):
        chunks = block_chunks(None, first=2, largest=16)
        compare([next(chunks) for _ in range(7)], expected=[2, 4, 8, 16, 16, 16, 16])

    def test_bounded(self):
        compare(list(block_chunks(20, first=2, largest=8)), expected=[2, 4, 8, 6])

    def test_smaller_than_first(self):
        compare(list(block_chunks(3, first=64)), expected=[3])

    def test_exact(self):
        compare(list(block_chunks(6, first=2, largest=4)), expected=[2, 4])


class RecordingSampler(Sampler):

    def run(self, source, rng, observer=None):
        self.source = source
        self.source_start = source.next()
        self.rng = rng
        return SampleResult(Arborescence(1, (0, 1, 1)), 2, 1, 1)


def test_simulate_runs_over_simulated_ensemble():
    sampler = RecordingSampler()
    rng = RngStream(1)
    result = sampler.simulate(FAST3, (2, 1, 3), RngStream(0), rng)
    compare(result.tree, expected=Arborescence(1, (0, 1, 1)))
    assert isinstance(sampler.source, SimulatedEnsemble)
    compare(sampler.source_start, expected=(2, 1, 3))
    assert sampler.rng is rng

import numpy as np
import pytest
from numpy.testing import assert_allclose
from testfixtures import compare, ShouldRaise

from arbor.chain import (
    ChainError, Distribution, ReducibleChain, ShapeError, StateError, StochasticityError,
    TransitionMatrix, ValidationReport, averaged_matrix, lift_two_state, lifted_matrix,
    lifted_stationary, matrix, simulate_trajectory, stationary_solve, step,
    three_parameter_chain, validate,
)
from arbor.rng import RngStream
from .chains import CYCLE3, FAST3, FLIP, NO_A3, REDUCIBLE, random_chain, sparse_chain, uniform


class TestTransitionMatrix:

    def test_basic(self):
        P = TransitionMatrix(np.array([[0.7, 0.3], [0.6, 0.4]]))
        compare(P.n, expected=2)
        compare(P.p(1, 2), expected=0.3)
        compare(P.p(2, 1), expected=0.6)
        compare(repr(P), expected='<TransitionMatrix: n=2>')

    def test_read_only(self):
        P = matrix([[0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(ValueError):
            P.entries[0, 0] = 1

    def test_not_square(self):
        with ShouldRaise(ShapeError('transition matrix must be square, got shape (2, 3)')):
            matrix([[0.5, 0.5, 0], [0.5, 0.5, 0]])

    def test_empty(self):
        with ShouldRaise(ShapeError('transition matrix must be square, got shape (0,)')):
            matrix([])

    def test_row_sum(self):
        with ShouldRaise(StochasticityError(
                'not row-stochastic within 1e-09: row sums 1, 0.9'
        )):
            matrix([[0.5, 0.5], [0.5, 0.4]])

    def test_negative(self):
        with ShouldRaise(StochasticityError):
            matrix([[1.5, -0.5], [0.5, 0.5]])

    def test_within_tolerance(self):
        P = matrix([[0.5, 0.5 + 1e-12], [0.5, 0.5]])
        compare(P.n, expected=2)

    def test_labels(self):
        P = TransitionMatrix(np.eye(2), labels=('up', 'down'))
        compare(P.labels, expected=('up', 'down'))

    def test_wrong_number_of_labels(self):
        with ShouldRaise(ShapeError('1 labels for 2 states')):
            TransitionMatrix(np.eye(2), labels=('up',))

    def test_matrix_passes_through(self):
        assert matrix(FAST3) is FAST3

    def test_cumulative(self):
        assert_allclose(FAST3.cumulative[0], [0.4, 0.7, 1.0])

    def test_last_positive(self):
        compare(NO_A3.last_positive, expected=[1, 2, 2])


class TestDistribution:

    def test_indexing(self):
        pi = Distribution(np.array([0.25, 0.75]))
        compare(pi.n, expected=2)
        compare(pi[2], expected=0.75)
        compare(pi.as_mapping(), expected={1: 0.25, 2: 0.75})

    def test_does_not_sum_to_one(self):
        with ShouldRaise(ChainError('probabilities sum to 0.5')):
            Distribution(np.array([0.25, 0.25]))

    def test_negative(self):
        with ShouldRaise(ChainError):
            Distribution(np.array([1.5, -0.5]))

    def test_distance(self):
        a = Distribution(np.array([0.25, 0.75]))
        b = Distribution(np.array([0.5, 0.5]))
        compare(a.distance(b), expected=0.25)


class TestValidate:

    def test_good(self):
        compare(validate(FAST3), expected=ValidationReport(
            row_stochastic=True,
            irreducible=True,
            aperiodic=True,
            assumption_a=True,
            period=1,
            reversible=True,
        ))

    def test_not_reversible(self):
        compare(validate(NO_A3).reversible, expected=False)

    def test_assumption_a_fails(self):
        report = validate(NO_A3)
        compare(report.irreducible, expected=True)
        compare(report.aperiodic, expected=True)
        compare(report.assumption_a, expected=False)

    def test_periodic(self):
        report = validate(FLIP)
        compare(report.period, expected=2)
        compare(report.aperiodic, expected=False)
        compare(report.assumption_a, expected=False)
        compare(report.reversible, expected=True)

    def test_cycle(self):
        report = validate(CYCLE3)
        compare(report.period, expected=3)
        compare(report.reversible, expected=False)

    def test_reducible(self):
        report = validate(REDUCIBLE)
        compare(report.irreducible, expected=False)
        compare(report.period, expected=1)

    def test_state_one_on_no_cycle(self):
        report = validate([[0, 1], [0, 1]])
        compare(report.irreducible, expected=False)
        compare(report.period, expected=0)
        compare(report.aperiodic, expected=False)

    def test_not_stochastic(self):
        report = validate([[0.5, 0.6], [0.5, 0.5]])
        compare(report.row_stochastic, expected=False)
        compare(report.irreducible, expected=True)
        compare(report.reversible, expected=False)

    def test_as_dict(self):
        compare(validate(uniform(2)).as_dict(), expected={
            'row_stochastic': True,
            'irreducible': True,
            'aperiodic': True,
            'assumption_a': True,
            'period': 1,
            'reversible': True,
        })


class TestStationary:

    def test_two_state(self):
        P = matrix([[0.7, 0.3], [0.6, 0.4]])
        assert_allclose(stationary_solve(P).probs, [2 / 3, 1 / 3], atol=1e-12)

    def test_is_stationary(self):
        P = random_chain(6, seed=3, zeros=0.4)
        pi = stationary_solve(P).probs
        assert_allclose(pi @ P.entries, pi, atol=1e-12)

    def test_reducible(self):
        with ShouldRaise(ReducibleChain('<TransitionMatrix: n=2> is reducible')):
            stationary_solve(REDUCIBLE)

    def test_averaged_matrix_positive(self):
        averaged = averaged_matrix(CYCLE3)
        assert_allclose(averaged.entries, np.full((3, 3), 1 / 3))

    @pytest.mark.parametrize('seed', range(20))
    def test_averaged_matrix_random(self, seed):
        P = sparse_chain(2 + seed % 7, seed)
        assert validate(P).irreducible
        averaged = averaged_matrix(P).entries
        assert (averaged > 0).all(), averaged
        assert_allclose(averaged.sum(axis=1), np.ones(P.n), atol=1e-9)

    def test_averaged_matrix_same_stationary(self):
        assert_allclose(
            stationary_solve(averaged_matrix(NO_A3)).probs,
            stationary_solve(NO_A3).probs,
            atol=1e-12,
        )


class TestStep:

    def test_deterministic(self):
        compare(step(FLIP, 1, RngStream(0)), expected=2)
        compare(step(FLIP, 2, RngStream(0)), expected=1)

    def test_bad_state(self):
        with ShouldRaise(StateError('state 3 outside 1..2')):
            step(FLIP, 3, RngStream(0))

    def test_trajectory_matches_steps(self):
        rng = RngStream(11)
        state = 1
        expected = [state]
        for _ in range(5000):
            state = step(FAST3, state, rng)
            expected.append(state)
        compare(simulate_trajectory(FAST3, 1, 5000, RngStream(11)), expected=expected)

    def test_zero_probability_moves_never_taken(self):
        trajectory = simulate_trajectory(NO_A3, 1, 20000, RngStream(2))
        for i, j in zip(trajectory, trajectory[1:]):
            assert NO_A3.p(i, j) > 0, (i, j)

    def test_long_run_frequencies(self):
        trajectory = np.array(simulate_trajectory(FAST3, 1, 50000, RngStream(4)))
        frequencies = np.bincount(trajectory, minlength=4)[1:] / len(trajectory)
        assert_allclose(frequencies, stationary_solve(FAST3).probs, atol=0.02)


class TestLift:

    def test_lift_two_state(self):
        lifted = lift_two_state([1, 2, 2, 1, 2], 4, RngStream(0))
        compare(len(lifted), expected=5)
        compare([s == 1 for s in lifted], expected=[True, False, False, True, False])
        assert all(2 <= s <= 4 for s in lifted if s != 1)

    def test_lift_uniform(self):
        rng = RngStream(4)
        counts = np.zeros((2, 4), dtype=int)
        replications = 10 ** 5
        for _ in range(replications):
            lifted = lift_two_state((1, 2, 2, 1), 3, rng)
            counts[0, lifted[1]] += 1
            counts[1, lifted[2]] += 1
        compare(counts[:, :2].tolist(), expected=[[0, 0], [0, 0]])
        sigma = (0.25 / replications) ** 0.5
        for frequency in (counts[:, 2:] / replications).ravel():
            assert abs(frequency - 0.5) < 3 * sigma, counts

    def test_lift_too_small(self):
        with ShouldRaise(StateError('can only lift to 3 or more states, not 2')):
            lift_two_state([1, 2], 2, RngStream(0))

    def test_lift_bad_state(self):
        with ShouldRaise(StateError('state 3 at time 1 is not 1 or 2')):
            lift_two_state([1, 3], 4, RngStream(0))

    def test_lifted_stationary(self):
        pi = Distribution(np.array([0.6, 0.4]))
        assert_allclose(lifted_stationary(pi, 5).probs, [0.6, 0.1, 0.1, 0.1, 0.1])

    def test_lifted_stationary_needs_two_states(self):
        with ShouldRaise(ShapeError('need a two-state distribution, got 3 states')):
            lifted_stationary(Distribution(np.full(3, 1 / 3)), 4)

    def test_lifted_matrix(self):
        P = matrix([[0.7, 0.3], [0.6, 0.4]])
        lifted = lifted_matrix(P, 4)
        assert_allclose(
            stationary_solve(lifted).probs,
            lifted_stationary(stationary_solve(P), 4).probs,
            atol=1e-12,
        )


class TestThreeParameterChain:

    def test_rows(self):
        P = three_parameter_chain(3, alpha=0.2, beta=0.3, gamma=0.1)
        assert_allclose(P.entries, [
            [0.6, 0.2, 0.2],
            [0.3, 0.6, 0.1],
            [0.3, 0.1, 0.6],
        ])

    def test_invalid(self):
        with ShouldRaise(StochasticityError):
            three_parameter_chain(3, alpha=0.6, beta=0.3, gamma=0.1)

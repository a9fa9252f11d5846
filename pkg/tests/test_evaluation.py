"""Performance indices and block error accounting."""

import numpy as np
import pytest

from qmyo.errors import MalformedBlockError, UndefinedDenominatorError
from qmyo.evaluation import (
    Block,
    TrajectoryPair,
    block_errors,
    r_squared_dof,
    r_squared_global,
)
from qmyo.operators import DecodeConfig, Direction, Dof

D1 = Dof.FLEXION_EXTENSION
D3 = Dof.PRONATION_SUPINATION

POS = Direction.POSITIVE
NEG = Direction.NEGATIVE


def brute_force_r2(truth, estimate):
    """Independent plain-Python evaluation of the per-DOF index."""
    mean = sum(truth) / len(truth)
    sse = sum((e - t) ** 2 for t, e in zip(truth, estimate))
    tss = sum((t - mean) ** 2 for t in truth)
    return 1.0 - sse / tss


def brute_force_global(truth_map, estimate_map):
    sse = 0.0
    tss = 0.0
    for dof in truth_map:
        truth = list(truth_map[dof])
        estimate = list(estimate_map[dof])
        mean = sum(truth) / len(truth)
        sse += sum((e - t) ** 2 for t, e in zip(truth, estimate))
        tss += sum((t - mean) ** 2 for t in truth)
    return 1.0 - sse / tss


class TestRSquaredDof:
    def test_perfect_estimate(self):
        truth = np.array([1.0, 2.0, 3.0])
        assert r_squared_dof(truth, truth) == 1.0

    def test_mean_predictor_scores_zero(self):
        truth = np.array([0.0, 1.0, 2.0, 3.0])
        estimate = np.full(4, truth.mean())
        assert r_squared_dof(truth, estimate) == pytest.approx(0.0, abs=1e-15)

    def test_hand_arithmetic(self):
        truth = np.array([0.0, 1.0, 2.0, 3.0])
        estimate = np.array([0.0, 1.0, 2.0, 5.0])
        assert r_squared_dof(truth, estimate) == pytest.approx(0.2, abs=1e-15)

    def test_can_be_negative(self):
        truth = np.array([0.0, 1.0])
        estimate = np.array([5.0, -5.0])
        assert r_squared_dof(truth, estimate) < 0.0

    def test_constant_truth_undefined(self):
        with pytest.raises(UndefinedDenominatorError):
            r_squared_dof(np.full(5, 2.0), np.zeros(5))

    def test_bounded_above_by_one(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            truth = rng.normal(size=20)
            estimate = rng.normal(size=20)
            value = r_squared_dof(truth, estimate)
            assert value <= 1.0
            assert (value == 1.0) == bool(np.all(truth == estimate))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            n = int(rng.integers(2, 40))
            truth = rng.normal(scale=10.0, size=n)
            estimate = truth + rng.normal(size=n)
            assert r_squared_dof(truth, estimate) == pytest.approx(
                brute_force_r2(truth, estimate), abs=1e-12
            )

    def test_shift_invariance(self):
        rng = np.random.default_rng(2)
        truth = rng.normal(size=30)
        estimate = truth + rng.normal(size=30)
        base = r_squared_dof(truth, estimate)
        shifted = r_squared_dof(truth + 123.25, estimate + 123.25)
        assert shifted == pytest.approx(base, abs=1e-12)


class TestRSquaredGlobal:
    def test_all_perfect(self):
        truth = {D1: np.array([1.0, 2.0]), D3: np.array([3.0, 1.0])}
        assert r_squared_global(truth, truth) == 1.0

    def test_single_dof_reduces_to_per_dof(self):
        truth = {D1: np.array([0.0, 1.0, 2.0, 3.0])}
        estimate = {D1: np.array([0.0, 1.0, 2.0, 5.0])}
        assert r_squared_global(truth, estimate) == pytest.approx(
            r_squared_dof(truth[D1], estimate[D1]), abs=1e-15
        )

    def test_pooled_not_averaged(self):
        # equal denominators, per-DOF values 0.2 and 1.0 -> pooled 0.6
        truth = {
            D1: np.array([0.0, 1.0, 2.0, 3.0]),
            D3: np.array([10.0, 11.0, 12.0, 13.0]),
        }
        estimate = {
            D1: np.array([0.0, 1.0, 2.0, 5.0]),
            D3: truth[D3].copy(),
        }
        assert r_squared_dof(truth[D1], estimate[D1]) == pytest.approx(0.2, abs=1e-15)
        assert r_squared_dof(truth[D3], estimate[D3]) == 1.0
        assert r_squared_global(truth, estimate) == pytest.approx(0.6, abs=1e-15)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            n = int(rng.integers(2, 30))
            truth = {d: rng.normal(scale=5.0, size=n) for d in (D1, D3)}
            estimate = {d: truth[d] + rng.normal(size=n) for d in (D1, D3)}
            assert r_squared_global(truth, estimate) == pytest.approx(
                brute_force_global(truth, estimate), abs=1e-12
            )

    def test_one_constant_dof_is_fine_when_pooled(self):
        truth = {D1: np.array([1.0, 1.0]), D3: np.array([0.0, 2.0])}
        estimate = {D1: np.array([1.0, 1.0]), D3: np.array([0.0, 2.0])}
        assert r_squared_global(truth, estimate) == 1.0

    def test_all_constant_truth_undefined(self):
        truth = {D1: np.full(3, 1.0), D3: np.full(3, 2.0)}
        with pytest.raises(UndefinedDenominatorError):
            r_squared_global(truth, truth)

    def test_shift_invariance(self):
        rng = np.random.default_rng(4)
        truth = {d: rng.normal(size=20) for d in (D1, D3)}
        estimate = {d: truth[d] + rng.normal(size=20) for d in (D1, D3)}
        base = r_squared_global(truth, estimate)
        shifted = r_squared_global(
            {d: truth[d] - 55.5 for d in truth},
            {d: estimate[d] - 55.5 for d in estimate},
        )
        assert shifted == pytest.approx(base, abs=1e-12)


def pair(truth, estimate, blocks):
    return TrajectoryPair(truth=truth, estimate=estimate, blocks=blocks)


class TestBlockErrors:
    def two_block_pair(self, d1_estimates):
        n = len(d1_estimates)
        half = n // 2
        truth = {D1: np.array([10.0] * half + [-10.0] * (n - half))}
        blocks = [
            Block(0, half, {D1: POS}),
            Block(half, n, {D1: NEG}),
        ]
        return pair(truth, {D1: np.array(d1_estimates)}, blocks)

    def test_all_correct(self):
        p = self.two_block_pair([9.0, 11.0, 10.0, -9.0, -11.0, -10.0])
        report = block_errors(p, DecodeConfig())
        assert report.error_counts[D1] == 0
        assert report.misclassified_blocks == []

    def test_flipped_majority_counts_once(self):
        p = self.two_block_pair([-9.0, -11.0, -10.0, -9.0, -11.0, -10.0])
        report = block_errors(p, DecodeConfig())
        assert report.error_counts[D1] == 1
        assert report.misclassified_blocks == [0]

    def test_three_of_five_wrong_is_an_error(self):
        truth = {D3: np.full(5, 10.0)}
        estimate = {D3: np.array([10.0, -10.0, -10.0, -10.0, 10.0])}
        p = pair(truth, estimate, [Block(0, 5, {D3: POS})])
        report = block_errors(p, DecodeConfig())
        assert report.error_counts[D3] == 1

    def test_two_of_five_wrong_is_not(self):
        truth = {D3: np.full(5, 10.0)}
        estimate = {D3: np.array([10.0, -10.0, -10.0, 10.0, 10.0])}
        p = pair(truth, estimate, [Block(0, 5, {D3: POS})])
        assert block_errors(p, DecodeConfig()).error_counts[D3] == 0

    def test_window_order_within_block_is_irrelevant(self):
        rng = np.random.default_rng(5)
        estimates = np.array([12.0, -3.0, 8.0, 9.0, -1.0, 7.0])
        truth = {D1: np.full(6, 10.0)}
        base = block_errors(
            pair(truth, {D1: estimates}, [Block(0, 6, {D1: POS})]), DecodeConfig()
        )
        for _ in range(10):
            shuffled = estimates.copy()
            rng.shuffle(shuffled)
            report = block_errors(
                pair(truth, {D1: shuffled}, [Block(0, 6, {D1: POS})]), DecodeConfig()
            )
            assert report.error_counts == base.error_counts

    def test_rest_intended_blocks(self):
        truth = {D1: np.zeros(4)}
        estimate = {D1: np.array([0.0, 0.0, 0.0, 5.0])}
        p = pair(truth, estimate, [Block(0, 4, {})])
        assert block_errors(p, DecodeConfig()).error_counts[D1] == 0

    def test_any_vote(self):
        truth = {D1: np.full(4, 10.0)}
        estimate = {D1: np.array([10.0, 10.0, 10.0, -1.0])}
        p = pair(truth, estimate, [Block(0, 4, {D1: POS})])
        assert block_errors(p, DecodeConfig(block_vote="any")).error_counts[D1] == 1
        assert block_errors(p, DecodeConfig(block_vote="majority")).error_counts[D1] == 0

    def test_all_vote(self):
        truth = {D1: np.full(4, 10.0)}
        estimate = {D1: np.array([-10.0, -10.0, -10.0, 1.0])}
        p = pair(truth, estimate, [Block(0, 4, {D1: POS})])
        assert block_errors(p, DecodeConfig(block_vote="all")).error_counts[D1] == 0
        assert block_errors(p, DecodeConfig(block_vote="majority")).error_counts[D1] == 1

    def test_misclassified_once_even_with_two_dof_mistakes(self):
        truth = {D1: np.full(3, 10.0), D3: np.full(3, 10.0)}
        estimate = {D1: np.full(3, -10.0), D3: np.full(3, -10.0)}
        p = pair(truth, estimate, [Block(0, 3, {D1: POS, D3: POS})])
        report = block_errors(p, DecodeConfig())
        assert report.error_counts == {D1: 1, D3: 1}
        assert report.misclassified_blocks == [0]
        assert report.n_misclassified == 1


class TestStructureValidation:
    def test_empty_block_rejected(self):
        with pytest.raises(MalformedBlockError):
            Block(3, 3, {})

    def test_gap_between_blocks_rejected(self):
        truth = {D1: np.zeros(4)}
        with pytest.raises(MalformedBlockError):
            pair(truth, truth, [Block(0, 2, {}), Block(3, 4, {})])

    def test_blocks_must_cover_everything(self):
        truth = {D1: np.zeros(4)}
        with pytest.raises(MalformedBlockError):
            pair(truth, truth, [Block(0, 2, {})])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            pair(
                {D1: np.zeros(4)},
                {D1: np.zeros(5)},
                [Block(0, 4, {})],
            )

    def test_dof_set_mismatch_rejected(self):
        with pytest.raises(ValueError):
            pair({D1: np.zeros(2)}, {D3: np.zeros(2)}, [Block(0, 2, {})])

import math

import numpy as np
import pytest
from conftest import DUPLICATE_ROWS, matrix_mutual_information

from channel_degrading.channel import (
    Channel,
    DegradeReport,
    DegradingMap,
    InputDistribution,
    MergeStep,
    OutputLetter,
    PosteriorChannel,
    apply_degrading_map,
    apply_intermediate_channel,
    eta,
    mutual_information,
    to_bits,
    to_posterior_form,
)
from channel_degrading.errors import DomainError, InvalidChannelError
from channel_degrading.generator import random_channel
from channel_degrading.oracles import Partition


class TestEta:
    def test_endpoints_are_exactly_zero(self):
        assert eta(0.0) == 0.0
        assert eta(1.0) == 0.0

    def test_half(self):
        assert eta(0.5) == pytest.approx(0.34657359027997264, rel=1e-15)

    def test_slightly_above_one_is_clamped(self):
        assert eta(1.0 + 1e-10) == 0.0

    @pytest.mark.parametrize("p", [-1e-6, 1.1, math.nan, math.inf])
    def test_outside_domain(self, p):
        with pytest.raises(DomainError):
            eta(p)

    def test_bits(self):
        assert to_bits(math.log(2.0)) == pytest.approx(1.0)


class TestValidation:
    def test_input_distribution_sum(self):
        with pytest.raises(InvalidChannelError) as info:
            InputDistribution([0.5, 0.6])
        assert info.value.field == "input_dist"

    def test_input_distribution_renormalize(self):
        dist = InputDistribution([1.0, 3.0], renormalize=True)
        assert dist.probs.tolist() == [0.25, 0.75]

    def test_negative_entry(self):
        with pytest.raises(InvalidChannelError):
            InputDistribution([1.2, -0.2])

    def test_nan_entry(self):
        with pytest.raises(InvalidChannelError):
            InputDistribution([math.nan, 1.0])

    def test_bad_row_names_its_index(self):
        with pytest.raises(InvalidChannelError) as info:
            Channel([[0.5, 0.5], [0.5, 0.6]])
        assert info.value.field == "channel[1]"
        assert "channel[1]" in str(info.value)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidChannelError):
            to_posterior_form(Channel([[1.0, 0.0], [0.0, 1.0]]), InputDistribution([1.0 / 3] * 3))

    def test_tolerance_accepts_small_deviation(self):
        assert Channel([[0.5, 0.5 + 1e-10]]).num_outputs == 2

    def test_arrays_are_read_only(self):
        channel = Channel([[0.5, 0.5]])
        with pytest.raises(ValueError):
            channel.rows[0, 0] = 1.0


class TestMutualInformation:
    def test_noiseless_binary(self):
        assert mutual_information(Channel(np.eye(2)), InputDistribution([0.5, 0.5])) == pytest.approx(math.log(2.0))

    def test_useless_channel(self):
        value = mutual_information(Channel([[0.5, 0.5], [0.5, 0.5]]), InputDistribution([0.5, 0.5]))
        assert value == pytest.approx(0.0, abs=1e-15)

    def test_binary_symmetric_channel(self):
        p = 0.11
        value = mutual_information(Channel([[1 - p, p], [p, 1 - p]]), InputDistribution([0.5, 0.5]))
        assert value == pytest.approx(math.log(2.0) - (eta(p) + eta(1 - p)), abs=1e-14)
        assert value == pytest.approx(0.693147 - 0.344689, abs=1e-6)

    def test_matches_matrix_form(self):
        for seed in range(20):
            channel, input_dist = random_channel(3, 7, seed)
            expected = matrix_mutual_information(channel.rows, input_dist.probs)
            assert mutual_information(channel, input_dist) == pytest.approx(expected, abs=1e-12)

    def test_range(self):
        for seed in range(20):
            channel, input_dist = random_channel(4, 5, seed)
            assert 0.0 <= mutual_information(channel, input_dist) <= math.log(4) + 1e-12


class TestPosteriorForm:
    def test_identity(self, make_pc):
        pc = make_pc(np.eye(2))
        assert pc.masses.tolist() == [0.5, 0.5]
        assert pc.posteriors.tolist() == [[1.0, 0.0], [0.0, 1.0]]
        assert [letter.provenance for letter in pc.letters] == [frozenset({0}), frozenset({1})]

    def test_bayes_rule(self, make_pc):
        pc = make_pc([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5]])
        assert pc.masses.tolist() == pytest.approx([0.25, 0.5, 0.25])
        assert pc.posteriors[1].tolist() == pytest.approx([0.5, 0.5])

    def test_zero_column_is_dropped(self, make_pc):
        pc = make_pc([[0.5, 0.0, 0.5], [0.25, 0.0, 0.75]])
        assert len(pc) == 2
        assert pc.dropped == frozenset({1})
        assert pc.num_original_outputs == 3
        assert pc.degrading_map().assignment.tolist() == [0, 0, 1]

    def test_zero_probability_input_is_stripped(self, make_pc):
        pc = make_pc([[0.5, 0.5], [1.0, 0.0], [0.0, 1.0]], [0.5, 0.0, 0.5])
        assert pc.num_inputs == 2
        assert pc.input_probs.tolist() == [0.5, 0.5]
        assert pc.mutual_information() == pytest.approx(
            matrix_mutual_information([[0.5, 0.5], [1.0, 0.0], [0.0, 1.0]], [0.5, 0.0, 0.5]), abs=1e-14
        )

    def test_masses_sum_to_one(self, random_pc):
        for seed in range(10):
            pc = random_pc(3, 50, seed)
            assert math.fsum(pc.masses.tolist()) == pytest.approx(1.0, abs=1e-12)
            assert np.allclose(pc.posteriors.sum(axis=1), 1.0, atol=1e-12)

    def test_overlapping_provenance_is_rejected(self):
        letters = [OutputLetter([0.25, 0.25], {0}), OutputLetter([0.25, 0.25], {0, 1})]
        with pytest.raises(InvalidChannelError):
            PosteriorChannel(letters, [0.5, 0.5])

    def test_merged_by(self, make_pc):
        pc = make_pc(DUPLICATE_ROWS)
        merged = pc.merged_by(Partition([(0, 3), (1, 2)]))
        assert len(merged) == 2
        assert merged.mutual_information() == pytest.approx(pc.mutual_information(), abs=1e-14)
        assert merged.degrading_map().assignment.tolist() == [0, 1, 1, 0]


class TestDegradingMap:
    def test_identity(self):
        channel, _ = random_channel(2, 5, 3)
        assert np.array_equal(apply_degrading_map(channel, DegradingMap.identity(5)).rows, channel.rows)

    def test_all_to_one(self):
        channel, input_dist = random_channel(3, 6, 4)
        merged = apply_degrading_map(channel, DegradingMap(np.zeros(6, dtype=int)))
        assert merged.rows.shape == (3, 1)
        assert merged.rows[:, 0] == pytest.approx(1.0, abs=1e-12)
        assert mutual_information(merged, input_dist) == pytest.approx(0.0, abs=1e-14)

    def test_from_blocks(self):
        assert DegradingMap.from_blocks([(0, 2), (1,)], 3).assignment.tolist() == [0, 1, 0]

    def test_must_be_surjective(self):
        with pytest.raises(DomainError):
            DegradingMap([0, 2, 2], 3)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            DegradingMap([0, 1, 3], 3)

    def test_wrong_size(self):
        channel, _ = random_channel(2, 5, 3)
        with pytest.raises(DomainError):
            apply_degrading_map(channel, DegradingMap.identity(4))

    def test_data_processing(self, rng):
        for seed in range(30):
            channel, input_dist = random_channel(3, 8, seed)
            before = mutual_information(channel, input_dist)
            num_merged = int(rng.integers(1, 8))
            assignment = np.concatenate((np.arange(num_merged), rng.integers(0, num_merged, 8 - num_merged)))
            merged = apply_degrading_map(channel, DegradingMap(rng.permutation(assignment)))
            assert np.allclose(merged.rows.sum(axis=1), 1.0, atol=1e-12)
            assert mutual_information(merged, input_dist) <= before + 1e-12

    def test_intermediate_channel(self, rng):
        channel, input_dist = random_channel(2, 4, 5)
        phi = rng.dirichlet(np.ones(3), size=4)
        degraded = apply_intermediate_channel(channel, phi)
        assert degraded.rows.shape == (2, 3)
        assert mutual_information(degraded, input_dist) <= mutual_information(channel, input_dist) + 1e-12

    def test_intermediate_channel_rows_must_be_stochastic(self):
        channel, _ = random_channel(2, 2, 5)
        with pytest.raises(InvalidChannelError):
            apply_intermediate_channel(channel, [[0.5, 0.6], [1.0, 0.0]])


class TestDegradeReport:
    def test_negative_residue_is_clamped(self, make_pc):
        pc = make_pc(np.eye(2))
        steps = [MergeStep(0, 1, -5e-13, 3), MergeStep(0, 2, 0.25, 2)]
        report = DegradeReport(pc, pc.degrading_map(), steps)
        assert report.steps[0].delta == 0.0
        assert report.raw_deltas == (-5e-13, 0.25)
        assert report.total_delta == pytest.approx(0.25 - 5e-13, abs=1e-18)

    def test_larger_negative_values_are_kept(self, make_pc):
        pc = make_pc(np.eye(2))
        report = DegradeReport(pc, pc.degrading_map(), [MergeStep(0, 1, -1e-9, 3)])
        assert report.steps[0].delta == -1e-9
        assert report.total_delta == 0.0

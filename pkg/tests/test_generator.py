import numpy as np
import pytest

from channel_degrading.errors import DomainError, InvalidChannelError
from channel_degrading.generator import GeneratorSpec, parse_generator_spec, random_channel, random_generator


class TestRandomChannel:
    def test_deterministic(self):
        first, first_dist = random_channel(3, 50, 42)
        second, second_dist = random_channel(3, 50, 42)
        assert np.array_equal(first.rows, second.rows)
        assert np.array_equal(first_dist.probs, second_dist.probs)

    def test_shape_and_sums(self):
        channel, input_dist = random_channel(4, 100, 7, 3)
        assert channel.rows.shape == (4, 100)
        assert np.allclose(channel.rows.sum(axis=1), 1.0, atol=1e-12, rtol=0.0)
        assert input_dist.probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(channel.rows > 0.0)

    def test_flat_dirichlet_mean(self):
        channel, _ = random_channel(2, 20000, 1)
        assert channel.rows.mean() == pytest.approx(1 / 20000)
        # the entries of a flat Dirichlet row are approximately Exp(1) / n
        assert (channel.rows * 20000).std() == pytest.approx(1.0, abs=0.05)

    def test_trials_are_independent_streams(self):
        trial_0, _ = random_channel(2, 16, 42, 0)
        trial_1, _ = random_channel(2, 16, 42, 1)
        plain, _ = random_channel(2, 16, 42)
        assert not np.array_equal(trial_0.rows, trial_1.rows)
        assert not np.array_equal(trial_0.rows, plain.rows)
        assert np.array_equal(trial_1.rows, random_channel(2, 16, 42, 1)[0].rows)

    def test_seeds_differ(self):
        assert not np.array_equal(random_channel(2, 16, 1)[0].rows, random_channel(2, 16, 2)[0].rows)

    def test_input_distribution_is_drawn_first(self):
        rng = random_generator(5, 2)
        samples = rng.standard_exponential(3)
        _, input_dist = random_channel(3, 4, 5, 2)
        assert input_dist.probs.tolist() == pytest.approx((samples / samples.sum()).tolist(), rel=1e-15)

    @pytest.mark.parametrize("num_inputs, num_outputs", [(1, 4), (2, 1)])
    def test_too_small(self, num_inputs, num_outputs):
        with pytest.raises(DomainError):
            random_channel(num_inputs, num_outputs, 0)

    def test_negative_seed(self):
        with pytest.raises(DomainError):
            random_generator(-1)
        with pytest.raises(DomainError):
            random_generator(1, -1)

    def test_large_seed(self):
        assert isinstance(random_generator(2**64 - 1), np.random.Generator)


class TestGeneratorSpec:
    def test_parse(self):
        assert parse_generator_spec("X=3,Y=256,seed=42") == GeneratorSpec(3, 256, 42)
        assert parse_generator_spec(" X = 2 , Y=8, seed=0, trial=4 ") == GeneratorSpec(2, 8, 0, 4)

    def test_str(self):
        assert str(GeneratorSpec(3, 256, 42)) == "X=3,Y=256,seed=42"
        assert str(GeneratorSpec(3, 256, 42).with_trial(7)) == "X=3,Y=256,seed=42,trial=7"
        assert parse_generator_spec(str(GeneratorSpec(2, 8, 1, 2))) == GeneratorSpec(2, 8, 1, 2)

    def test_generate(self):
        channel, _ = GeneratorSpec(2, 8, 1, 2).generate()
        assert np.array_equal(channel.rows, random_channel(2, 8, 1, 2)[0].rows)

    @pytest.mark.parametrize(
        "text, field",
        [
            ("X=3,Y=256", "seed"),
            ("X=3,Y=256,seed=1,Z=2", "Z"),
            ("X=3,X=4,Y=256,seed=1", "X"),
            ("X=three,Y=256,seed=1", "X"),
            ("X=1,Y=256,seed=1", "X"),
            ("X=2,Y=1,seed=1", "Y"),
            ("X=2,Y=8,seed=-1", "seed"),
            ("X=2,Y=8,seed=1,trial=-2", "trial"),
            ("X=2,Y=8,seed", "seed"),
        ],
    )
    def test_invalid(self, text, field):
        with pytest.raises(InvalidChannelError) as info:
            parse_generator_spec(text)
        assert info.value.field == field

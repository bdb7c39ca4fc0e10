"""
________________________________________________________________________

:PROJECT: channel_degrading

*Generator*

:details: Generator:
    Seeded random channels for experiments and tests

:file:    generator.py

________________________________________________________________________

The random stream is numpy's PCG64 bit generator seeded through a `SeedSequence`. A channel generated for trial t of
root seed s uses `SeedSequence([s, t])`, so trials are independent streams and can be generated in any order. The
input distribution is drawn first, then the channel rows in input order. Each vector is drawn from the flat Dirichlet
distribution by normalizing unit-exponential samples.
"""

from __future__ import annotations

import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .channel import Channel, InputDistribution
from .errors import DomainError, InvalidChannelError

__all__ = ["GeneratorSpec", "random_generator", "random_channel", "parse_generator_spec"]

logger = logging.getLogger(__name__)


def random_generator(seed: int, trial: Optional[int] = None) -> np.random.Generator:
    """
    The PCG64 generator for `seed` (and the independent sub-stream `trial` of it, if given)
    """
    if seed < 0 or (trial is not None and trial < 0):
        raise DomainError(f"Seeds and trial indices must be non-negative, got seed = {seed}, trial = {trial}")
    entropy = seed if trial is None else [seed, trial]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def _flat_dirichlet(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    samples = rng.standard_exponential(shape)
    return samples / samples.sum(axis=-1, keepdims=True)


def random_channel(
    num_inputs: int, num_outputs: int, seed: int, trial: Optional[int] = None
) -> Tuple[Channel, InputDistribution]:
    """
    Draws a random channel and input distribution, every row from the flat Dirichlet distribution

    Parameters
    ----------
    num_inputs: int
        The input alphabet size (at least 2)
    num_outputs: int
        The output alphabet size (at least 2)
    seed: int
        The root seed
    trial: int
        (optional) The trial index, selects an independent stream of `seed`

    Returns
    -------
    Tuple[Channel, InputDistribution]
        The channel and its input distribution, fully determined by `seed` and `trial`
    """
    if num_inputs < 2 or num_outputs < 2:
        raise DomainError(f"Random channels need at least 2 inputs and 2 outputs, got {num_inputs}x{num_outputs}")
    rng = random_generator(seed, trial)
    input_dist = InputDistribution(_flat_dirichlet(rng, (num_inputs,)))
    channel = Channel(_flat_dirichlet(rng, (num_inputs, num_outputs)))
    logger.debug(f"Generated random {num_inputs}x{num_outputs} channel for seed {seed}, trial {trial}")
    return channel, input_dist


class GeneratorSpec(NamedTuple):
    """
    A random channel given on the command line as 'X=3,Y=256,seed=42' (optionally with ',trial=k')
    """

    num_inputs: int
    num_outputs: int
    seed: int
    trial: Optional[int] = None

    def __str__(self) -> str:
        spec = f"X={self.num_inputs},Y={self.num_outputs},seed={self.seed}"
        return spec if self.trial is None else spec + f",trial={self.trial}"

    def with_trial(self, trial: int) -> GeneratorSpec:
        return self._replace(trial=trial)

    def generate(self) -> Tuple[Channel, InputDistribution]:
        return random_channel(self.num_inputs, self.num_outputs, self.seed, self.trial)


_SPEC_KEYS = {"X": "num_inputs", "Y": "num_outputs", "seed": "seed", "trial": "trial"}


def parse_generator_spec(text: str) -> GeneratorSpec:
    """
    Parses a generator spec like 'X=3,Y=256,seed=42'

    Raises
    ------
    InvalidChannelError
        Naming the first unknown, malformed or missing key
    """
    values = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in _SPEC_KEYS:
            raise InvalidChannelError(key or item, f"expected one of {', '.join(_SPEC_KEYS)} as key=value")
        if _SPEC_KEYS[key] in values:
            raise InvalidChannelError(key, "given more than once")
        try:
            values[_SPEC_KEYS[key]] = int(value.strip())
        except ValueError:
            raise InvalidChannelError(key, f"{value.strip()!r} is not an integer")
    for key in ("X", "Y", "seed"):
        if _SPEC_KEYS[key] not in values:
            raise InvalidChannelError(key, f"missing in generator spec {text!r}")
    spec = GeneratorSpec(**values)
    if spec.num_inputs < 2 or spec.num_outputs < 2:
        raise InvalidChannelError("X" if spec.num_inputs < 2 else "Y", "alphabet sizes must be at least 2")
    if spec.seed < 0 or (spec.trial is not None and spec.trial < 0):
        raise InvalidChannelError("seed" if spec.seed < 0 else "trial", "must be non-negative")
    return spec

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import pytest

from channel_degrading.channel import Channel, InputDistribution, PosteriorChannel, to_posterior_form
from channel_degrading.generator import random_channel


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def make_pc() -> Callable[..., PosteriorChannel]:
    """
    Builds a channel in posterior form from its rows (and a uniform input distribution unless given)
    """

    def factory(rows: Sequence[Sequence[float]], input_probs: Optional[Sequence[float]] = None) -> PosteriorChannel:
        channel = Channel(rows)
        if input_probs is None:
            input_probs = np.full(channel.num_inputs, 1.0 / channel.num_inputs)
        return to_posterior_form(channel, InputDistribution(input_probs))

    return factory


@pytest.fixture
def random_pc() -> Callable[..., PosteriorChannel]:
    def factory(num_inputs: int, num_outputs: int, seed: int, trial: Optional[int] = None) -> PosteriorChannel:
        return to_posterior_form(*random_channel(num_inputs, num_outputs, seed, trial))

    return factory


@pytest.fixture
def write_json(tmp_path: Path) -> Callable[[str, object], Path]:
    def writer(name: str, document: object) -> Path:
        path = tmp_path / name
        path.write_text(document if isinstance(document, str) else json.dumps(document))
        return path

    return writer


def matrix_mutual_information(rows: np.ndarray, probs: np.ndarray) -> float:
    """
    I(X;Y) from the matrix form sum_{x,y} pi(x) W(y|x) ln(W(y|x) / q(y)), independent of the posterior form
    """
    rows = np.asarray(rows, dtype=float)
    probs = np.asarray(probs, dtype=float)
    q = probs @ rows
    total = 0.0
    for x in range(rows.shape[0]):
        for y in range(rows.shape[1]):
            if probs[x] > 0.0 and rows[x, y] > 0.0:
                total += probs[x] * rows[x, y] * np.log(rows[x, y] / q[y])
    return float(total)


# a 2-input channel whose output letters 0/3 and 1/2 have identical joint columns
DUPLICATE_ROWS = [[0.4, 0.1, 0.1, 0.4], [0.1, 0.4, 0.4, 0.1]]

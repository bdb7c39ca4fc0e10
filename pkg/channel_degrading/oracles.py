"""
________________________________________________________________________

:PROJECT: channel_degrading

*Oracles*

:details: Oracles:
    Optimal degrading for small channels: exhaustive search over all set
    partitions of the output alphabet and, for binary input, dynamic
    programming over contiguous segments of the letters sorted by posterior

:file:    oracles.py

________________________________________________________________________

Only deterministic degrading maps are searched. For a fixed input distribution the mutual information I(Q) is
convex in Q and Q = W * Phi is affine in Phi, so the maximum of I(Q) over the polytope of intermediate channels Phi
with at most L outputs is attained at a vertex, i.e. at a deterministic map.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

import numpy as np
from scipy.special import entr

from .channel import DegradingMap, PosteriorChannel
from .errors import DomainError, ResourceGuardError

__all__ = [
    "MAX_BRUTE_FORCE_LETTERS",
    "Partition",
    "enumerate_partitions",
    "block_loss",
    "partition_loss",
    "brute_force_optimal",
    "dp_optimal_binary",
]

logger = logging.getLogger(__name__)

# the number of set partitions grows like the Bell numbers (Bell(12) = 4213597)
MAX_BRUTE_FORCE_LETTERS = 12


class Partition:
    """
    A set partition of the letter indices {0, ..., n-1}

    Blocks are stored as sorted tuples, ordered by their smallest element.
    """

    __blocks: Tuple[Tuple[int, ...], ...]
    __size: int

    def __init__(self, blocks: Iterable[Iterable[int]]) -> None:
        normalized = [tuple(sorted(int(i) for i in block)) for block in blocks]
        if not normalized or any(not block for block in normalized):
            raise DomainError("A partition consists of at least one block and blocks must not be empty")
        self.__blocks = tuple(sorted(normalized))
        members = [i for block in self.__blocks for i in block]
        self.__size = len(members)
        if sorted(members) != list(range(self.__size)):
            raise DomainError(f"Blocks {self.__blocks} are not a partition of 0..{self.__size - 1}")

    def __repr__(self) -> str:
        return f"{type(self).__name__}({[list(block) for block in self.__blocks]!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.__blocks == other.blocks

    def __hash__(self) -> int:
        return hash(self.__blocks)

    @classmethod
    def from_growth_string(cls, growth: Sequence[int]) -> Partition:
        blocks: Dict[int, List[int]] = {}
        for index, label in enumerate(growth):
            blocks.setdefault(label, []).append(index)
        return cls(blocks.values())

    @classmethod
    def singletons(cls, size: int) -> Partition:
        return cls((i,) for i in range(size))

    @property
    def blocks(self) -> Tuple[Tuple[int, ...], ...]:
        return self.__blocks

    @property
    def num_blocks(self) -> int:
        return len(self.__blocks)

    @property
    def size(self) -> int:
        return self.__size

    def to_assignment(self) -> DegradingMap:
        """
        The partition as degrading map from letter indices to block indices
        """
        return DegradingMap.from_blocks(self.__blocks, self.__size)


def _check_size(n: int) -> None:
    if n > MAX_BRUTE_FORCE_LETTERS:
        raise ResourceGuardError(
            f"Exhaustive partition search is limited to n <= {MAX_BRUTE_FORCE_LETTERS} letters, got n = {n}"
        )


def _growth_strings(n: int, max_blocks: int) -> Iterator[Tuple[int, ...]]:
    """
    Restricted growth strings of length n with at most `max_blocks` distinct values, in lexicographic order
    """
    growth = [0] * n

    def extend(position: int, used: int) -> Iterator[Tuple[int, ...]]:
        if position == n:
            yield tuple(growth)
            return
        for label in range(min(used + 1, max_blocks)):
            growth[position] = label
            yield from extend(position + 1, max(used, label + 1))

    yield from extend(1, 1)


def enumerate_partitions(n: int, max_blocks: int) -> Iterator[Partition]:
    """
    Yields every set partition of {0, ..., n-1} into at most `max_blocks` blocks exactly once

    Raises
    ------
    ResourceGuardError
        If n exceeds `MAX_BRUTE_FORCE_LETTERS`
    """
    if n < 1 or max_blocks < 1:
        raise DomainError(f"Need n >= 1 and max_blocks >= 1, got n = {n}, max_blocks = {max_blocks}")
    _check_size(n)
    return (Partition.from_growth_string(growth) for growth in _growth_strings(n, min(max_blocks, n)))


def block_loss(pc: PosteriorChannel, block: Sequence[int]) -> float:
    """
    The loss in nats of merging all letters of `block` into one letter
    """
    block = sorted(block)
    mass = math.fsum(pc.masses[block].tolist())
    joint = pc.joints[block].sum(axis=0)
    merged_terms = mass * entr(joint / mass)
    return math.fsum(merged_terms.tolist() + (-pc.self_terms[block]).ravel().tolist())


def partition_loss(pc: PosteriorChannel, partition: Partition) -> float:
    """
    I(W) - I(Q) for the channel Q obtained by merging every block of `partition`
    """
    if partition.size != len(pc):
        raise DomainError(f"Partition covers {partition.size} letters but the channel has {len(pc)}")
    return math.fsum(block_loss(pc, block) for block in partition.blocks)


def brute_force_optimal(pc: PosteriorChannel, L: int) -> Tuple[Partition, float]:
    """
    The optimal degrading of `pc` to at most `L` letters by exhaustive search

    Returns
    -------
    Tuple[Partition, float]
        The optimal partition of the letters (the first one in restricted growth string order on ties) and its loss
    """
    n = len(pc)
    if L < 1:
        raise DomainError(f"The target alphabet size must be at least 1, got {L}")
    _check_size(n)
    if L >= n:
        return Partition.singletons(n), 0.0

    cache: Dict[Tuple[int, ...], float] = {}
    best_growth: Tuple[int, ...] = ()
    best_loss = math.inf
    count = 0
    for growth in _growth_strings(n, L):
        count += 1
        blocks: Dict[int, List[int]] = {}
        for index, label in enumerate(growth):
            blocks.setdefault(label, []).append(index)
        loss = 0.0
        for block in blocks.values():
            key = tuple(block)
            if key not in cache:
                cache[key] = block_loss(pc, key)
            loss += cache[key]
        if loss < best_loss:
            best_loss, best_growth = loss, growth
    logger.debug(f"Searched {count} partitions of {n} letters into at most {L} blocks")

    partition = Partition.from_growth_string(best_growth)
    return partition, max(partition_loss(pc, partition), 0.0)


def dp_optimal_binary(pc: PosteriorChannel, L: int) -> Tuple[Partition, float]:
    """
    The optimal degrading of a binary input channel to at most `L` letters by dynamic programming

    The letters are sorted by their posterior probability of input 0 (ties by index) and the best split of that
    sequence into at most `L` contiguous segments is searched. Segment losses come from prefix sums of the joint
    columns; the loss of the final partition is recomputed exactly.

    Raises
    ------
    DomainError
        If the channel does not have exactly two inputs (in its support) or L < 1
    """
    if pc.num_inputs != 2:
        raise DomainError(f"Dynamic programming needs a binary input channel, got {pc.num_inputs} inputs")
    if L < 1:
        raise DomainError(f"The target alphabet size must be at least 1, got {L}")
    n = len(pc)
    if L >= n:
        return Partition.singletons(n), 0.0

    order = np.array(sorted(range(n), key=lambda i: (pc.posteriors[i, 0], i)))
    prefix_mass = np.concatenate(([0.0], np.cumsum(pc.masses[order])))
    prefix_joint = np.vstack((np.zeros(2), np.cumsum(pc.joints[order], axis=0)))
    prefix_self = np.concatenate(([0.0], np.cumsum(pc.self_terms[order].sum(axis=1))))

    def segment_losses(end: int, starts: np.ndarray) -> np.ndarray:
        # losses of the segments order[start:end] for all given starts
        mass = prefix_mass[end] - prefix_mass[starts]
        joint = np.maximum(prefix_joint[end] - prefix_joint[starts], 0.0)
        merged = (mass[:, None] * entr(joint / mass[:, None])).sum(axis=1)
        return merged - (prefix_self[end] - prefix_self[starts])

    # cost[k, j]: best loss of splitting the first j sorted letters into k + 1 segments
    cost = np.full((L, n + 1), np.inf)
    split = np.zeros((L, n + 1), dtype=np.int64)
    cost[0, 1:] = [segment_losses(end, np.array([0]))[0] for end in range(1, n + 1)]
    for k in range(1, L):
        for end in range(k + 1, n + 1):
            starts = np.arange(k, end)
            candidates = cost[k - 1, starts] + segment_losses(end, starts)
            i = int(np.argmin(candidates))
            cost[k, end] = candidates[i]
            split[k, end] = starts[i]

    segments = int(np.argmin(cost[:, n])) + 1
    bounds: List[int] = [n]
    end = n
    for k in range(segments - 1, 0, -1):
        end = int(split[k, end])
        bounds.append(end)
    bounds.append(0)
    bounds.reverse()

    partition = Partition(order[start:stop].tolist() for start, stop in zip(bounds[:-1], bounds[1:]))
    logger.debug(f"Dynamic programming split {n} letters into {partition.num_blocks} segments")
    return partition, max(partition_loss(pc, partition), 0.0)

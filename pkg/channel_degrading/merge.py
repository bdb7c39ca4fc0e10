"""
________________________________________________________________________

:PROJECT: channel_degrading

*Merge*

:details: Merge:
    The exact mutual information loss of merging two output letters, minimum
    pair search and the greedy-merge degrading loop

:file:    merge.py

________________________________________________________________________
"""

from __future__ import annotations

import heapq
import logging
from typing import Callable, List, NamedTuple, Optional, Set

import numpy as np
from numpy.typing import NDArray
from scipy.special import entr

from .channel import DegradeReport, MergeStep, OutputLetter, PosteriorChannel
from .errors import DomainError

__all__ = [
    "MergeCandidate",
    "merge_delta",
    "merge_delta_terms",
    "merge_deltas_from",
    "merged_letter",
    "find_min_pair",
    "GreedyMerger",
    "greedy_merge",
]

logger = logging.getLogger(__name__)


class MergeCandidate(NamedTuple):
    """
    A pair of letters and the loss of merging them

    The stamps are the versions of both letters when the loss was evaluated; a candidate is stale as soon as one of
    its letters changed. Candidates order by (delta, letter_a, letter_b).
    """

    delta: float
    letter_a: int
    letter_b: int
    stamp_a: int = 0
    stamp_b: int = 0


def _pair_terms(
    mass: float, joint: NDArray, self_term: NDArray, masses: NDArray, joints: NDArray, self_terms: NDArray
) -> NDArray:
    """
    Per input loss terms of merging one letter with each of the letters given as arrays (one row per letter)

    Every operation is symmetric in its operands, so the loss of (a, b) is bit-identical to the loss of (b, a).
    """
    merged_mass = mass + masses
    merged_joint = joint + joints
    merged_terms = merged_mass[:, None] * entr(merged_joint / merged_mass[:, None])
    return merged_terms - (self_term + self_terms)


def _sum_terms(terms: NDArray) -> NDArray:
    # fixed summation order over the inputs, independent of the number of rows
    total = terms[:, 0].copy()
    for x in range(1, terms.shape[1]):
        total += terms[:, x]
    return total


def _check_pair(pc: PosteriorChannel, a: int, b: int) -> None:
    for index in (a, b):
        if not 0 <= index < len(pc):
            raise DomainError(f"Letter index {index} out of range for a channel with {len(pc)} letters")
    if a == b:
        raise DomainError(f"Cannot merge letter {a} with itself")


def merge_delta_terms(pc: PosteriorChannel, a: int, b: int) -> NDArray:
    """
    The loss of merging letters `a` and `b`, split into one term per input letter

    The term for input x is pi_ab*eta(gamma_x) - pi_a*eta(alpha_x) - pi_b*eta(beta_x).
    """
    _check_pair(pc, a, b)
    other = slice(b, b + 1)
    return _pair_terms(
        pc.masses[a], pc.joints[a], pc.self_terms[a], pc.masses[other], pc.joints[other], pc.self_terms[other]
    )[0]


def merge_delta(pc: PosteriorChannel, a: int, b: int) -> float:
    """
    The decrease of mutual information (in nats) caused by merging letters `a` and `b`
    """
    return float(_sum_terms(merge_delta_terms(pc, a, b)[None, :])[0])


def merge_deltas_from(pc: PosteriorChannel, a: int) -> NDArray:
    """
    The losses of merging letter `a` with each of the letters a+1, ..., |Y|-1
    """
    if not 0 <= a < len(pc):
        raise DomainError(f"Letter index {a} out of range for a channel with {len(pc)} letters")
    return _sum_terms(
        _pair_terms(
            pc.masses[a], pc.joints[a], pc.self_terms[a], pc.masses[a + 1 :], pc.joints[a + 1 :], pc.self_terms[a + 1 :]
        )
    )


def merged_letter(pc: PosteriorChannel, a: int, b: int) -> OutputLetter:
    _check_pair(pc, a, b)
    return pc[a].merged_with(pc[b])


def find_min_pair(pc: PosteriorChannel) -> MergeCandidate:
    """
    Exhaustively searches the pair of letters with the smallest merge loss

    Ties are resolved to the lexicographically smallest index pair.
    """
    n = len(pc)
    if n < 2:
        raise DomainError(f"Need at least 2 letters to merge, the channel has {n}")
    best = MergeCandidate(np.inf, -1, -1)
    for a in range(n - 1):
        row = merge_deltas_from(pc, a)
        j = int(np.argmin(row))
        if row[j] < best.delta:
            best = MergeCandidate(float(row[j]), a, a + 1 + j)
    return best


class GreedyMerger:
    """
    Degrades a channel in posterior form by repeatedly merging the pair of letters with the smallest loss

    Letters live in slots; a merged letter takes the slot of the pair member with the smaller index, so slot order is
    the order of the smallest original output index of each letter. Every live letter knows its best partner and a
    candidate for that pair sits in a min-heap. Candidates are invalidated lazily through per-slot stamps, so each
    merge only re-evaluates the new letter and those letters whose best partner was consumed.
    """

    __pc: PosteriorChannel
    __on_step: Optional[Callable[[MergeStep], None]]

    def __init__(self, pc: PosteriorChannel, on_step: Optional[Callable[[MergeStep], None]] = None) -> None:
        self.__pc = pc
        self.__on_step = on_step

        n = len(pc)
        self.__masses = np.array(pc.masses)
        self.__joints = np.array(pc.joints)
        self.__self_terms = np.array(pc.self_terms)
        self.__provenance: List[Set[int]] = [set(letter.provenance) for letter in pc.letters]
        self.__alive = np.ones(n, dtype=bool)
        self.__stamps = np.zeros(n, dtype=np.int64)
        self.__best_delta = np.full(n, np.inf)
        self.__best_partner = np.full(n, -1, dtype=np.int64)
        self.__heap: List[MergeCandidate] = []
        self.__steps: List[MergeStep] = []
        self.__size = n

        if n >= 2:
            for slot in range(n):
                self.__refresh(slot)

    @property
    def size(self) -> int:
        """
        The current output alphabet size
        """
        return self.__size

    @property
    def steps(self) -> List[MergeStep]:
        return list(self.__steps)

    def __row(self, slot: int) -> NDArray:
        """
        The losses of merging `slot` with every slot (inf for dead slots and `slot` itself)
        """
        row = np.full(self.__alive.size, np.inf)
        others = np.flatnonzero(self.__alive)
        others = others[others != slot]
        row[others] = _sum_terms(
            _pair_terms(
                self.__masses[slot],
                self.__joints[slot],
                self.__self_terms[slot],
                self.__masses[others],
                self.__joints[others],
                self.__self_terms[others],
            )
        )
        return row

    def __push(self, slot: int, partner: int, delta: float) -> None:
        a, b = (slot, partner) if slot < partner else (partner, slot)
        heapq.heappush(self.__heap, MergeCandidate(delta, a, b, int(self.__stamps[a]), int(self.__stamps[b])))

    def __refresh(self, slot: int) -> NDArray:
        row = self.__row(slot)
        partner = int(np.argmin(row))
        self.__best_delta[slot] = row[partner]
        self.__best_partner[slot] = partner
        if np.isfinite(row[partner]):
            self.__push(slot, partner, float(row[partner]))
        return row

    def __is_valid(self, candidate: MergeCandidate) -> bool:
        a, b = candidate.letter_a, candidate.letter_b
        return bool(
            self.__alive[a]
            and self.__alive[b]
            and self.__stamps[a] == candidate.stamp_a
            and self.__stamps[b] == candidate.stamp_b
        )

    def __pop_min(self) -> MergeCandidate:
        while self.__heap:
            candidate = heapq.heappop(self.__heap)
            if self.__is_valid(candidate):
                return candidate
        raise RuntimeError("Merge candidate queue ran empty although more than one letter is left")

    def step(self) -> MergeStep:
        """
        Performs a single merge of the globally best pair and returns its record
        """
        if self.__size < 2:
            raise DomainError("Cannot merge a channel with a single output letter")
        candidate = self.__pop_min()
        a, b = candidate.letter_a, candidate.letter_b
        step = MergeStep(
            min(self.__provenance[a]), min(self.__provenance[b]), float(candidate.delta), self.__size
        )

        self.__masses[a] += self.__masses[b]
        self.__joints[a] += self.__joints[b]
        self.__self_terms[a] = self.__masses[a] * entr(self.__joints[a] / self.__masses[a])
        self.__provenance[a] |= self.__provenance[b]
        self.__provenance[b] = set()
        self.__alive[b] = False
        self.__stamps[a] += 1
        self.__stamps[b] += 1
        self.__size -= 1

        if self.__size >= 2:
            row = self.__refresh(a)
            others = np.flatnonzero(self.__alive)
            others = others[others != a]
            partners = self.__best_partner[others]
            orphaned = (partners == a) | (partners == b)
            for slot in others[orphaned]:
                self.__refresh(int(slot))
            others, partners = others[~orphaned], partners[~orphaned]
            current = self.__best_delta[others]
            improved = (row[others] < current) | ((row[others] == current) & (a < partners))
            for slot in others[improved]:
                self.__best_delta[slot] = row[slot]
                self.__best_partner[slot] = a
                self.__push(int(slot), a, float(row[slot]))

        logger.debug(f"Merged letters {step.a} and {step.b} at size {step.size_before}: delta = {step.delta!r}")
        self.__steps.append(step)
        if self.__on_step is not None:
            self.__on_step(step)
        return step

    def run(self, num_letters: int) -> DegradeReport:
        """
        Merges until at most `num_letters` letters are left and returns the report
        """
        if num_letters < 1:
            raise DomainError(f"The target alphabet size must be at least 1, got {num_letters}")
        while self.__size > num_letters:
            self.step()
        return self.report()

    def report(self) -> DegradeReport:
        letters = [
            OutputLetter(self.__joints[slot], self.__provenance[slot], self.__masses[slot])
            for slot in np.flatnonzero(self.__alive)
        ]
        result = PosteriorChannel(letters, self.__pc.input_probs, self.__pc.num_original_outputs, self.__pc.dropped)
        return DegradeReport(result, result.degrading_map(), self.__steps)


def greedy_merge(
    pc: PosteriorChannel, L: int, on_step: Optional[Callable[[MergeStep], None]] = None
) -> DegradeReport:
    """
    Degrades `pc` to at most `L` output letters with greedy-merge

    Parameters
    ----------
    pc: PosteriorChannel
        The channel to degrade
    L: int
        The target output alphabet size
    on_step: Callable[[MergeStep], None]
        (optional) Called after every merge

    Returns
    -------
    DegradeReport
        The merged channel, the map from the original output letters and the trace of merges
    """
    if L < 1:
        raise DomainError(f"The target alphabet size must be at least 1, got {L}")
    if L >= len(pc):
        logger.info(f"Channel already has {len(pc)} <= {L} output letters - nothing to merge")
        return DegradeReport(pc, pc.degrading_map())

    logger.info(f"Merging {len(pc)} output letters down to {L}")
    report = GreedyMerger(pc, on_step).run(L)
    logger.info(f"Greedy-merge done after {len(report.steps)} merges: total loss {report.total_delta!r} nats")
    return report

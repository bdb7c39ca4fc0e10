"""
________________________________________________________________________

:PROJECT: channel_degrading

*Channel*

:details: Channel:
    Input distributions, channel matrices, the posterior (per output letter) form
    of a channel, mutual information and deterministic degrading maps

:file:    channel.py

________________________________________________________________________
"""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import entr

from .errors import DomainError, InvalidChannelError

if TYPE_CHECKING:
    from .oracles import Partition

__all__ = [
    "TOLERANCE",
    "eta",
    "to_bits",
    "InputDistribution",
    "Channel",
    "OutputLetter",
    "PosteriorChannel",
    "DegradingMap",
    "MergeStep",
    "DegradeReport",
    "mutual_information",
    "to_posterior_form",
    "apply_degrading_map",
    "apply_intermediate_channel",
]

logger = logging.getLogger(__name__)

# accepted deviation of a probability vector's sum from 1
TOLERANCE = 1e-9

# derived sums (e.g. the letter masses) accumulate the deviations of several validated vectors
_DERIVED_TOLERANCE = 4 * TOLERANCE


def _frozen(array: ArrayLike, dtype=float) -> NDArray:
    frozen = np.array(array, dtype=dtype)
    frozen.setflags(write=False)
    return frozen


def _fsum(values: ArrayLike) -> float:
    """
    Error-compensated sum of all entries of `values`
    """
    return math.fsum(np.ravel(values).tolist())


def eta(p: float) -> float:
    """
    The entropy kernel -p*ln(p) with eta(0) = 0 (natural logarithm, i.e. nats)

    Values in (1, 1 + TOLERANCE] are treated as 1.

    Raises
    ------
    DomainError
        If `p` is negative, not finite or larger than 1 + TOLERANCE
    """
    p = float(p)
    if not math.isfinite(p) or p < 0.0 or p > 1.0 + TOLERANCE:
        raise DomainError(f"eta is defined on [0, 1] only, got {p!r}")
    if p == 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p)


def to_bits(nats: float) -> float:
    """
    Converts an information quantity from nats to bits (display only)
    """
    return nats / math.log(2.0)


def _probability_vector(values: ArrayLike, field: str, renormalize: bool = False) -> NDArray:
    try:
        vector = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as err:
        raise InvalidChannelError(field, f"not a vector of numbers ({err})")
    if vector.ndim != 1 or vector.size == 0:
        raise InvalidChannelError(field, "must be a non-empty vector")
    if not np.all(np.isfinite(vector)):
        raise InvalidChannelError(field, "contains NaN or infinite entries")
    if np.any(vector < 0.0):
        raise InvalidChannelError(field, f"contains a negative entry at index {int(np.argmax(vector < 0.0))}")
    total = _fsum(vector)
    if abs(total - 1.0) > TOLERANCE:
        if not renormalize or total <= 0.0:
            raise InvalidChannelError(field, f"entries sum to {total!r} instead of 1")
        logger.debug(f"Renormalizing {field} (sum was {total!r})")
        vector = vector / total
    return vector


class InputDistribution:
    """
    A probability vector over the input alphabet

    Zero entries are accepted; such inputs are removed when the channel is brought into posterior form.
    """

    __probs: NDArray

    def __init__(self, probs: ArrayLike, renormalize: bool = False) -> None:
        self.__probs = _frozen(_probability_vector(probs, "input_dist", renormalize))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.__probs.tolist()!r})"

    def __len__(self) -> int:
        return self.__probs.size

    @property
    def probs(self) -> NDArray:
        return self.__probs

    @property
    def num_inputs(self) -> int:
        return self.__probs.size

    @property
    def support(self) -> NDArray:
        """
        The indices of all input letters with positive probability
        """
        return np.flatnonzero(self.__probs > 0.0)


class Channel:
    """
    A discrete memoryless channel given by its transition matrix

    `rows[x][y]` is the probability W(y|x) of receiving output letter y when x was sent.
    """

    __rows: NDArray

    def __init__(self, rows: ArrayLike, renormalize: bool = False) -> None:
        try:
            matrix = np.asarray(rows, dtype=float)
        except (TypeError, ValueError) as err:
            raise InvalidChannelError("channel", f"not a rectangular matrix of numbers ({err})")
        if matrix.ndim != 2 or matrix.size == 0:
            raise InvalidChannelError("channel", "must be a non-empty matrix with one row per input letter")
        self.__rows = _frozen(
            np.vstack([_probability_vector(row, f"channel[{x}]", renormalize) for x, row in enumerate(matrix)])
        )

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.num_inputs}x{self.num_outputs})"

    @property
    def rows(self) -> NDArray:
        return self.__rows

    @property
    def num_inputs(self) -> int:
        return self.__rows.shape[0]

    @property
    def num_outputs(self) -> int:
        return self.__rows.shape[1]


class OutputLetter:
    """
    An output letter in posterior form

    The letter stores its joint column p(x, y) = pi(x) * W(y|x); its mass pi(y) and posterior vector W(x|y) are
    derived from that column, so merging letters is an exact addition of joint columns.
    """

    __slots__ = ("__joint", "__mass", "__posterior", "__provenance")

    def __init__(self, joint: ArrayLike, provenance: Iterable[int], mass: Optional[float] = None) -> None:
        joint = np.array(joint, dtype=float)
        if joint.ndim != 1 or joint.size == 0 or not np.all(np.isfinite(joint)) or np.any(joint < 0.0):
            raise InvalidChannelError("joint", "must be a non-empty vector of non-negative numbers")
        self.__mass = _fsum(joint) if mass is None else float(mass)
        if not self.__mass > 0.0:
            raise InvalidChannelError("mass", f"output letters need a positive mass, got {self.__mass!r}")
        self.__provenance = frozenset(int(y) for y in provenance)
        if not self.__provenance:
            raise InvalidChannelError("provenance", "an output letter must stem from at least one original letter")
        joint.setflags(write=False)
        self.__joint = joint
        self.__posterior = _frozen(joint / self.__mass)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(mass={self.__mass!r}, posterior={self.__posterior.tolist()!r})"

    @property
    def mass(self) -> float:
        return self.__mass

    @property
    def joint(self) -> NDArray:
        return self.__joint

    @property
    def posterior(self) -> NDArray:
        return self.__posterior

    @property
    def provenance(self) -> FrozenSet[int]:
        return self.__provenance

    @property
    def representative(self) -> int:
        """
        The smallest original output index merged into this letter (used for deterministic ordering)
        """
        return min(self.__provenance)

    def merged_with(self, other: OutputLetter) -> OutputLetter:
        return OutputLetter(self.__joint + other.joint, self.__provenance | other.provenance, self.__mass + other.mass)


class PosteriorChannel:
    """
    A channel together with its input distribution, represented by its output letters

    Letters are kept sorted by their representative (smallest original output index), so letter indices follow the
    order of the original output alphabet. Inputs with zero probability are not part of the posterior vectors and
    output letters with zero mass are listed in `dropped`.
    """

    __letters: Tuple[OutputLetter, ...]
    __input_probs: NDArray
    __num_original_outputs: int
    __dropped: FrozenSet[int]

    def __init__(
        self,
        letters: Iterable[OutputLetter],
        input_probs: ArrayLike,
        num_original_outputs: Optional[int] = None,
        dropped: Iterable[int] = (),
    ) -> None:
        self.__letters = tuple(sorted(letters, key=lambda letter: letter.representative))
        self.__input_probs = _frozen(input_probs)
        self.__dropped = frozenset(int(y) for y in dropped)
        if not self.__letters:
            raise InvalidChannelError("letters", "a channel needs at least one output letter with positive mass")

        covered: set = set(self.__dropped)
        for i, letter in enumerate(self.__letters):
            if letter.joint.size != self.__input_probs.size:
                raise InvalidChannelError(f"letters[{i}]", "posterior length differs from the number of inputs")
            if not covered.isdisjoint(letter.provenance):
                raise InvalidChannelError(f"letters[{i}]", "provenance overlaps with another letter")
            covered |= letter.provenance
        self.__num_original_outputs = len(covered) if num_original_outputs is None else int(num_original_outputs)
        if covered != set(range(self.__num_original_outputs)):
            raise InvalidChannelError("letters", "provenance does not cover the original output alphabet")

        total = _fsum([letter.mass for letter in self.__letters])
        if abs(total - 1.0) > _DERIVED_TOLERANCE:
            raise InvalidChannelError("letters", f"letter masses sum to {total!r} instead of 1")

        self.__masses = _frozen([letter.mass for letter in self.__letters])
        self.__joints = _frozen(np.vstack([letter.joint for letter in self.__letters]))
        self.__posteriors = _frozen(np.vstack([letter.posterior for letter in self.__letters]))
        self.__self_terms = _frozen(self.__masses[:, None] * entr(self.__posteriors))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.num_inputs} inputs, {len(self)} letters)"

    def __len__(self) -> int:
        return len(self.__letters)

    def __getitem__(self, index: int) -> OutputLetter:
        return self.__letters[index]

    @property
    def letters(self) -> Tuple[OutputLetter, ...]:
        return self.__letters

    @property
    def num_inputs(self) -> int:
        return self.__input_probs.size

    @property
    def num_outputs(self) -> int:
        return len(self.__letters)

    @property
    def num_original_outputs(self) -> int:
        return self.__num_original_outputs

    @property
    def input_probs(self) -> NDArray:
        return self.__input_probs

    @property
    def dropped(self) -> FrozenSet[int]:
        return self.__dropped

    @property
    def masses(self) -> NDArray:
        return self.__masses

    @property
    def joints(self) -> NDArray:
        return self.__joints

    @property
    def posteriors(self) -> NDArray:
        return self.__posteriors

    @property
    def self_terms(self) -> NDArray:
        """
        pi(y) * eta(W(x|y)) for every letter y (rows) and input x (columns)
        """
        return self.__self_terms

    def mutual_information(self) -> float:
        """
        I(X;Y) = sum_x eta(pi(x)) - sum_{x,y} pi(y) eta(W(x|y)) in nats, accumulated with compensated summation
        """
        value = math.fsum(entr(self.__input_probs).tolist() + (-self.__self_terms).ravel().tolist())
        return max(value, 0.0)

    def degrading_map(self) -> DegradingMap:
        """
        The map from the original output letters to the letters of this channel

        Dropped (zero mass) original letters are sent to letter 0.
        """
        assignment = np.zeros(self.__num_original_outputs, dtype=np.int64)
        for z, letter in enumerate(self.__letters):
            assignment[sorted(letter.provenance)] = z
        return DegradingMap(assignment, len(self.__letters))

    def merged_by(self, partition: Partition) -> PosteriorChannel:
        """
        Returns the channel obtained by merging the letters of every block of `partition`
        """
        if partition.size != len(self):
            raise DomainError(f"Partition covers {partition.size} letters but the channel has {len(self)}")
        letters: List[OutputLetter] = []
        for block in partition.blocks:
            merged = self.__letters[block[0]]
            for index in block[1:]:
                merged = merged.merged_with(self.__letters[index])
            letters.append(merged)
        return PosteriorChannel(letters, self.__input_probs, self.__num_original_outputs, self.__dropped)


class DegradingMap:
    """
    A deterministic degrading map: `assignment[y]` is the merged letter that original output letter y is sent to
    """

    __assignment: NDArray
    __num_merged: int

    def __init__(self, assignment: ArrayLike, num_merged: Optional[int] = None) -> None:
        values = np.asarray(assignment)
        if values.ndim != 1 or values.size == 0 or not np.issubdtype(values.dtype, np.integer):
            raise DomainError("A degrading map needs a non-empty integer assignment per original output letter")
        self.__num_merged = int(values.max()) + 1 if num_merged is None else int(num_merged)
        if values.min() < 0 or values.max() >= self.__num_merged:
            raise DomainError(f"Degrading map assignment out of range [0, {self.__num_merged})")
        if np.unique(values).size != self.__num_merged:
            raise DomainError("Degrading map does not reach every merged letter")
        self.__assignment = _frozen(values, dtype=np.int64)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.__assignment.tolist()!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DegradingMap):
            return NotImplemented
        return self.__num_merged == other.num_merged and np.array_equal(self.__assignment, other.assignment)

    @classmethod
    def identity(cls, num_outputs: int) -> DegradingMap:
        return cls(np.arange(num_outputs), num_outputs)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Iterable[int]], num_outputs: int) -> DegradingMap:
        assignment = np.full(num_outputs, -1, dtype=np.int64)
        for z, block in enumerate(blocks):
            assignment[list(block)] = z
        if np.any(assignment < 0):
            raise DomainError("Blocks do not cover every original output letter")
        return cls(assignment, len(blocks))

    @property
    def assignment(self) -> NDArray:
        return self.__assignment

    @property
    def num_original(self) -> int:
        return self.__assignment.size

    @property
    def num_merged(self) -> int:
        return self.__num_merged

    def to_matrix(self) -> NDArray:
        """
        The intermediate channel Phi as a |Y| x |Z| 0/1 matrix
        """
        phi = np.zeros((self.num_original, self.__num_merged))
        phi[np.arange(self.num_original), self.__assignment] = 1.0
        return phi


class MergeStep(NamedTuple):
    """
    One greedy merge: the representatives (smallest original output index) of the merged letters, the loss in nats
    and the output alphabet size before the merge
    """

    a: int
    b: int
    delta: float
    size_before: int


# step losses in [-NEGATIVE_RESIDUE, 0) are rounding residue and reported as 0
NEGATIVE_RESIDUE = 1e-12


class DegradeReport:
    """
    The outcome of degrading a channel: the merged channel, the degrading map, and the trace of merges
    """

    __result: PosteriorChannel
    __map: DegradingMap
    __raw_deltas: Tuple[float, ...]
    __steps: Tuple[MergeStep, ...]

    def __init__(self, result: PosteriorChannel, map: DegradingMap, steps: Sequence[MergeStep] = ()) -> None:
        self.__result = result
        self.__map = map
        self.__raw_deltas = tuple(step.delta for step in steps)
        self.__steps = tuple(
            step._replace(delta=0.0) if -NEGATIVE_RESIDUE <= step.delta < 0.0 else step for step in steps
        )

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}({len(self.__steps)} steps, {len(self.__result)} letters, "
            f"total_delta={self.total_delta!r})"
        )

    @property
    def result(self) -> PosteriorChannel:
        return self.__result

    @property
    def map(self) -> DegradingMap:
        return self.__map

    @property
    def steps(self) -> Tuple[MergeStep, ...]:
        return self.__steps

    @property
    def raw_deltas(self) -> Tuple[float, ...]:
        """
        The unclamped step losses
        """
        return self.__raw_deltas

    @property
    def total_delta(self) -> float:
        return max(math.fsum(self.__raw_deltas), 0.0)

    def step_bounds(self) -> List[Optional[float]]:
        """
        The per-step upper bound for every step, `None` where the alphabet was too small for the bound to apply
        """
        from .bounds import theorem1_rhs

        num_inputs = self.__result.num_inputs
        applies = num_inputs >= 2
        return [
            theorem1_rhs(num_inputs, step.size_before) if applies and step.size_before > 2 * num_inputs else None
            for step in self.__steps
        ]


def to_posterior_form(channel: Channel, input_dist: InputDistribution) -> PosteriorChannel:
    """
    Converts a channel and its input distribution into posterior form (Bayes' rule)

    Output letters that are never received are dropped, as are inputs that are never sent.
    """
    if channel.num_inputs != input_dist.num_inputs:
        raise InvalidChannelError(
            "channel",
            f"has {channel.num_inputs} rows but the input distribution has {input_dist.num_inputs} entries",
        )
    support = input_dist.support
    joint = input_dist.probs[support, None] * channel.rows[support]
    letters: List[OutputLetter] = []
    dropped: List[int] = []
    for y in range(channel.num_outputs):
        column = joint[:, y]
        if np.any(column > 0.0):
            letters.append(OutputLetter(column, (y,)))
        else:
            dropped.append(y)
    if dropped:
        logger.debug(f"Dropping {len(dropped)} output letters with zero probability")
    return PosteriorChannel(letters, input_dist.probs[support], channel.num_outputs, dropped)


def mutual_information(channel: Channel, input_dist: InputDistribution) -> float:
    """
    I(W, P_X) in nats
    """
    return to_posterior_form(channel, input_dist).mutual_information()


def apply_degrading_map(channel: Channel, map: DegradingMap) -> Channel:
    """
    Q(z|x) = sum of W(y|x) over all y with map(y) = z
    """
    if map.num_original != channel.num_outputs:
        raise DomainError(
            f"Degrading map is defined on {map.num_original} output letters but the channel has {channel.num_outputs}"
        )
    return Channel(channel.rows @ map.to_matrix())


def apply_intermediate_channel(channel: Channel, phi: ArrayLike) -> Channel:
    """
    Q = W * Phi for an arbitrary (stochastic) intermediate channel Phi given as |Y| x |Z| matrix
    """
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[0] != channel.num_outputs:
        raise DomainError(f"Intermediate channel must have {channel.num_outputs} rows, got shape {phi.shape}")
    Channel(phi)  # validates every row of phi
    return Channel(channel.rows @ phi)

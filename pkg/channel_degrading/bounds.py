"""
________________________________________________________________________

:PROJECT: channel_degrading

*Bounds*

:details: Bounds:
    The "distance" functions bounding the loss of a merge, the ball, box and
    quadrant sets of the sphere-packing argument as membership predicates,
    and the constants of the per-step and cumulative greedy-merge bounds

:file:    bounds.py

________________________________________________________________________

All geometric functions accept scalars or numpy arrays. Vector arguments index the input alphabet along their last
axis; any leading axes are treated as a batch, so e.g. `in_ball` on arrays of shape (N, |X|) returns N booleans.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln

from .channel import TOLERANCE, PosteriorChannel
from .errors import DomainError

__all__ = [
    "d1",
    "d2",
    "d_scalar",
    "d_vector",
    "pair_delta_bound",
    "small_pair_delta_bound",
    "y_small",
    "x_max_classes",
    "y_prime",
    "closest_pair_in_y_prime",
    "omega_down",
    "omega_up",
    "omega_prime",
    "in_ball",
    "x_max",
    "in_box_C",
    "in_quadrant_Q",
    "quadrants_intersect",
    "mu",
    "nu",
    "nu_approx",
    "theorem1_rhs",
    "corollary_rhs",
    "telescoped_bound",
    "r_star",
]

logger = logging.getLogger(__name__)

Real = Union[float, NDArray]
Boolean = Union[bool, NDArray]


def _unwrap(value: NDArray):
    """
    Returns plain Python scalars for 0-d results
    """
    if np.ndim(value) == 0:
        return value.item()
    return value


def _vectors(alpha: ArrayLike, zeta: ArrayLike) -> Tuple[NDArray, NDArray]:
    alpha = np.asarray(alpha, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    if alpha.ndim == 0 or zeta.ndim == 0 or alpha.shape[-1] != zeta.shape[-1]:
        raise DomainError(f"Dimension mismatch between vectors of shape {alpha.shape} and {zeta.shape}")
    return alpha, zeta


def _check_radius(r: ArrayLike) -> NDArray:
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0.0)):
        raise DomainError("The radius r must be positive")
    return r


def _check_num_inputs(num_inputs: int) -> None:
    if num_inputs < 2:
        raise DomainError(f"The bounds need at least 2 input letters, got {num_inputs}")


# "distances" --------------------------------------------------------------


def d1(alpha: ArrayLike, zeta: ArrayLike) -> Real:
    """
    d1(alpha, zeta) = |zeta - alpha|
    """
    return _unwrap(np.abs(np.asarray(zeta, dtype=float) - np.asarray(alpha, dtype=float)))


def d2(alpha: ArrayLike, zeta: ArrayLike) -> Real:
    """
    d2(alpha, zeta) = (zeta - alpha)^2 / min(alpha, zeta) if both are positive, infinity otherwise
    """
    alpha = np.asarray(alpha, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.square(zeta - alpha) / np.minimum(alpha, zeta)
    return _unwrap(np.where((alpha > 0.0) & (zeta > 0.0), value, np.inf))


def d_scalar(alpha: ArrayLike, zeta: ArrayLike) -> Real:
    """
    d(alpha, zeta) = min(d1, d2) per coordinate
    """
    return _unwrap(np.minimum(d1(alpha, zeta), d2(alpha, zeta)))


def d_vector(alpha: ArrayLike, zeta: ArrayLike) -> Real:
    """
    d(alpha, zeta) = max over the input letters x of d(alpha_x, zeta_x)
    """
    alpha, zeta = _vectors(alpha, zeta)
    return _unwrap(np.max(np.asarray(d_scalar(alpha, zeta)), axis=-1))


def pair_delta_bound(
    pi_a: ArrayLike, pi_b: ArrayLike, alpha: ArrayLike, beta: ArrayLike, num_inputs: Optional[int] = None
) -> Real:
    """
    Upper bound (pi_a + pi_b) * |X| * d(alpha, beta) on the loss of merging two letters
    """
    alpha, beta = _vectors(alpha, beta)
    num_inputs = alpha.shape[-1] if num_inputs is None else num_inputs
    pi_ab = np.asarray(pi_a, dtype=float) + np.asarray(pi_b, dtype=float)
    return _unwrap(pi_ab * num_inputs * np.asarray(d_vector(alpha, beta)))


def small_pair_delta_bound(num_inputs: int, num_outputs: int, alpha: ArrayLike, beta: ArrayLike) -> Real:
    """
    Upper bound 4|X|/|Y| * d(alpha, beta) on the loss of merging two letters that both belong to Y_small
    """
    return _unwrap(4.0 * num_inputs / num_outputs * np.asarray(d_vector(alpha, beta)))


# output letter subsets --------------------------------------------------


def y_small(pc: PosteriorChannel) -> NDArray:
    """
    The indices of all letters with mass at most 2/|Y| (at least half of the alphabet)
    """
    return np.flatnonzero(pc.masses <= 2.0 / len(pc))


def x_max_classes(pc: PosteriorChannel) -> Dict[int, NDArray]:
    """
    Splits Y_small by the index of the largest posterior entry
    """
    small = y_small(pc)
    owners = np.asarray(x_max(pc.posteriors[small]))
    return {int(x): small[owners == x] for x in np.unique(owners)}


def y_prime(pc: PosteriorChannel) -> NDArray:
    """
    The largest class of `x_max_classes` (ties resolved to the smallest input letter)
    """
    classes = x_max_classes(pc)
    largest = max(classes, key=lambda x: (classes[x].size, -x))
    return classes[largest]


def closest_pair_in_y_prime(pc: PosteriorChannel) -> Optional[Tuple[int, int, float]]:
    """
    The pair of letters in Y' that is closest in the sense of d, together with that distance

    Returns `None` if Y' holds fewer than two letters.
    """
    letters = y_prime(pc)
    best: Optional[Tuple[int, int, float]] = None
    for i, a in enumerate(letters[:-1]):
        others = letters[i + 1 :]
        distances = np.atleast_1d(d_vector(pc.posteriors[a], pc.posteriors[others]))
        j = int(np.argmin(distances))
        if best is None or distances[j] < best[2]:
            best = (int(a), int(others[j]), float(distances[j]))
    return best


# balls, boxes and quadrants ---------------------------------------------


def omega_down(alpha: ArrayLike, r: ArrayLike) -> Real:
    """
    Distance from alpha to the lower end of the ball B(alpha, r): max(sqrt(r^2/4 + alpha*r) - r/2, r)
    """
    alpha = np.asarray(alpha, dtype=float)
    r = _check_radius(r)
    if np.any(alpha < 0.0):
        raise DomainError("omega is defined for non-negative alpha only")
    return _unwrap(np.maximum(np.sqrt(np.square(r) / 4.0 + alpha * r) - r / 2.0, r))


def omega_up(alpha: ArrayLike, r: ArrayLike) -> Real:
    """
    Distance from alpha to the upper end of the ball B(alpha, r): max(sqrt(alpha*r), r)
    """
    alpha = np.asarray(alpha, dtype=float)
    r = _check_radius(r)
    if np.any(alpha < 0.0):
        raise DomainError("omega is defined for non-negative alpha only")
    return _unwrap(np.maximum(np.sqrt(alpha * r), r))


def omega_prime(alpha: ArrayLike, r: ArrayLike, num_inputs: int) -> Real:
    """
    omega_down(alpha, r) / (|X| - 1), the half width of the box C and the width of the quadrant Q'
    """
    _check_num_inputs(num_inputs)
    return _unwrap(np.asarray(omega_down(alpha, r)) / (num_inputs - 1))


def in_ball(alpha: ArrayLike, r: ArrayLike, zeta: ArrayLike) -> Boolean:
    """
    Whether zeta lies in the box -omega_down(alpha_x, r) <= zeta_x - alpha_x <= omega_up(alpha_x, r), which is the set
    of all zeta with d(alpha, zeta) <= r
    """
    alpha, zeta = _vectors(alpha, zeta)
    r = np.asarray(r, dtype=float)[..., None]
    offset = zeta - alpha
    inside = (-np.asarray(omega_down(alpha, r)) <= offset) & (offset <= np.asarray(omega_up(alpha, r)))
    return _unwrap(np.all(inside, axis=-1))


def x_max(alpha: ArrayLike) -> Union[int, NDArray]:
    """
    The index of the largest entry (the smallest such index on ties)
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim == 0 or alpha.shape[-1] == 0:
        raise DomainError("x_max needs a non-empty vector")
    return _unwrap(np.argmax(alpha, axis=-1))


def _others(alpha: NDArray) -> NDArray:
    """
    Mask selecting X' = X without x_max(alpha)
    """
    owners = np.asarray(x_max(alpha))
    return np.arange(alpha.shape[-1]) != owners[..., None]


def _check_sums(*vectors: NDArray) -> None:
    for vector in vectors:
        if np.any(np.abs(vector.sum(axis=-1) - 1.0) > TOLERANCE):
            raise DomainError("Vectors must sum to 1")


def in_box_C(alpha: ArrayLike, r: ArrayLike, zeta: ArrayLike) -> Boolean:
    """
    Whether zeta (summing to 1) satisfies |zeta_x - alpha_x| <= omega'(alpha_x, r) for all x except x_max(alpha)
    """
    alpha, zeta = _vectors(alpha, zeta)
    _check_sums(alpha, zeta)
    r = np.asarray(r, dtype=float)[..., None]
    width = np.asarray(omega_prime(alpha, r, alpha.shape[-1]))
    inside = (np.abs(zeta - alpha) <= width) | ~_others(alpha)
    return _unwrap(np.all(inside, axis=-1))


def _prime(vector: NDArray, mask: NDArray) -> NDArray:
    """
    Deletes the x_max coordinate selected by `mask`
    """
    mask = np.broadcast_to(mask, vector.shape)
    return vector[mask].reshape(vector.shape[:-1] + (vector.shape[-1] - 1,))


def in_quadrant_Q(alpha: ArrayLike, r: ArrayLike, zeta_prime: ArrayLike) -> Boolean:
    """
    Whether zeta' (given on X' only) satisfies 0 <= zeta_x - alpha_x <= omega'(alpha_x, r) for all x in X'
    """
    alpha = np.asarray(alpha, dtype=float)
    zeta_prime = np.asarray(zeta_prime, dtype=float)
    if alpha.ndim == 0 or zeta_prime.ndim == 0 or zeta_prime.shape[-1] != alpha.shape[-1] - 1:
        raise DomainError(f"zeta' must have {alpha.shape[-1] - 1} coordinates, got shape {zeta_prime.shape}")
    alpha_prime = _prime(alpha, _others(alpha))
    r = np.asarray(r, dtype=float)[..., None]
    offset = zeta_prime - alpha_prime
    inside = (offset >= 0.0) & (offset <= np.asarray(omega_prime(alpha_prime, r, alpha.shape[-1])))
    return _unwrap(np.all(inside, axis=-1))


def quadrants_intersect(alpha: ArrayLike, beta: ArrayLike, r: ArrayLike) -> Boolean:
    """
    Whether the quadrants Q'(alpha, r) and Q'(beta, r) share a point

    Both quadrants are axis-aligned boxes, so they intersect iff their intervals overlap in every coordinate of X'.
    Vectors with different x_max live in different coordinate systems and are reported as not intersecting.
    """
    alpha, beta = _vectors(alpha, beta)
    r = np.asarray(r, dtype=float)[..., None]
    num_inputs = alpha.shape[-1]
    upper_alpha = alpha + np.asarray(omega_prime(alpha, r, num_inputs))
    upper_beta = beta + np.asarray(omega_prime(beta, r, num_inputs))
    overlap = (np.maximum(alpha, beta) <= np.minimum(upper_alpha, upper_beta)) | ~_others(alpha)
    same_owner = np.asarray(x_max(alpha)) == np.asarray(x_max(beta))
    return _unwrap(np.all(overlap, axis=-1) & same_owner)


# constants ----------------------------------------------------------------


def _log_radius_constant(num_inputs: int) -> float:
    """
    log of (sqrt(1 + 1/(2(|X|-1))) - 1)^-2 * (2|X| / Gamma(1 + (|X|-1)/2))^(2/(|X|-1))
    """
    k = num_inputs
    gap = math.expm1(0.5 * math.log1p(1.0 / (2.0 * (k - 1))))
    return -2.0 * math.log(gap) + 2.0 / (k - 1) * (math.log(2.0 * k) - float(gammaln(1.0 + (k - 1) / 2.0)))


def mu(num_inputs: int) -> float:
    """
    The constant of the per-step bound, evaluated in log space
    """
    _check_num_inputs(num_inputs)
    return math.exp(math.log(math.pi * num_inputs) + _log_radius_constant(num_inputs))


def nu(num_inputs: int) -> float:
    """
    The constant of the cumulative bound, (|X| - 1)/2 * mu(|X|)
    """
    return (num_inputs - 1) / 2.0 * mu(num_inputs)


def nu_approx(num_inputs: int) -> float:
    """
    The large |X| approximation 16*pi*e*|X|^3 of nu
    """
    _check_num_inputs(num_inputs)
    return 16.0 * math.pi * math.e * num_inputs**3


def theorem1_rhs(num_inputs: int, num_outputs: int) -> float:
    """
    mu(|X|) * |Y|^(-(|X|+1)/(|X|-1)): some pair of a channel with |Y| > 2|X| letters merges with at most this loss
    """
    _check_num_inputs(num_inputs)
    if num_outputs <= 2 * num_inputs:
        raise DomainError(f"The per-step bound needs |Y| > 2|X|, got |Y| = {num_outputs}, |X| = {num_inputs}")
    exponent = (num_inputs + 1) / (num_inputs - 1)
    return math.exp(math.log(mu(num_inputs)) - exponent * math.log(num_outputs))


def corollary_rhs(num_inputs: int, L: int) -> float:
    """
    nu(|X|) * L^(-2/(|X|-1)): greedy-merge down to L >= 2|X| letters loses at most this much
    """
    _check_num_inputs(num_inputs)
    if L < 2 * num_inputs:
        raise DomainError(f"The cumulative bound needs L >= 2|X|, got L = {L}, |X| = {num_inputs}")
    return math.exp(math.log(nu(num_inputs)) - 2.0 / (num_inputs - 1) * math.log(L))


def telescoped_bound(num_inputs: int, num_outputs: int, L: int) -> float:
    """
    The sum of the per-step bounds over all merges from |Y| down to L letters (at most `corollary_rhs`)
    """
    _check_num_inputs(num_inputs)
    if L < 2 * num_inputs:
        raise DomainError(f"The cumulative bound needs L >= 2|X|, got L = {L}, |X| = {num_inputs}")
    if num_outputs <= L:
        return 0.0
    sizes = np.arange(L + 1, num_outputs + 1, dtype=float)
    terms = np.exp(math.log(mu(num_inputs)) - (num_inputs + 1) / (num_inputs - 1) * np.log(sizes))
    return math.fsum(terms.tolist())


def r_star(num_inputs: int, num_outputs: int) -> float:
    """
    The critical radius: Y' of a channel with |Y| > 2|X| letters contains a pair at d-distance at most r_star
    """
    _check_num_inputs(num_inputs)
    if num_outputs <= 2 * num_inputs:
        raise DomainError(f"The critical radius needs |Y| > 2|X|, got |Y| = {num_outputs}, |X| = {num_inputs}")
    return math.exp(
        math.log(math.pi / 4.0)
        + _log_radius_constant(num_inputs)
        - 2.0 / (num_inputs - 1) * math.log(num_outputs)
    )

"""
________________________________________________________________________

:PROJECT: channel_degrading

*Experiments*

:details: Experiments:
    Verification of the greedy-merge bounds on a single channel and power-law
    sweeps over seeded random channels

:file:    experiments.py

________________________________________________________________________
"""

from __future__ import annotations

import logging
import math
import multiprocessing as mp
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import safer

from .bounds import closest_pair_in_y_prime, corollary_rhs, pair_delta_bound, r_star, telescoped_bound, theorem1_rhs
from .channel import Channel, DegradeReport, InputDistribution, PosteriorChannel, to_posterior_form
from .errors import BoundViolationError
from .experiment_configuration import ExperimentConfig
from .generator import random_channel
from .merge import find_min_pair, greedy_merge, merge_deltas_from

__all__ = [
    "CheckStatus",
    "CheckResult",
    "verify_channel",
    "SWEEP_COLUMNS",
    "sweep_trial",
    "run_sweep",
    "write_sweep",
]

logger = logging.getLogger(__name__)

# absolute slack for comparisons of a loss against a bound that is 0 (e.g. identical posteriors)
_SLACK = 1e-12


class CheckStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    SKIP = "SKIP"


class CheckResult(NamedTuple):
    name: str
    status: CheckStatus
    detail: str

    def __str__(self) -> str:
        return f"{self.status.value} {self.name}: {self.detail}"


def _greedy_totals(report: DegradeReport, L_values: Iterable[int]) -> Dict[int, float]:
    """
    The greedy loss for every L from a single run down to the smallest L (the runs for larger L are prefixes of it)
    """
    totals = {}
    for L in L_values:
        deltas = [delta for step, delta in zip(report.steps, report.raw_deltas) if step.size_before > L]
        totals[L] = max(math.fsum(deltas), 0.0)
    return totals


def _check(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name, CheckStatus.PASS if passed else CheckStatus.FAIL, detail)


def verify_channel(
    channel: Channel,
    input_dist: InputDistribution,
    L_values: Optional[Sequence[int]] = None,
    mu_scale: float = 1.0,
) -> List[CheckResult]:
    """
    Checks the greedy-merge bounds on one channel

    The checks are: the minimum pair loss against the per-step bound, the greedy loss against the cumulative bound
    for every L >= 2|X|, the pair bound against the exact loss for all pairs, the per-step bound at every greedy step,
    the closest pair in Y' against the critical radius and the greedy loss against the telescoped per-step bounds.
    Checks outside the range of their bound are reported as SKIP.

    Parameters
    ----------
    channel: Channel
        The channel to check
    input_dist: InputDistribution
        Its input distribution
    L_values: Sequence[int]
        (optional) The target sizes for the cumulative checks (default: 2|X|, 4|X| and 8|X|)
    mu_scale: float
        Factor applied to the bound constants (only for exercising the FAIL path, keep 1 otherwise)
    """
    pc = to_posterior_form(channel, input_dist)
    k, n = pc.num_inputs, len(pc)
    if L_values is None:
        L_values = [2 * k, 4 * k, 8 * k]
    L_values = sorted(set(int(L) for L in L_values))
    results: List[CheckResult] = []
    per_step_applies = k >= 2 and n > 2 * k

    if per_step_applies:
        candidate = find_min_pair(pc)
        bound = mu_scale * theorem1_rhs(k, n)
        results.append(
            _check(
                "min-pair",
                candidate.delta <= bound,
                f"pair ({candidate.letter_a}, {candidate.letter_b}) loses {candidate.delta:.6e} <= {bound:.6e} nats",
            )
        )
    else:
        results.append(CheckResult("min-pair", CheckStatus.SKIP, f"needs |Y| > 2|X| (|X| = {k}, |Y| = {n})"))

    target = max(1, min(L_values + [2 * k]))
    report = greedy_merge(pc, target)
    totals = _greedy_totals(report, L_values)
    for L in L_values:
        name = f"cumulative L={L}"
        if k >= 2 and L >= 2 * k:
            bound = mu_scale * corollary_rhs(k, L)
            results.append(_check(name, totals[L] <= bound, f"greedy loses {totals[L]:.6e} <= {bound:.6e} nats"))
        else:
            results.append(CheckResult(name, CheckStatus.SKIP, f"needs L >= 2|X| = {2 * k}"))

    if n >= 2:
        violations = 0
        for a in range(n - 1):
            deltas = merge_deltas_from(pc, a)
            bounds = pair_delta_bound(pc.masses[a], pc.masses[a + 1 :], pc.posteriors[a], pc.posteriors[a + 1 :])
            violations += int(np.count_nonzero(deltas > np.asarray(bounds) + _SLACK))
        results.append(
            _check("pair-bound", violations == 0, f"{violations} of {n * (n - 1) // 2} pairs exceed their bound")
        )
    else:
        results.append(CheckResult("pair-bound", CheckStatus.SKIP, "needs at least 2 output letters"))

    checked = [(step, delta) for step, delta in zip(report.steps, report.raw_deltas) if step.size_before > 2 * k]
    if k >= 2 and checked:
        failed = [step for step, delta in checked if delta > mu_scale * theorem1_rhs(k, step.size_before)]
        detail = f"{len(failed)} of {len(checked)} merges exceed the per-step bound"
        if failed:
            detail += f", first at size {failed[0].size_before}"
        results.append(_check("per-step", not failed, detail))
    else:
        results.append(CheckResult("per-step", CheckStatus.SKIP, "no merge with |Y| > 2|X|"))

    if per_step_applies:
        radius = min(r_star(k, n), 1.0)
        pair = closest_pair_in_y_prime(pc)
        if pair is None:
            results.append(_check("y-prime", False, "Y' holds fewer than two letters"))
        else:
            a, b, d = pair
            results.append(_check("y-prime", d <= radius + _SLACK, f"pair ({a}, {b}) at d = {d:.6e} <= {radius:.6e}"))
    else:
        results.append(CheckResult("y-prime", CheckStatus.SKIP, f"needs |Y| > 2|X| (|X| = {k}, |Y| = {n})"))

    for L in L_values:
        name = f"telescoped L={L}"
        if k >= 2 and L >= 2 * k:
            bound = mu_scale * telescoped_bound(k, n, L)
            results.append(
                _check(name, totals[L] <= bound + _SLACK, f"greedy loses {totals[L]:.6e} <= {bound:.6e} nats")
            )
        else:
            results.append(CheckResult(name, CheckStatus.SKIP, f"needs L >= 2|X| = {2 * k}"))

    for result in results:
        log = logger.error if result.status is CheckStatus.FAIL else logger.info
        log(str(result))
    return results


# sweeps ---------------------------------------------------------------------

SWEEP_COLUMNS = ["seed", "trial", "X", "Y", "L", "delta_greedy", "bound", "ratio"]


def sweep_trial(job: Tuple[int, int, int, int, Sequence[int]]) -> List[Dict[str, Any]]:
    """
    The sweep rows of one trial, `job` is (num_inputs, num_outputs, seed, trial, L_values)

    Runs in worker processes, so it takes one picklable argument.
    """
    num_inputs, num_outputs, seed, trial, L_values = job
    channel, input_dist = random_channel(num_inputs, num_outputs, seed, trial)
    pc: PosteriorChannel = to_posterior_form(channel, input_dist)
    report = greedy_merge(pc, min(L_values))
    totals = _greedy_totals(report, L_values)

    rows = []
    for L in L_values:
        bound = corollary_rhs(num_inputs, L) if L >= 2 * num_inputs else None
        ratio = totals[L] / bound if bound is not None else None
        if ratio is not None and ratio > 1.0:
            raise BoundViolationError(
                f"Greedy-merge lost {totals[L]!r} nats for seed {seed}, trial {trial}, L = {L}, exceeding the "
                f"cumulative bound {bound!r}"
            )
        rows.append(
            {
                "seed": seed,
                "trial": trial,
                "X": num_inputs,
                "Y": num_outputs,
                "L": L,
                "delta_greedy": totals[L],
                "bound": bound,
                "ratio": ratio,
            }
        )
    return rows


def run_sweep(config: ExperimentConfig) -> pd.DataFrame:
    """
    Degrades `config.num_trials` random channels to every L of `config.L_values`

    Rows are ordered by (trial, L) independent of the number of workers.

    Raises
    ------
    BoundViolationError
        If the greedy loss of any row exceeds the cumulative bound
    """
    config.sanity_check()
    L_values = list(config.L_values)
    jobs = [
        (config.num_inputs, config.num_outputs, config.seed, trial, L_values) for trial in range(config.num_trials)
    ]
    logger.info(f"Running sweep {config}")
    if config.workers > 1:
        with mp.Pool(config.workers) as pool:
            per_trial = pool.map(sweep_trial, jobs)
    else:
        per_trial = [sweep_trial(job) for job in jobs]
    return pd.DataFrame([row for rows in per_trial for row in rows], columns=SWEEP_COLUMNS)


def write_sweep(file_path: Path, table: pd.DataFrame) -> None:
    """
    Writes the sweep table as CSV, floats with 12 significant digits and empty cells where no bound applies
    """
    with safer.open(file_path, "w", delete_failures=False) as csv_file:
        table.to_csv(csv_file, index=False, float_format="%.11e", na_rep="", lineterminator="\n")
    logger.info(f"Wrote {len(table)} rows to {file_path}")

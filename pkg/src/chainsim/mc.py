"""Monte Carlo estimators for time-to-hack, functional probability, and the
per-cycle hack probability.

Every estimator is a pure function of (model, plan): replication ``i``
draws from its own counter-based substream keyed by (master_seed, i), and
aggregation runs in replication-index order, so the worker count never
changes the result.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import RunawayError
from .model import AttackModel, play_cycle
from .streams import SubstreamPool

__all__ = [
    "Estimate",
    "ReplicationPlan",
    "TimeToHack",
    "DEFAULT_CYCLE_CAP",
    "simulate_time_to_hack",
    "estimate_mean_functional_time",
    "estimate_functional_prob",
    "estimate_cycle_success_prob",
]

DEFAULT_CYCLE_CAP = 10**9


@dataclass(frozen=True)
class ReplicationPlan:
    """How many replications to run, under which master seed, on how many workers."""

    n_reps: int
    master_seed: int
    workers: int = 1

    def __post_init__(self):
        if self.n_reps < 1:
            raise ValueError(f"n_reps must be >= 1, got {self.n_reps}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo point estimate with its standard error and provenance."""

    mean: float
    std_error: float
    n_reps: int
    seed: int
    elapsed: float


@dataclass(frozen=True)
class TimeToHack:
    """One sampled time-to-hack, decomposed into its cycle components."""

    total: float
    n_resets: int
    reset_total: float
    hack_duration: float


def simulate_time_to_hack(
    model: AttackModel, stream: np.random.Generator, cycle_cap: int = DEFAULT_CYCLE_CAP
) -> TimeToHack:
    """Play cycles until the hacker wins; the total is the sum of all reset
    durations plus the final hack duration.

    Raises ``RunawayError`` after ``cycle_cap`` cycles, which signals a
    per-cycle hack probability that is numerically zero.
    """
    resets = 0
    reset_total = 0.0
    while True:
        outcome = play_cycle(model, stream)
        if outcome.hacked:
            return TimeToHack(
                total=reset_total + outcome.duration,
                n_resets=resets,
                reset_total=reset_total,
                hack_duration=outcome.duration,
            )
        resets += 1
        reset_total += outcome.duration
        if resets >= cycle_cap:
            raise RunawayError(
                f"no hack after {cycle_cap} cycles at m={model.m}; "
                "the per-cycle hack probability is numerically zero"
            )


def _block_mean_time(model: AttackModel, master_seed: int, lo: int, hi: int, cycle_cap: int) -> np.ndarray:
    pool = SubstreamPool(master_seed)
    out = np.empty(hi - lo)
    for i in range(lo, hi):
        out[i - lo] = simulate_time_to_hack(model, pool.reset(i), cycle_cap).total
    return out


def _block_functional(model: AttackModel, master_seed: int, lo: int, hi: int, t: float) -> np.ndarray:
    pool = SubstreamPool(master_seed)
    out = np.empty(hi - lo, dtype=np.uint8)
    for i in range(lo, hi):
        out[i - lo] = _replay_functional_at(model, pool.reset(i), t)
    return out


def _block_cycle(model: AttackModel, master_seed: int, lo: int, hi: int, _unused) -> np.ndarray:
    pool = SubstreamPool(master_seed)
    out = np.empty(hi - lo, dtype=np.uint8)
    for i in range(lo, hi):
        out[i - lo] = 1 if play_cycle(model, pool.reset(i)).hacked else 0
    return out


def _replay_functional_at(model: AttackModel, stream: np.random.Generator, t: float) -> int:
    """1 if the chain is still functional at time t, else 0.

    A hack completing exactly at t counts as hacked (a probability-zero
    boundary for continuous times, fixed here by convention).
    """
    clock = 0.0
    while True:
        outcome = play_cycle(model, stream)
        if outcome.hacked:
            return 0 if clock + outcome.duration <= t else 1
        clock += outcome.duration
        if clock > t:
            return 1


def _run_blocks(block_fn, model: AttackModel, plan: ReplicationPlan, extra) -> np.ndarray:
    n = plan.n_reps
    if plan.workers == 1 or n < 2 * plan.workers:
        return block_fn(model, plan.master_seed, 0, n, extra)
    bounds = np.linspace(0, n, plan.workers + 1).astype(int)
    blocks = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with ProcessPoolExecutor(max_workers=plan.workers) as pool:
        futures = [
            pool.submit(block_fn, model, plan.master_seed, lo, hi, extra) for lo, hi in blocks
        ]
        parts = [f.result() for f in futures]
    return np.concatenate(parts)


def _mean_and_se(values: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(values.size))


def estimate_mean_functional_time(
    model: AttackModel, plan: ReplicationPlan, cycle_cap: int = DEFAULT_CYCLE_CAP
) -> Estimate:
    """Average of independent time-to-hack draws, with its standard error."""
    start = time.perf_counter()
    totals = _run_blocks(_block_mean_time, model, plan, cycle_cap)
    mean, se = _mean_and_se(totals)
    return Estimate(
        mean=mean,
        std_error=se,
        n_reps=plan.n_reps,
        seed=plan.master_seed,
        elapsed=time.perf_counter() - start,
    )


def estimate_functional_prob(model: AttackModel, t: float, plan: ReplicationPlan) -> Estimate:
    """Fraction of replications still functional at time t.

    Each replication replays the cycle process from scratch until the clock
    passes t or a hack completes at or before t; the standard error is the
    binomial sqrt(p(1-p)/n).
    """
    if t < 0.0:
        raise ValueError(f"evaluation time must be >= 0, got {t}")
    start = time.perf_counter()
    if t == 0.0:
        # Nothing can happen in zero time.
        return Estimate(1.0, 0.0, plan.n_reps, plan.master_seed, time.perf_counter() - start)
    flags = _run_blocks(_block_functional, model, plan, float(t))
    p_hat = float(np.mean(flags))
    se = math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / plan.n_reps)
    return Estimate(p_hat, se, plan.n_reps, plan.master_seed, time.perf_counter() - start)


def estimate_cycle_success_prob(model: AttackModel, plan: ReplicationPlan) -> Estimate:
    """Per-cycle Bernoulli frequency of the hacker finishing before detection.

    Each replication plays exactly one cycle; this is the direct sampling
    cross-check for the quadrature hack probability.
    """
    start = time.perf_counter()
    flags = _run_blocks(_block_cycle, model, plan, None)
    p_hat = float(np.mean(flags))
    se = math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / plan.n_reps)
    return Estimate(p_hat, se, plan.n_reps, plan.master_seed, time.perf_counter() - start)

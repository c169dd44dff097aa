"""Reproducible Monte Carlo BLER estimation and SNR sweeps.

Every trial owns an independent random stream derived from
``SeedSequence(master_seed, spawn_key=(trial_index,))``, so trial outcomes
are a pure function of (plan, trial_index): results never depend on
execution order, batching, or the number of worker processes.  Aggregation
is integer counting, which is commutative, so a sweep serializes to the
same bytes on 1 worker or 8.

Early stopping at a target error count is batch-granular: batches have a
fixed size independent of worker count, and the stop condition is checked
only between batches, which keeps the executed trial set deterministic.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import analysis
from .channel import (
    ChannelModel, NoiseSpec, sample_fading, sample_noise, sigma_from_snr, transmit,
)
from .codec import (
    DEFAULT_DECODE_BUDGET_BITS, BudgetExceededError, CodeParams, Message,
    _decode_block, _encode_block, encode, ml_decode,
)

_WILSON_Z = 1.959963984540054  # two-sided 95%
DEFAULT_BATCH_SIZE = 1024


@dataclass(frozen=True)
class StopRule:
    """Run until max_trials, or stop early once target_errors are seen."""

    max_trials: int = 10**6
    target_errors: int | None = 200

    def __post_init__(self):
        if self.max_trials < 1:
            raise ValueError(f"max_trials must be >= 1, got {self.max_trials}")
        if self.target_errors is not None and self.target_errors < 1:
            raise ValueError(
                f"target_errors must be >= 1 or None, got {self.target_errors}"
            )

    @classmethod
    def fixed(cls, trials: int) -> "StopRule":
        return cls(max_trials=trials, target_errors=None)


@dataclass(frozen=True)
class TrialPlan:
    """Everything one BLER point needs: code, channel, SNR, stop rule, seed."""

    params: CodeParams
    model: ChannelModel
    gamma_db: float
    stop: StopRule
    master_seed: int

    @property
    def noise(self) -> NoiseSpec:
        return sigma_from_snr(self.gamma_db, self.params.c, self.params.d_min)


@dataclass(frozen=True)
class BlerEstimate:
    errors: int
    trials: int
    p_hat: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class SweepRecord:
    """One SNR grid point: simulation estimate joined with analysis columns."""

    gamma_db: float
    sigma2: float
    estimate: BlerEstimate
    bound: float
    floor: float
    threshold_db: float
    master_seed: int
    hash_id: str


def wilson_interval(errors: int, trials: int) -> tuple[float, float]:
    """95% Wilson score interval; well-behaved at zero observed errors."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    z2 = _WILSON_Z * _WILSON_Z
    p = errors / trials
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = _WILSON_Z * math.sqrt(
        p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)
    ) / denom
    low = 0.0 if errors == 0 else max(0.0, center - half)
    high = 1.0 if errors == trials else min(1.0, center + half)
    return low, high


def _trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    return np.random.Generator(np.random.PCG64(ss))


def run_trial(plan: TrialPlan, trial_index: int) -> bool:
    """One end-to-end trial: draw M, encode, transmit, ML-decode.

    Returns True on a block error.  Pure in (plan, trial_index).
    """
    rng = _trial_rng(plan.master_seed, trial_index)
    params = plan.params
    message = Message.random(params.n, rng)
    obs = transmit(encode(message, params), plan.model, plan.noise, rng)
    return ml_decode(obs, params) != message


def _simulate_chunk(plan: TrialPlan, start: int, stop: int) -> int:
    """Error count over trial indices [start, stop).

    Per-trial randomness is drawn trial by trial from each trial's own
    stream in the same order as ``run_trial`` (message, fading, noise);
    only the pure encode/decode arithmetic is batched across trials.
    """
    params = plan.params
    rows, L, n = params.n_segments, params.L, params.n
    if n > DEFAULT_DECODE_BUDGET_BITS:
        raise BudgetExceededError(
            f"exhaustive ML over 2^{n} messages exceeds the "
            f"{DEFAULT_DECODE_BUDGET_BITS}-bit budget"
        )
    sigma2 = plan.noise.sigma2
    count = stop - start
    if count <= 0:
        return 0
    msg = np.empty(count, dtype=np.uint64)
    h = np.empty((count, rows, L), dtype=np.complex128)
    noise = np.empty((count, rows, L), dtype=np.complex128)
    for t in range(count):
        rng = _trial_rng(plan.master_seed, start + t)
        msg[t] = int(rng.integers(0, 1 << n))
        h[t] = sample_fading(plan.model, rng, size=(rows, L))
        noise[t] = sample_noise(sigma2, rng, size=(rows, L))
    y = h * _encode_block(msg, params) + noise
    errors = 0
    step = max(1, (1 << 22) // (1 << n))  # keep the cost matrix within ~32 MB
    for a in range(0, count, step):
        b = min(a + step, count)
        decoded = _decode_block(y[a:b], h[a:b], params)
        errors += int(np.sum(decoded != msg[a:b]))
    return errors


def resolve_workers(requested: int | None = None) -> int:
    """Worker count; the SPINAL_THREADS env var caps (and defaults) it."""
    env = os.environ.get("SPINAL_THREADS")
    cap = None
    if env is not None:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise ValueError(f"SPINAL_THREADS must be an integer, got {env!r}")
    if requested is not None:
        w = max(1, requested)
        return min(w, cap) if cap is not None else w
    if cap is not None:
        return cap
    return os.cpu_count() or 1


def estimate_bler(plan: TrialPlan, workers: int | None = None,
                  trial_fn=None, batch_size: int = DEFAULT_BATCH_SIZE) -> BlerEstimate:
    """Run trials under the plan's stop rule and form a Wilson interval.

    trial_fn(plan, trial_index) -> bool overrides the real trial (used to
    validate the estimator against a known Bernoulli source).  Batch size
    controls stop-rule granularity, not results: outcomes per index are
    fixed, so only *which* indices run depends on it.
    """
    workers = resolve_workers(workers)
    stop = plan.stop
    if trial_fn is None:
        count_chunk = _simulate_chunk
    else:
        def count_chunk(p, a, b):
            return sum(bool(trial_fn(p, i)) for i in range(a, b))

    errors = 0
    trials = 0
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while trials < stop.max_trials:
            batch_end = min(trials + batch_size, stop.max_trials)
            if executor is None:
                errors += count_chunk(plan, trials, batch_end)
            else:
                step = math.ceil((batch_end - trials) / workers)
                futures = [
                    executor.submit(count_chunk, plan, a, min(a + step, batch_end))
                    for a in range(trials, batch_end, step)
                ]
                errors += sum(f.result() for f in futures)
            trials = batch_end
            if stop.target_errors is not None and errors >= stop.target_errors:
                break
    finally:
        if executor is not None:
            executor.shutdown()
    ci_low, ci_high = wilson_interval(errors, trials)
    return BlerEstimate(
        errors=errors,
        trials=trials,
        p_hat=errors / trials,
        ci_low=ci_low,
        ci_high=ci_high,
    )


def _point_seed(master_seed: int, point_index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(point_index,))
    return int(ss.generate_state(1, np.uint64)[0])


def sweep(params: CodeParams, model: ChannelModel, gamma_grid,
          stop: StopRule | None = None, master_seed: int = 0,
          scheme: analysis.QuadratureScheme | None = None, x: float = 0.01,
          workers: int | None = None) -> list[SweepRecord]:
    """Simulate BLER over an ascending SNR grid and attach analysis columns.

    The bound is evaluated at each point's noise variance; the floor and
    threshold are SNR-free and therefore constant down the grid.
    """
    grid = [float(g) for g in gamma_grid]
    if not grid:
        raise ValueError("gamma_grid must be non-empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("gamma_grid must be strictly ascending")
    if stop is None:
        stop = StopRule()
    if scheme is None:
        scheme = analysis.default_scheme()
    floor = analysis.error_floor(params).p_ef
    threshold_db = analysis.snr_threshold(model, params.c, x).gamma_th_db
    records = []
    for idx, gamma_db in enumerate(grid):
        noise = sigma_from_snr(gamma_db, params.c, params.d_min)
        plan = TrialPlan(
            params=params,
            model=model,
            gamma_db=gamma_db,
            stop=stop,
            master_seed=_point_seed(master_seed, idx),
        )
        estimate = estimate_bler(plan, workers=workers)
        bound = analysis.bler_upper_bound(params, noise.sigma2, model, scheme)
        records.append(SweepRecord(
            gamma_db=gamma_db,
            sigma2=noise.sigma2,
            estimate=estimate,
            bound=bound.p_e_upper,
            floor=floor,
            threshold_db=threshold_db,
            master_seed=master_seed,
            hash_id=params.hash_id,
        ))
    return records

"""Statistically exact simulation and Monte Carlo estimation.

Every operation takes a master seed and derives one independent 64-bit
stream per run from (master seed, run index), so results replay bit-for-bit
and runs can be distributed freely.  Kernels live in _kernels and are
numba-compiled; this module holds the orchestration and summaries.
"""

from __future__ import annotations

import dataclasses
import math
import os
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .meanfield import EquilibriumReport, integrate, stubborn_equilibria
from .models import (
    BirthDeathChain,
    MajorityParams,
    ModelParams,
    StubbornParams,
    VoterParams,
    build_chain,
    initial_state,
)

TERMINAL_LABELS = {
    _kernels.TERMINAL_LOW: "absorbed-at-0",
    _kernels.TERMINAL_HIGH: "absorbed-at-N",
    _kernels.TERMINAL_HORIZON: "horizon-reached",
}

DEFAULT_HORIZON_PER_STATE = 1e3  # non-absorbing runs default to 1e3 * N time units


def _configure_threads():
    value = os.environ.get("OPDYN_THREADS")
    if value:
        import numba

        numba.set_num_threads(
            max(1, min(int(value), numba.config.NUMBA_NUM_THREADS))
        )


def derive_run_seeds(master_seed: int, n_runs: int) -> np.ndarray:
    """One 64-bit stream seed per run, derived from (master seed, run index)."""
    if master_seed < 0:
        raise ValueError("seed must be nonnegative")
    return np.random.SeedSequence(master_seed).generate_state(n_runs, np.uint64)


@dataclass(frozen=True)
class TrajectoryRecord:
    """One simulated path: jump times, states after each jump, terminal."""

    start: int
    times: np.ndarray
    states: np.ndarray
    terminal: str
    final_time: float

    def __post_init__(self):
        self.times.setflags(write=False)
        self.states.setflags(write=False)

    @property
    def final_state(self) -> int:
        return int(self.states[-1]) if self.states.size else self.start

    def segments(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(state, t_start, t_end) of the piecewise-constant trajectory."""
        state = np.concatenate(([self.start], self.states))
        t0 = np.concatenate(([0.0], self.times))
        t1 = np.concatenate((self.times, [self.final_time]))
        return state, t0, t1

    def fraction_at(self, grid: np.ndarray, denominator: int) -> np.ndarray:
        """Opinion-1 fraction sampled at the given times (piecewise constant)."""
        state = np.concatenate(([self.start], self.states))
        idx = np.searchsorted(self.times, grid, side="right")
        return state[idx] / denominator


def simulate(
    chain: BirthDeathChain,
    start: int,
    horizon: float | None = None,
    seed: int = 0,
) -> TrajectoryRecord:
    """Exact CTMC path of the chain from `start` until absorption or horizon."""
    if not 0 <= start <= chain.max_state:
        raise ValueError(f"start={start} outside 0..{chain.max_state}")
    absorbing = chain.absorbing_low or chain.absorbing_high
    if horizon is None:
        horizon = math.inf if absorbing else DEFAULT_HORIZON_PER_STATE * chain.max_state
    if not horizon > 0.0:
        raise ValueError(f"horizon={horizon} must be positive")
    if math.isinf(horizon) and not absorbing:
        raise ValueError("infinite horizon on a chain with no absorbing boundary")
    stream = derive_run_seeds(seed, 1)[0]
    times, states, terminal, t_final = _kernels.sample_path(
        chain.up_rate, chain.down_rate, start, horizon, stream
    )
    return TrajectoryRecord(
        start=start,
        times=times,
        states=states.astype(np.int64),
        terminal=TERMINAL_LABELS[terminal],
        final_time=float(t_final),
    )


@dataclass(frozen=True)
class MonteCarloSummary:
    """Point estimate with standard error and the replayable per-run seeds."""

    n_runs: int
    estimate: float
    stderr: float
    run_seeds: np.ndarray

    def __post_init__(self):
        self.run_seeds.setflags(write=False)


def _absorbing_chain(params: ModelParams) -> tuple[BirthDeathChain, int]:
    chain = build_chain(params)
    if not (chain.absorbing_low and chain.absorbing_high):
        raise ValueError(
            f"{params.model} chain is not absorbing; exit/consensus statistics "
            "are undefined"
        )
    return chain, params.start_state


def _run_batch(chain, start, n_runs, seed, horizon=math.inf):
    _configure_threads()
    seeds = derive_run_seeds(seed, n_runs)
    out_state = np.empty(n_runs, np.int64)
    out_time = np.empty(n_runs, np.float64)
    _kernels.absorption_batch(
        chain.up_rate, chain.down_rate, start, horizon, seeds, out_state, out_time
    )
    return seeds, out_state, out_time


def estimate_exit_probability(
    params: ModelParams, n_runs: int, seed: int = 0
) -> MonteCarloSummary:
    """Fraction of runs absorbed at all-ones consensus, with binomial stderr."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    chain, start = _absorbing_chain(params)
    seeds, out_state, _ = _run_batch(chain, start, n_runs, seed)
    hits = float(np.count_nonzero(out_state == chain.max_state))
    p_hat = hits / n_runs
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / n_runs)
    return MonteCarloSummary(n_runs=n_runs, estimate=p_hat, stderr=stderr, run_seeds=seeds)


def estimate_consensus_time(
    params: ModelParams, n_runs: int, seed: int = 0
) -> MonteCarloSummary:
    """Mean absorption time with its standard error."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    chain, start = _absorbing_chain(params)
    seeds, _, out_time = _run_batch(chain, start, n_runs, seed)
    mean = float(out_time.mean())
    stderr = float(out_time.std(ddof=1) / math.sqrt(n_runs)) if n_runs > 1 else 0.0
    return MonteCarloSummary(n_runs=n_runs, estimate=mean, stderr=stderr, run_seeds=seeds)


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit of mean consensus time against log N."""

    n_values: np.ndarray
    mean_times: np.ndarray
    stderrs: np.ndarray
    slope: float
    intercept: float
    r_squared: float

    def __post_init__(self):
        for arr in (self.n_values, self.mean_times, self.stderrs):
            arr.setflags(write=False)


def _r_squared(y: np.ndarray, fitted: np.ndarray) -> float:
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0


def fit_log_scaling(
    params: ModelParams, n_values, n_runs: int, seed: int = 0
) -> ScalingFit:
    """Estimate mean consensus time on an N grid and fit a*log(N) + b."""
    n_values = sorted(int(n) for n in n_values)
    if len(set(n_values)) < 5:
        raise ValueError("need at least 5 distinct N values")
    means, errs = [], []
    for idx, n in enumerate(n_values):
        cell = dataclasses.replace(params, n_agents=n)
        cell_seed = int(np.random.SeedSequence(seed, spawn_key=(idx,)).generate_state(1)[0])
        summary = estimate_consensus_time(cell, n_runs, cell_seed)
        if summary.estimate > 0 and summary.stderr > 0.05 * summary.estimate:
            warnings.warn(
                f"standard error at N={n} exceeds 5% of the mean; "
                "increase n_runs for a trustworthy fit",
                stacklevel=2,
            )
        means.append(summary.estimate)
        errs.append(summary.stderr)
    n_arr = np.array(n_values, dtype=np.float64)
    t_arr = np.array(means)
    slope, intercept = np.polyfit(np.log(n_arr), t_arr, 1)
    fitted = slope * np.log(n_arr) + intercept
    return ScalingFit(
        n_values=n_arr,
        mean_times=t_arr,
        stderrs=np.array(errs),
        slope=float(slope),
        intercept=float(intercept),
        r_squared=_r_squared(t_arr, fitted),
    )


def compare_meanfield(
    params: ModelParams,
    n_big: int,
    horizon: float,
    seed: int = 0,
    dt: float = 0.01,
) -> float:
    """Sup deviation between one finite-N path and the mean-field trajectory.

    The chain is rebuilt at n_big agents; the ODE starts from the same
    (floor-rounded) initial fraction, and the deviation is taken over the
    integration grid with the path held piecewise constant.
    """
    big = dataclasses.replace(params, n_agents=n_big)
    chain = build_chain(big)
    start = big.start_state
    denom = big.n_free if isinstance(big, StubbornParams) else big.n_agents
    stream = derive_run_seeds(seed, 1)[0]
    times, states, _, t_final = _kernels.sample_path(
        chain.up_rate, chain.down_rate, start, horizon, stream
    )
    record = TrajectoryRecord(
        start=start,
        times=times,
        states=states.astype(np.int64),
        terminal="horizon-reached",
        final_time=float(t_final),
    )
    solution = integrate(big, t_end=horizon, dt=dt, x0=start / denom)
    deviation = np.abs(record.fraction_at(solution.t, denom) - solution.x)
    return float(deviation.max())


@dataclass(frozen=True)
class DwellReport:
    """Metastable dwell segmentation of one stubborn-model trajectory.

    A dwell starts when the trajectory comes within basin_radius of a stable
    equilibrium and ends only when it crosses the unstable equilibrium
    (hysteresis, to avoid chattering).  Time before the first entry and
    between a crossing and the next entry belongs to no basin, so occupation
    fractions sum to at most 1.
    """

    equilibria: EquilibriumReport
    basin_roots: tuple[float, ...]
    basin_radius: float
    total_time: float
    occupation_fraction: tuple[float, ...]
    intervals: tuple[tuple[int, float, float], ...]  # (basin id, t_enter, t_exit)
    switch_count: int
    basins_visited: tuple[int, ...]

    @property
    def no_switching_observed(self) -> bool:
        return self.switch_count == 0


def dwell_analysis(
    params: StubbornParams,
    horizon: float,
    seed: int = 0,
    basin_radius: float = 0.05,
) -> DwellReport:
    """Segment a stubborn-model path into dwell intervals around stable roots."""
    if not isinstance(params, StubbornParams):
        raise TypeError("dwell analysis applies to the stubborn model")
    if not 0.0 < basin_radius < 0.5:
        raise ValueError(f"basin_radius={basin_radius} outside (0, 0.5)")
    report = stubborn_equilibria(params.gamma0, params.gamma1)
    stable = report.stable_roots
    unstable = [r for r, s in zip(report.roots, report.stability) if s == "unstable"]
    chain = build_chain(params)
    record = simulate(chain, params.start_state, horizon=horizon, seed=seed)
    state, t0, t1 = record.segments()
    x = state / params.n_free

    if len(stable) == 1:
        # single basin: one dwell from first entry to the end of the run
        inside = np.abs(x - stable[0]) < basin_radius
        first = int(np.argmax(inside)) if inside.any() else -1
        intervals = []
        occupation = [0.0]
        if first >= 0:
            intervals.append((0, float(t0[first]), float(record.final_time)))
            occupation[0] = (record.final_time - t0[first]) / record.final_time
        return DwellReport(
            equilibria=report,
            basin_roots=stable,
            basin_radius=basin_radius,
            total_time=record.final_time,
            occupation_fraction=tuple(occupation),
            intervals=tuple(intervals),
            switch_count=0,
            basins_visited=tuple(sorted({b for b, _, _ in intervals})),
        )

    # bistable: excursions between crossings of the unstable root; within an
    # excursion on one side, the dwell runs from the first radius entry to the
    # crossing that ends the excursion
    boundary = unstable[0]
    side = x > boundary
    crossing = np.flatnonzero(side[1:] != side[:-1]) + 1  # segment starting a new side
    starts = np.concatenate(([0], crossing))
    ends = np.concatenate((crossing, [x.size]))  # exclusive
    intervals = []
    for lo, hi in zip(starts, ends):
        basin = 1 if side[lo] else 0
        inside = np.abs(x[lo:hi] - stable[basin]) < basin_radius
        if inside.any():
            first = lo + int(np.argmax(inside))
            exit_time = float(t1[hi - 1])
            intervals.append((basin, float(t0[first]), exit_time))
    occupation = [0.0, 0.0]
    for basin, enter, leave in intervals:
        occupation[basin] += leave - enter
    occupation = [o / record.final_time for o in occupation]
    switch_count = sum(
        1 for a, b in zip(intervals, intervals[1:]) if a[0] != b[0]
    )
    return DwellReport(
        equilibria=report,
        basin_roots=stable,
        basin_radius=basin_radius,
        total_time=record.final_time,
        occupation_fraction=tuple(occupation),
        intervals=tuple(intervals),
        switch_count=switch_count,
        basins_visited=tuple(sorted({b for b, _, _ in intervals})),
    )


def stationary_histogram(
    params: StubbornParams,
    horizon: float,
    burn_in: float = 0.0,
    seed: int = 0,
) -> np.ndarray:
    """Time-weighted occupation distribution over states after burn-in."""
    if not 0.0 <= burn_in < horizon:
        raise ValueError("need 0 <= burn_in < horizon")
    chain = build_chain(params)
    if chain.absorbing_low and chain.absorbing_high:
        raise ValueError("stationary histogram needs a non-absorbing chain")
    record = simulate(chain, params.start_state, horizon=horizon, seed=seed)
    state, t0, t1 = record.segments()
    weight = np.clip(t1, burn_in, None) - np.clip(t0, burn_in, None)
    hist = np.bincount(state, weights=weight, minlength=chain.n_states)
    return hist / hist.sum()

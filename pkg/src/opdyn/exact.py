"""Exact absorption analytics for birth-death chains.

Everything here is closed-form or direct linear algebra, no sampling: the
gambler's-ruin identity, the voter and majority exit probabilities, the
increment distribution of the majority exit profile, and mean absorption
times from the first-step tridiagonal system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .models import BirthDeathChain, MajorityParams, VoterParams, initial_state
from .oddsratio import g_k_fraction


class PrecisionLossError(ArithmeticError):
    """Raised when a log-space partial product leaves the finite float range."""


def gambler_ruin(x: int, a: int, b: int, r: float) -> float:
    """P_x(T_a < T_b) for a +-1 walk with left/right step-probability ratio r.

    For r != 1 this is (r^x - r^b) / (r^a - r^b); r = 1 degenerates to the
    symmetric limit (b - x) / (b - a).  x = a and x = b return the boundary
    conventions 1 and 0.
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if not a <= x <= b:
        raise ValueError(f"start x={x} outside [{a}, {b}]")
    if r <= 0.0:
        raise ValueError(f"step ratio r={r} must be positive")
    if x == a:
        return 1.0
    if x == b:
        return 0.0
    if r == 1.0:
        return (b - x) / (b - a)
    if r < 1.0:
        # powers relative to a keep every exponent nonpositive
        return (r ** (x - a) - r ** (b - a)) / (1.0 - r ** (b - a))
    return (r ** (x - b) - 1.0) / (r ** (a - b) - 1.0)


def voter_exit_probability(p: VoterParams) -> float:
    """Probability of consensus on opinion 1 from floor(alpha*N) supporters.

    Closed form (1 - r^n0) / (1 - r^N) with r = q1/q0; the unbiased case
    q0 = q1 degenerates to n0/N.
    """
    n0, n = p.start_state, p.n_agents
    if p.q0 == p.q1:
        return n0 / n
    r = p.bias_ratio
    return 1.0 - gambler_ruin(n0, 0, n, r)


@dataclass(frozen=True)
class ExitProfile:
    """Exit probabilities E_N(n) and their increments D_N(n) = E(n+1) - E(n).

    The increments form a probability distribution on {0, .., N-1}; for the
    majority chain its mode sits at floor(beta*N).
    """

    exit_prob: np.ndarray
    increments: np.ndarray

    @property
    def mode(self) -> int:
        return int(np.argmax(self.increments))

    def at_fraction(self, alpha: float) -> float:
        n = self.exit_prob.size - 1
        return float(self.exit_prob[initial_state(alpha, n)])


def majority_exit_profile(p: MajorityParams) -> ExitProfile:
    """Exit profile of the majority chain via the product formula.

    E_N(n) is a ratio of sums of the partial products prod_{j<=t} r/g_K(j/N);
    the products are accumulated as log-sums with a single max subtraction,
    good through N ~ 1e5 where direct products would over/underflow.
    """
    n = p.n_agents
    r = p.bias_ratio
    j = np.arange(1, n, dtype=np.int64)
    log_ratio = math.log(r) - np.log(g_k_fraction(j, n, p.k))
    log_partial = np.concatenate(([0.0], np.cumsum(log_ratio)))
    if not np.isfinite(log_partial).all():
        raise PrecisionLossError("partial products left the finite float range")
    top = log_partial.max()
    weights = np.exp(log_partial - top)
    increments = weights / weights.sum()
    exit_prob = np.concatenate(([0.0], np.cumsum(increments)))
    exit_prob[-1] = 1.0
    exit_prob.setflags(write=False)
    increments.setflags(write=False)
    return ExitProfile(exit_prob=exit_prob, increments=increments)


@dataclass(frozen=True)
class AbsorptionTimes:
    """Expected time to absorption from every start state, exact."""

    mean_time: np.ndarray

    def at_fraction(self, alpha: float) -> float:
        n = self.mean_time.size - 1
        return float(self.mean_time[initial_state(alpha, n)])


def mean_absorption_time(chain: BirthDeathChain) -> AbsorptionTimes:
    """Solve the first-step system for the mean absorption time.

    Interior states satisfy (up+down) u(n) - up u(n+1) - down u(n-1) = 1 with
    u(0) = u(top) = 0; the tridiagonal system is solved by direct banded
    elimination.
    """
    if not (chain.absorbing_low and chain.absorbing_high):
        raise ValueError("mean absorption time needs both boundaries absorbing")
    top = chain.max_state
    up = chain.up_rate[1:top]
    down = chain.down_rate[1:top]
    m = top - 1  # interior states 1..top-1
    times = np.zeros(top + 1)
    if m > 0:
        ab = np.zeros((3, m))
        ab[0, 1:] = -up[:-1]  # superdiagonal
        ab[1, :] = up + down  # diagonal
        ab[2, :-1] = -down[1:]  # subdiagonal
        times[1:top] = solve_banded((1, 1), ab, np.ones(m))
    times.setflags(write=False)
    return AbsorptionTimes(mean_time=times)


def voter_time_bracket(p: VoterParams) -> tuple[float, float]:
    """Analytic lower/upper bounds on the biased voter mean consensus time.

    (1/(q0+q1)) log(N (alpha ^ (1-alpha)))  <=  t_N(alpha)  <=
    (2/(q0+q1)) ((1+r)/(1-r)) (log(N-1) + 1), valid for r = q1/q0 < 1.
    """
    if p.q0 <= p.q1:
        raise ValueError("bracket requires bias toward opinion 1 (q0 > q1)")
    n, alpha = p.n_agents, p.alpha
    r = p.bias_ratio
    lower = math.log(n * min(alpha, 1.0 - alpha)) / (p.q0 + p.q1)
    upper = 2.0 / (p.q0 + p.q1) * (1.0 + r) / (1.0 - r) * (math.log(n - 1.0) + 1.0)
    return lower, upper

"""Model parameter sets and their compilation into birth-death chains.

Three interaction models on a complete network of N agents, each tracked by
the count of opinion-1 holders, reduce to a continuous-time birth-death chain:

* voter: an updating agent copies one uniformly sampled agent,
* majority: an updating agent samples 2K agents and adopts the majority
  opinion of the group of 2K+1 including itself,
* stubborn: majority with K=1 where fixed fractions gamma0/gamma1 of agents
  never update; the chain tracks non-stubborn opinion-1 holders.

Agents holding opinion i update at unit-rate Poisson instants with
probability q_i, so one time unit is the mean interval of each agent's
personal clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np


def binomial_tail(k: int, num: int, den: int) -> Fraction:
    """Exact P[Bin(2k, num/den) >= k + 1] by term-wise rational summation."""
    if not 0 <= num <= den:
        raise ValueError(f"success probability {num}/{den} outside [0, 1]")
    n = 2 * k
    total = Fraction(0)
    for i in range(k + 1, n + 1):
        total += math.comb(n, i) * Fraction(num, den) ** i * Fraction(den - num, den) ** (n - i)
    return total


def initial_state(alpha: float, n: int) -> int:
    """floor(alpha * n) with a guard against float droop on decimal alphas."""
    x = alpha * n
    k = math.floor(x)
    if k + 1 - x < 1e-9:  # alpha*n meant to be the integer above
        k += 1
    return min(max(k, 0), n)


def _check_prob(name, value, *, closed_top=False):
    top_ok = value <= 1.0 if closed_top else value < 1.0
    if not (0.0 < value and top_ok):
        rng = "(0, 1]" if closed_top else "(0, 1)"
        raise ValueError(f"{name}={value} outside {rng}")


@dataclass(frozen=True)
class VoterParams:
    """Voter rule: N agents, update probabilities q0/q1, initial fraction alpha."""

    n_agents: int
    q0: float
    q1: float
    alpha: float

    model = "voter"

    def __post_init__(self):
        if self.n_agents < 2:
            raise ValueError(f"n_agents={self.n_agents} must be >= 2")
        # q_i = 1 means the agent always updates when its clock rings
        _check_prob("q0", self.q0, closed_top=True)
        _check_prob("q1", self.q1, closed_top=True)
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} outside [0, 1]")

    @property
    def biased_toward_one(self) -> bool:
        return self.q0 > self.q1

    @property
    def bias_ratio(self) -> float:
        """r = q1/q0, the embedded walk's left/right step-probability ratio."""
        return self.q1 / self.q0

    @property
    def start_state(self) -> int:
        return initial_state(self.alpha, self.n_agents)


@dataclass(frozen=True)
class MajorityParams:
    """2K-sample majority rule with biased agents."""

    n_agents: int
    q0: float
    q1: float
    k: int
    alpha: float

    model = "majority"

    def __post_init__(self):
        if self.n_agents < 2:
            raise ValueError(f"n_agents={self.n_agents} must be >= 2")
        if self.k < 1:
            raise ValueError(f"k={self.k} must be >= 1")
        _check_prob("q0", self.q0, closed_top=True)
        _check_prob("q1", self.q1, closed_top=True)
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} outside [0, 1]")

    @property
    def bias_ratio(self) -> float:
        return self.q1 / self.q0

    @property
    def start_state(self) -> int:
        return initial_state(self.alpha, self.n_agents)


@dataclass(frozen=True)
class StubbornParams:
    """K=1 majority rule with fixed fractions of never-updating agents.

    gamma0/gamma1 are the requested stubborn fractions; the realized counts
    are floor(gamma_i * N).  x0 is the initial fraction of opinion-1 holders
    among the non-stubborn agents.
    """

    n_agents: int
    gamma0: float
    gamma1: float
    x0: float
    k: int = 1

    model = "stubborn"

    def __post_init__(self):
        if self.n_agents < 2:
            raise ValueError(f"n_agents={self.n_agents} must be >= 2")
        if self.k != 1:
            raise ValueError("only k=1 is supported for the stubborn model")
        for name, g in (("gamma0", self.gamma0), ("gamma1", self.gamma1)):
            if not 0.0 <= g < 1.0:
                raise ValueError(f"{name}={g} outside [0, 1)")
        if self.gamma0 + self.gamma1 >= 1.0:
            raise ValueError(
                f"gamma0 + gamma1 = {self.gamma0 + self.gamma1} must be < 1"
            )
        if not 0.0 <= self.x0 <= 1.0:
            raise ValueError(f"x0={self.x0} outside [0, 1]")

    @property
    def n_stubborn0(self) -> int:
        return math.floor(self.gamma0 * self.n_agents + 1e-9)

    @property
    def n_stubborn1(self) -> int:
        return math.floor(self.gamma1 * self.n_agents + 1e-9)

    @property
    def n_free(self) -> int:
        """Number of non-stubborn agents M."""
        return self.n_agents - self.n_stubborn0 - self.n_stubborn1

    @property
    def start_state(self) -> int:
        return initial_state(self.x0, self.n_free)


ModelParams = Union[VoterParams, MajorityParams, StubbornParams]


@dataclass(frozen=True)
class BirthDeathChain:
    """State-indexed jump rates of the opinion-count Markov process.

    States are 0..n_states-1; up_rate[n] is the rate of n -> n+1 and
    down_rate[n] of n -> n-1.  Immutable after construction and safe to
    share across concurrent readers.
    """

    up_rate: np.ndarray
    down_rate: np.ndarray
    absorbing_low: bool
    absorbing_high: bool

    def __post_init__(self):
        up = np.ascontiguousarray(self.up_rate, dtype=np.float64)
        down = np.ascontiguousarray(self.down_rate, dtype=np.float64)
        if up.shape != down.shape or up.ndim != 1 or up.size < 2:
            raise ValueError("up_rate/down_rate must be equal-length 1-d vectors")
        if not (np.isfinite(up).all() and np.isfinite(down).all()):
            raise ValueError("rates must be finite")
        if (up < 0).any() or (down < 0).any():
            raise ValueError("rates must be nonnegative")
        if down[0] != 0.0 or up[-1] != 0.0:
            raise ValueError("rates leaving the state space must be zero")
        up.setflags(write=False)
        down.setflags(write=False)
        object.__setattr__(self, "up_rate", up)
        object.__setattr__(self, "down_rate", down)

    @property
    def n_states(self) -> int:
        return self.up_rate.size

    @property
    def max_state(self) -> int:
        return self.n_states - 1

    def total_rate(self, n: int) -> float:
        return float(self.up_rate[n] + self.down_rate[n])


def build_voter_chain(p: VoterParams) -> BirthDeathChain:
    """Voter-rule chain: up q0*k*(N-k)/N, down q1*k*(N-k)/N, 0 and N absorbing."""
    n = p.n_agents
    k = np.arange(n + 1, dtype=np.float64)
    shape = k * (n - k) / n
    return BirthDeathChain(
        up_rate=p.q0 * shape,
        down_rate=p.q1 * shape,
        absorbing_low=True,
        absorbing_high=True,
    )


def build_majority_chain(p: MajorityParams) -> BirthDeathChain:
    """Majority-rule chain from exact binomial majority tails.

    up[n] = (N-n) q0 P[Bin(2K, n/N) >= K+1],
    down[n] = n q1 P[Bin(2K, 1-n/N) >= K+1]; tails are summed exactly in
    rational arithmetic, so the only rounding is the final float conversion.
    """
    n_agents, k = p.n_agents, p.k
    up = np.zeros(n_agents + 1)
    down = np.zeros(n_agents + 1)
    for n in range(1, n_agents):
        up[n] = (n_agents - n) * p.q0 * float(binomial_tail(k, n, n_agents))
        down[n] = n * p.q1 * float(binomial_tail(k, n_agents - n, n_agents))
    return BirthDeathChain(
        up_rate=up, down_rate=down, absorbing_low=True, absorbing_high=True
    )


def build_stubborn_chain(p: StubbornParams) -> BirthDeathChain:
    """Stubborn-model chain over the M non-stubborn agents.

    State m counts non-stubborn opinion-1 holders.  An updater samples two
    agents with replacement from all N, so the flip probabilities are squared
    opinion fractions that include the stubborn counts.
    """
    s0, s1 = p.n_stubborn0, p.n_stubborn1
    if p.gamma0 > 0.0 and s0 == 0:
        raise ValueError(
            f"gamma0={p.gamma0} rounds to zero stubborn-0 agents at N={p.n_agents}"
        )
    if p.gamma1 > 0.0 and s1 == 0:
        raise ValueError(
            f"gamma1={p.gamma1} rounds to zero stubborn-1 agents at N={p.n_agents}"
        )
    m_free = p.n_free
    if m_free < 1:
        raise ValueError("no non-stubborn agents left after rounding")
    n = p.n_agents
    m = np.arange(m_free + 1, dtype=np.float64)
    up = (m_free - m) * ((m + s1) / n) ** 2
    down = m * ((m_free - m + s0) / n) ** 2
    return BirthDeathChain(
        up_rate=up,
        down_rate=down,
        absorbing_low=s1 == 0,
        absorbing_high=s0 == 0,
    )


def build_chain(p: ModelParams) -> BirthDeathChain:
    """Compile any parameter set into its birth-death chain."""
    if isinstance(p, VoterParams):
        return build_voter_chain(p)
    if isinstance(p, MajorityParams):
        return build_majority_chain(p)
    if isinstance(p, StubbornParams):
        return build_stubborn_chain(p)
    raise TypeError(f"unsupported parameter type {type(p).__name__}")

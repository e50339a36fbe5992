"""Numba event loops for birth-death chain simulation.

Each run carries its own 64-bit counter-based random stream (splitmix64:
Weyl increment plus finalizer mix), so batches are reproducible run-by-run
and independent of thread count.  Holding times are exponential in the total
rate; the jump direction is a Bernoulli draw on up/(up+down), which is
distributionally identical to the N individual Poisson clocks for the
counted statistic.
"""

import numpy as np
from numba import config as _numba_config
from numba import njit, prange

if _numba_config.THREADING_LAYER == "default":
    # avoid probing the (possibly stale) TBB runtime; forksafe covers our use
    _numba_config.THREADING_LAYER = "workqueue"

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

TERMINAL_LOW = 0
TERMINAL_HIGH = 1
TERMINAL_HORIZON = 2


@njit(cache=True, inline="always")
def _unit(state):
    """Advance one splitmix64 step; return (uniform in (0, 1), new state)."""
    state = state + _GOLD
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return (np.float64(z >> np.uint64(11)) + 0.5) * _INV53, state


@njit(cache=True, parallel=True)
def absorption_batch(up, down, start, horizon, seeds, out_state, out_time):
    """Run each seed to absorption (or horizon); record final state and time."""
    n_runs = seeds.shape[0]
    for i in prange(n_runs):
        s = seeds[i]
        n = start
        t = 0.0
        while True:
            total = up[n] + down[n]
            if total == 0.0:
                break
            u, s = _unit(s)
            dt = -np.log(u) / total
            if t + dt > horizon:
                t = horizon
                break
            t = t + dt
            v, s = _unit(s)
            if v * total < up[n]:
                n += 1
            else:
                n -= 1
        out_state[i] = n
        out_time[i] = t


@njit(cache=True)
def sample_path(up, down, start, horizon, seed):
    """Simulate one path; return (jump times, states after jump, terminal, t)."""
    cap = 4096
    times = np.empty(cap, np.float64)
    states = np.empty(cap, np.int32)
    count = 0
    s = seed
    n = start
    t = 0.0
    terminal = TERMINAL_HORIZON
    while True:
        total = up[n] + down[n]
        if total == 0.0:
            terminal = TERMINAL_LOW if n == 0 else TERMINAL_HIGH
            break
        u, s = _unit(s)
        dt = -np.log(u) / total
        if t + dt > horizon:
            t = horizon
            terminal = TERMINAL_HORIZON
            break
        t = t + dt
        v, s = _unit(s)
        if v * total < up[n]:
            n += 1
        else:
            n -= 1
        if count == cap:
            cap *= 2
            grown_t = np.empty(cap, np.float64)
            grown_t[:count] = times
            times = grown_t
            grown_s = np.empty(cap, np.int32)
            grown_s[:count] = states
            states = grown_s
        times[count] = t
        states[count] = n
        count += 1
    return times[:count].copy(), states[:count].copy(), terminal, t

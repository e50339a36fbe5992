"""Mean-field limits: drift functions, fixed-step integration, equilibria.

As N grows, the opinion-1 fraction converges weakly to a deterministic
trajectory x(t).  The three models give

    voter:    dx/dt = (q0 - q1) x (1 - x)
    majority: dx/dt = q0 x (1 - x) h_K(x) (g_K(x) - r)
    stubborn: dx/dt = (1-x) [(1-g0-g1) x + g1]^2 - x [(1-g0-g1)(1-x) + g0]^2

The stubborn drift is a cubic whose roots in [0, 1] are the candidate
equilibria; with two stable roots the finite system is metastable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import MajorityParams, ModelParams, StubbornParams, VoterParams
from .oddsratio import g_k, h_k


class StepSizeError(RuntimeError):
    """Integration left [0, 1] by more than the clamping tolerance."""


def voter_meanfield_rhs(x: float, q0: float, q1: float) -> float:
    return (q0 - q1) * x * (1.0 - x)


def majority_meanfield_rhs(x: float, q0: float, q1: float, k: int) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    r = q1 / q0
    return q0 * x * (1.0 - x) * h_k(x, k) * (g_k(x, k) - r)


def stubborn_meanfield_rhs(x: float, gamma0: float, gamma1: float) -> float:
    c = 1.0 - gamma0 - gamma1
    return (1.0 - x) * (c * x + gamma1) ** 2 - x * (c * (1.0 - x) + gamma0) ** 2


def meanfield_rhs(params: ModelParams):
    """Drift function of the mean-field ODE for the given model."""
    if isinstance(params, VoterParams):
        return lambda x: voter_meanfield_rhs(x, params.q0, params.q1)
    if isinstance(params, MajorityParams):
        return lambda x: majority_meanfield_rhs(x, params.q0, params.q1, params.k)
    if isinstance(params, StubbornParams):
        return lambda x: stubborn_meanfield_rhs(x, params.gamma0, params.gamma1)
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def voter_hit_time(alpha: float, eps: float, q0: float, q1: float) -> float:
    """Travel time of the voter mean field from alpha to eps.

    (1/(q0-q1)) (log(eps/(1-eps)) - log(alpha/(1-alpha))); negative when eps
    lies behind alpha.  At eps = 1 - 1/N this is the mean-field estimate of
    the consensus time.
    """
    if q0 <= q1:
        raise ValueError("hit time defined for bias toward opinion 1 (q0 > q1)")
    for name, v in (("alpha", alpha), ("eps", eps)):
        if not 0.0 < v < 1.0:
            raise ValueError(f"{name}={v} outside (0, 1)")
    logit = lambda u: math.log(u / (1.0 - u))
    return (logit(eps) - logit(alpha)) / (q0 - q1)


@dataclass(frozen=True)
class MeanFieldSolution:
    """Fixed-step trajectory of the mean-field ODE."""

    model: str
    t: np.ndarray
    x: np.ndarray
    dt: float
    max_excursion: float  # how far any RK4 step left [0, 1] before clamping

    def __post_init__(self):
        self.t.setflags(write=False)
        self.x.setflags(write=False)

    def at(self, times) -> np.ndarray:
        return np.interp(times, self.t, self.x)


def integrate(
    params: ModelParams, t_end: float, dt: float = 0.01, x0: float | None = None
) -> MeanFieldSolution:
    """Integrate the mean-field ODE with classical fixed-step RK4.

    The drift is smooth on [0, 1], so fixed steps keep trajectories
    bit-reproducible.  x0 defaults to the initial fraction carried by the
    parameter set.  Steps may poke at most 1e-9 outside [0, 1] before being
    clamped; beyond that the step size is rejected.
    """
    if dt > 0.01 or dt <= 0.0:
        raise ValueError(f"dt={dt} outside (0, 0.01]")
    if t_end <= 0.0:
        raise ValueError(f"t_end={t_end} must be positive")
    if x0 is None:
        x0 = params.x0 if isinstance(params, StubbornParams) else params.alpha
    if not 0.0 <= x0 <= 1.0:
        raise ValueError(f"x0={x0} outside [0, 1]")

    rhs = meanfield_rhs(params)
    f = lambda x: rhs(min(max(x, 0.0), 1.0))  # RK4 stages may poke outside

    n_full = int(t_end / dt)
    remainder = t_end - n_full * dt
    steps = [dt] * n_full + ([remainder] if remainder > 1e-12 else [])
    t = np.empty(len(steps) + 1)
    x = np.empty(len(steps) + 1)
    t[0], x[0] = 0.0, x0
    max_excursion = 0.0
    xi, ti = x0, 0.0
    for i, h in enumerate(steps, start=1):
        k1 = f(xi)
        k2 = f(xi + 0.5 * h * k1)
        k3 = f(xi + 0.5 * h * k2)
        k4 = f(xi + h * k3)
        xi = xi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        excursion = max(0.0 - xi, xi - 1.0, 0.0)
        max_excursion = max(max_excursion, excursion)
        if excursion > 1e-9:
            raise StepSizeError(
                f"trajectory left [0, 1] by {excursion:.3e} at t={ti + h:.6g}; "
                "reduce dt"
            )
        xi = min(max(xi, 0.0), 1.0)
        ti += h
        t[i], x[i] = ti, xi
    return MeanFieldSolution(
        model=params.model, t=t, x=x, dt=dt, max_excursion=max_excursion
    )


def _cubic_roots(a3: float, a2: float, a1: float, a0: float) -> list[float]:
    """Real roots of a cubic by the depressed-cubic trigonometric method."""
    b, c, d = a2 / a3, a1 / a3, a0 / a3
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc < 0.0:  # three distinct real roots: trigonometric branch
        rho = 2.0 * math.sqrt(-p / 3.0)
        theta = math.acos(min(max(3.0 * q / (p * rho), -1.0), 1.0))
        ys = [rho * math.cos((theta - 2.0 * math.pi * j) / 3.0) for j in range(3)]
    elif p == 0.0 and q == 0.0:
        ys = [0.0]
    else:  # one real root (double roots land here with disc == 0)
        s = math.sqrt(disc)
        u = math.copysign(abs(-q / 2.0 + s) ** (1.0 / 3.0), -q / 2.0 + s)
        v = math.copysign(abs(-q / 2.0 - s) ** (1.0 / 3.0), -q / 2.0 - s)
        ys = [u + v]
        if disc == 0.0 and u != 0.0:
            ys.append(-u)
    return [y - shift for y in ys]


@dataclass(frozen=True)
class EquilibriumReport:
    """Roots of the stubborn drift in [0, 1] with stability diagnostics.

    condition_flags are the three bistability conditions: positive
    discriminant of f', both critical points inside (0, 1), and
    f(z1) f(z2) <= 0.  classification is "bistable", "monostable", or
    "degenerate-bistable" when the last condition holds with equality
    (a tangent double root, which the conditions admit but which does not
    give two distinct attracting points).
    """

    gamma0: float
    gamma1: float
    roots: tuple[float, ...]
    stability: tuple[str, ...]
    discriminant_d: float
    z1: float
    z2: float
    condition_flags: tuple[bool, bool, bool]
    classification: str

    @property
    def bistable(self) -> bool:
        return self.classification == "bistable"

    @property
    def stable_roots(self) -> tuple[float, ...]:
        return tuple(r for r, s in zip(self.roots, self.stability) if s == "stable")


def stubborn_equilibria(gamma0: float, gamma1: float) -> EquilibriumReport:
    """Locate and classify the equilibria of the stubborn mean field."""
    for name, g in (("gamma0", gamma0), ("gamma1", gamma1)):
        if not 0.0 < g < 1.0:
            raise ValueError(f"{name}={g} outside (0, 1)")
    if gamma0 + gamma1 >= 1.0:
        raise ValueError(f"gamma0 + gamma1 = {gamma0 + gamma1} must be < 1")

    c = 1.0 - gamma0 - gamma1
    f = lambda x: stubborn_meanfield_rhs(x, gamma0, gamma1)
    # f(x) = a3 x^3 + a2 x^2 + a1 x + a0, leading coefficient -2 c^2
    a3 = -2.0 * c * c
    a2 = 3.0 * c * c + 2.0 * c * (gamma0 - gamma1)
    a1 = 2.0 * c * gamma1 - gamma1**2 - (1.0 - gamma1) ** 2
    a0 = gamma1**2
    fprime = lambda x: 3.0 * a3 * x * x + 2.0 * a2 * x + a1

    roots = []
    for x in _cubic_roots(a3, a2, a1, a0):
        for _ in range(2):  # Newton polish
            slope = fprime(x)
            if slope != 0.0:
                x -= f(x) / slope
        if -1e-9 <= x <= 1.0 + 1e-9:
            x = min(max(x, 0.0), 1.0)
            if all(abs(x - other) > 1e-7 for other in roots):
                roots.append(x)
    roots.sort()
    if not roots:
        raise RuntimeError("no equilibrium found in [0, 1]; solver defect")

    eps = 1e-6
    stability = []
    for x in roots:
        left = f(max(x - eps, 0.0)) if x > 0.0 else f(0.0)
        right = f(min(x + eps, 1.0)) if x < 1.0 else f(1.0)
        stability.append("stable" if left > 0.0 > right else "unstable")

    disc = (gamma0 - gamma1) ** 2 + 3.0 * (1.0 - 2.0 * gamma0 - 2.0 * gamma1)
    if disc > 0.0:
        sq = math.sqrt(disc)
        z1 = ((3.0 - gamma0 - 5.0 * gamma1) + sq) / (6.0 * c)
        z2 = ((3.0 - gamma0 - 5.0 * gamma1) - sq) / (6.0 * c)
    else:
        z1 = z2 = math.nan
    cond1 = disc > 0.0
    cond2 = cond1 and 0.0 < z1 < 1.0 and 0.0 < z2 < 1.0
    product = f(z1) * f(z2) if cond2 else math.nan
    cond3 = cond2 and product <= 0.0
    if cond1 and cond2 and cond3:
        classification = "degenerate-bistable" if product == 0.0 else "bistable"
    else:
        classification = "monostable"
    return EquilibriumReport(
        gamma0=gamma0,
        gamma1=gamma1,
        roots=tuple(roots),
        stability=tuple(stability),
        discriminant_d=disc,
        z1=z1,
        z2=z2,
        condition_flags=(cond1, cond2, cond3),
        classification=classification,
    )

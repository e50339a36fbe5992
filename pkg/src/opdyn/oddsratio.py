"""The odds-ratio function g_K of binomial majority tails and its threshold.

g_K(x) compares the per-agent rate of 0->1 flips against 1->0 flips when the
opinion-1 fraction is x:

    g_K(x) = [P(Bin(2K, x) >= K+1) / x] / [P(Bin(2K, 1-x) >= K+1) / (1-x)].

It is strictly increasing on (0, 1), so g_K(beta) = r has a unique root beta,
the initial-fraction threshold separating almost-sure consensus on opinion 1
from almost-sure consensus on opinion 0 in the large-N majority model.

Evaluation uses the rational form g_K(x) = phi(t) with t = x/(1-x) and

    phi(t) = t^K * A(t) / B(t),
    A(t) = sum_{j=0}^{K-1} C(2K, K+1+j) t^j,
    B(t) = sum_{j=0}^{K-1} C(2K, j) t^j,

whose coefficients are exact in double precision for K <= 16 and whose terms
are all positive, so there is no cancellation anywhere in the ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_K = 16  # C(2K, K) must stay exactly representable in float64


def _check_k(k: int):
    if not 1 <= k <= MAX_K:
        raise ValueError(f"k={k} outside [1, {MAX_K}]")


@lru_cache(maxsize=None)
def _ratio_coeffs(k: int):
    """(A, B) coefficient arrays, highest degree first for np.polyval."""
    a = np.array([math.comb(2 * k, k + 1 + j) for j in range(k)], dtype=np.float64)
    b = np.array([math.comb(2 * k, j) for j in range(k)], dtype=np.float64)
    return a[::-1].copy(), b[::-1].copy()


def _phi(t, k: int):
    a, b = _ratio_coeffs(k)
    return t**k * np.polyval(a, t) / np.polyval(b, t)


def _dlog_phi(t, k: int):
    """d(log phi)/dt, used by the Newton polish in threshold_beta."""
    a, b = _ratio_coeffs(k)
    da = np.polyder(a)
    db = np.polyder(b)
    return (
        k / t
        + np.polyval(da, t) / np.polyval(a, t)
        - np.polyval(db, t) / np.polyval(b, t)
    )


def g_k(x, k: int):
    """Odds-ratio g_K at x in (0, 1); accepts scalars or arrays."""
    _check_k(k)
    xa = np.asarray(x, dtype=np.float64)
    if (xa <= 0.0).any() or (xa >= 1.0).any():
        raise ValueError("x must lie strictly inside (0, 1)")
    out = _phi(xa / (1.0 - xa), k)
    return float(out) if np.isscalar(x) or xa.ndim == 0 else out


def g_k_fraction(num, den, k: int):
    """g_K at the rational point num/den (t = num/(den-num) in one rounding)."""
    _check_k(k)
    num = np.asarray(num, dtype=np.float64)
    if ((num <= 0) | (num >= den)).any():
        raise ValueError("num/den must lie strictly inside (0, 1)")
    return _phi(num / (den - num), k)


def h_k(x, k: int):
    """Positive polynomial factor of the majority mean-field drift.

    h_K(x) = sum_{i=K+1}^{2K} C(2K, i) (1-x)^(i-1) x^(2K-i); h_1(x) = 1 - x.
    """
    _check_k(k)
    xa = np.asarray(x, dtype=np.float64)
    if (xa <= 0.0).any() or (xa >= 1.0).any():
        raise ValueError("x must lie strictly inside (0, 1)")
    acc = np.zeros_like(xa)
    for i in range(k + 1, 2 * k + 1):
        acc += math.comb(2 * k, i) * (1.0 - xa) ** (i - 1) * xa ** (2 * k - i)
    return float(acc) if np.isscalar(x) or xa.ndim == 0 else acc


def monotonicity_certificate(k: int) -> dict[int, int]:
    """Exact integer coefficients M_j of the numerator of phi'(t).

    phi'(t) = (sum_j M_j t^j) / (t B(t))^2 with j running over K+1 .. 3K-1; all
    M_j > 0 certifies that phi, hence g_K, is strictly increasing.  Computed
    with arbitrary-precision integers so positivity is not a float claim.
    """
    _check_k(k)
    coeffs: dict[int, int] = {}
    for j in range(k + 1, 3 * k):
        m_j = 0
        for i in range(max(1, j + 1 - 2 * k), min(k, j - k) + 1):
            m_j += math.comb(2 * k, i - 1) * math.comb(2 * k, j - i + 1) * (j + 1 - 2 * i)
        coeffs[j] = m_j
    return coeffs


@dataclass(frozen=True)
class ThresholdResult:
    """Root beta of g_K(beta) = r with the achieved residual |g_K(beta) - r|."""

    beta: float
    residual: float
    iterations: int


def threshold_beta(r: float, k: int) -> ThresholdResult:
    """Solve g_K(beta) = r for beta in (0, 1).

    r must be in (0, 1] (the biased-toward-1 convention r = q1/q0 <= 1).
    Bisection brackets the root to width 1e-9, then a few Newton steps on
    log g_K polish it; monotonicity of g_K guarantees the bracket.
    """
    _check_k(k)
    if not 0.0 < r <= 1.0:
        raise ValueError(f"r={r} outside (0, 1]")
    target = math.log(r)
    lo, hi = 1e-12, 0.5  # g(0+) -> 0 and g(1/2) = 1 >= r
    iterations = 0
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if math.log(g_k(mid, k)) < target:
            lo = mid
        else:
            hi = mid
        iterations += 1
    beta = 0.5 * (lo + hi)
    for _ in range(5):
        t = beta / (1.0 - beta)
        err = math.log(_phi(t, k)) - target
        slope = _dlog_phi(t, k) / (1.0 - beta) ** 2
        step = err / slope
        beta = min(max(beta - step, 1e-15), 1.0 - 1e-15)
        iterations += 1
        if abs(step) < 1e-16:
            break
    residual = abs(g_k(beta, k) - r)
    if not residual <= 1e-12:
        raise RuntimeError(
            f"threshold solve failed to converge: residual {residual:.3e}"
        )
    return ThresholdResult(beta=float(beta), residual=float(residual), iterations=iterations)

"""Closed-form probability and sample-complexity formulas.

The Gaussian sample-complexity curve is evaluated through the closed forms
L(tau) = (1+tau^2) Phi(tau) + tau phi(tau) and
U(tau) = (1+tau^2) Phi(-tau) - tau phi(tau)
of the two truncated second moments; the tests validate these against
adaptive quadrature before anything else relies on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.stats import binom, norm


@dataclass
class TheoryParams:
    N: int
    k: int
    m: int
    mu: float = 0.5
    sigma: float = 0.5
    lambda_bound: float = 0.5
    eps: float = 0.05
    C: float = 1.0  # explicit stand-in for the unspecified "up to constant" factors

    def __post_init__(self):
        if not 0 <= self.k <= self.N:
            raise ValueError(f"k={self.k} must lie in [0, N={self.N}]")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0,1)")


def _tail_low(tau: float) -> float:
    """integral over u < tau of (u-tau)^2 phi(u) du."""
    return (1.0 + tau * tau) * norm.cdf(tau) + tau * norm.pdf(tau)


def _tail_high(tau: float) -> float:
    """integral over u > tau of (u-tau)^2 phi(u) du."""
    return (1.0 + tau * tau) * norm.cdf(-tau) - tau * norm.pdf(tau)


def _golden_min(f, a: float, b: float, tol: float = 1e-10) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def delta_bin(k: float, N: float) -> float:
    """Gaussian sample-complexity curve for box-constrained basis pursuit at
    sparsity k: inf over tau >= 0 of k*L(tau) + (N-k)*U(tau)."""
    if not 0 <= k <= N:
        raise ValueError(f"k={k} must lie in [0, N={N}]")
    if N == 0:
        return 0.0

    def objective(tau):
        return k * _tail_low(tau) + (N - k) * _tail_high(tau)

    # coarse bracket on a 0.1 grid over [0, 20], then golden-section
    grid = [i / 10.0 for i in range(201)]
    vals = [objective(t) for t in grid]
    i = min(range(len(grid)), key=vals.__getitem__)
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    tau_star = _golden_min(objective, lo, hi)
    return min(objective(tau_star), vals[i])


def face_survival_prob(i: int, j: int) -> float:
    """P_ij = 2^(1-j) * sum over l < i of binom(j-1, l); equals the lower tail
    of a Binomial(j-1, 1/2) at i-1, which is what is evaluated (exactly in
    log-space for large j).  By convention P_0j = 0 (empty sum)."""
    if i == 0:
        return 0.0
    if not 1 <= i <= j:
        raise ValueError(f"need 1 <= i <= j, got i={i}, j={j}")
    return float(min(1.0, binom.cdf(i - 1, j - 1, 0.5)))


def mibi_sample_bound(k: int, N: int, eps: float) -> float:
    """Sufficient Gaussian measurements for the mirrored algorithm:
    min(delta_bin(k), delta_bin(N-k)) + sqrt(8 log(4/eps) N)."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0,1)")
    return min(delta_bin(k, N), delta_bin(N - k, N)) + math.sqrt(8.0 * math.log(4.0 / eps) * N)


def biased_sample_bound(p: TheoryParams) -> float:
    """C * max(Lambda^2/mu^2, min(k, N-k) * Lambda^4/sigma^4) * log(N/eps)."""
    if p.mu <= 0:
        raise ValueError("the biased bound is vacuous for mu = 0")
    lam2 = p.lambda_bound ** 2
    first = lam2 / p.mu ** 2
    second = min(p.k, p.N - p.k) * lam2 ** 2 / p.sigma ** 4
    return p.C * max(first, second) * math.log(p.N / p.eps)


def cert_failure_prob(p: TheoryParams, variant: str = "combined") -> float:
    """Hoeffding failure-probability expressions for the explicit dual
    certificate; "combined" is the final union bound, the off/on-support
    variants are the two intermediate per-case bounds (with the certificate
    offset rho^2 mu^2 = sigma^4/64 already substituted)."""
    if p.k < 1 or p.m < 1:
        raise ValueError("need |J| >= 1 and m >= 1")
    m, k, N = p.m, p.k, p.N
    mu2, s4, lam = p.mu ** 2, p.sigma ** 4, p.lambda_bound
    lam2, lam4 = lam ** 2, lam ** 4
    if variant == "combined":
        val = N * (math.exp(-m * mu2 / (32.0 * lam2))
                   + math.exp(-m * s4 / (2048.0 * k * lam4))
                   + math.exp(-m * m * s4 / (2048.0 * k * lam4)))
    elif variant == "off_support":
        val = (N - k) * (math.exp(-m * mu2 / (32.0 * lam2))
                         + math.exp(-m * s4 / (2048.0 * k * lam4))
                         + math.exp(-m * m * s4 / (2048.0 * k * lam4)))
    elif variant == "on_support":
        val = k * (math.exp(-m * mu2 / (2.0 * lam2))
                   + math.exp(-m * s4 / (128.0 * k * lam4))
                   + math.exp(-m * m * s4 / (128.0 * k * lam4)))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return min(1.0, max(0.0, val))


def cert_norm_bound(m: int, k: int, rho: float, sigma: float, lambda_bound: float):
    """Both readings of the certificate-norm bound: the stated one with
    sigma^2 and the proof's conclusion with Lambda^2 in its place.
    Returned as bounds on ||nu||^2."""
    if k < 1:
        raise ValueError("need |J| >= 1")
    stated = m * (rho ** 2 + sigma ** 2 * (k + 1.0 / k))
    proof = m * (rho ** 2 + lambda_bound ** 2 * (k + 1.0 / k))
    return stated, proof


def noise_error_bound(p: TheoryParams) -> float:
    """Multiplier on the noise level in the least-squares error bound:
    sqrt(9 (16 sigma^2/mu^2 + min(k, N-k)) / (m sigma^2))."""
    if p.mu <= 0 or p.m < 1:
        raise ValueError("need mu > 0 and m >= 1")
    num = 9.0 * (16.0 * p.sigma ** 2 / p.mu ** 2 + min(p.k, p.N - p.k))
    return math.sqrt(num / (p.m * p.sigma ** 2))


def largerN2_success_prob(N: int, m: int, variant: str = "density") -> float:
    """Success probability lower bound for m > N/2: 1 - P_{N-m,N}, times
    (1 - 2^{-m/2}) for the Rademacher variant."""
    if not N / 2 < m <= N:
        raise ValueError(f"the bound requires N/2 < m <= N, got m={m}, N={N}")
    base = 1.0 - face_survival_prob(N - m, N)
    if variant == "density":
        return base
    if variant == "rademacher":
        return base * (1.0 - 2.0 ** (-m / 2.0))
    raise ValueError(f"unknown variant {variant!r}")

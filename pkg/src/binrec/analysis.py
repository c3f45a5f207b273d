"""LP-checkable geometric recovery conditions and explicit dual certificates.

The sign-pattern cones are scale-invariant, so strict inequalities and
nontriviality are encoded with unit margins / unit normalizations, which
turns every condition into a plain LP feasibility problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import DenseMatrix
from .optim import LpProblem, lp_feasible, solve_lp

NONPOS, NONNEG, ZERO, FREE = "nonpos", "nonneg", "zero", "free"


@dataclass
class ConeSpec:
    """Per-index sign constraints, plus an optional global sum(w) <= 0 row."""

    signs: list
    sum_nonpos: bool = False

    def __post_init__(self):
        bad = set(self.signs) - {NONPOS, NONNEG, ZERO, FREE}
        if bad:
            raise ValueError(f"unknown sign constraints: {sorted(bad)}")

    @property
    def N(self) -> int:
        return len(self.signs)

    @classmethod
    def sign_cone(cls, N: int, K, sum_nonpos: bool = False) -> "ConeSpec":
        """The cone of vectors nonpositive on K and nonnegative off K."""
        signs = [NONNEG] * N
        for i in K:
            if not 0 <= i < N:
                raise ValueError(f"index {i} outside [0, {N})")
            signs[i] = NONPOS
        return cls(signs, sum_nonpos=sum_nonpos)

    def intersect(self, other: "ConeSpec") -> "ConeSpec":
        """Componentwise intersection; conflicting sign pairs collapse to zero."""
        if self.N != other.N:
            raise ValueError("cone dimensions differ")
        merged = []
        for a, b in zip(self.signs, other.signs):
            pair = {a, b}
            if ZERO in pair or pair == {NONPOS, NONNEG}:
                merged.append(ZERO)
            elif a == FREE:
                merged.append(b)
            else:
                merged.append(a if b == FREE or a == b else ZERO)
        return ConeSpec(merged, sum_nonpos=self.sum_nonpos or other.sum_nonpos)


@dataclass
class CertificateResult:
    verdict: str  # holds | fails
    witness: np.ndarray | None = None
    margin: float = 0.0

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"


def _entries(A) -> np.ndarray:
    return A.entries if isinstance(A, DenseMatrix) else np.asarray(A, dtype=float)


def check_kernel_cone(A, cone: ConeSpec) -> CertificateResult:
    """Is ker(A) intersected with the cone trivial?

    Feasibility LP for a nonzero cone element: Aw = 0, the sign constraints,
    optionally sum(w) <= 0, and the normalization sum over sign-constrained
    coordinates of |w_i| equal to 1 (valid by scale invariance; on the cone
    that sum is a linear functional).  Verdict "fails" iff such a w exists.
    """
    A = _entries(A)
    m, N = A.shape
    if cone.N != N:
        raise ValueError(f"cone dimension {cone.N} != matrix columns {N}")
    lower = np.empty(N)
    upper = np.empty(N)
    norm_row = np.zeros(N)
    for i, s in enumerate(cone.signs):
        if s == NONPOS:
            lower[i], upper[i], norm_row[i] = -1.0, 0.0, -1.0
        elif s == NONNEG:
            lower[i], upper[i], norm_row[i] = 0.0, 1.0, 1.0
        elif s == ZERO:
            lower[i] = upper[i] = norm_row[i] = 0.0
        else:
            lower[i], upper[i] = -np.inf, np.inf
    if not norm_row.any():
        # no sign-constrained coordinate: nontrivial iff ker(A) itself is
        raise ValueError("cone with only free coordinates is not checkable here")
    A_eq = np.vstack([A, norm_row])
    b_eq = np.zeros(m + 1)
    b_eq[-1] = 1.0
    A_ineq = np.ones((1, N)) if cone.sum_nonpos else None
    b_ineq = np.zeros(1) if cone.sum_nonpos else None
    feasible, w = lp_feasible(LpProblem(c=np.zeros(N), A_eq=A_eq, b_eq=b_eq,
                                        A_ineq=A_ineq, b_ineq=b_ineq,
                                        lower=lower, upper=upper))
    if feasible:
        return CertificateResult("fails", witness=w, margin=float(np.linalg.norm(A @ w)))
    return CertificateResult("holds", witness=None, margin=0.0)


def check_hkplus_dual(A, K) -> CertificateResult:
    """Does some v satisfy (A^T v)_i < 0 on K and > 0 off K?

    Strictness is encoded as a unit margin, valid because the open cone is
    scale-invariant.  Equivalent to check_kernel_cone on the sign cone of K.
    """
    A = _entries(A)
    m, N = A.shape
    K = np.asarray(sorted(K), dtype=int)
    if K.size and (K[0] < 0 or K[-1] >= N):
        raise ValueError("support indices out of range")
    sign = np.ones(N)
    sign[K] = -1.0
    # rows: -sign_i * (A^T v)_i <= -1
    G = -(A * sign).T
    feasible, v = lp_feasible(LpProblem(c=np.zeros(m), A_ineq=G, b_ineq=-np.ones(N)))
    if not feasible:
        return CertificateResult("fails", witness=None, margin=0.0)
    margin = float(np.min(np.abs(A.T @ v)))
    return CertificateResult("holds", witness=v, margin=margin)


def build_dual_certificate(D, mu: float, sigma: float, J,
                           rho_override: float | None = None) -> np.ndarray:
    """The explicit candidate certificate rho*1 + D e - (1/m)<D e, 1> 1 with
    e the indicator of J and default rho = -sigma^2 / (4 mu)."""
    D = _entries(D)
    m, N = D.shape
    J = np.asarray(sorted(J), dtype=int)
    if J.size == 0:
        raise ValueError("certificate support J must be nonempty")
    if J[0] < 0 or J[-1] >= N:
        raise ValueError("support indices out of range")
    if rho_override is not None:
        rho = rho_override
    elif mu > 0:
        rho = -sigma ** 2 / (4.0 * mu)
    else:
        raise ValueError("rho is undefined for mu = 0; pass rho_override")
    eps0 = np.zeros(N)
    eps0[J] = 1.0
    De = D @ eps0
    return rho * np.ones(m) + De - (np.sum(De) / m) * np.ones(m)


def verify_certificate(A, nu: np.ndarray, K, t: float):
    """True iff (A^T nu)_i < -t on K and > t off K, i.e. A^T nu certifies
    recovery of the indicator of K.  Returns (flag, per-index margins), the
    margin at i being the slack sign_i * (A^T nu)_i - t with sign -1 on K."""
    if t < 0:
        raise ValueError("threshold t must be nonnegative")
    A = _entries(A)
    N = A.shape[1]
    K = np.asarray(sorted(K), dtype=int)
    sign = np.ones(N)
    sign[K] = -1.0
    margins = sign * (A.T @ np.asarray(nu, dtype=float)) - t
    return bool(np.all(margins > 0)), margins


def certificate_threshold(m: int, sigma: float, variant: str = "lemma") -> float:
    """Named thresholds for the certificate margin test."""
    table = {"lemma": 36.0, "proof_off_support": 32.0, "proof_on_support": 6.0}
    try:
        return m * sigma ** 2 / table[variant]
    except KeyError:
        raise ValueError(f"unknown threshold variant {variant!r}") from None


def restricted_sv_bounds(A, K, num_samples: int = 200, seed: int = 0):
    """Bracket the cone-restricted singular value min ||Aw|| over unit w with
    w <= 0 on K and >= 0 off K.

    Lower bound: t / ||nu|| for the minimum-l1-norm dual vector nu with unit
    margin (0 if none exists).  Upper bound: minimum of ||Aw|| over sampled
    unit directions of the cone, including the kernel witness when the cone
    meets the kernel nontrivially.
    """
    A = _entries(A)
    m, N = A.shape
    K = np.asarray(sorted(K), dtype=int)
    sign = np.ones(N)
    sign[K] = -1.0

    # lower bound: min sum(v+ + v-) s.t. sign_i (A^T v)_i >= 1
    G = -(A * sign).T
    c = np.ones(2 * m)
    G2 = np.hstack([G, -G])
    sol = solve_lp(LpProblem(c=c, A_ineq=G2, b_ineq=-np.ones(N),
                             lower=np.zeros(2 * m), upper=np.full(2 * m, np.inf)))
    if sol.status == "optimal":
        v = sol.x[:m] - sol.x[m:]
        lower = 1.0 / float(np.linalg.norm(v))
    else:
        lower = 0.0

    rng = np.random.default_rng(seed)
    directions = np.abs(rng.standard_normal((num_samples, N))) * sign
    kernel = check_kernel_cone(A, ConeSpec.sign_cone(N, K))
    if not kernel.holds:
        directions = np.vstack([directions, kernel.witness])
    norms = np.linalg.norm(directions, axis=1)
    directions = directions[norms > 0] / norms[norms > 0, None]
    upper = float(np.min(np.linalg.norm(directions @ A.T, axis=1)))
    return min(lower, upper), upper

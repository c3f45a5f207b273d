"""Seeded generation of random measurement matrices, binary signals, and noise.

Matrix ensembles: Gaussian, Rademacher, 0/1-Bernoulli (all row-normalized by
m^{-1/2}) and biased matrices of the form mu * ones + D with D centered,
entrywise bounded i.i.d.  The Rademacher and Bernoulli ensembles share one
sign stream per seed, and the biased ensemble with a Rademacher base draws
from the same stream, so the algebraic relations between them hold exactly:
sqrt(m) * bernoulli01 == (ones + sqrt(m) * rademacher) / 2, and
biased(mu) - biased(0) == mu * ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np
from numpy.random import Generator, Philox

MATRIX_KINDS = ("gaussian", "rademacher", "bernoulli01", "biased")
BASE_DISTS = ("rademacher_scaled", "uniform_bounded")


@dataclass(frozen=True)
class EnsembleConfig:
    """Parameters of one measurement-matrix draw.

    ``mu``, ``sigma`` and ``lambda_bound`` only matter for ``kind="biased"``:
    the centered part has entry variance ``sigma**2`` and entries almost
    surely in ``[-lambda_bound, lambda_bound]``.  ``normalized`` applies the
    m^{-1/2} row scaling to biased matrices as well; the three classical
    ensembles are always scaled.
    """

    kind: str
    m: int
    N: int
    mu: float = 0.0
    base_dist: str = "rademacher_scaled"
    sigma: float = 1.0
    lambda_bound: float = 1.0
    seed: int = 0
    normalized: bool = False

    def __post_init__(self):
        if self.kind not in MATRIX_KINDS:
            raise ValueError(f"unknown matrix kind {self.kind!r}")
        if self.base_dist not in BASE_DISTS:
            raise ValueError(f"unknown base distribution {self.base_dist!r}")
        if self.m < 1 or self.N < 1:
            raise ValueError(f"matrix dimensions must be positive, got {self.m}x{self.N}")
        if self.mu < 0:
            raise ValueError("bias mu must be nonnegative")
        if self.sigma <= 0:
            raise ValueError("entry standard deviation sigma must be positive")
        if self.lambda_bound <= 0:
            raise ValueError("almost-sure bound lambda_bound must be positive")
        if self.kind == "biased":
            # the centered part must actually fit inside [-Lambda, Lambda]
            reach = self.sigma if self.base_dist == "rademacher_scaled" else math.sqrt(3.0) * self.sigma
            if reach > self.lambda_bound * (1 + 1e-12):
                raise ValueError(
                    f"sigma={self.sigma} incompatible with lambda_bound={self.lambda_bound} "
                    f"for base {self.base_dist!r}"
                )


@dataclass
class DenseMatrix:
    """Row-major dense m x N matrix with its generation provenance."""

    entries: np.ndarray
    provenance: EnsembleConfig | str = "external"

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        if self.entries.ndim != 2:
            raise ValueError("matrix entries must be 2-dimensional")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("matrix entries must be finite")

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]


@dataclass
class BinarySignal:
    """A 0/1 vector of length N given by its support."""

    N: int
    support: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=int)
        if self.support.size:
            if np.any(np.diff(self.support) <= 0):
                raise ValueError("support indices must be strictly increasing")
            if self.support[0] < 0 or self.support[-1] >= self.N:
                raise ValueError("support indices out of range")

    @property
    def k(self) -> int:
        return int(self.support.size)

    def dense(self) -> np.ndarray:
        x = np.zeros(self.N)
        x[self.support] = 1.0
        return x

    def mirror(self) -> "BinarySignal":
        comp = np.setdiff1d(np.arange(self.N), self.support)
        return BinarySignal(self.N, comp)


def _rng(seed: int) -> Generator:
    # Philox is counter-based: the draw sequence is a pure function of the
    # key, independent of any global state.
    return Generator(Philox(key=seed))


def _sign_matrix(m: int, N: int, seed: int) -> np.ndarray:
    return 2.0 * _rng(seed).integers(0, 2, size=(m, N)).astype(float) - 1.0


def _centered_part(config: EnsembleConfig) -> np.ndarray:
    if config.base_dist == "rademacher_scaled":
        return config.sigma * _sign_matrix(config.m, config.N, config.seed)
    # uniform on [-sqrt(3) sigma, sqrt(3) sigma] has variance sigma^2
    half = math.sqrt(3.0) * config.sigma
    return _rng(config.seed).uniform(-half, half, size=(config.m, config.N))


def gen_matrix(config: EnsembleConfig) -> DenseMatrix:
    """Draw a measurement matrix; deterministic given config and seed."""
    m, N = config.m, config.N
    scale = 1.0 / math.sqrt(m)
    if config.kind == "gaussian":
        entries = scale * _rng(config.seed).standard_normal((m, N))
    elif config.kind == "rademacher":
        entries = scale * _sign_matrix(m, N, config.seed)
    elif config.kind == "bernoulli01":
        entries = scale * (1.0 + _sign_matrix(m, N, config.seed)) / 2.0
    else:
        entries = config.mu + _centered_part(config)
        if config.normalized:
            entries = scale * entries
    return DenseMatrix(entries, provenance=config)


def gen_sparse_binary(N: int, k: int, seed: int = 0) -> BinarySignal:
    """Uniformly random k-subset support; deterministic given seed."""
    if not 0 <= k <= N:
        raise ValueError(f"sparsity k={k} must lie in [0, N={N}]")
    support = np.sort(_rng(seed).permutation(N)[:k])
    return BinarySignal(N, support)


def gen_noise(m: int, eps: float, seed: int = 0) -> np.ndarray:
    """Noise vector with exactly the requested Euclidean norm."""
    if eps < 0:
        raise ValueError("noise level must be nonnegative")
    if eps == 0:
        return np.zeros(m)
    g = _rng(seed).standard_normal(m)
    return eps * g / np.linalg.norm(g)


# --- text formats ---------------------------------------------------------

def write_matrix(matrix: DenseMatrix, f: TextIO) -> None:
    f.write(f"{matrix.m} {matrix.N}\n")
    for row in matrix.entries:
        f.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_matrix(f: TextIO) -> DenseMatrix:
    header = f.readline().split()
    if len(header) != 2:
        raise ValueError("matrix header must be 'm N'")
    m, N = int(header[0]), int(header[1])
    entries = np.loadtxt(f, ndmin=2)
    if entries.shape != (m, N):
        raise ValueError(f"expected {m}x{N} matrix body, got {entries.shape}")
    return DenseMatrix(entries, provenance="external")


def write_signal(signal: BinarySignal, f: TextIO) -> None:
    f.write(f"{signal.N} {signal.k}\n")
    f.write(" ".join(str(i) for i in signal.support) + "\n")


def read_signal(f: TextIO) -> BinarySignal:
    header = f.readline().split()
    if len(header) != 2:
        raise ValueError("signal header must be 'N k'")
    N, k = int(header[0]), int(header[1])
    body = f.readline().split()
    if len(body) != k:
        raise ValueError(f"expected {k} support indices, got {len(body)}")
    return BinarySignal(N, np.array(sorted(int(i) for i in body), dtype=int))

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from binrec.ensembles import (BinarySignal, EnsembleConfig, gen_matrix,
                              gen_noise, gen_sparse_binary, read_matrix,
                              read_signal, write_matrix, write_signal)


def test_bernoulli_entries_take_two_values():
    A = gen_matrix(EnsembleConfig(kind="bernoulli01", m=2, N=2, seed=42))
    allowed = {0.0, 1.0 / math.sqrt(2.0)}
    assert all(float(v) in allowed for v in A.entries.flatten())


def test_biased_rademacher_entries_are_zero_or_two():
    cfg = EnsembleConfig(kind="biased", m=5, N=7, mu=1.0, sigma=1.0,
                         lambda_bound=1.0, base_dist="rademacher_scaled", seed=3)
    A = gen_matrix(cfg)
    assert set(A.entries.flatten()) <= {0.0, 2.0}


def test_rademacher_empirical_moments():
    A = gen_matrix(EnsembleConfig(kind="rademacher", m=10**4, N=10, seed=0))
    col_means = A.entries.mean(axis=0)
    assert np.all(np.abs(col_means) <= 4.0 / math.sqrt(10**4 * 10))
    second = float(np.mean(A.entries ** 2))
    assert abs(second - 1e-4) <= 0.05 * 1e-4


def test_determinism_bit_for_bit():
    cfg = EnsembleConfig(kind="gaussian", m=6, N=9, seed=123)
    assert np.array_equal(gen_matrix(cfg).entries, gen_matrix(cfg).entries)


def test_biased_centered_part_bounded():
    cfg = EnsembleConfig(kind="biased", m=30, N=30, mu=0.7, sigma=0.3,
                         lambda_bound=0.6, base_dist="uniform_bounded", seed=9)
    D = gen_matrix(cfg).entries - 0.7
    assert np.all(np.abs(D) <= 0.6 + 1e-12)


def test_bias_identity_exact():
    # mu = 1 with half-integer entries stays exact in binary floating point
    kw = dict(kind="biased", m=8, N=12, sigma=0.5, lambda_bound=0.5, seed=11)
    diff = gen_matrix(EnsembleConfig(mu=1.0, **kw)).entries \
        - gen_matrix(EnsembleConfig(mu=0.0, **kw)).entries
    assert np.array_equal(diff, np.ones((8, 12)))
    diff9 = gen_matrix(EnsembleConfig(mu=0.9, **kw)).entries \
        - gen_matrix(EnsembleConfig(mu=0.0, **kw)).entries
    assert np.allclose(diff9, 0.9, atol=1e-15)


def test_bernoulli_from_rademacher_sign_stream():
    m, N, seed = 7, 11, 5
    bern = gen_matrix(EnsembleConfig(kind="bernoulli01", m=m, N=N, seed=seed))
    rad = gen_matrix(EnsembleConfig(kind="rademacher", m=m, N=N, seed=seed))
    lhs = math.sqrt(m) * bern.entries
    rhs = (np.ones((m, N)) + math.sqrt(m) * rad.entries) / 2.0
    assert np.array_equal(lhs, rhs)


def test_normalized_flag_scales_biased():
    kw = dict(kind="biased", m=9, N=4, mu=1.0, sigma=1.0, lambda_bound=1.0, seed=2)
    raw = gen_matrix(EnsembleConfig(normalized=False, **kw)).entries
    scaled = gen_matrix(EnsembleConfig(normalized=True, **kw)).entries
    assert np.allclose(scaled, raw / 3.0)


def test_config_validation():
    with pytest.raises(ValueError):
        EnsembleConfig(kind="toeplitz", m=2, N=2)
    with pytest.raises(ValueError):
        EnsembleConfig(kind="gaussian", m=0, N=2)
    with pytest.raises(ValueError):
        EnsembleConfig(kind="biased", m=2, N=2, sigma=1.0, lambda_bound=0.5)
    with pytest.raises(ValueError):
        # uniform base reaches sqrt(3)*sigma, beyond this lambda_bound
        EnsembleConfig(kind="biased", m=2, N=2, sigma=1.0, lambda_bound=1.2,
                       base_dist="uniform_bounded")


def test_sparse_binary_edge_sparsities():
    assert gen_sparse_binary(5, 0, seed=1).support.size == 0
    full = gen_sparse_binary(5, 5, seed=1)
    assert np.array_equal(full.support, np.arange(5))
    with pytest.raises(ValueError):
        gen_sparse_binary(5, 6)


def test_sparse_binary_index_frequencies():
    counts = np.zeros(6)
    for seed in range(10000):
        counts[gen_sparse_binary(6, 3, seed=seed).support] += 1
    freq = counts / 10000
    assert np.all(np.abs(freq - 0.5) <= 0.03)


def test_signal_dense_and_mirror():
    s = BinarySignal(6, np.array([1, 4]))
    assert np.array_equal(s.dense(), [0, 1, 0, 0, 1, 0])
    assert np.array_equal(s.mirror().support, [0, 2, 3, 5])
    assert np.array_equal(s.dense() + s.mirror().dense(), np.ones(6))


def test_signal_validation():
    with pytest.raises(ValueError):
        BinarySignal(4, np.array([2, 1]))
    with pytest.raises(ValueError):
        BinarySignal(4, np.array([0, 4]))


def test_noise_norm_exact():
    assert np.array_equal(gen_noise(3, 0.0, seed=1), np.zeros(3))
    assert abs(gen_noise(1, 2.0, seed=4)[0]) == pytest.approx(2.0)
    n = gen_noise(50, 0.1, seed=7)
    assert np.linalg.norm(n) == pytest.approx(0.1, abs=1e-12)
    with pytest.raises(ValueError):
        gen_noise(3, -0.5)


def test_matrix_roundtrip():
    A = gen_matrix(EnsembleConfig(kind="gaussian", m=4, N=6, seed=77))
    buf = io.StringIO()
    write_matrix(A, buf)
    buf.seek(0)
    B = read_matrix(buf)
    assert np.array_equal(A.entries, B.entries)


def test_signal_roundtrip():
    s = gen_sparse_binary(20, 7, seed=5)
    buf = io.StringIO()
    write_signal(s, buf)
    buf.seek(0)
    t = read_signal(buf)
    assert t.N == 20 and np.array_equal(s.support, t.support)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["gaussian", "rademacher", "bernoulli01", "biased"]),
       st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**63 - 1))
def test_matrix_roundtrip_property(kind, m, N, seed):
    A = gen_matrix(EnsembleConfig(kind=kind, m=m, N=N, mu=0.5, sigma=0.5,
                                  lambda_bound=0.5, seed=seed))
    buf = io.StringIO()
    write_matrix(A, buf)
    buf.seek(0)
    assert np.array_equal(read_matrix(buf).entries, A.entries)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 30), st.integers(0, 2**63 - 1))
def test_sparse_binary_exact_size_property(k, seed):
    s = gen_sparse_binary(30, k, seed=seed)
    assert s.k == k
    assert float(np.sum(s.dense())) == k

"""FPR model and sizing helpers against independent arithmetic oracles."""

import math
import random

import pytest

from swarcuckoo.analytics import analytic_fpr, effective_fingerprint_bits, size_for
from swarcuckoo.placement import FilterConfig, Policy


def oracle_fpr(f: int, b: int, alpha: float) -> float:
    # naive power form, independent of the expm1/log1p evaluation path
    return 1.0 - (1.0 - 2.0 ** -f) ** (2.0 * b * alpha)


def test_pinned_values():
    assert abs(analytic_fpr(16, 16, 0.95) - 4.6377e-4) < 1e-7
    assert abs(analytic_fpr(16, 16, 0.95) - 4.637632e-4) < 1e-9
    assert abs(analytic_fpr(8, 4, 0.95) - 2.930759e-2) < 1e-7
    assert analytic_fpr(16, 16, 0.0) == 0.0
    assert analytic_fpr(8, 4, 0.0) == 0.0


def test_matches_naive_form():
    rng = random.Random(41)
    for _ in range(500):
        f = rng.choice([4, 8, 12, 16, 24, 32])
        b = rng.randint(1, 64)
        alpha = rng.random()
        got = analytic_fpr(f, b, alpha)
        want = oracle_fpr(f, b, alpha)
        assert math.isclose(got, want, rel_tol=1e-6, abs_tol=1e-15), (f, b, alpha)


def test_f32_not_flushed_to_zero():
    eps = analytic_fpr(32, 16, 0.95)
    assert 0 < eps < 1e-8
    # first-order expansion: 2 * b * alpha / 2^f
    assert math.isclose(eps, 2 * 16 * 0.95 / 2**32, rel_tol=1e-6)


def test_monotonicity_random_triples():
    rng = random.Random(43)
    for _ in range(1000):
        f = rng.randint(2, 31)
        b = rng.randint(1, 63)
        alpha = rng.uniform(0.01, 0.99)
        base = analytic_fpr(f, b, alpha)
        assert analytic_fpr(f + 1, b, alpha) < base
        assert analytic_fpr(f, b + 1, alpha) > base
        assert analytic_fpr(f, b, min(1.0, alpha * 1.1)) > base


def test_bounds():
    for f in (8, 16, 32):
        for b in (1, 4, 16):
            for alpha in (0.0, 0.5, 1.0):
                eps = analytic_fpr(f, b, alpha)
                assert 0.0 <= eps < 1.0


def test_domain_errors():
    with pytest.raises(ValueError):
        analytic_fpr(0, 16, 0.5)
    with pytest.raises(ValueError):
        analytic_fpr(16, 0, 0.5)
    with pytest.raises(ValueError):
        analytic_fpr(16, 16, -0.1)
    with pytest.raises(ValueError):
        analytic_fpr(16, 16, 1.5)


# ---- sizing ----

def test_size_for_pinned_examples():
    assert size_for(1000, 0.95, bucket_slots=16, policy=Policy.XOR) == 128
    assert size_for(1000, 0.95, bucket_slots=16, policy=Policy.OFFSET) == 66


def test_size_for_minimality():
    rng = random.Random(47)
    for _ in range(500):
        n = rng.randint(1, 1 << 20)
        b = rng.choice([4, 8, 16, 32])
        alpha = rng.uniform(0.05, 1.0)
        m_off = size_for(n, alpha, bucket_slots=b, policy=Policy.OFFSET)
        assert m_off * b * alpha >= n
        if m_off > 2:
            assert (m_off - 1) * b * alpha < n
        m_xor = size_for(n, alpha, bucket_slots=b, policy=Policy.XOR)
        assert m_xor * b * alpha >= n
        assert m_xor & (m_xor - 1) == 0
        if m_xor > 1:
            assert (m_xor // 2) * b * alpha < n


def test_size_for_policy_agreement_at_boundary():
    # capacity lands exactly on a power-of-two bucket count
    assert size_for(512, 0.5, bucket_slots=16, policy=Policy.XOR) == 64
    assert size_for(512, 0.5, bucket_slots=16, policy=Policy.OFFSET) == 64


def test_size_for_domain():
    with pytest.raises(ValueError):
        size_for(0, 0.95)
    with pytest.raises(ValueError):
        size_for(10, 0.0)
    with pytest.raises(ValueError):
        size_for(10, 1.5)


# ---- effective bits ----

def test_effective_bits():
    xor = FilterConfig(bucket_count=64)
    off = FilterConfig(bucket_count=66, policy=Policy.OFFSET)
    assert effective_fingerprint_bits(xor) == 16
    assert effective_fingerprint_bits(off) == 15


def test_offset_fpr_ratio_near_two():
    # one fewer payload bit roughly doubles the model FPR in the small-eps regime
    ratio = analytic_fpr(15, 16, 0.95) / analytic_fpr(16, 16, 0.95)
    assert 1.9 < ratio < 2.1

import io
import math

import numpy as np
import pytest

from cmlab.arith import euler_phi, mobius, rough_flags, sieve_primes, weighted_prime_fn
from cmlab.errors import ContractError, DomainError
from cmlab.models import (
    LambdaQParams,
    SieveSystem,
    VMertens,
    beta_sieve_weights,
    lambda_q,
    lambda_q_direct,
    lambda_q_short_sum,
    lambda_q_window,
    mertens_product,
    model_t_nu,
    model_t_nu_plus,
    read_sieve,
    sieve_short_sum,
    untruncated_level,
    write_sieve,
)


class TestLambdaQ:
    def test_q1_is_one(self):
        assert all(lambda_q(n, 1) == 1.0 for n in range(0, 50))

    def test_q2_is_parity(self):
        # 1 - e(n/2): 0 at even n, 2 at odd n
        for n in range(30):
            assert lambda_q(n, 2) == pytest.approx(0.0 if n % 2 == 0 else 2.0)

    def test_fast_form_equals_direct_sum(self):
        assert lambda_q(210, 30) == pytest.approx(lambda_q_direct(210, 30), abs=1e-8)
        for n in (0, 1, 17, 100, 841):
            for big_q in (3, 12, 25):
                assert lambda_q(n, big_q) == pytest.approx(lambda_q_direct(n, big_q), abs=1e-8)

    def test_window_matches_scalar(self):
        window = lambda_q_window(100, 200, 15)
        for i, n in enumerate(range(100, 200)):
            assert window[i] == pytest.approx(lambda_q(n, 15), abs=1e-12)

    def test_progression_averages_follow_primes(self):
        # mean of Lambda_Q on n = a (mod q), n <= N approximates the mean of the
        # weighted primes on the same progression (within 10% for q <= Q = 20)
        n_max = 100_000
        big_q = 20
        model = lambda_q_window(1, n_max + 1, big_q)
        primes = weighted_prime_fn(n_max).embed(1, n_max + 1)
        for q in range(1, big_q + 1):
            for a in range(q):
                if math.gcd(a, q) != 1:
                    continue
                idx = np.arange(a if a else q, n_max + 1, q) - 1
                mean_model = model[idx].mean()
                mean_primes = primes[idx].mean()
                assert abs(mean_model - mean_primes) <= 0.10 * mean_primes


class TestLambdaQShortSum:
    def test_trivial_twist_exact(self):
        actual, predicted, budget = lambda_q_short_sum(5000, 1000.0, 1, r=0, q_twist=1)
        assert actual == pytest.approx(1000.0)
        assert predicted == pytest.approx(1000.0)
        assert budget == 1.0

    def test_q2_main_term(self):
        actual, predicted, budget = lambda_q_short_sum(100_000, 1000.0, 10, r=1, q_twist=2)
        assert predicted == pytest.approx(mobius(2) * 1000.0 / euler_phi(2))
        assert abs(actual - predicted) <= 10**3  # Q^3

    def test_large_twist_denominator(self):
        actual, _, budget = lambda_q_short_sum(100_000, 1000.0, 10, r=1, q_twist=97)
        assert budget == 97 * 10 + 1000
        assert abs(actual) <= 2 * budget

    def test_direct_window_oracle(self):
        # windowed sum recomputed from scalar lambda_q values
        t, h, big_q, r, q = 2000, 50.0, 8, 3, 5
        actual, _, _ = lambda_q_short_sum(t, h, big_q, r=r, q_twist=q)
        direct = sum(
            lambda_q(n, big_q) * np.exp(2j * np.pi * r * n / q) for n in range(t - 50 + 1, t + 1)
        )
        assert actual == pytest.approx(direct, abs=1e-9)

    def test_preconditions(self):
        with pytest.raises(DomainError):
            lambda_q_short_sum(100, 200.0, 5)  # t <= H'
        with pytest.raises(DomainError):
            lambda_q_short_sum(1000, 10.0, 5, r=2, q_twist=4)  # gcd(r, q') > 1


class TestBetaSieve:
    def test_untruncated_is_exact_rough_indicator(self):
        for z in (2, 3, 5, 7):
            level = untruncated_level(z, beta=10)
            sieve = beta_sieve_weights(float(level), float(z), beta=10)
            theta = sieve.theta_window(1, 100_001)
            rough = rough_flags(1, 100_001, z).astype(np.int64)
            assert np.array_equal(theta, rough)

    def test_z2_weights(self):
        sieve = beta_sieve_weights(2048.0, 2.0, beta=10)
        assert sieve.weights == {1: 1, 2: -1}
        theta = sieve.theta_window(1, 1001)
        assert np.array_equal(theta, np.arange(1, 1001) % 2)

    def test_beta10_at_desk_level_degenerates(self):
        # at z = 10, D = 10^4 the level condition p * p^10 <= D bars every
        # prime above 2, so the system collapses to the parity sieve
        sieve = beta_sieve_weights(10_000.0, 10.0, beta=10)
        assert sieve.weights == {1: 1, 2: -1}

    def test_nonnegative_and_prime_value(self):
        for sieve in (
            beta_sieve_weights(10_000.0, 10.0, beta=3),
            beta_sieve_weights(10_000.0, 12.0, beta=2),
            beta_sieve_weights(3_000.0, 30.0, beta=1),
            beta_sieve_weights(10_000.0, 10.0, beta=10),
        ):
            theta = sieve.theta_window(1, 1_000_001)
            assert int(theta.min()) >= 0
            for p in sieve_primes(10_000).tolist():
                if p > sieve.sift:
                    assert sieve.theta(p) == 1

    def test_weight_invariants(self):
        sieve = beta_sieve_weights(3_000.0, 30.0, beta=1)
        assert sieve.weights[1] == 1
        assert all(abs(v) <= 1 for v in sieve.weights.values())
        assert all(d <= sieve.level for d in sieve.weights)

    def test_odd_position_rule_is_required_for_nonnegativity(self):
        # all-positions admission at beta=1, z=10, D=100 would reject 35 while
        # keeping 5 and 7, giving theta(35) = -1; the odd-position rule admits
        # 35 and stays nonnegative
        sieve = beta_sieve_weights(100.0, 10.0, beta=1)
        assert 35 in sieve.weights
        assert sieve.theta(35) == 0

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            beta_sieve_weights(1.0, 2.0)
        with pytest.raises(DomainError):
            beta_sieve_weights(100.0, 1.5)

    def test_serialization_round_trip(self):
        sieve = beta_sieve_weights(3_000.0, 30.0, beta=1)
        buf = io.StringIO()
        write_sieve(sieve, buf)
        buf.seek(0)
        back = read_sieve(buf)
        assert back.weights == sieve.weights
        assert (back.beta, back.level, back.sift) == (sieve.beta, sieve.level, sieve.sift)


class TestMertens:
    def test_value_and_monotonicity(self):
        assert mertens_product(1) == 1.0
        assert mertens_product(10) == pytest.approx(8 / 35)
        vs = [mertens_product(z) for z in (2, 3, 5, 7, 11, 100)]
        assert all(0 < v <= 0.5 for v in vs)
        assert vs == sorted(vs, reverse=True)
        assert VMertens.compute(10.0).value == mertens_product(10)


class TestModels:
    def test_zero_scale(self):
        params = LambdaQParams(big_q=5, window=(100, 200), c_nu=0.0)
        assert not model_t_nu(params).values.any()

    def test_q1_constant(self):
        params = LambdaQParams(big_q=1, window=(10, 30), c_nu=0.7)
        t = model_t_nu(params)
        assert np.allclose(t.values, 0.7)
        assert t.support_start == 11
        assert t.support_stop == 31

    def test_mean_agreement_of_both_models(self):
        # window (1e4, 2e4], Q = 10: the sieve model mean tracks the major-arc
        # model mean within 5% once the sieve is in its exact regime
        y = 10_000
        params = LambdaQParams(big_q=10, window=(y, 2 * y), c_nu=1.0)
        t_nu = model_t_nu(params)
        sieve = beta_sieve_weights(float(untruncated_level(10, 10)), 10.0, beta=10)
        t_plus = model_t_nu_plus(params, sieve)
        m1 = float(t_nu.values.mean())
        m2 = float(t_plus.values.mean())
        assert abs(m1 - m2) <= 0.05 * abs(m1)

    def test_t_plus_nonnegative_enforced(self):
        params = LambdaQParams(big_q=3, window=(100, 200), c_nu=1.0)
        broken = SieveSystem(beta=1, level=10.0, sift=3.0, weights={1: 1, 2: -1, 3: -1, 6: -1})
        with pytest.raises(ContractError):
            model_t_nu_plus(params, broken)


class TestSieveShortSum:
    def test_untruncated_rough_count(self):
        # q = 1: V(z)^{-1} sum theta_n approximates the window length because
        # theta is the exact rough indicator there
        sieve = beta_sieve_weights(float(untruncated_level(10, 10)), 10.0, beta=10)
        t, h = 50_000, 7_000.0
        actual, predicted, _ = sieve_short_sum(t, h, sieve, r=0, q_twist=1)
        rough_count = int(rough_flags(t - 7000 + 1, t + 1, 10).sum())
        assert actual.real == pytest.approx(rough_count / mertens_product(10), rel=1e-12)
        assert predicted == pytest.approx(h)
        assert abs(actual - predicted) / h < 0.02

    def test_small_modulus_branch(self):
        sieve = beta_sieve_weights(10_000.0, 10.0, beta=3)
        actual, predicted, budget = sieve_short_sum(100_000, 5_000.0, sieve, r=1, q_twist=2)
        assert predicted == pytest.approx(-5_000.0)
        assert abs(actual - predicted) <= 4.0 * budget

    def test_large_modulus_branch(self):
        sieve = beta_sieve_weights(10_000.0, 10.0, beta=3)
        q = 11  # smallest prime beyond the sifting range
        actual, predicted, budget = sieve_short_sum(100_000, 5_000.0, sieve, r=1, q_twist=q)
        assert predicted == 0
        assert budget == pytest.approx((5_000.0 / q + 10_000.0 + q) * math.log(q * 5_000.0))
        assert abs(actual) <= 4.0 * budget

    def test_preconditions(self):
        sieve = beta_sieve_weights(100.0, 5.0, beta=2)
        with pytest.raises(DomainError):
            sieve_short_sum(10, 20.0, sieve)
        with pytest.raises(DomainError):
            sieve_short_sum(1000, 10.0, sieve, r=3, q_twist=6)

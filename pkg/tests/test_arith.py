import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmlab.arith import (
    FactoredInteger,
    euler_phi,
    factorize,
    is_rough,
    mobius,
    prime_flags,
    rough_flags,
    sieve_primes,
    weighted_prime_fn,
)
from cmlab.errors import DomainError


def trial_division_primes(limit):
    out = []
    for n in range(2, limit + 1):
        if all(n % d for d in range(2, int(math.isqrt(n)) + 1)):
            out.append(n)
    return out


def odd_only_sieve(limit):
    """Independent second sieve (odd-wheel, non-segmented)."""
    if limit < 2:
        return []
    flags = np.ones((limit - 1) // 2 + 1, dtype=bool)  # index i -> 2i+1
    flags[0] = False
    for i in range(1, (int(math.isqrt(limit)) - 1) // 2 + 1):
        if flags[i]:
            p = 2 * i + 1
            first = (p * p - 1) // 2
            flags[first::p] = False
    return [2] + (2 * np.flatnonzero(flags) + 1).tolist()


class TestSievePrimes:
    def test_first_primes(self):
        assert sieve_primes(10).tolist() == [2, 3, 5, 7]

    def test_boundary(self):
        assert sieve_primes(2).tolist() == [2]
        assert sieve_primes(1).tolist() == []

    def test_against_trial_division(self):
        assert sieve_primes(10_000).tolist() == trial_division_primes(10_000)

    def test_against_second_sieve_at_1e6(self):
        primes = sieve_primes(1_000_000)
        assert len(primes) == 78_498
        assert primes.tolist() == odd_only_sieve(1_000_000)


class TestMultiplicativeFunctions:
    def test_empty_product(self):
        assert mobius(1) == 1
        assert euler_phi(1) == 1

    def test_mobius_square_factor(self):
        assert factorize(12).factors == ((2, 2), (3, 1))  # 4 | 12
        assert mobius(12) == 0

    def test_mobius_30(self):
        assert mobius(30) == -1

    def test_phi_10_brute_force(self):
        brute = sum(1 for k in range(1, 11) if math.gcd(k, 10) == 1)
        assert euler_phi(10) == brute == 4

    def test_zero_is_domain_error(self):
        with pytest.raises(DomainError):
            mobius(0)
        with pytest.raises(DomainError):
            euler_phi(0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 1000), st.integers(1, 1000))
    def test_multiplicativity(self, m, n):
        if math.gcd(m, n) != 1:
            return
        assert euler_phi(m * n) == euler_phi(m) * euler_phi(n)
        assert mobius(m * n) == mobius(m) * mobius(n)

    def test_mobius_divisor_sum_identity(self):
        # sum_{d|n} mu(d) = [n == 1], accumulated by strided sieve
        n_max = 10_000
        acc = np.zeros(n_max + 1, dtype=np.int64)
        for d in range(1, n_max + 1):
            acc[d::d] += mobius(d)
        assert acc[1] == 1
        assert not acc[2:].any()

    def test_factored_integer_invariants(self):
        fi = factorize(360)
        assert fi.n == 360
        assert fi.factors == ((2, 3), (3, 2), (5, 1))
        assert fi.divisor_count == 24
        assert fi.divisors()[:5] == [1, 2, 3, 4, 5]
        with pytest.raises(DomainError):
            FactoredInteger(10, ((2, 1),))


class TestRoughness:
    def test_one_is_always_rough(self):
        assert is_rough(1, 100)

    def test_35(self):
        assert factorize(35).factors == ((5, 1), (7, 1))
        assert is_rough(35, 4)
        assert not is_rough(35, 5)

    def test_everything_is_1_rough(self):
        assert all(is_rough(n, 1) for n in range(1, 500))

    def test_prime_roughness_is_comparison(self):
        for p in sieve_primes(200).tolist():
            assert is_rough(p, p - 1)
            assert not is_rough(p, p)

    def test_rough_flags_match_scalar(self):
        flags = rough_flags(1, 2000, 7)
        for n in range(1, 2000):
            assert flags[n - 1] == is_rough(n, 7)


class TestWeightedPrimeFn:
    def test_window_of_ten(self):
        f = weighted_prime_fn(10)
        nonzero = {n: f(n) for n in range(2, 11) if f(n) != 0}
        assert set(nonzero) == {2, 3, 5, 7}
        for p, v in nonzero.items():
            assert v == pytest.approx(math.log(p))

    def test_single_point(self):
        f = weighted_prime_fn(2)
        assert len(f) == 1
        assert f(2) == pytest.approx(math.log(2))

    def test_pnt_mass(self):
        # direct summation oracle: sum of log p over primes <= 1e4
        f = weighted_prime_fn(10_000)
        direct = sum(math.log(p) for p in trial_division_primes(10_000))
        assert float(np.sum(f.values)) == pytest.approx(direct, rel=1e-12)
        assert abs(float(np.sum(f.values)) - 10_000) / 10_000 < 0.03

    def test_flags_consistency(self, flags_1e6):
        assert bool(flags_1e6[999_983])  # largest prime below 1e6
        assert not flags_1e6[999_999]
        assert int(flags_1e6.sum()) == 78_498

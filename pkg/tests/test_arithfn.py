import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmlab.arith import weighted_prime_fn
from cmlab.arithfn import (
    ArithFn,
    convolve,
    fourier_eval,
    l1_norm,
    l2_norm_sq,
    parseval_check,
    power_spectrum,
    read_arithfn,
    short_interval_sums,
    subtract,
    write_arithfn,
)
from cmlab.errors import CapacityError, DomainError

small_values = st.lists(
    st.integers(-9, 9) | st.floats(-4, 4, allow_nan=False, width=32), min_size=1, max_size=64
)


def fn(start, values):
    return ArithFn(start, np.asarray(values))


class TestConvolve:
    def test_point_masses(self):
        out = convolve(ArithFn.point_mass(1), ArithFn.point_mass(1))
        assert out.support_start == 2
        assert out.values.tolist() == [1]

    def test_triangle(self):
        box = ArithFn.ones(0, 3)
        out = convolve(box, box)
        assert out.support_start == 0
        assert out.values.tolist() == [1, 2, 3, 2, 1]

    def test_prime_pairs_at_100(self):
        lam = weighted_prime_fn(100)
        conv = convolve(lam, lam)
        direct = 0.0
        primes = [n for n in range(2, 101) if lam(n) != 0]
        for p in primes:
            for q in primes:
                if p + q == 100:
                    direct += math.log(p) * math.log(q)
        assert conv(100) == pytest.approx(direct, rel=1e-12)

    def test_methods_agree_on_random_instances(self, rng):
        for _ in range(50):
            f = fn(rng.integers(0, 50), rng.normal(size=rng.integers(1, 128)))
            g = fn(rng.integers(0, 50), rng.normal(size=rng.integers(1, 128)))
            d = convolve(f, g, method="direct")
            t = convolve(f, g, method="fft")
            scale = np.max(np.abs(d.values))
            assert np.max(np.abs(d.values - t.values)) <= 1e-6 * max(scale, 1e-12)

    def test_fft_int_rounding_is_exact(self, rng):
        f = fn(3, rng.integers(-50, 50, size=200))
        g = fn(7, rng.integers(-50, 50, size=333))
        t = convolve(f, g, method="fft")
        d = convolve(f, g, method="direct")
        assert t.kind == "int"
        assert np.array_equal(t.values, d.values)

    def test_empty_is_domain_error(self):
        with pytest.raises(DomainError):
            convolve(ArithFn.zero(), ArithFn.point_mass(1))

    def test_capacity_guard(self):
        big = ArithFn((1 << 40) - 2, np.ones(2))
        with pytest.raises(CapacityError):
            convolve(big, big)

    @settings(max_examples=60, deadline=None)
    @given(small_values, small_values)
    def test_commutative(self, a, b):
        f, g = fn(0, a), fn(0, b)
        x = convolve(f, g)
        y = convolve(g, f)
        assert np.allclose(x.values.astype(float), y.values.astype(float), rtol=0, atol=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(small_values, small_values, small_values)
    def test_bilinear(self, a, b, c):
        f, g, h = fn(0, a), fn(1, b), fn(1, c)
        n = max(len(b), len(c))
        gh = ArithFn(1, np.pad(np.asarray(b, dtype=float), (0, n - len(b)))
                     + np.pad(np.asarray(c, dtype=float), (0, n - len(c))))
        lhs = convolve(f, gh)
        r1 = convolve(f, g)
        r2 = convolve(f, h)
        start, stop = min(r1.support_start, r2.support_start), max(r1.support_stop, r2.support_stop)
        rhs = r1.embed(start, stop) + r2.embed(start, stop)
        assert np.allclose(lhs.embed(start, stop), rhs, rtol=0, atol=1e-9)


class TestFourier:
    def test_delta_is_unimodular(self):
        f = ArithFn.point_mass(0)
        for alpha in (0.0, 0.123, 0.75):
            assert fourier_eval(f, alpha) == pytest.approx(1.0)

    def test_alpha_zero_is_plain_sum(self, rng):
        f = fn(5, rng.normal(size=40))
        assert fourier_eval(f, 0.0) == pytest.approx(complex(np.sum(f.values)))

    def test_geometric_closed_form(self):
        n = 229
        f = ArithFn.ones(1, n)
        for r, q in [(1, 7), (3, 11), (5, 13)]:
            alpha = r / q
            e = np.exp(2j * np.pi * alpha)
            expected = e * (e**n - 1) / (e - 1)
            got = fourier_eval(f, alpha)
            assert abs(got - expected) <= 1e-9 * n

    def test_bounded_by_l1(self, rng):
        for _ in range(20):
            f = fn(0, rng.normal(size=100))
            alpha = rng.uniform()
            assert abs(fourier_eval(f, alpha)) <= l1_norm(f) * (1 + 1e-12)

    @settings(max_examples=40, deadline=None)
    @given(small_values, small_values, st.floats(0, 1, exclude_max=True))
    def test_multiplicative_under_convolution(self, a, b, alpha):
        f, g = fn(2, a), fn(3, b)
        conv = convolve(f, g)
        lhs = fourier_eval(conv, alpha)
        rhs = fourier_eval(f, alpha) * fourier_eval(g, alpha)
        scale = max(abs(rhs), 1.0)
        assert abs(lhs - rhs) <= 1e-8 * scale

    def test_parseval_on_grid(self, rng):
        for _ in range(10):
            f = fn(11, rng.normal(size=int(rng.integers(4, 200))))
            mean_spec, l2 = parseval_check(f, oversample=2)
            assert mean_spec == pytest.approx(l2, rel=1e-6)

    def test_power_spectrum_matches_pointwise(self, rng):
        f = fn(4, rng.normal(size=37))
        size, spec = power_spectrum(f, oversample=8)
        for k in (0, 1, size // 3, size - 2):
            assert spec[k] == pytest.approx(abs(fourier_eval(f, k / size)) ** 2, abs=1e-8)


class TestNorms:
    def test_scaled_point_mass(self):
        f = ArithFn.point_mass(5, 3.0)
        assert l2_norm_sq(f) == 9.0
        assert l1_norm(f) == 3.0

    def test_weighted_primes_direct_loop(self):
        f = weighted_prime_fn(1000)
        direct = sum(f(n) ** 2 for n in range(2, 1001))
        assert l2_norm_sq(f) == pytest.approx(direct, rel=1e-12)

    def test_empty(self):
        assert l2_norm_sq(ArithFn.zero()) == 0.0
        assert l1_norm(ArithFn.zero()) == 0.0


class TestShortIntervalSums:
    def test_constant_interior_windows(self):
        f = ArithFn.ones(1, 100)
        sums = dict(short_interval_sums(f, 10.0))
        # interior windows (t-10, t] hold exactly 10 ones
        for t in range(10, 101):
            assert sums[t] == pytest.approx(10.0)

    def test_point_mass_window_membership(self):
        values = np.zeros(100)
        values[49] = 1.0  # n = 50 with support start 1
        f = ArithFn(1, values)
        sums = dict(short_interval_sums(f, 10.0))
        hits = {t for t, v in sums.items() if v != 0}
        assert hits == set(range(50, 60))  # 50 <= t < 50 + 10

    def test_against_double_loop(self, rng):
        vals = rng.choice([-1.0, 1.0], size=300)
        f = ArithFn(17, vals)
        delta = 13.7
        width = int(delta)
        expected = {}
        for t in range(17, 17 + 300 + width):
            expected[t] = sum(f(n) for n in range(t - width + 1, t + 1))
        for t, s in short_interval_sums(f, delta):
            assert s == pytest.approx(expected[t], abs=1e-12)

    def test_twist_applied_pointwise(self, rng):
        vals = rng.normal(size=64)
        f = ArithFn(100, vals)
        r, q = 2, 7
        got = dict(short_interval_sums(f, 5.0, twist=(r, q)))
        width = 5
        for t in (110, 140):
            direct = sum(f(n) * np.exp(2j * np.pi * r * n / q) for n in range(t - width + 1, t + 1))
            assert got[t] == pytest.approx(direct, abs=1e-9)

    def test_delta_domain(self):
        f = ArithFn.ones(0, 100)
        with pytest.raises(DomainError):
            short_interval_sums(f, 2.0)
        with pytest.raises(DomainError):
            short_interval_sums(f, 51.0)


class TestSerialization:
    def test_int_round_trip_bit_exact(self, rng):
        f = fn(123, rng.integers(-(2**40), 2**40, size=50))
        buf = io.StringIO()
        write_arithfn(f, buf)
        buf.seek(0)
        g = read_arithfn(buf)
        assert g.support_start == f.support_start
        assert g.kind == "int"
        assert np.array_equal(g.values, f.values)

    def test_real_round_trip(self, rng):
        f = fn(0, rng.normal(size=33))
        buf = io.StringIO()
        write_arithfn(f, buf)
        buf.seek(0)
        g = read_arithfn(buf)
        assert np.array_equal(g.values, f.values)

    def test_complex_round_trip(self, rng):
        f = fn(9, rng.normal(size=21) + 1j * rng.normal(size=21))
        buf = io.StringIO()
        write_arithfn(f, buf)
        buf.seek(0)
        g = read_arithfn(buf)
        assert np.array_equal(g.values, f.values)


class TestWindowAlgebra:
    def test_subtract_on_union(self):
        f = ArithFn.ones(0, 4)
        g = ArithFn.ones(2, 4)
        d = subtract(f, g)
        assert d.support_start == 0
        assert d.embed(0, 6).tolist() == [1, 1, 0, 0, -1, -1]

    def test_values_are_immutable(self):
        f = ArithFn.ones(0, 4)
        with pytest.raises(ValueError):
            f.values[0] = 7

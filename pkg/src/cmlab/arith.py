"""Exact integer arithmetic substrate: primes, multiplicative functions, rough numbers.

All integer quantities are exact 64-bit (or Python int); floating point enters
only through the natural-log weights of the prime function.  The prime cache is
immutable after construction and shared read-only, so everything here is safe
for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arithfn import ArithFn
from .errors import DomainError

_SEGMENT = 1 << 20


def _odd_sieve_flags(limit: int) -> np.ndarray:
    """Plain Eratosthenes flags for 0..limit (inclusive)."""
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return flags


def sieve_primes(limit: int) -> np.ndarray:
    """All primes <= limit, ascending.

    Segmented sieve of Eratosthenes: working memory is O(sqrt(limit) + segment)
    on top of the returned array.  limit < 2 yields an empty array.
    """
    if limit < 2:
        return np.array([], dtype=np.int64)
    root = math.isqrt(limit)
    base = np.flatnonzero(_odd_sieve_flags(root)).astype(np.int64)
    chunks = [base]
    lo = root + 1
    while lo <= limit:
        hi = min(lo + _SEGMENT, limit + 1)  # exclusive
        seg = np.ones(hi - lo, dtype=bool)
        for p in base:
            start = ((lo + p - 1) // p) * p
            if start < hi:
                seg[start - lo :: p] = False
        chunks.append(np.flatnonzero(seg).astype(np.int64) + lo)
        lo = hi
    return np.concatenate(chunks)


def prime_flags(limit: int) -> np.ndarray:
    """Boolean array of length limit+1 with flags[n] = (n is prime).

    Memory is O(limit); intended for desk-scale limits (<= ~10^8).
    """
    if limit < 0:
        raise DomainError("limit must be nonnegative")
    if limit < 2:
        return np.zeros(limit + 1, dtype=bool)
    return _odd_sieve_flags(limit)


# Shared monotone prime cache.  Never mutated in place: replaced wholesale
# when it has to grow, and handed out as read-only views.
_cache_limit = 0
_cache_primes = np.array([], dtype=np.int64)


def cached_primes(limit: int) -> np.ndarray:
    """Read-only array of all primes <= limit, served from a growing cache."""
    global _cache_limit, _cache_primes
    if limit > _cache_limit:
        grown = sieve_primes(max(limit, 2 * _cache_limit, 1 << 10))
        grown.setflags(write=False)
        _cache_primes = grown
        _cache_limit = max(limit, 2 * _cache_limit, 1 << 10)
    cut = int(np.searchsorted(_cache_primes, limit, side="right"))
    return _cache_primes[:cut]


@dataclass(frozen=True)
class FactoredInteger:
    """A positive integer together with its prime factorization.

    factors is a tuple of (prime, exponent) pairs with strictly increasing
    primes and exponents >= 1; the product reconstructs n exactly.
    """

    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last_p = 0
        for p, e in self.factors:
            if p <= last_p or e < 1:
                raise DomainError("factors must be (increasing prime, exponent>=1) pairs")
            prod *= p**e
            last_p = p
        if prod != self.n or self.n < 1:
            raise DomainError("factorization does not reconstruct n")

    @property
    def divisor_count(self) -> int:
        out = 1
        for _, e in self.factors:
            out *= e + 1
        return out

    def divisors(self) -> list[int]:
        divs = [1]
        for p, e in self.factors:
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)


def factorize(n: int) -> FactoredInteger:
    """Factor n >= 1 by trial division against the cached prime list."""
    if n < 1:
        raise DomainError("factorize requires n >= 1")
    m = n
    out = []
    for p in cached_primes(math.isqrt(n)):
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
    if m > 1:
        out.append((m, 1))
    return FactoredInteger(n, tuple(out))


def mobius(n: int) -> int:
    """Mobius function mu(n) in {-1, 0, 1}."""
    if n < 1:
        raise DomainError("mobius requires n >= 1")
    fi = factorize(n)
    for _, e in fi.factors:
        if e >= 2:
            return 0
    return -1 if len(fi.factors) % 2 else 1


def euler_phi(n: int) -> int:
    """Euler totient phi(n)."""
    if n < 1:
        raise DomainError("euler_phi requires n >= 1")
    out = 1
    for p, e in factorize(n).factors:
        out *= p ** (e - 1) * (p - 1)
    return out


def is_rough(n: int, z: float) -> bool:
    """True iff every prime divisor of n exceeds z (vacuously true for n = 1)."""
    if n < 1:
        raise DomainError("is_rough requires n >= 1")
    if n == 1:
        return True
    m = n
    for p in cached_primes(math.isqrt(n)):
        p = int(p)
        if p > z or p * p > m:
            break
        if m % p == 0:
            return False
    # No prime <= min(z, sqrt(n)) divides n.  A composite n always has a prime
    # factor <= sqrt(n), so the only way n can still fail is n itself being a
    # prime <= z.
    return n > z


def rough_flags(start: int, stop: int, z: float) -> np.ndarray:
    """Flags for n in [start, stop): True iff n has no prime factor <= z."""
    if start < 1 or stop < start:
        raise DomainError("need 1 <= start <= stop")
    out = np.ones(stop - start, dtype=bool)
    for p in cached_primes(int(z)):
        p = int(p)
        if p > z:
            break
        first = ((start + p - 1) // p) * p
        if first < stop:
            out[first - start :: p] = False
    return out


def weighted_prime_fn(x: int) -> ArithFn:
    """The log-weighted prime indicator on [2, x]: log n at primes, 0 elsewhere."""
    if x < 2:
        raise DomainError("weighted_prime_fn requires x >= 2")
    flags = prime_flags(x)[2:]
    ns = np.arange(2, x + 1, dtype=np.float64)
    values = np.where(flags, np.log(ns), 0.0)
    return ArithFn(2, values)

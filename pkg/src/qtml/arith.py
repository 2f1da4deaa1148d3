"""Exact integer arithmetic: factorization, multiplicative functions, Kronecker symbols.

Scalar routines work on Python ints; the ``*_table`` / ``*_array`` helpers are
numpy-vectorised versions used in the hot loops of :mod:`qtml.lfun` and
:mod:`qtml.eigenform`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

SIEVE_LIMIT = 10**6
MAX_INT = 2**63


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"malformed factor list {self.factors}")
            last = p
            prod *= p**e
        if prod != self.value:
            raise ValueError(f"factors multiply to {prod}, not {self.value}")

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def exponent(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0

    def divisors(self) -> list[int]:
        divs = [1]
        for p, e in self.factors:
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)


@lru_cache(maxsize=4)
def prime_sieve(limit: int = SIEVE_LIMIT) -> np.ndarray:
    """All primes ``<= limit`` as an int64 array (Eratosthenes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    primes = np.flatnonzero(flags).astype(np.int64)
    primes.setflags(write=False)
    return primes


@lru_cache(maxsize=4)
def spf_table(limit: int) -> np.ndarray:
    """Smallest prime factor of every n in ``[0, limit]``; spf[0] = 0 and spf[1] = 1."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    spf[1] = 1
    for p in prime_sieve(math.isqrt(limit)):
        p = int(p)
        block = spf[p * p :: p]
        block[block == 0] = p
    rest = spf == 0
    rest[0] = False
    spf[rest] = np.flatnonzero(rest)
    spf.setflags(write=False)
    return spf


def is_probable_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    c = 1
    while True:
        x = y = 2
        d = 1
        f = lambda v: (v * v + c) % n  # noqa: E731
        while d == 1:
            x = f(x)
            y = f(f(y))
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
        c += 1


def _factor_large(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_probable_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_rho(n)
    _factor_large(d, out)
    _factor_large(n // d, out)


def factorize(n: int) -> Factorization:
    """Prime factorization by trial division over the sieve, Pollard rho beyond it."""
    n = int(n)
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    if n >= MAX_INT:
        raise ValueError("factorize is limited to n < 2**63")
    found: dict[int, int] = {}
    m = n
    for p in prime_sieve():
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            found[p] = e
    if m > 1:
        if m <= SIEVE_LIMIT**2:
            found[m] = found.get(m, 0) + 1
        else:
            _factor_large(m, found)
    return Factorization(n, tuple(sorted(found.items())))


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for _, e in fac.factors):
        return 0
    return -1 if len(fac.factors) % 2 else 1


def euler_phi(n: int) -> int:
    out = 1
    for p, e in factorize(n).factors:
        out *= (p - 1) * p ** (e - 1)
    return out


def divisor_count(n: int) -> int:
    out = 1
    for _, e in factorize(n).factors:
        out *= e + 1
    return out


def sigma_k(n: int, k: int) -> int:
    if k == 0:
        return divisor_count(n)
    out = 1
    for p, e in factorize(n).factors:
        pk = p**k
        out *= (pk ** (e + 1) - 1) // (pk - 1)
    return out


def is_squarefree(n: int) -> bool:
    return mobius(n) != 0


def split_squarefree(ell: int) -> tuple[int, int]:
    """Write an odd ``ell`` as ``ell1 * ell2**2`` with ``ell1`` squarefree."""
    if ell < 1 or ell % 2 == 0:
        raise ValueError(f"split_squarefree expects an odd positive integer, got {ell}")
    ell1 = ell2 = 1
    for p, e in factorize(ell).factors:
        ell1 *= p ** (e % 2)
        ell2 *= p ** (e // 2)
    return ell1, ell2


def squarefree_part_signed(k: int) -> tuple[int, int]:
    """Return ``(k1, k2)`` with ``4k = k1*k2**2``, ``k1`` a fundamental discriminant (or 1)."""
    if k == 0:
        raise ValueError("k must be nonzero")
    m = 4 * k
    sign = -1 if m < 0 else 1
    core, square = 1, 1
    for p, e in factorize(abs(m)).factors:
        core *= p ** (e % 2)
        square *= p ** (e // 2)
    core *= sign
    # core is squarefree; it is a discriminant iff core = 1 (mod 4), else take 4*core
    if core % 4 != 1:
        if square % 2:
            raise ArithmeticError(f"4*{k} has no discriminant decomposition")
        core *= 4
        square //= 2
    return core, square


# -- Kronecker / Jacobi ------------------------------------------------------


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd positive n, binary algorithm."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("jacobi needs odd positive n")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(top: int, bottom: int) -> int:
    """Kronecker symbol (top / bottom) for arbitrary integers, not both zero."""
    if top == 0 and bottom == 0:
        raise ValueError("kronecker(0, 0) is undefined")
    if bottom == 0:
        return 1 if abs(top) == 1 else 0
    result = 1
    if bottom < 0:
        bottom = -bottom
        if top < 0:
            result = -result
    v = 0
    while bottom % 2 == 0:
        bottom //= 2
        v += 1
    if v:
        if top % 2 == 0:
            return 0
        if v % 2 and top % 8 in (3, 5):
            result = -result
    if bottom == 1:
        return result
    return result * jacobi(top, bottom)


def jacobi_array(a: np.ndarray | int, n: np.ndarray) -> np.ndarray:
    """Vectorised Jacobi symbol (a/n) for odd positive entries of ``n``."""
    n = np.asarray(n, dtype=np.int64).copy()
    a = np.mod(np.broadcast_to(np.asarray(a, dtype=np.int64), n.shape), n)
    result = np.ones(n.shape, dtype=np.int64)
    active = a != 0
    while active.any():
        # strip factors of two
        while True:
            even = active & (a % 2 == 0)
            if not even.any():
                break
            a[even] //= 2
            r8 = n[even] % 8
            flip = (r8 == 3) | (r8 == 5)
            idx = np.flatnonzero(even)[flip]
            result[idx] = -result[idx]
        idx = np.flatnonzero(active)
        aa, nn = a[idx], n[idx]
        flip = (aa % 4 == 3) & (nn % 4 == 3)
        result[idx[flip]] = -result[idx[flip]]
        a[idx], n[idx] = nn % aa, aa
        active = a != 0
    result[n != 1] = 0
    return result


def kronecker_array(top: int, bottom: np.ndarray) -> np.ndarray:
    """Kronecker symbol (top / b) for a scalar ``top`` and an array of ``b >= 1``."""
    b = np.asarray(bottom, dtype=np.int64)
    if (b < 1).any():
        raise ValueError("kronecker_array expects positive bottoms")
    v2 = np.zeros(b.shape, dtype=np.int64)
    odd = b.copy()
    while True:
        ev = odd % 2 == 0
        if not ev.any():
            break
        odd[ev] //= 2
        v2[ev] += 1
    out = jacobi_array(top, odd)
    if top % 2 == 0:
        out[v2 > 0] = 0
    elif top % 8 in (3, 5):
        out[v2 % 2 == 1] *= -1
    return out


def squarefree_flags(limit: int) -> np.ndarray:
    """Boolean mask ``sf[n]`` for n in ``[0, limit]`` (sf[0] = False)."""
    sf = np.ones(limit + 1, dtype=bool)
    sf[0] = False
    for p in prime_sieve(math.isqrt(limit)):
        p = int(p)
        sf[p * p :: p * p] = False
    return sf


def mobius_table(limit: int) -> np.ndarray:
    mu = np.ones(limit + 1, dtype=np.int64)
    mu[0] = 0
    for p in prime_sieve(limit):
        p = int(p)
        mu[p::p] *= -1
        if p * p <= limit:
            mu[p * p :: p * p] = 0
    return mu


def divisor_count_table(limit: int) -> np.ndarray:
    tau = np.zeros(limit + 1, dtype=np.int64)
    for d in range(1, limit + 1):
        tau[d::d] += 1
    return tau


@dataclass(frozen=True)
class SquarefreeStream:
    """Squarefree integers in ``[lower, upper]``, optionally odd only, in increasing order."""

    lower: int
    upper: int
    odd_only: bool = True

    def __post_init__(self):
        if self.lower < 1 or self.upper < 1:
            raise ValueError("bounds must be positive")

    def array(self) -> np.ndarray:
        if self.upper < self.lower:
            return np.zeros(0, dtype=np.int64)
        n = np.arange(self.lower, self.upper + 1, dtype=np.int64)
        keep = np.ones(n.shape, dtype=bool)
        for p in prime_sieve(math.isqrt(self.upper)):
            p2 = int(p) ** 2
            keep &= n % p2 != 0
        if self.odd_only:
            keep &= n % 2 == 1
        return n[keep]

    def __iter__(self) -> Iterator[int]:
        return iter(int(d) for d in self.array())

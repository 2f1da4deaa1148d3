"""Quadratic Gauss-type sums

    G_k(n) = ((1-i)/2 + (-1/n)(1+i)/2) * sum_{a mod n} (a/n) e(ak/n),   n odd,

by brute force and by the multiplicative closed form, plus the Poisson
summation identity they feed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import arith
from .analysis.window import WindowSpec, fourier_type


@dataclass(frozen=True)
class GaussSumValue:
    k: int
    n: int
    value: complex
    route: str


def _prefactor(n: int) -> complex:
    return (1 - 1j) / 2 + arith.kronecker(-1, n) * (1 + 1j) / 2


def _check_odd(n: int) -> None:
    if n < 1 or n % 2 == 0:
        raise ValueError(f"G_k(n) needs odd positive n, got {n}")


def gauss_sum_brute(k: int, n: int) -> complex:
    """Direct O(n) summation."""
    _check_odd(n)
    if n > 10**5:
        raise ValueError("brute-force oracle limited to n <= 1e5")
    a = np.arange(n, dtype=np.int64)
    chi = arith.jacobi_array(a, np.full(n, n, dtype=np.int64)).astype(float)
    phase = np.exp(2j * np.pi * ((a * (k % n)) % n) / n)
    return complex(_prefactor(n) * np.dot(chi, phase))


def gauss_sum_brute_many(ks: np.ndarray, n: int) -> np.ndarray:
    """Brute-force G_k(n) for an array of k at once."""
    _check_odd(n)
    a = np.arange(n, dtype=np.int64)
    chi = arith.jacobi_array(a, np.full(n, n, dtype=np.int64)).astype(float)
    ks = np.asarray(ks, dtype=np.int64)
    phase = np.exp(2j * np.pi * (np.multiply.outer(ks % n, a) % n) / n)
    return _prefactor(n) * (phase @ chi)


def _prime_power(k: int, p: int, beta: int) -> complex:
    """G_k(p^beta) from the five-case table; k = 0 means alpha = infinity."""
    if beta == 0:
        return 1.0
    if k == 0:
        alpha = math.inf
    else:
        alpha = 0
        kk = abs(k)
        while kk % p == 0:
            kk //= p
            alpha += 1
    if beta <= alpha:
        return 0.0 if beta % 2 else float(p**beta - p ** (beta - 1))
    if beta == alpha + 1:
        pa = p**alpha
        if beta % 2 == 0:
            return float(-pa)
        return arith.kronecker(k // pa, p) * pa * math.sqrt(p)
    return 0.0


def gauss_sum(k: int, n: int) -> GaussSumValue:
    """G_k(n) via multiplicativity over the prime powers of n."""
    _check_odd(n)
    value: complex = 1.0
    for p, beta in arith.factorize(n).factors:
        value *= _prime_power(k, p, beta)
        if value == 0:
            break
    return GaussSumValue(k, n, complex(value), "closed_form")


@dataclass(frozen=True)
class PoissonCheck:
    n: int
    Z: float
    lhs: float
    rhs: float
    defect: float
    k_max: int
    tail_estimate: float


def poisson_check(window: WindowSpec, n: int, Z: float, K: int | None = None,
                  tail_tol: float = 1e-10) -> PoissonCheck:
    """Both sides of  sum_{d odd} (d/n) Phi(d/Z) = (Z/2n)(2/n) sum_k (-1)^k G_k(n) Phi^(kZ/2n).

    With ``K`` unset the k-sum grows in blocks until the last block contributes
    less than ``tail_tol``.
    """
    _check_odd(n)
    d_lo = int(math.floor(window.x_lo * Z))
    d_hi = int(math.ceil(window.x_hi * Z))
    d = np.arange(max(1, d_lo), d_hi + 1)
    d = d[d % 2 == 1]
    chi = np.array([arith.kronecker(int(x), n) for x in d], dtype=float)
    lhs = math.fsum((chi * window(d / Z)).tolist())

    scale = Z / (2 * n) * arith.kronecker(2, n)

    def term(k: int) -> complex:
        return (-1) ** (k % 2) * gauss_sum(k, n).value * fourier_type(window, k * Z / (2 * n))

    terms = [term(0)]
    k = 0
    block = 32
    tail = math.inf
    while True:
        new = []
        for j in range(k + 1, k + block + 1):
            new.append(term(j) + term(-j))
        terms.extend(new)
        k += block
        tail = abs(scale) * max(abs(t) for t in new) * block
        if K is not None:
            if k >= K:
                break
        elif tail < tail_tol:
            break
        if k > 200000:
            raise RuntimeError(f"Poisson k-sum not converged; tail estimate {tail:.2e}")
    total = sum(terms)
    if abs(total.imag) > 1e-8 * max(1.0, abs(total)):
        raise ArithmeticError(f"dual side not real: {total}")
    rhs = scale * total.real
    if K is not None and tail > 1e-8:
        raise RuntimeError(f"truncation K={K} too small: tail estimate {tail:.2e}")
    return PoissonCheck(n, Z, lhs, rhs, abs(lhs - rhs), k, tail)

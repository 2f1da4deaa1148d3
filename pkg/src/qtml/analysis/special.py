"""Gamma, digamma and zeta in double precision.

All functions accept numpy arrays (complex or real) and broadcast.
"""
from __future__ import annotations

import math

import numpy as np

from ..arith import prime_sieve

# Lanczos coefficients for g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array(
    [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
POLE_DISTANCE = 1e-8

# Bernoulli numbers B_2 .. B_20
_BERNOULLI = [1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6,
              -3617 / 510, 43867 / 798, -174611 / 330]


class PoleError(ValueError):
    """Argument lies within ``POLE_DISTANCE`` of a pole."""


def _check_poles(z: np.ndarray) -> None:
    near = (z.real < 0.5) & (np.abs(z - np.round(z.real)) < POLE_DISTANCE) & (np.round(z.real) <= 0)
    if np.any(near):
        raise PoleError(f"gamma evaluated at a pole: {z[near][:3]}")


def _lanczos_loggamma(z: np.ndarray) -> np.ndarray:
    # valid for Re z >= 1/2
    zm = z - 1.0
    acc = np.full(z.shape, _LANCZOS_COEF[0], dtype=complex)
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc = acc + c / (zm + i)
    t = zm + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * np.log(t) - t + np.log(acc)


def loggamma(s) -> np.ndarray | complex:
    """A logarithm of Gamma(s); exp(loggamma(s)) = Gamma(s).

    The imaginary part agrees with the principal branch for Re s >= 1/2 only.
    """
    z = np.asarray(s, dtype=complex)
    _check_poles(z)
    out = np.empty(z.shape, dtype=complex)
    right = z.real >= 0.5
    out[right] = _lanczos_loggamma(z[right])
    if (~right).any():
        zl = z[~right]
        out[~right] = math.log(math.pi) - np.log(np.sin(np.pi * zl)) - _lanczos_loggamma(1.0 - zl)
    return out[()] if out.ndim == 0 else out


def gamma(s) -> np.ndarray | complex:
    """Gamma(s) with reflection for Re s < 1/2."""
    return np.exp(loggamma(s))


def gamma_ratio(a, b) -> np.ndarray | complex:
    """Gamma(a) / Gamma(b) computed in log space."""
    return np.exp(loggamma(a) - loggamma(b))


def digamma(s) -> np.ndarray | complex:
    """psi(s) via upward recurrence to Re >= 12 and the asymptotic series."""
    z = np.asarray(s, dtype=complex)
    _check_poles(z)
    out = np.zeros(z.shape, dtype=complex)
    left = z.real < 0.5
    if left.any():
        # psi(z) = psi(1 - z) - pi cot(pi z)
        out[left] = -np.pi / np.tan(np.pi * z[left])
        z = np.where(left, 1.0 - z, z)
    shift = np.zeros(z.shape, dtype=complex)
    while True:
        small = z.real < 12.0
        if not small.any():
            break
        shift[small] -= 1.0 / z[small]
        z = np.where(small, z + 1.0, z)
    inv2 = 1.0 / (z * z)
    series = np.zeros(z.shape, dtype=complex)
    for k in range(len(_BERNOULLI), 0, -1):
        series = series * inv2 + _BERNOULLI[k - 1] / (2 * k)
    out += np.log(z) - 0.5 / z - series * inv2 + shift
    return out[()] if out.ndim == 0 else out


def trigamma(s) -> np.ndarray | complex:
    """psi'(s) via upward recurrence and the asymptotic series (Re s > 0)."""
    z = np.asarray(s, dtype=complex)
    if np.any(z.real <= 0):
        raise ValueError("trigamma implemented for Re s > 0 only")
    acc = np.zeros(z.shape, dtype=complex)
    while True:
        small = z.real < 12.0
        if not small.any():
            break
        acc[small] += 1.0 / z[small] ** 2
        z = np.where(small, z + 1.0, z)
    inv = 1.0 / z
    inv2 = inv * inv
    series = np.zeros(z.shape, dtype=complex)
    for k in range(len(_BERNOULLI), 0, -1):
        series = series * inv2 + _BERNOULLI[k - 1]
    out = acc + inv + 0.5 * inv2 + series * inv2 * inv
    return out[()] if out.ndim == 0 else out


# -- zeta --------------------------------------------------------------------

_EM_TERMS = 10


def _zeta_em(s: np.ndarray, n_head: int) -> np.ndarray:
    """Euler-Maclaurin with ``n_head`` explicit terms; s != 1, Re s > -2*_EM_TERMS + 1."""
    n = np.arange(1, n_head, dtype=float)
    head = np.exp(-np.multiply.outer(s, np.log(n))).sum(axis=-1)
    N = float(n_head)
    Ns = np.exp(-s * math.log(N))
    out = head + N * Ns / (s - 1.0) + 0.5 * Ns
    # sum_k B_2k/(2k)! * s(s+1)...(s+2k-2) N^{-s-2k+1}
    rising = s.copy()
    fact = 1.0
    power = Ns / N
    for k in range(1, _EM_TERMS + 1):
        fact *= (2 * k - 1) * (2 * k)
        out = out + _BERNOULLI[k - 1] / fact * rising * power
        rising = rising * (s + 2 * k - 1) * (s + 2 * k)
        power = power / (N * N)
    return out


def zeta_real(s) -> np.ndarray | float:
    """Riemann zeta for real s > 1, Euler-Maclaurin with 16 head terms."""
    x = np.asarray(s, dtype=float)
    if np.any(x <= 1.0):
        raise ValueError("zeta_real requires s > 1")
    out = _zeta_em(x.astype(complex), 16).real
    return out[()] if out.ndim == 0 else out


def zeta_restricted(s, excluded=()) -> np.ndarray | float:
    """zeta(s) with the Euler factors at the ``excluded`` primes removed."""
    out = np.asarray(zeta_real(s), dtype=float)
    for p in set(int(q) for q in excluded):
        out = out * (1.0 - float(p) ** -np.asarray(s, dtype=float))
    return out[()] if out.ndim == 0 else out


def zeta_complex(s) -> np.ndarray | complex:
    """Riemann zeta on the complex plane minus {1}.

    Euler-Maclaurin for Re s >= 1/2, the functional equation below that.
    The head length grows with |Im s| so the Bernoulli tail stays small.
    """
    z = np.asarray(s, dtype=complex)
    if np.any(np.abs(z - 1.0) < 1e-12):
        raise PoleError("zeta pole at s = 1")
    out = np.empty(z.shape, dtype=complex)
    right = z.real >= 0.5
    if right.any():
        zr = z[right]
        n_head = int(max(16, np.abs(zr).max() + 16))
        out[right] = _zeta_em(zr, n_head)
    if (~right).any():
        zl = z[~right]
        w = 1.0 - zl
        n_head = int(max(16, np.abs(w).max() + 16))
        # zeta(s) = 2^s pi^(s-1) sin(pi s/2) Gamma(1-s) zeta(1-s)
        log_pref = zl * math.log(2.0) + (zl - 1.0) * math.log(math.pi) + loggamma(w)
        out[~right] = np.exp(log_pref) * np.sin(np.pi * zl / 2) * _zeta_em(w, n_head)
    return out[()] if out.ndim == 0 else out


def prime_zeta_tail(s: float, P: int) -> float:
    """Upper bound for sum_{p > P} p^{-s}, s > 1, via the integral of 1/(t^s log t)."""
    if s <= 1:
        raise ValueError("s must exceed 1")
    # 1.25506 t/log t bounds pi(t); partial summation gives this envelope
    return 1.25506 * P ** (1.0 - s) / ((s - 1.0) * math.log(P))


def euler_gamma() -> float:
    return -float(np.real(digamma(1.0)))


__all__ = [
    "PoleError",
    "loggamma",
    "gamma",
    "gamma_ratio",
    "digamma",
    "trigamma",
    "zeta_real",
    "zeta_restricted",
    "zeta_complex",
    "prime_zeta_tail",
    "prime_sieve",
]

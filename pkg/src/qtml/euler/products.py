"""Z(1/2 + gamma, ell) as an Euler product, its accelerated form and log-derivative."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import arith
from ..analysis.special import prime_zeta_tail, zeta_complex, zeta_real
from .local import EulerContext, local_E, sym2_local

DEFAULT_TOL = 1e-8


class CutoffError(RuntimeError):
    def __init__(self, message: str, suggested_P: int):
        super().__init__(f"{message}; suggested prime cutoff P >= {suggested_P}")
        self.suggested_P = suggested_P


@dataclass(frozen=True)
class ProductValue:
    value: complex
    P: int
    N: int
    tail_bound: float  # relative


def _odd_primes(ctx: EulerContext, P: int) -> np.ndarray:
    primes = arith.prime_sieve(P)
    return primes[1:]


def per_prime_factors(ctx: EulerContext, gamma: complex, P: int, N: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Odd primes p <= P and the factors Z_p/L_p, times the depth-N acceleration multiplier."""
    gamma = complex(gamma)
    primes = _odd_primes(ctx, P)
    lp = ctx.table.lam[primes]
    e1, e2, e3 = local_E(lp, primes, gamma)
    ell1, ell2 = ctx.ell1, ctx.ell2
    z = np.where(ell1 % primes == 0, e1, np.where(ell2 % primes == 0, e2, e3))
    ratio = z / sym2_local(lp, primes, 1.0 + 2.0 * gamma)
    if N > 0:
        ratio = ratio * _accel(primes.astype(float), gamma, N)
    return primes, ratio


def _accel(p, gamma, N):
    return (1.0 - p ** (-(2.0 ** (N + 1)) * (1.0 + 2.0 * gamma))) / (1.0 - p ** (-(2.0 + 4.0 * gamma)))


def _two_factor(ctx: EulerContext, gamma: complex, N: int) -> complex:
    """1/L_2(1 + 2 gamma, sym^2 f), with the depth-N multiplier at p = 2."""
    val = 1.0 / complex(sym2_local(float(ctx.table.lam[2]), 2, 1.0 + 2.0 * gamma))
    if N > 0:
        val *= complex(_accel(2.0, gamma, N))
    return val


def _decay_exponent(gamma: complex, N: int) -> float:
    g = complex(gamma).real
    if N == 0:
        return min(2 + 2 * g, 2 + 4 * g)
    return min(2 + 2 * g, 3 + 4 * g, 2 ** (N + 1) * (1 + 2 * g))


def _tail(primes, ratio, gamma, N, P) -> float:
    e = _decay_exponent(gamma, N)
    if e <= 1:
        return math.inf
    last = primes > P / 10
    C = 10.0 * float(np.max(np.abs(ratio[last] - 1.0) * primes[last].astype(float) ** e))
    return C * prime_zeta_tail(e, P)


def _zeta(s: complex) -> complex:
    s = complex(s)
    return complex(zeta_real(s.real)) if s.imag == 0 else complex(zeta_complex(s))


def zeta_ratio(gamma: complex, N: int) -> complex:
    """zeta(2^{N+1}(1 + 2 gamma)) / zeta(2 + 4 gamma)."""
    gamma = complex(gamma)
    return _zeta(2.0 ** (N + 1) * (1 + 2 * gamma)) / _zeta(2 + 4 * gamma)


def _check_region(gamma: complex, N: int) -> None:
    g = complex(gamma).real
    if g <= -0.25 + 1e-9:
        raise ValueError("Z needs Re gamma > -1/4")
    if N > 0 and 2 ** (N + 1) * (1 + 2 * g) <= 1.0 + 1e-9:
        raise ValueError("acceleration depth outside its convergence region")


def ZN_accelerated(ctx: EulerContext, gamma: complex, N: int | None = None, P: int | None = None,
                   tol: float | None = DEFAULT_TOL) -> ProductValue:
    """Z(1/2+gamma, ell) = [zeta(2^{N+1}(1+2 gamma))/zeta(2+4 gamma)] * Z^N, with Z^N truncated at P.

    ``tol`` (relative) is enforced through the empirical tail bound; pass None to skip.
    """
    N = ctx.N if N is None else N
    P = ctx.P if P is None else P
    _check_region(gamma, N)
    primes, ratio = per_prime_factors(ctx, gamma, P, N)
    logs = np.log(ratio)
    total = complex(math.fsum(logs.real) + 1j * math.fsum(logs.imag))
    value = np.exp(total) * _two_factor(ctx, gamma, N)
    if N > 0:
        value *= zeta_ratio(gamma, N)
    tail = _tail(primes, ratio, gamma, N, P)
    if tol is not None and tail > tol:
        e = _decay_exponent(gamma, N)
        suggest = int(P * (tail / tol) ** (1.0 / max(e - 1.0, 1e-3))) + 1
        raise CutoffError(f"tail bound {tail:.2e} exceeds {tol:.0e} at P={P}", suggest)
    return ProductValue(complex(value), P, N, tail)


def Z_product(ctx: EulerContext, gamma: complex, P: int | None = None,
              tol: float | None = DEFAULT_TOL) -> ProductValue:
    """Plain product prod_{p odd <= P} Z_p / L_p(1 + 2 gamma) divided by L_2."""
    return ZN_accelerated(ctx, gamma, 0, P, tol)


def partial_products(ctx: EulerContext, gamma: complex, N: int, cutoffs) -> np.ndarray:
    """Z^N-route values at several prime cutoffs from one pass over the primes."""
    cutoffs = np.asarray(sorted(cutoffs))
    primes, ratio = per_prime_factors(ctx, gamma, int(cutoffs[-1]), N)
    cum = np.cumsum(np.log(ratio))
    idx = np.searchsorted(primes, cutoffs, side="right") - 1
    pref = _two_factor(ctx, gamma, N) * (zeta_ratio(gamma, N) if N > 0 else 1.0)
    return np.exp(cum[idx]) * pref


def needed_cutoff(ctx: EulerContext, gamma: complex, N: int, reference: complex, rel_tol: float,
                  P_max: int) -> int:
    """Smallest prime P0 such that every truncation at P >= P0 (up to P_max) is within rel_tol of reference."""
    primes, ratio = per_prime_factors(ctx, gamma, P_max, N)
    pref = _two_factor(ctx, gamma, N) * (zeta_ratio(gamma, N) if N > 0 else 1.0)
    partial = np.exp(np.cumsum(np.log(ratio))) * pref
    bad = np.abs(partial / reference - 1.0) > rel_tol
    if bad[-1]:
        raise CutoffError("tolerance not met at the largest cutoff", 2 * P_max)
    last_bad = np.flatnonzero(bad)
    return int(primes[last_bad[-1] + 1]) if last_bad.size else 3


def Z_star(table, P: int = 100_000, N: int = 1, tol: float | None = None) -> ProductValue:
    """Z*(0) = Z(1/2, 1); the tail bound is reported, and enforced only when ``tol`` is given."""
    return ZN_accelerated(EulerContext(table, 1, P, N), 0.0, N, P, tol)


@dataclass(frozen=True)
class LogDerivative:
    value: float
    step_ratio: float  # |D(h) - D(h/2)| / |D(h/2) - D(h/4)|, about 4 for a second-order scheme
    complex_step: float


def Z_star_derivative(table, ell: int = 1, P: int = 100_000, N: int = 1, h: float = 1e-3) -> LogDerivative:
    """d/dgamma log Z(1/2 + gamma, ell) at 0.

    Richardson-extrapolated central differences of log Z; the per-prime complex-step
    derivative of the same truncated product is returned alongside for validation.
    """
    ctx = EulerContext(table, ell, P, N)

    def logZ(g):
        return np.log(ZN_accelerated(ctx, g, N, P, tol=None).value)

    def central(step):
        return (logZ(step) - logZ(-step)) / (2 * step)

    d1, d2, d4 = central(h), central(h / 2), central(h / 4)
    rich = (4 * d2 - d1) / 3
    ratio = abs(d1 - d2) / max(abs(d2 - d4), 1e-300)
    if not 2.5 < ratio < 6.0 and abs(d1 - d2) > 1e-9:
        raise ArithmeticError(f"step-halving ratio {ratio:.2f} inconsistent with a second-order scheme")
    cs = complex_step_log_derivative(ctx, 0.0, N, P)
    if abs(rich.imag) > 1e-8:
        raise ArithmeticError("log-derivative of a real product has an imaginary part")
    return LogDerivative(float(rich.real), float(ratio), cs)


def complex_step_log_derivative(ctx: EulerContext, gamma: float, N: int, P: int, h: float = 1e-30) -> float:
    """sum over primes of Im log(factor_p(gamma + i h)) / h, plus the zeta-ratio and p = 2 terms."""
    g = complex(gamma, h)
    _, ratio = per_prime_factors(ctx, g, P, N)
    total = math.fsum(np.angle(ratio)) / h
    total += float(np.angle(_two_factor(ctx, g, N))) / h
    if N > 0:
        total += float(np.angle(zeta_ratio(g, N))) / h
    return total

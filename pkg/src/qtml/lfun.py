"""Shifted central values of quadratic twists via the smoothed approximate functional equation.

For a fundamental discriminant D with q = |D| and a balance parameter t > 0,

    L(1/2 + a, f x chi_D) = sum lam(n) chi_D(n) n^{-1/2-a} w_a(n / (q t))
                          + i^k sgn(D) X_{a,D} sum lam(n) chi_D(n) n^{-1/2+a} w_{-a}(n t / q),

    X_{a,D} = (q/2pi)^{-2a} Gamma(k/2 - a) / Gamma(k/2 + a).

Moments use D = 8d with d odd, squarefree and positive.  Changing t or the weight
G leaves the value unchanged, which is how the evaluation is self-checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import arith
from .analysis.kernel import KernelBank, KernelCache
from .analysis.special import digamma, loggamma
from .eigenform import EigenformTable, TableTooShort

DEFAULT_TOL = 1e-12


class DerivativeMismatch(ArithmeticError):
    """The finite-difference and analytic derivative routes disagree."""


@dataclass(frozen=True)
class TwistPoint:
    d: int
    alpha: complex
    weight: int

    def __post_init__(self):
        if self.d < 1 or self.d % 2 == 0 or not arith.is_squarefree(self.d):
            raise ValueError(f"d must be odd, squarefree and positive; got {self.d}")
        if abs(complex(self.alpha).real) > 0.25:
            raise ValueError("need |Re alpha| <= 1/4")

    @property
    def discriminant(self) -> int:
        return 8 * self.d


@dataclass(frozen=True)
class ShiftedLValue:
    point: TwistPoint | None
    value: complex
    terms_used: int
    tail_bound: float
    kernel_bound: float = 0.0


def is_fundamental(D: int) -> bool:
    if D == 1:
        return True
    if D % 4 == 1:
        return arith.is_squarefree(abs(D))
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and arith.is_squarefree(abs(m))
    return False


def root_factor(weight: int, alpha: complex, D: int) -> complex:
    """i^k sgn(D) X_{alpha,D} for the discriminant D (use D = 8d for the 8d family)."""
    if D == 0:
        raise ValueError("D must be nonzero")
    a = complex(alpha)
    q = abs(D)
    X = np.exp(-2 * a * math.log(q / (2 * math.pi)) + loggamma(weight / 2 - a) - loggamma(weight / 2 + a))
    sign = (1j) ** (weight % 4) * (1 if D > 0 else -1)
    return complex(sign * X)


@lru_cache(maxsize=64)
def _log_n(N: int) -> np.ndarray:
    out = np.log(np.arange(1, N + 1, dtype=float))
    out.setflags(write=False)
    return out


@lru_cache(maxsize=256)
def character_period(D: int) -> np.ndarray:
    """chi_D(n) for n = 1 .. |D| (one full period)."""
    q = abs(D)
    out = arith.kronecker_array(D, np.arange(1, q + 1, dtype=np.int64)).astype(float)
    out.setflags(write=False)
    return out


def character_values(D: int, N: int) -> np.ndarray:
    period = character_period(D)
    reps = -(-N // period.size)
    return np.tile(period, reps)[:N]


@dataclass(frozen=True)
class _SumSpec:
    cache: KernelCache
    Q: float
    shift: complex  # exponent is -1/2 - shift
    N: int
    tail: float


def _plan(cache: KernelCache, Q: float, shift: complex, tol: float) -> _SumSpec:
    sigma = 0.5 + complex(shift).real
    xi = min(cache.xi_stop(tol, Q, sigma), cache.xi_max)
    N = max(1, int(math.ceil(Q * xi)))
    tail = math.exp(cache.log_tail_bound(N / Q, Q, sigma))
    return _SumSpec(cache, Q, complex(shift), N, tail)


def _smoothed_sum(table: EigenformTable, chi: np.ndarray, plan: _SumSpec, log_factor: bool = False):
    """sum_{n<=N} lam(n) chi(n) n^{-1/2-shift} w(n/Q) [* log n]; also returns sum |coef| for error bounds."""
    N = plan.N
    logn = _log_n(N)
    coef = table.lam[1 : N + 1] * chi[:N]
    if plan.shift == 0:
        coef = coef * np.exp(-0.5 * logn)
    else:
        coef = coef * np.exp(-(0.5 + plan.shift) * logn)
    if log_factor:
        coef = coef * logn
    w = plan.cache(np.exp(logn - math.log(plan.Q)))
    return complex(np.dot(coef, w)), float(np.abs(coef).sum())


def afe_value(table: EigenformTable, D: int, alpha: complex, bank: KernelBank | None = None,
              balance: float = 1.0, tol: float = DEFAULT_TOL) -> ShiftedLValue:
    """L(1/2 + alpha, f x chi_D) for a fundamental discriminant D (D = 1 gives L(f))."""
    if not is_fundamental(D):
        raise ValueError(f"{D} is not a fundamental discriminant")
    bank = bank or KernelBank()
    alpha = complex(alpha)
    k = table.weight
    q = abs(D)
    first = _plan(bank.get(k, alpha), q * balance, alpha, tol)
    second = _plan(bank.get(k, -alpha), q / balance, -alpha, tol)
    N = max(first.N, second.N)
    if N > table.N_max:
        raise TableTooShort(N, table.N_max)
    chi = character_values(D, N)
    s1, m1 = _smoothed_sum(table, chi, first)
    s2, m2 = _smoothed_sum(table, chi, second)
    eps = root_factor(k, alpha, D)
    value = s1 + eps * s2
    tail = first.tail + abs(eps) * second.tail
    kb = first.cache.err_bound * m1 + abs(eps) * second.cache.err_bound * m2
    return ShiftedLValue(None, value, N, tail, kb)


def central_value(table: EigenformTable, point: TwistPoint, bank: KernelBank | None = None,
                  balance: float = 1.0, tol: float = DEFAULT_TOL) -> ShiftedLValue:
    """L(1/2 + alpha, f x chi_{8d}) with truncation and kernel error bounds."""
    if point.weight != table.weight:
        raise ValueError("table weight differs from the twist point weight")
    res = afe_value(table, point.discriminant, point.alpha, bank, balance, tol)
    return ShiftedLValue(point, res.value, res.terms_used, res.tail_bound, res.kernel_bound)


def fe_residual(table: EigenformTable, d: int, alpha: complex, bank: KernelBank | None = None,
                balance: float = 1.0, other_balance: float = 1.37) -> float:
    """|L(1/2+a) - i^k X_{a,8d} L(1/2-a)| from two evaluations at different balances.

    With equal balances the two sums are the same terms rearranged, so the
    residual would vanish identically.
    """
    k = table.weight
    plus = central_value(table, TwistPoint(d, alpha, k), bank, balance).value
    minus = central_value(table, TwistPoint(d, -complex(alpha), k), bank, other_balance).value
    return abs(plus - root_factor(k, alpha, 8 * d) * minus)


def _derivative_fd(table, D, bank, h, balance, tol) -> tuple[float, float]:
    def sym(step):
        return (afe_value(table, D, step, bank, balance, tol).value
                - afe_value(table, D, -step, bank, balance, tol).value) / (2 * step)

    coarse, fine = sym(h), sym(h / 2)
    return (4 * fine - coarse) / 3, abs(fine - coarse)


def _derivative_analytic(table, D, bank, balance, tol) -> complex:
    k = table.weight
    q = abs(D)
    w0 = bank.get(k, 0.0)
    dw = bank.get(k, 0.0, kind="dalpha")
    first = _plan(w0, q * balance, 0.0, tol)
    second = _plan(w0, q / balance, 0.0, tol)
    N = max(first.N, second.N)
    if N > table.N_max:
        raise TableTooShort(N, table.N_max)
    chi = character_values(D, N)

    def with_cache(plan, cache):
        return _SumSpec(cache, plan.Q, plan.shift, plan.N, plan.tail)

    # d/da of sum n^{-1/2-a} w_a(n/Qt): -log n w_0 + dw_0
    a1 = -_smoothed_sum(table, chi, first, log_factor=True)[0] + _smoothed_sum(table, chi, with_cache(first, dw))[0]
    # d/da of X_a sum n^{-1/2+a} w_{-a}: X'_0 S + log n w_0 - dw_0
    S2 = _smoothed_sum(table, chi, second)[0]
    a2 = _smoothed_sum(table, chi, second, log_factor=True)[0] - _smoothed_sum(table, chi, with_cache(second, dw))[0]
    dX = -2 * math.log(q / (2 * math.pi)) - 2 * complex(digamma(k / 2)).real
    eps = root_factor(k, 0.0, D)
    return a1 + eps * (dX * S2 + a2)


def central_derivative(table: EigenformTable, d: int, bank: KernelBank | None = None, h: float = 1e-3,
                       balance: float = 1.0, tol: float = DEFAULT_TOL, validate: bool = True,
                       agreement: float = 1e-6) -> float:
    """d/da L(1/2 + a, f x chi_{8d}) at a = 0.

    Richardson-extrapolated central differences (steps h, h/2); with ``validate`` the
    analytically differentiated sums must agree to ``agreement``.
    """
    TwistPoint(d, 0.0, table.weight)
    bank = bank or KernelBank()
    value, _ = _derivative_fd(table, 8 * d, bank, h, balance, tol)
    if validate:
        other = _derivative_analytic(table, 8 * d, bank, balance, tol)
        if abs(value - other) > agreement * max(1.0, abs(other)):
            raise DerivativeMismatch(f"d={d}: difference quotient {value} vs analytic {other}")
    return float(np.real(value))


def derivative_routes(table: EigenformTable, d: int, bank: KernelBank | None = None, h: float = 1e-3):
    """(Richardson value, |D(h/2) - D(h)|, analytic value) for diagnostics."""
    bank = bank or KernelBank()
    fd, step = _derivative_fd(table, 8 * d, bank, h, 1.0, DEFAULT_TOL)
    return fd, step, _derivative_analytic(table, 8 * d, bank, 1.0, DEFAULT_TOL)

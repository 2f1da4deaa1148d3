"""L(s, sym^2 f) for a level-one eigenform.

Two independent evaluations:

* ``euler_product``: prod_{p<=P} [(1 - (lam(p)^2-2) p^{-s} + p^{-2s})(1 - p^{-s})]^{-1},
  absolutely convergent for Re s > 1 only.
* ``smoothed_series``: the approximate functional equation for the completed
  function Lambda(s) = Gamma_R(s+1) Gamma_C(s+k-1) L(s) = Lambda(1-s),

      L(s) = sum a(n) n^{-s} V_s(n/t) + g(1-s)/g(s) sum a(n) n^{s-1} V_{1-s}(n t),
      V_s(y) = (1/2 pi i) int_(c) g(s+w)/g(s) y^{-w} dw/w,

  valid for every s and independent of the balance t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import arith
from ..analysis.special import loggamma, prime_zeta_tail
from ..eigenform import EigenformTable, TableTooShort
from .local import sym2_coefficient_powers, sym2_local

METHODS = ("euler_product", "smoothed_series")
EULER_MIN_S = 1.5
STEP = 0.05
LOG_DROP = 50.0
TAIL_TOL = 1e-15


class MethodDisagreement(ArithmeticError):
    pass


@dataclass(frozen=True)
class SymSquareValue:
    value: complex
    method: str
    bound: float  # absolute error bound (tail of product or series)
    terms: int


def _log_gamma_factor(weight: int, s):
    """log of Gamma_R(s+1) Gamma_C(s+k-1)."""
    s = np.asarray(s, dtype=complex)
    gr = -(s + 1) / 2 * math.log(math.pi) + loggamma((s + 1) / 2)
    gc = math.log(2.0) - (s + weight - 1) * math.log(2 * math.pi) + loggamma(s + weight - 1)
    return gr + gc


def sym2_coefficients(table: EigenformTable, N: int) -> np.ndarray:
    """Dirichlet coefficients a(1..N) of L(s, sym^2 f), index 0 unused."""
    if N > table.N_max:
        raise TableTooShort(N, table.N_max)
    a = np.ones(N + 1)
    a[0] = 0.0
    for p in arith.prime_sieve(N):
        p = int(p)
        e_max = int(math.log(N) / math.log(p) + 1e-9)
        A = sym2_coefficient_powers(float(table.lam[p]), e_max)
        for e in range(e_max, 0, -1):
            # indices divisible by exactly p^e
            idx = np.arange(p**e, N + 1, p**e)
            if e < e_max:
                idx = idx[idx % p ** (e + 1) != 0]
            a[idx] *= A[e]
    return a


class _VKernel:
    """(1/2 pi i) int g(a+w)/g(b) y^{-w} dw/w by the trapezoid rule on a vertical line.

    With a = b this is V_s.  The second AFE sum uses a = 1-s, b = s, which keeps the
    ratio g(1-s)/g(s) finite at the trivial zeros.  When a = b and y < 1 the line sits
    left of 0 (between 0 and the first pole at w = -a-1) and the residue is added.
    """

    def __init__(self, weight: int, a: complex, b: complex):
        self.weight = weight
        self.a = complex(a)
        self.b = complex(b)
        self.base = complex(_log_gamma_factor(weight, self.b))
        self.same = self.a == self.b
        # rightmost pole of g(a+w) is w = -a-1; keep the right line 1.5 clear of it and of 0
        self.c_right = max(1.5, -self.a.real - 1 + 1.5)
        self.right = self._nodes(self.c_right)
        self.left = self._nodes(-(self.a.real + 1) / 2) if self.same else None

    def _log_F(self, w):
        return _log_gamma_factor(self.weight, self.a + w) - self.base - np.log(w)

    def _nodes(self, c):
        probe = np.arange(0.0, 400.0, 1.0)
        w = c + 1j * np.concatenate([probe, -probe])
        lg = np.real(self._log_F(w))
        T = float(np.abs(w[lg > lg.max() - LOG_DROP].imag).max()) + 2.0
        t = np.arange(-T, T + STEP / 2, STEP)
        w = c + 1j * t
        return w, np.exp(self._log_F(w)) * STEP / (2 * math.pi)

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        out = np.empty(y.shape, dtype=complex)
        u = np.log(y)
        small = (u < 0) if self.same else np.zeros(y.shape, dtype=bool)
        for mask, nodes, add in ((small, self.left, 1.0), (~small, self.right, 0.0)):
            if mask.any():
                w, Fw = nodes
                E = np.exp(-np.multiply.outer(u[mask], w))
                out[mask] = E @ Fw + add
        return out

    def log_C(self, A: float) -> float:
        """log of (1/2pi) int |g(a+A+it)/g(b)| / |A+it| dt, so the kernel is <= C_A y^{-A}."""
        w = A + 1j * np.arange(-400.0, 400.0, STEP)
        lg = np.real(self._log_F(w))
        m = lg.max()
        return float(m + math.log(np.exp(lg - m).sum() * STEP / (2 * math.pi)))

    def length(self, t: float, sigma: float, tol: float) -> tuple[int, float]:
        """N with sum_{n>N} |a(n)| n^{-sigma} |V(n/t)| <= tol, using |a(n)| <= d_3(n) <= 4n."""
        lo = max(3, int(math.ceil(self.c_right)))
        logs_C = {A: self.log_C(A) for A in range(lo, lo + 60)}

        def bound(N):
            best = math.inf
            for A, lc in logs_C.items():
                expo = A + sigma - 2.0
                if expo <= 0:
                    continue
                val = math.log(4.0) + lc + A * math.log(t) - expo * math.log(N) - math.log(expo)
                best = min(best, val)
            return best

        N = 8
        while bound(N) > math.log(tol):
            N = int(N * 1.25) + 1
            if N > 10**7:
                raise ArithmeticError("sym^2 series does not reach the tolerance")
        return N, math.exp(bound(N))


def _smoothed(table: EigenformTable, s: complex, balance: float, tol: float) -> SymSquareValue:
    if not 0.5 <= balance <= 2.0:
        raise ValueError("balance must lie in [1/2, 2]")
    k = table.weight
    s = complex(s)
    V1 = _VKernel(k, s, s)
    V2 = _VKernel(k, 1 - s, s)
    N1, b1 = V1.length(balance, s.real, tol)
    N2, b2 = V2.length(1.0 / balance, 1 - s.real, tol)
    N = max(N1, N2)
    a = sym2_coefficients(table, N)[1:]
    n = np.arange(1, N + 1, dtype=float)
    logn = np.log(n)
    S1 = np.dot(a * np.exp(-s * logn), V1(n / balance))
    S2 = np.dot(a * np.exp((s - 1) * logn), V2(n * balance))
    return SymSquareValue(complex(S1 + S2), "smoothed_series", b1 + b2, N)


def _euler(table: EigenformTable, s: complex, P: int | None) -> SymSquareValue:
    s = complex(s)
    if s.real < EULER_MIN_S:
        raise ValueError(f"the Euler product route needs Re s >= {EULER_MIN_S}")
    P = table.N_max if P is None else P
    if P > table.N_max:
        raise TableTooShort(P, table.N_max)
    primes = arith.prime_sieve(P)
    logs = np.log(sym2_local(table.lam[primes], primes, s))
    val = np.exp(complex(math.fsum(logs.real) + 1j * math.fsum(logs.imag)))
    # each of the three Satake terms contributes |log(1 - z p^{-s})| <= p^{-s}/(1 - p^{-s})
    rel = 3.0 * prime_zeta_tail(s.real, P) / (1.0 - P ** -s.real)
    return SymSquareValue(complex(val), "euler_product", abs(val) * math.expm1(rel), P)


def sym_square_value(table: EigenformTable, s: complex, method: str = "smoothed_series", *,
                     P: int | None = None, balance: float = 1.0, tol: float = TAIL_TOL) -> SymSquareValue:
    if method == "euler_product":
        return _euler(table, s, P)
    if method == "smoothed_series":
        return _smoothed(table, s, balance, tol)
    raise ValueError(f"unknown method {method!r}; known: {METHODS}")


def sym_square_L(table: EigenformTable, s: complex, method: str = "smoothed_series", **kw) -> complex:
    """L(s, sym^2 f); real for real s."""
    val = sym_square_value(table, s, method, **kw).value
    return val.real if complex(s).imag == 0 else val


def sym_square_agreement(table: EigenformTable, s: float, P: int | None = None) -> float:
    """|euler_product - smoothed_series|; raises if it exceeds the combined bounds (plus roundoff)."""
    e = sym_square_value(table, s, "euler_product", P=P)
    v = sym_square_value(table, s, "smoothed_series")
    diff = abs(e.value - v.value)
    if diff > e.bound + v.bound + 1e-12 * abs(v.value):
        raise MethodDisagreement(f"s={s}: methods differ by {diff:.3e} > bounds {e.bound + v.bound:.3e}")
    return diff


@dataclass(frozen=True)
class SymSquareDerivative:
    value: float
    step_ratio: float
    coarse: float
    fine: float


def sym_square_derivative(table: EigenformTable, s: float = 1.0, h: float = 1e-3) -> SymSquareDerivative:
    """L'(s, sym^2 f) by Richardson-extrapolated central differences (steps h, h/2, h/4 for the order check)."""

    def central(step):
        return (sym_square_L(table, s + step) - sym_square_L(table, s - step)) / (2 * step)

    d1, d2, d4 = central(h), central(h / 2), central(h / 4)
    ratio = abs(d1 - d2) / max(abs(d2 - d4), 1e-300)
    return SymSquareDerivative(float((4 * d2 - d1) / 3), float(ratio), float(d1), float(d2))

"""Finite and truncated checks of the Euler-product identities behind the main terms.

Each checker evaluates both sides by separate routes and returns the defect.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import arith
from ..analysis.kernel import KernelBank
from ..analysis.special import zeta_real, zeta_restricted
from ..eigenform import EigenformTable, TableTooShort
from ..gauss import _prime_power, gauss_sum
from ..lfun import afe_value
from .local import EulerContext, local_E


# -- local inversion -----------------------------------------------------------


def local_inversion_check(table: EigenformTable, c: int, d_fund: int, s: complex) -> float:
    """|double divisor sum - product over p | c| for the local inversion identity."""
    if c < 1 or c > 10**4:
        raise ValueError("c must lie in [1, 1e4]")
    if complex(s).real <= 0:
        raise ValueError("need Re s > 0")
    s = complex(s)
    divs = arith.factorize(c).divisors()
    lhs = 0j
    for m in divs:
        mu_m = arith.mobius(m)
        if mu_m == 0:
            continue
        head = mu_m * float(table.lam[m]) * arith.kronecker(d_fund, m) * m ** (-s)
        for n in divs:
            if arith.mobius(m * n) == 0:
                continue
            lhs += head * arith.kronecker(d_fund, n * n) * n ** (-2 * s)
    rhs = 1 + 0j
    for p in arith.factorize(c).primes:
        chi = arith.kronecker(d_fund, p)
        rhs *= 1 - float(table.lam[p]) * chi * p ** (-s) + chi * chi * p ** (-2 * s)
    return abs(lhs - rhs)


# -- Z_1 -----------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesProduct:
    series: complex
    product: complex
    defect: float
    tail_estimate: float  # series truncation (average-order estimate)
    product_tail: float
    terms: int


def _check_a(a: int, ell: int) -> None:
    if a < 1 or math.gcd(a, 2 * ell) != 1:
        raise ValueError(f"need gcd(a, 2 ell) = 1; got a={a}, ell={ell}")


def _radical_phi_ratio(values: np.ndarray) -> np.ndarray:
    """prod_{p | v} (1 - 1/p) for an array of v (spf sieve)."""
    if values.size == 0:
        return np.ones(0)
    spf = arith.spf_table(int(values.max()))
    out = np.ones(values.shape)
    v = values.copy()
    last = np.zeros(values.shape, dtype=np.int64)
    while True:
        live = v > 1
        if not live.any():
            break
        p = spf[v[live]]
        new = p != last[live]
        idx = np.flatnonzero(live)
        out[idx[new]] *= 1.0 - 1.0 / p[new]
        last[idx] = p
        v[idx] = v[idx] // p
    return out


def Z1_series(table: EigenformTable, a: int, ell: int, gamma: complex, N_trunc: int) -> tuple[complex, float, int]:
    """sum over n <= N_trunc, (n, 2a) = 1, ell*n a square, of lam(n) n^{-1/2-gamma} phi(ell n)/(ell n)."""
    _check_a(a, ell)
    if N_trunc > table.N_max:
        raise TableTooShort(N_trunc, table.N_max)
    gamma = complex(gamma)
    ell1, _ = arith.split_squarefree(ell)
    M = math.isqrt(N_trunc // ell1)
    m = np.arange(1, M + 1, dtype=np.int64)
    m = m[(m % 2 == 1) & (np.gcd(m, a) == 1)]
    n = ell1 * m * m
    phi_ratio = _radical_phi_ratio(ell * m)  # phi(ell n)/(ell n), rad(ell n) = rad(ell m)
    terms = table.lam[n] * np.exp(-(0.5 + gamma) * np.log(n.astype(float))) * phi_ratio
    value = complex(math.fsum(terms.real) + 1j * math.fsum(terms.imag))
    # average order of tau(m^2) is (3/pi^2) log^2 m
    sig = 1.0 + 2.0 * gamma.real
    L = math.log(max(M, 2))
    e = sig - 1.0
    tail = (arith.divisor_count(ell1) * ell1 ** (-0.5 - gamma.real) * 3 / math.pi**2
            * max(M, 1) ** (-e) * (L * L / e + 2 * L / e**2 + 2 / e**3))
    return value, tail, int(n.size)


def A_factor_product(table: EigenformTable, a: int, ell: int, gamma: complex, P: int | None = None) -> tuple[complex, float]:
    """ell1^{-1/2-gamma} zeta_{2a}(2)^{-1} times the product defining the A-factor, truncated at P."""
    _check_a(a, ell)
    gamma = complex(gamma)
    P = table.N_max if P is None else P
    ctx = EulerContext(table, ell, P)
    primes = arith.prime_sieve(P)[1:]
    primes = primes[a % primes != 0]
    e1, e2, e3 = local_E(table.lam[primes], primes, gamma)
    pf = primes.astype(float)
    case1 = ctx.ell1 % primes == 0
    case2 = ~case1 & (ctx.ell2 % primes == 0)
    loc = np.where(case1, e1, np.where(case2, e2, e3 + 1.0 / (pf * pf - 1.0)))
    loc = loc * (1.0 - pf**-2)  # 1/zeta_{2a}(2) spread over p not dividing 2a
    logs = np.log(loc)
    total = complex(math.fsum(logs.real) + 1j * math.fsum(logs.imag))
    value = np.exp(total) * ctx.ell1 ** (-0.5 - gamma)
    # factors are 1 + O(3 p^{-1-2 Re gamma}); zeta_{2a}(2) tail is O(p^{-2})
    tail_exp = min(1.0 + 2.0 * gamma.real, 2.0)
    tail = abs(value) * 4.0 * 1.25506 * P ** (1 - tail_exp) / ((tail_exp - 1) * math.log(P))
    return complex(value), tail


def Z1_series_vs_product(ctx: EulerContext, a: int, gamma: complex, N_trunc: int) -> SeriesProduct:
    """Series definition of Z_1 against its closed Euler-product form."""
    if complex(gamma).real < 0.5:
        raise ValueError("the series side needs Re gamma >= 1/2")
    series, tail, terms = Z1_series(ctx.table, a, ctx.ell, gamma, N_trunc)
    product, ptail = A_factor_product(ctx.table, a, ctx.ell, gamma, ctx.P)
    return SeriesProduct(series, product, abs(series - product), tail, ptail, terms)


def Z1_zeta_normalised(table: EigenformTable, a: int, ell: int, gamma: complex, P: int | None = None) -> complex:
    """The same value with zeta_{2a}(2) taken from the restricted zeta function.

    The A-factor is truncated at P and its primes above P are completed exactly:
    prod_{p>P} (1 + 1/(p^2-1)) = zeta(2) prod_{p<=P} (1 - p^{-2}).
    """
    gamma = complex(gamma)
    P = table.N_max if P is None else P
    ctx = EulerContext(table, ell, P)
    all_primes = arith.prime_sieve(P)
    primes = all_primes[1:]
    primes = primes[a % primes != 0]
    e1, e2, e3 = local_E(table.lam[primes], primes, gamma)
    pf = primes.astype(float)
    case1 = ctx.ell1 % primes == 0
    case2 = ~case1 & (ctx.ell2 % primes == 0)
    loc = np.where(case1, e1, np.where(case2, e2, e3 + 1.0 / (pf * pf - 1.0)))
    A = np.exp(np.sum(np.log(loc)))
    completion = float(zeta_real(2.0)) * np.exp(np.sum(np.log1p(-all_primes.astype(float) ** -2.0)))
    zeta2a = float(zeta_restricted(2.0, [2] + arith.factorize(a).primes))
    return complex(A * completion * ctx.ell1 ** (-0.5 - gamma) / zeta2a)


# -- Z_2 -----------------------------------------------------------------------


@dataclass(frozen=True)
class FactorizationCheck:
    series: complex
    l_value: complex
    z3: complex
    defect: float
    k1: int
    terms: int


def _G_on_ell_n(k: int, ell: int, n: np.ndarray) -> np.ndarray:
    """G_k(ell n) for an array of odd n.

    Primes dividing k*ell are split off and evaluated through the prime-power
    closed form; on the remaining part, coprime to k, G_k is (k/m) sqrt(m) on
    squarefree m and 0 otherwise.
    """
    special = sorted(set(arith.factorize(abs(k)).primes + arith.factorize(ell).primes) - {2})
    rest = n.copy()
    head = np.ones(n.shape, dtype=complex)
    for p in special:
        b0 = arith.factorize(ell).exponent(p)
        e = np.zeros(n.shape, dtype=np.int64)
        while True:
            hit = rest % p == 0
            if not hit.any():
                break
            rest[hit] //= p
            e[hit] += 1
        for ee in np.unique(e):
            head[e == ee] *= _prime_power(k, p, int(ee) + b0)
    sf = arith.squarefree_flags(int(rest.max()))[rest]
    body = arith.jacobi_array(k, rest) * np.sqrt(rest.astype(float)) * sf
    return head * body


def Z2_series(table: EigenformTable, a: int, k: int, ell: int, gamma: complex, N_trunc: int) -> tuple[complex, int]:
    """sum_{n <= N_trunc, (n, 2a) = 1} lam(n) n^{-gamma} G_k(ell n)/n."""
    if N_trunc > table.N_max:
        raise TableTooShort(N_trunc, table.N_max)
    n = np.arange(1, N_trunc + 1, 2, dtype=np.int64)
    n = n[np.gcd(n, a) == 1]
    G = _G_on_ell_n(k, ell, n)
    keep = G != 0
    n, G = n[keep], G[keep]
    terms = table.lam[n] * np.exp(-(1.0 + complex(gamma)) * np.log(n.astype(float))) * G
    return complex(math.fsum(terms.real) + 1j * math.fsum(terms.imag)), int(n.size)


def Z3_product(table: EigenformTable, a: int, k: int, ell: int, gamma: complex, P: int | None = None) -> complex:
    """prod_p Z_{3,p}: the bare quadratic factor at p | 2a, times the finite G-weighted sum elsewhere."""
    gamma = complex(gamma)
    k1, _ = arith.squarefree_part_signed(k)
    P = table.N_max if P is None else P
    primes = arith.prime_sieve(P)
    lp = table.lam[primes]
    chi = arith.kronecker_array(k1, primes).astype(float)
    x = primes.astype(float) ** (-0.5 - gamma)
    quad = 1.0 - lp * chi * x + chi * chi * x * x
    # generic p (not dividing 2akl): 1 + chi^2 p^{-1-2g}(1 - lam^2) + lam chi^3 p^{-3/2-3g}
    factors = 1.0 + chi**2 * x * x * (1.0 - lp * lp) + lp * chi**3 * x**3
    fact_a = arith.factorize(a).primes
    fact_kl = sorted(set(arith.factorize(abs(k)).primes + arith.factorize(ell).primes))
    index = {int(p): i for i, p in enumerate(primes)}
    for p in set([2] + fact_a + fact_kl):
        if p > P:
            raise ValueError("prime cutoff below a prime dividing 2akl")
        i = index[p]
        if p == 2 or p in fact_a:
            factors[i] = quad[i]
            continue
        b0 = arith.factorize(ell).exponent(p)
        r_sum = 0j
        lam_pows = _hecke_powers(float(lp[i]), 40)
        for r in range(40):
            g = _prime_power(k, p, r + b0)
            if g:
                r_sum += lam_pows[r] * p ** (-r * gamma) * g / p**r
        factors[i] = quad[i] * r_sum
    logs = np.log(factors.astype(complex))
    return complex(np.exp(complex(math.fsum(logs.real) + 1j * math.fsum(logs.imag))))


def _hecke_powers(lp: float, count: int) -> list[float]:
    """lam(p^r) for r < count from the normalized Hecke recursion."""
    out = [1.0, lp]
    while len(out) < count:
        out.append(lp * out[-1] - out[-2])
    return out[:count]


def Z2_factorization_check(table: EigenformTable, a: int, k: int, ell: int, gamma: complex,
                           N_trunc: int = 10**6, bank: KernelBank | None = None) -> FactorizationCheck:
    """Direct n-sum for Z_2 against L(1/2 + gamma, f x chi_{k1}) * Z_3."""
    if k == 0:
        raise ValueError("k = 0 is the diagonal term, not covered here")
    if complex(gamma).real <= 0.5:
        raise ValueError("the series side needs Re gamma > 1/2")
    if a < 1 or math.gcd(a, 2 * ell) != 1 or ell < 1 or ell % 2 == 0:
        raise ValueError("need odd ell and gcd(a, 2 ell) = 1")
    k1, _ = arith.squarefree_part_signed(k)
    series, terms = Z2_series(table, a, k, ell, gamma, N_trunc)
    lval = afe_value(table, k1, gamma, bank or KernelBank()).value
    z3 = Z3_product(table, a, k, ell, gamma)
    return FactorizationCheck(series, lval, z3, abs(series - lval * z3), k1, terms)


def Z2_spot_check(k: int, ell: int, n: np.ndarray) -> float:
    """max |vectorised G_k(ell n) - gauss.gauss_sum(k, ell n)| over the given n."""
    fast = _G_on_ell_n(k, ell, np.asarray(n, dtype=np.int64))
    slow = np.array([gauss_sum(k, ell * int(v)).value for v in n])
    return float(np.max(np.abs(fast - slow)))


# -- per-prime identity for the (r1, r2, c) sum -------------------------------------


@dataclass(frozen=True)
class ComplicCheck:
    h_sum: complex
    closed: complex
    normalised: complex
    defect: float


def complic_local_check(table: EigenformTable, p: int, a_divisible: bool, gamma: complex,
                        ell: int = 1) -> ComplicCheck:
    """Per-prime form of the (r1, r2, c) identity.

    The four summands H(r1, r2), (r1, r2) in {0,1}^2, carry the weight (p,a)^2/p^2;
    H(1,1) vanishes because mu(r1 r2)^2 = 0.  E3 * sum H is compared with
    E3 - lam p^{-3-2g} E1 + p^{-3-2g} E2 (p not dividing a) or 1 (p | a), and the
    normalised value with (1 - 1/p^2)(E3 + 1/(p^2-1)).
    """
    if p == 2 or not arith.is_probable_prime(p):
        raise ValueError("p must be an odd prime")
    if ell % p == 0:
        raise ValueError("p must not divide 2 ell")
    gamma = complex(gamma)
    lp = float(table.lam[p])
    e1, e2, e3 = (complex(v) for v in local_E(lp, p, gamma))
    y = p ** (-1.0 - 2.0 * gamma)
    weight = 1.0 if a_divisible else 1.0 / p**2
    H = {(0, 0): 1.0, (1, 0): -lp * y * weight * e1 / e3, (0, 1): y * weight * e2 / e3, (1, 1): 0.0}
    h_sum = e3 * sum(H.values())
    if a_divisible:
        closed = 1.0 + 0j
        normalised = 1.0 + 0j
        target = 1.0 + 0j
    else:
        z = p ** (-3.0 - 2.0 * gamma)
        closed = e3 - lp * z * e1 + z * e2
        normalised = h_sum
        target = (1.0 - p**-2.0) * (e3 + 1.0 / (p * p - 1.0))
    defect = max(abs(h_sum - closed), abs(normalised - target))
    return ComplicCheck(complex(h_sum), complex(closed), complex(target), float(defect))

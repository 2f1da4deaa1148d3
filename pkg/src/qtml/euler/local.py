"""Local factors at a single prime."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import arith
from ..eigenform import EigenformTable


@dataclass(frozen=True)
class EulerContext:
    """Decomposition ell = ell1 * ell2^2 plus truncation settings for the Z-type products."""

    table: EigenformTable
    ell: int = 1
    P: int = 100_000
    N: int = 0

    def __post_init__(self):
        arith.split_squarefree(self.ell)
        if self.N < 0:
            raise ValueError("acceleration depth must be nonnegative")
        big = max([1] + arith.factorize(self.ell).primes)
        if self.P < max(big, 3):
            raise ValueError("prime cutoff must exceed every prime dividing 2*ell")
        if self.P > self.table.N_max:
            raise ValueError(f"prime cutoff {self.P} exceeds table length {self.table.N_max}")

    @property
    def ell1(self) -> int:
        return arith.split_squarefree(self.ell)[0]

    @property
    def ell2(self) -> int:
        return arith.split_squarefree(self.ell)[1]

    def case(self, p: int) -> int:
        """1 if p | ell1, 2 if p does not divide ell1 but divides ell2, 3 otherwise."""
        if p == 2:
            raise ValueError("p = 2 has no Z_p factor")
        if self.ell1 % p == 0:
            return 1
        if self.ell2 % p == 0:
            return 2
        return 3


@dataclass(frozen=True)
class LocalFactorTriple:
    p: int
    gamma: complex
    e1: complex
    e2: complex
    e3: complex


def _uv(lp, p, gamma):
    x = np.power(np.asarray(p, dtype=float), -(0.5 + gamma))
    u = 1.0 / (1.0 - lp * x + x * x)
    v = 1.0 / (1.0 + lp * x + x * x)
    return x, u, v


def local_E(lp, p, gamma):
    """E1, E2, E3 at prime(s) p with eigenvalue(s) lp; vectorised in (lp, p)."""
    p_arr = np.asarray(p, dtype=float)
    x, u, v = _uv(lp, p_arr, gamma)
    w = p_arr / (p_arr + 1.0)
    e1 = w * 0.5 * (u - v) / x
    e2 = w * 0.5 * (u + v)
    e3 = 1.0 + w * (0.5 * (u + v) - 1.0)
    return e1, e2, e3


def local_triple(table: EigenformTable, p: int, gamma: complex) -> LocalFactorTriple:
    if p == 2 or not arith.is_probable_prime(p):
        raise ValueError("local factors need an odd prime")
    e1, e2, e3 = local_E(float(table.lam[p]), p, complex(gamma))
    return LocalFactorTriple(p, complex(gamma), complex(e1), complex(e2), complex(e3))


def local_Z_factor(ctx: EulerContext, p: int, gamma: complex) -> complex:
    """Z_p(1/2 + gamma, ell) routed by the divisibility of ell."""
    t = local_triple(ctx.table, p, gamma)
    return {1: t.e1, 2: t.e2, 3: t.e3}[ctx.case(p)]


def sym2_local(lp, p, s):
    """Local factor of L(s, sym^2 f): [(1 - (lam^2-2) y + y^2)(1 - y)]^{-1}, y = p^{-s}."""
    y = np.power(np.asarray(p, dtype=float), -np.asarray(s, dtype=complex))
    return 1.0 / ((1.0 - (lp * lp - 2.0) * y + y * y) * (1.0 - y))


def sym2_coefficient_powers(lp: float, e_max: int) -> list[float]:
    """Dirichlet coefficients A_0..A_e of the sym^2 local factor at one prime."""
    c = lp * lp - 1.0
    A = [1.0, c, c * c - c]
    while len(A) <= e_max:
        A.append(c * A[-1] - c * A[-2] + A[-3])
    return A[: e_max + 1]

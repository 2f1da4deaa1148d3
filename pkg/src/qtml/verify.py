"""Randomised and systematic identity checks, grouped into named suites."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import arith
from .analysis.kernel import KernelBank
from .analysis.window import default_window
from .eigenform import EigenformTable
from .euler import (EulerContext, Z1_series_vs_product, Z2_factorization_check, ZN_accelerated,
                    complic_local_check, local_inversion_check)
from .gauss import gauss_sum, gauss_sum_brute, poisson_check
from .lfun import afe_value, is_fundamental

SUITES = ("gauss", "poisson", "afe", "local", "z1", "z2", "complic", "zn")
NEEDS_TABLE = {"afe", "local", "z1", "z2", "complic", "zn"}


@dataclass(frozen=True)
class Case:
    label: str
    defect: float
    tol: float

    @property
    def ok(self) -> bool:
        return bool(self.defect < self.tol)


def _gauss(table, rng):
    out = []
    for _ in range(300):
        n = int(rng.integers(0, 750)) * 2 + 1
        k = int(rng.integers(-60, 61))
        out.append(Case(f"k={k} n={n}", abs(gauss_sum(k, n).value - gauss_sum_brute(k, n)), 1e-8))
    return out


def _poisson(table, rng):
    w = default_window().shifted(0.5)
    return [Case(f"n={n} Z={Z}", poisson_check(w, n, Z).defect, 1e-6) for n in (1, 3, 15, 105) for Z in (50, 200)]


def _afe(table, rng):
    out = []
    unit, simple = KernelBank("unit"), KernelBank("simple", width=4.0)
    ds = arith.SquarefreeStream(1, 300).array()
    for d in rng.choice(ds, 10, replace=False):
        D = 8 * int(d)
        for a in (0.0, 0.02):
            u = afe_value(table, D, a, unit).value
            s = afe_value(table, D, a, simple).value
            b = afe_value(table, D, a, unit, balance=1.3).value
            scale = max(abs(u), 1e-3)
            out.append(Case(f"d={d} a={a} G", abs(u - s) / scale, 1e-8))
            out.append(Case(f"d={d} a={a} balance", abs(u - b) / scale, 1e-8))
    return out


def _local(table, rng):
    out = []
    funds = [D for D in range(-200, 201) if D not in (0, 1) and is_fundamental(D)]
    for _ in range(100):
        c = int(rng.integers(1, 10**4 + 1))
        D = int(rng.choice(funds))
        s = complex(rng.uniform(0.2, 2.0), rng.uniform(-5, 5))
        out.append(Case(f"c={c} D={D} s={s:.3f}", local_inversion_check(table, c, D, s), 1e-10))
    return out


def _z1(table, rng):
    out = []
    for ell in (1, 3, 45):
        for a in (1, 5):
            if math.gcd(a, 2 * ell) != 1:
                continue
            r = Z1_series_vs_product(EulerContext(table, ell, table.N_max), a, 0.6, table.N_max)
            out.append(Case(f"ell={ell} a={a}", r.defect, 1e-5))
    return out


def _z2(table, rng):
    bank = KernelBank()
    cases = [(1, 1, 1), (1, -1, 1), (1, 3, 1), (5, 2, 3), (3, 5, 1)]
    return [Case(f"a={a} k={k} ell={ell}", Z2_factorization_check(table, a, k, ell, 0.75, table.N_max, bank).defect,
                 1e-4) for a, k, ell in cases]


def _complic(table, rng):
    out = []
    for p in arith.prime_sieve(100)[1:]:
        for g in (0.3, 0.7):
            for div in (False, True):
                out.append(Case(f"p={p} g={g} p|a={div}", complic_local_check(table, int(p), div, g).defect, 1e-12))
    return out


def _zn(table, rng):
    out = []
    P = table.N_max
    for ell in (1, 45):
        ctx = EulerContext(table, ell, P)
        vals = [ZN_accelerated(ctx, 0.0, N, P, tol=None).value for N in (0, 1, 2)]
        for N in (0, 1):
            out.append(Case(f"ell={ell} N={N} vs 2", abs(vals[N] / vals[2] - 1), 1e-6))
    return out


_RUNNERS: dict[str, Callable] = {"gauss": _gauss, "poisson": _poisson, "afe": _afe, "local": _local,
                                 "z1": _z1, "z2": _z2, "complic": _complic, "zn": _zn}


def run_suite(name: str, table: EigenformTable | None, seed: int = 0) -> list[Case]:
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; known: {SUITES}")
    if name in NEEDS_TABLE and table is None:
        raise ValueError(f"suite {name} needs an eigenform table")
    return _RUNNERS[name](table, np.random.default_rng(seed))

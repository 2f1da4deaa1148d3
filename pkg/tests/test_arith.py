import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtml import arith


def legendre_euler(a, p):
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def jacobi_by_factoring(a, n):
    out = 1
    for p, e in arith.factorize(n).factors:
        out *= legendre_euler(a, p) ** e
    return out


@given(st.integers(1, 10**12))
@settings(max_examples=200, deadline=None)
def test_factorize_roundtrip(n):
    fac = arith.factorize(n)
    assert math.prod(p**e for p, e in fac.factors) == n
    assert all(arith.is_probable_prime(p) for p in fac.primes)


def test_factorize_large_semiprime():
    p, q = 1_000_003, 998_244_353
    assert arith.factorize(p * q).factors == ((p, 1), (q, 1))


def test_factorize_rejects_nonpositive():
    with pytest.raises(ValueError):
        arith.factorize(0)


@given(st.integers(-10**6, 10**6), st.integers(0, 5000).map(lambda k: 2 * k + 1))
@settings(max_examples=300, deadline=None)
def test_jacobi_matches_factored_euler_criterion(a, n):
    assert arith.jacobi(a, n) == jacobi_by_factoring(a, n)


@given(st.integers(-500, 500), st.integers(-500, 500), st.integers(1, 500))
@settings(max_examples=200, deadline=None)
def test_kronecker_completely_multiplicative_in_top(a, b, n):
    assert arith.kronecker(a * b, n) == arith.kronecker(a, n) * arith.kronecker(b, n)


@given(st.integers(1, 400), st.integers(1, 400))
@settings(max_examples=200, deadline=None)
def test_kronecker_multiplicative_in_bottom(m, n):
    for D in (8, -4, 5, 12, -7, 24):
        assert arith.kronecker(D, m * n) == arith.kronecker(D, m) * arith.kronecker(D, n)


def test_kronecker_two_rule():
    assert [arith.kronecker(a, 2) for a in (1, 3, 5, 7, 4)] == [1, -1, -1, 1, 0]


def test_kronecker_array_matches_scalar():
    n = np.arange(1, 3000)
    for top in (8, 24, -4, 5, -3, 1):
        fast = arith.kronecker_array(top, n)
        assert all(fast[i] == arith.kronecker(top, int(v)) for i, v in enumerate(n))


def test_chi_8d_is_periodic_mod_8d():
    d = 15
    n = np.arange(1, 8 * d * 3 + 1)
    vals = arith.kronecker_array(8 * d, n)
    assert np.array_equal(vals[: 8 * d], vals[8 * d : 16 * d])


def test_multiplicative_functions_small():
    assert [arith.mobius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
    assert arith.euler_phi(36) == 12
    assert arith.divisor_count(360) == 24
    assert arith.sigma_k(12, 11) == sum(d**11 for d in (1, 2, 3, 4, 6, 12))


def test_tables_match_scalar_routines():
    mu = arith.mobius_table(2000)
    tau = arith.divisor_count_table(2000)
    sf = arith.squarefree_flags(2000)
    for n in range(1, 2001):
        assert mu[n] == arith.mobius(n)
        assert tau[n] == arith.divisor_count(n)
        assert sf[n] == arith.is_squarefree(n)


def test_spf_table():
    spf = arith.spf_table(5000)
    for n in range(2, 5001):
        assert spf[n] == arith.factorize(n).primes[0]


@given(st.integers(0, 10**5).map(lambda k: 2 * k + 1))
def test_split_squarefree(ell):
    l1, l2 = arith.split_squarefree(ell)
    assert l1 * l2 * l2 == ell and arith.is_squarefree(l1)


def test_split_squarefree_rejects_even():
    with pytest.raises(ValueError):
        arith.split_squarefree(6)


@pytest.mark.parametrize("k,expected", [(1, (1, 2)), (-1, (-4, 1)), (2, (8, 1)), (3, (12, 1)), (5, (5, 2)),
                                        (9, (1, 6)), (-3, (-3, 2))])
def test_squarefree_part_signed(k, expected):
    assert arith.squarefree_part_signed(k) == expected


def test_squarefree_stream():
    got = arith.SquarefreeStream(100, 400).array()
    want = [n for n in range(100, 401) if n % 2 and arith.is_squarefree(n)]
    assert got.tolist() == want
    assert list(arith.SquarefreeStream(1, 20, odd_only=False)) == [n for n in range(1, 21) if arith.is_squarefree(n)]

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtml.analysis.window import default_window
from qtml.gauss import gauss_sum, gauss_sum_brute, gauss_sum_brute_many, poisson_check

odd = st.integers(0, 700).map(lambda k: 2 * k + 1)


@given(st.integers(-200, 200), odd)
@settings(max_examples=300, deadline=None)
def test_closed_form_matches_brute(k, n):
    assert abs(gauss_sum(k, n).value - gauss_sum_brute(k, n)) < 1e-9


@given(st.integers(-100, 100), odd, odd)
@settings(max_examples=200, deadline=None)
def test_multiplicative_in_n(k, m, n):
    if math.gcd(m, n) != 1:
        return
    assert abs(gauss_sum(k, m * n).value - gauss_sum(k, m).value * gauss_sum(k, n).value) < 1e-8 * (m * n)


def test_k_zero_is_phi_on_squares():
    for n in range(1, 200, 2):
        want = (sum(1 for a in range(n) if math.gcd(a, n) == 1) if math.isqrt(n) ** 2 == n else 0)
        assert abs(gauss_sum(0, n).value - want) < 1e-9


def test_real_valued():
    vals = gauss_sum_brute_many(np.arange(-30, 31), 105)
    assert np.max(np.abs(vals.imag)) < 1e-10


def test_squarefree_coprime_value():
    # G_k(p) = (k/p) sqrt(p) for p not dividing k
    assert abs(gauss_sum(5, 7).value - (-1) * math.sqrt(7)) < 1e-12


def test_even_n_rejected():
    with pytest.raises(ValueError):
        gauss_sum(1, 4)


@pytest.mark.parametrize("n", [1, 3, 15, 105])
@pytest.mark.parametrize("Z", [50, 200])
def test_poisson_shifted_window(n, Z):
    # the shift breaks the symmetry that makes the plain bump sum vanish for n = 3, 15
    res = poisson_check(default_window().shifted(0.5), n, Z)
    assert abs(res.lhs) > 1e-12
    assert res.defect < 1e-12

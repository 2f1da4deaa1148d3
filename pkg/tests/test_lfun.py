import math

import numpy as np
import pytest

from qtml import arith
from qtml.analysis.kernel import KernelBank
from qtml.analysis.special import digamma
from qtml.eigenform import TableTooShort
from qtml.lfun import (TwistPoint, afe_value, central_derivative, central_value, derivative_routes, fe_residual,
                       is_fundamental, root_factor)

SAMPLE_D = [1, 3, 5, 7, 11, 13, 15, 19, 21, 23, 29, 31, 33, 35, 37, 39, 41, 101, 199, 299]


def test_is_fundamental():
    assert [D for D in range(-20, 30) if is_fundamental(D)] == [
        -20, -19, -15, -11, -8, -7, -4, -3, 1, 5, 8, 12, 13, 17, 21, 24, 28, 29]


def test_twist_point_validation():
    with pytest.raises(ValueError):
        TwistPoint(9, 0.0, 12)
    with pytest.raises(ValueError):
        TwistPoint(3, 0.3, 12)
    assert TwistPoint(15, 0, 12).discriminant == 120


def test_root_factor_at_zero():
    assert root_factor(12, 0.0, 8) == 1
    assert root_factor(18, 0.0, 8) == -1


def test_balance_invariance(table12, bank):
    for d in (1, 15, 101):
        for a in (0.0, 0.02, 0.1 + 1j):
            u = afe_value(table12, 8 * d, a, bank).value
            v = afe_value(table12, 8 * d, a, bank, balance=1.6).value
            assert abs(u - v) < 1e-10


def test_weight_18_vanishing(table18, bank):
    for d in SAMPLE_D[:10]:
        assert abs(central_value(table18, TwistPoint(d, 0.0, 18), bank).value) < 1e-10


def test_fe_residual(table12, bank):
    for d in (3, 47, 151):
        assert fe_residual(table12, d, 0.02, bank) < 1e-10


def test_log_derivative_identity_weight_12(table12, bank):
    # root number +1: Lambda(1/2 + a) is even in a, so L'/L(1/2) = -log(q/2pi) - psi(k/2)
    for d in (1, 5, 23):
        L = central_value(table12, TwistPoint(d, 0.0, 12), bank).value.real
        dL = central_derivative(table12, d, bank)
        want = -math.log(8 * d / (2 * math.pi)) - digamma(6.0).real
        assert abs(dL / L - want) < 1e-8


def test_derivative_routes_agree(table18, bank):
    for d in (1, 7, 35):
        fd, step, an = derivative_routes(table18, d, bank)
        assert abs(fd - an) < 1e-9
        assert abs(an.imag) < 1e-12


def test_central_value_of_delta(table12, bank):
    # with D = 1 the value is L(Delta, 6) in the classical normalisation, 0.792122838646...
    val = afe_value(table12, 1, 0.0, bank).value
    assert abs(val.imag) < 1e-14
    assert abs(val.real - 0.792122838646) < 1e-11


def test_table_too_short(small12, bank):
    with pytest.raises(TableTooShort):
        afe_value(small12, 8 * 997, 0.0, bank)


def test_non_fundamental_rejected(table12, bank):
    with pytest.raises(ValueError):
        afe_value(table12, 9, 0.0, bank)

import math

import numpy as np
import pytest

from qtml import arith
from qtml.analysis.special import digamma
from qtml.analysis.window import default_window, mellin
from qtml.euler import EulerContext, ZN_accelerated
from qtml.euler.symsquare import sym_square_L
from qtml.moment import (MainTermModel, MomentRequest, brute_moment, derivative_bracket, derivative_brute_moment,
                         gamma_alpha, residual_analysis, run_moment)


@pytest.fixture(scope="module")
def model12(table12):
    return MainTermModel(table12)


def test_gamma_alpha_at_zero():
    assert gamma_alpha(12, 0.0) == 1


def test_alpha_zero_reduction(model12, table12):
    X = 1000.0
    first = model12.first_term(0.0, X)
    assert abs(model12(0.0, X) - 2 * first) < 1e-15 * abs(first)
    L = sym_square_L(table12, 1.0)
    Z = ZN_accelerated(EulerContext(table12, 1, 10**6), 0.0, 1, tol=None).value
    want = 8 * mellin(default_window(), 1.0) * L * Z * X / math.pi**2
    assert abs(model12(0.0, X) - want) < 1e-13 * abs(want)


def test_ell1_scaling(table12):
    m1, m5 = MainTermModel(table12, 1), MainTermModel(table12, 5)
    Z1 = m1.arithmetic(0.0).Z
    Z5 = m5.arithmetic(0.0).Z
    ratio = m5(0.0, 500.0) / m1(0.0, 500.0)
    assert abs(ratio - Z5 / Z1 / math.sqrt(5)) < 1e-14


def test_window_shift_identity(model12):
    for X in (250.0, 1000.0):
        a = 1 / math.log(X)
        assert abs(model12.second_term(a, X) / model12.second_term_by_shift(a, X) - 1) < 1e-9


def test_richardson_limit(model12):
    X = 1000.0
    # X**-alpha makes the quadratic term large, so keep the steps small
    vals = [model12(h, X).real for h in (1e-4, 1e-5)]
    limit = (10 * vals[1] - vals[0]) / 9
    assert abs(limit / model12(0.0, X).real - 1) < 1e-6


def test_weight_2_mod_4_main_term_vanishes_at_zero(table18):
    assert abs(MainTermModel(table18)(0.0, 500.0)) < 1e-13


def test_request_validation():
    with pytest.raises(ValueError):
        MomentRequest(12, (), derivative=False)
    with pytest.raises(ValueError):
        MomentRequest(12, (250.0,), derivative=True)
    with pytest.raises(ValueError):
        MomentRequest(12, (1000.0,), alpha=0.5)
    with pytest.raises(ValueError):
        MomentRequest(12, (500.0, 250.0))


def test_empty_range_gives_zero(table12, bank):
    req = MomentRequest(12, (0.4,))
    assert brute_moment(req, table12, bank)[0][1] == 0


def test_square_ell_routes_positive_weights(table12, bank):
    req = MomentRequest(12, (60.0,), ell=9)
    for d in req.d_range(60.0):
        if math.gcd(int(d), 3) == 1:
            assert arith.kronecker(8 * int(d), 9) == 1
    assert brute_moment(req, table12, bank)[0][1].real > 0


def test_parallel_is_bit_identical(table12, bank):
    one = brute_moment(MomentRequest(12, (120.0,), workers=1), table12, bank)
    four = brute_moment(MomentRequest(12, (120.0,), workers=4), table12, bank)
    assert one[0][1] == four[0][1]


def test_X250_self_oracle(table12, bank):
    base = brute_moment(MomentRequest(12, (250.0,)), table12, bank)[0][1]
    finer = brute_moment(MomentRequest(12, (250.0,), afe_tol=1e-14), table12, bank)[0][1]
    assert abs(base - finer) < 1e-6 * 250


def test_derivative_summands_real_and_moment_positive(table18, bank):
    req = MomentRequest(18, (250.0,), derivative=True)
    (X, val), = derivative_brute_moment(req, table18, bank)
    assert val > 0


def test_bracket_structure(table18):
    b1 = derivative_bracket(table18, None, 1000.0)
    b2 = derivative_bracket(table18, None, 2000.0)
    assert abs((b2.total - b1.total) - math.log(2)) < 1e-12
    assert b1.digamma_term == pytest.approx(float(np.real(digamma(9.0))), abs=1e-15)
    alt = derivative_bracket(table18, None, 1000.0, h=5e-4)
    assert abs(alt.total - b1.total) < 1e-6


def test_bracket_is_alpha_derivative_of_main_term(table18):
    model = MainTermModel(table18)
    X = 1000.0
    fd = [(model(h, X) - model(-h, X)).real / (2 * h) for h in (2e-3, 1e-3)]
    rich = (4 * fd[1] - fd[0]) / 3
    assert abs(rich / derivative_bracket(table18, None, X).value(X) - 1) < 1e-6


def test_residual_planted_slope():
    X = [250.0, 500.0, 1000.0, 2000.0]
    out = residual_analysis(X, [0.3 * x**0.5 for x in X])
    assert abs(out["slope"] - 0.5) < 1e-12
    assert not out["norm_flag"]


def test_residual_zero_is_noise_floor():
    out = residual_analysis([1.0, 2.0, 3.0], [0.0, 0.0, 0.0])
    assert out["slope"] is None and out["noise_floor"]


def test_report_csv_schema(table12, bank):
    rep = run_moment(MomentRequest(12, (40.0, 60.0, 80.0)), table12, bank)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "# qtml v1" and lines[1] == "X,M,MT,R,R_norm" and len(lines) == 5
    assert "fit" in rep.to_json()

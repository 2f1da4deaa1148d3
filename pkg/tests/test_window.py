import math

import numpy as np
import pytest
from scipy import integrate

from qtml.analysis.window import (WindowSpec, default_window, fourier_type, gauss_legendre_mellin, mellin,
                                  mellin_derivative, window_from_tag)


def test_bump_support_and_positivity():
    w = default_window()
    x = np.linspace(0, 3, 3001)
    v = w(x)
    assert np.all(v[(x <= 1) | (x >= 2)] == 0)
    assert np.all(v[(x > 1.01) & (x < 1.99)] > 0)


@pytest.mark.parametrize("s", [1.0, 0.71, 1.29, 1 + 2j, 0.5 - 1j])
def test_mellin_routes_agree(s):
    w = default_window()
    assert abs(mellin(w, s) - gauss_legendre_mellin(w, s, nodes=600)) < 1e-12


def test_mellin_derivative_matches_difference():
    w = default_window()
    h = 1e-4
    fd = (mellin(w, 1 + h) - mellin(w, 1 - h)) / (2 * h)
    assert abs(mellin_derivative(w, 1.0) - fd) < 1e-9


def test_shifted_window_mellin_is_translated():
    w = default_window()
    z = -0.3
    assert abs(mellin(w.shifted(z), 1.0) - mellin(w, 1.0 + z)) < 1e-14


def test_fourier_type_matches_plain_quadrature():
    w = default_window()
    for y in (0.0, 0.37, 5.0, 40.0):
        f = lambda x: (math.cos(2 * math.pi * x * y) + math.sin(2 * math.pi * x * y)) * float(w(np.array([x]))[0])
        want = integrate.quad(f, 1, 2, limit=800, epsabs=1e-15)[0]
        assert abs(fourier_type(w, y) - want) < 1e-12


def test_window_validation():
    with pytest.raises(ValueError):
        WindowSpec(2.0, 1.0, lambda x: x)
    with pytest.raises(ValueError):
        window_from_tag("box")

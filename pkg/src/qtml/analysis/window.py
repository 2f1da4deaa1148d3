"""Smooth compactly supported test windows and their transforms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import integrate

QUAD_EPSABS = 1e-14
QUAD_EPSREL = 1e-13


def _bump(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    inside = (x > 1.0) & (x < 2.0)
    xi = x[inside]
    out[inside] = np.exp(-1.0 / ((xi - 1.0) * (2.0 - xi)))
    return out


@dataclass(frozen=True)
class WindowSpec:
    """A window Phi supported in [x_lo, x_hi], optionally multiplied by x**shift."""

    x_lo: float
    x_hi: float
    evaluator: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)
    shift: complex = 0.0
    tag: str = "bump"

    def __post_init__(self):
        if not 0.0 < self.x_lo < self.x_hi:
            raise ValueError("window support must satisfy 0 < x_lo < x_hi")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        base = self.evaluator(x)
        if self.shift == 0:
            return base
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(x > 0, np.power(np.where(x > 0, x, 1.0), self.shift), 0.0)
        return base * factor

    def shifted(self, z: complex) -> "WindowSpec":
        """The window x**z * Phi(x)."""
        return replace(self, shift=self.shift + z)


def default_window() -> WindowSpec:
    """exp(-1/((x-1)(2-x))) on (1, 2)."""
    return WindowSpec(1.0, 2.0, _bump, 0.0, "bump")


WINDOWS = {"bump": default_window}


def window_from_tag(tag: str) -> WindowSpec:
    try:
        return WINDOWS[tag]()
    except KeyError:
        raise ValueError(f"unknown window {tag!r}; known: {sorted(WINDOWS)}") from None


def _quad_complex(f, a: float, b: float, **kw) -> complex:
    re = integrate.quad(lambda x: f(x).real, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=400, **kw)[0]
    im = integrate.quad(lambda x: f(x).imag, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=400, **kw)[0]
    return complex(re, im)


def mellin(window: WindowSpec, s: complex, log_power: int = 0) -> complex:
    """Integral of Phi(x) x^{s-1} (log x)^log_power over the support (adaptive Gauss-Kronrod)."""
    s = complex(s)

    def f(x):
        val = complex(window(np.array([x]))[0]) * x ** (s - 1.0)
        return val * math.log(x) ** log_power if log_power else val

    return _quad_complex(f, window.x_lo, window.x_hi)


def mellin_derivative(window: WindowSpec, s: complex) -> complex:
    """d/ds of the Mellin transform, as the log-weighted integral."""
    return mellin(window, s, log_power=1)


def fourier_type(window: WindowSpec, y: float) -> float:
    """Integral of (cos(2 pi x y) + sin(2 pi x y)) Phi(x) dx for a real window."""
    if window.shift != 0 and complex(window.shift).imag != 0:
        raise ValueError("fourier_type expects a real-valued window")
    f = lambda x: float(window(np.array([x]))[0])  # noqa: E731
    lo, hi = window.x_lo, window.x_hi
    if y == 0:
        return integrate.quad(f, lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=400)[0]
    w = 2.0 * math.pi * y
    opts = dict(epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=400, wvar=w)
    c = integrate.quad(f, lo, hi, weight="cos", **opts)[0]
    s = integrate.quad(f, lo, hi, weight="sin", **opts)[0]
    return c + s


def gauss_legendre_mellin(window: WindowSpec, s: complex, nodes: int = 400, log_power: int = 0) -> complex:
    """Fixed-order Gauss-Legendre version of ``mellin`` (used to cross-check resolutions)."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    lo, hi = window.x_lo, window.x_hi
    xs = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    vals = window(xs) * xs ** (complex(s) - 1.0) * np.log(xs) ** log_power
    return complex(0.5 * (hi - lo) * np.dot(w, vals))

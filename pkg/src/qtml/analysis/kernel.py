"""The smoothing weight of the approximate functional equation.

    omega_alpha(xi) = (1/2 pi i) int_(c) G(s)/s g_alpha(s) xi^{-s} ds,
    g_alpha(s) = (2 pi)^{-s} Gamma(k/2 + alpha + s) / Gamma(k/2 + alpha).

``KernelCache`` tabulates omega on a uniform grid in log xi (trapezoid rule on a
vertical line, computed as one matrix product) and interpolates with cubic
Hermite polynomials.  ``omega_kernel`` is an independent adaptive-quadrature
evaluation used as the oracle.
"""
from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy import special as sp

from .special import digamma, loggamma, zeta_complex

G_TAGS = ("unit", "simple", "zeta_damped")
KINDS = ("omega", "dalpha")
MIN_TARGET_ERR = 1e-14
STEP = 0.1  # trapezoid step on the vertical line
CONTOUR = 1.0
LOG_DROP = 52.0  # truncate the line where |integrand| < e^-52 * max


class KernelError(RuntimeError):
    pass


def _zeta_block(alpha: complex, s):
    return zeta_complex(2 + 4 * alpha + 4 * s) * (1 + 4 * alpha + 4 * s) * (1 - 4 * alpha - 4 * s)


def G_variant(tag: str, alpha: complex, s, width: float = 1.0):
    """Admissible even weight G(s) with G(0) = 1.

    ``unit`` is G = 1, ``simple`` is exp(s^2/width^2), ``zeta_damped`` multiplies
    the latter by the normalized zeta blocks.
    """
    s = np.asarray(s, dtype=complex)
    if tag == "unit":
        out = np.ones(s.shape, dtype=complex)
    elif tag == "simple":
        out = np.exp(s * s / width**2)
    elif tag == "zeta_damped":
        a = complex(alpha)
        num = _zeta_block(a, s) * _zeta_block(a, -s) * _zeta_block(-a, s) * _zeta_block(-a, -s)
        den = (_zeta_block(a, 0.0) * _zeta_block(-a, 0.0)) ** 2
        out = np.exp(s * s / width**2) * num / den
    else:
        raise ValueError(f"unknown G variant {tag!r}; known: {G_TAGS}")
    return out[()] if out.ndim == 0 else out


def g_factor(weight: int, alpha: complex, s):
    """(2 pi)^{-s} Gamma(k/2 + alpha + s) / Gamma(k/2 + alpha)."""
    s = np.asarray(s, dtype=complex)
    a = weight / 2 + complex(alpha)
    out = np.exp(-s * math.log(2 * math.pi) + loggamma(a + s) - loggamma(a))
    return out[()] if out.ndim == 0 else out


def _integrand(weight, alpha, tag, width, kind, s):
    """G(s)/s g_alpha(s), times psi(k/2+alpha+s) - psi(k/2+alpha) for the alpha-derivative."""
    F = G_variant(tag, alpha, s, width) * g_factor(weight, alpha, s) / s
    if kind == "dalpha":
        if tag == "zeta_damped":
            raise KernelError("alpha-derivative kernel needs an alpha-independent G")
        a = weight / 2 + complex(alpha)
        F = F * (digamma(a + s) - digamma(a))
    return F


def _line_nodes(weight, alpha, tag, width, kind, c, step=STEP):
    """Trapezoid nodes on Re s = c, truncated where the integrand is negligible."""
    probe = np.arange(0.0, 600.0, 1.0)
    logs = []
    for sign in (1.0, -1.0):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            F = _integrand(weight, alpha, tag, width, kind, c + 1j * sign * probe)
            logs.append(np.log(np.abs(F)))
    lg = np.nan_to_num(np.maximum(logs[0], logs[1]), nan=-np.inf, neginf=-np.inf, posinf=np.inf)
    if np.isposinf(lg).any() or not np.isfinite(lg).any():
        raise KernelError("integrand overflows or vanishes on the contour")
    top = lg[np.isfinite(lg)].max()
    live = np.flatnonzero(lg > top - LOG_DROP)
    T = float(probe[live[-1]] + 2.0)
    if T >= probe[-1]:
        raise KernelError("vertical-line integrand does not decay")
    t = np.arange(-T, T + step / 2, step)
    s = c + 1j * t
    F = _integrand(weight, alpha, tag, width, kind, s)
    return s, F * step / (2 * math.pi)


def _line_sum(s, Fw, u, with_slope):
    """Sum_k Fw_k exp(-s_k u) and (optionally) its u-derivative, chunked over u."""
    vals = np.empty(u.shape, dtype=complex)
    slopes = np.empty(u.shape, dtype=complex) if with_slope else None
    Fs = Fw * s
    for lo in range(0, u.size, 1024):
        E = np.exp(-np.multiply.outer(u[lo : lo + 1024], s))
        vals[lo : lo + 1024] = E @ Fw
        if with_slope:
            slopes[lo : lo + 1024] = -(E @ Fs)
    return vals, slopes


def log_decay_constants(weight, alpha, tag="unit", width=1.0, kind="omega", A_max=80):
    """log C_A for A = 1..A_max, C_A = (1/2pi) int |G g_alpha / s| on Re s = A.

    |omega(xi)| <= C_A xi^{-A} for every xi > 0.
    """
    out = np.full(A_max + 1, np.inf)
    for A in range(1, A_max + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                s, Fw = _line_nodes(weight, alpha, tag, width, kind, float(A), step=0.05)
        except (KernelError, FloatingPointError, OverflowError):
            continue
        absF = np.abs(Fw)
        if np.all(np.isfinite(absF)) and absF.sum() > 0:
            out[A] = math.log(absF.sum())
    return out


def omega_kernel(weight: int, alpha: complex, tag: str, xi: float, width: float = 1.0,
                 kind: str = "omega") -> complex:
    """omega_alpha(xi) by adaptive quadrature (oracle route).

    Uses scipy's log-gamma and QUADPACK, independently of the cached trapezoid.
    For xi < 1 the contour sits at Re s = -1 and the residue at s = 0 is added.
    """
    if xi <= 0:
        raise ValueError("xi must be positive")
    c = CONTOUR if xi >= 1 else -CONTOUR
    a = weight / 2 + complex(alpha)
    log2pi = math.log(2 * math.pi)
    logxi = math.log(xi)

    def F(t):
        s = complex(c, t)
        val = G_variant(tag, alpha, s, width) / s * np.exp(-s * log2pi + sp.loggamma(a + s) - sp.loggamma(a))
        if kind == "dalpha":
            val *= sp.digamma(a + s) - sp.digamma(a)
        return complex(val * np.exp(-s * logxi)) / (2 * math.pi)

    s_nodes, _ = _line_nodes(weight, alpha, tag, width, kind, c)
    T = float(s_nodes[-1].imag)
    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=2000)
    with warnings.catch_warnings():
        # roundoff warnings are expected once the value is ~1e-15
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re = integrate.quad(lambda t: F(t).real, -T, T, **opts)[0]
        im = integrate.quad(lambda t: F(t).imag, -T, T, **opts)[0]
    val = complex(re, im)
    if c < 0 and kind == "omega":
        val += 1.0
    return val


@dataclass(frozen=True, eq=False)
class KernelCache:
    """omega (or its alpha-derivative) on a uniform log-xi grid with Hermite interpolation."""

    weight: int
    alpha: complex
    tag: str
    width: float
    kind: str
    u0: float
    du: float
    values: np.ndarray = field(repr=False)
    slopes: np.ndarray = field(repr=False)
    err_bound: float
    log_C: np.ndarray = field(repr=False)
    below_value: complex  # limit as xi -> 0

    @property
    def xi_min(self) -> float:
        return math.exp(self.u0)

    @property
    def xi_max(self) -> float:
        return math.exp(self.u0 + self.du * (self.values.size - 1))

    @property
    def grid(self) -> np.ndarray:
        return np.exp(self.u0 + self.du * np.arange(self.values.size))

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        u = np.log(xi)
        pos = (u - self.u0) / self.du
        n = self.values.size
        out = np.zeros(xi.shape, dtype=complex)
        below = pos < 0
        out[below] = self.below_value
        inside = (pos >= 0) & (pos <= n - 1)
        p = pos[inside]
        j = np.minimum(p.astype(np.int64), n - 2)
        t = p - j
        t2, t3 = t * t, t * t * t
        h00 = 2 * t3 - 3 * t2 + 1
        h10 = t3 - 2 * t2 + t
        h01 = -2 * t3 + 3 * t2
        h11 = t3 - t2
        v, m = self.values, self.slopes * self.du
        out[inside] = h00 * v[j] + h10 * m[j] + h01 * v[j + 1] + h11 * m[j + 1]
        return out

    def beyond_range(self, xi) -> np.ndarray:
        """Tail flag: True where the cache returns 0 because xi > xi_max."""
        return np.asarray(xi, dtype=float) > self.xi_max

    def envelope(self, xi: float) -> float:
        """min_A C_A xi^{-A}, an upper bound for |omega(xi)|."""
        A = np.arange(self.log_C.size)
        with np.errstate(invalid="ignore"):
            logs = self.log_C - A * math.log(xi)
        return float(np.exp(np.nanmin(logs[1:])))

    def log_tail_bound(self, xi: float, Q: float, sigma: float) -> float:
        """log of a bound for sum_{n > Q xi} tau(n) n^{-sigma} |omega(n/Q)|.

        Uses tau(n) <= 2 sqrt(n) and |omega(x)| <= C_A x^{-A}, optimised over A.
        """
        A = np.arange(self.log_C.size, dtype=float)
        expo = A + sigma - 1.5
        ok = expo > 0
        logs = (math.log(2.0) + self.log_C[ok] + (1.5 - sigma) * math.log(Q)
                - expo[ok] * math.log(xi) - np.log(expo[ok]))
        return float(np.min(logs))

    def xi_stop(self, tol: float, Q: float, sigma: float) -> float:
        """Smallest xi (to 1%) with tail bound below ``tol``."""
        target = math.log(tol)
        lo, hi = 1e-3, 1.0
        while self.log_tail_bound(hi, Q, sigma) > target:
            lo, hi = hi, hi * 2
            if hi > 1e12:
                raise KernelError("kernel tail does not reach the requested tolerance")
        while hi / lo > 1.01:
            mid = math.sqrt(lo * hi)
            if self.log_tail_bound(mid, Q, sigma) > target:
                lo = mid
            else:
                hi = mid
        return hi


def build_kernel_cache(weight: int, alpha: complex = 0.0, tag: str = "unit", xi_min: float | None = None,
                       xi_max: float | None = None, target_err: float = 1e-13, width: float = 1.0,
                       kind: str = "omega", seed: int = 0) -> KernelCache:
    """Tabulate the kernel between xi_min and xi_max with validated interpolation error.

    Unset bounds are chosen so that below xi_min the kernel equals its xi -> 0 limit
    and above xi_max its envelope is < 1e-22, each to within ``target_err``.
    """
    if target_err < MIN_TARGET_ERR:
        raise ValueError(f"target_err below {MIN_TARGET_ERR} is not attainable in double precision")
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    alpha = complex(alpha)
    if weight / 2 + alpha.real - CONTOUR < 1.0:
        raise ValueError("kernel requires k/2 + Re alpha >= 2 (left contour too close to a pole)")
    right = _line_nodes(weight, alpha, tag, width, kind, CONTOUR)
    left = _line_nodes(weight, alpha, tag, width, kind, -CONTOUR)
    residue = 1.0 if kind == "omega" else 0.0
    log_C = log_decay_constants(weight, alpha, tag, width, kind, A_max=30 if tag == "zeta_damped" else 80)

    def direct(u: np.ndarray, with_slope=False):
        vals = np.empty(u.shape, dtype=complex)
        slopes = np.empty(u.shape, dtype=complex)
        neg = u < 0
        for mask, (s, Fw), add in ((neg, left, residue), (~neg, right, 0.0)):
            if mask.any():
                v, m = _line_sum(s, Fw, u[mask], with_slope)
                vals[mask] = v + add
                if with_slope:
                    slopes[mask] = m
        return vals, slopes

    if xi_min is None:
        u_lo = -1.0
        while abs(direct(np.array([u_lo]))[0][0] - residue) > 0.1 * target_err:
            u_lo -= 0.5
            if u_lo < -60:
                raise KernelError("kernel does not settle as xi -> 0")
        xi_min = math.exp(u_lo)
    if xi_max is None:
        A = np.arange(log_C.size)
        xi_max = 1.0
        while np.nanmin(log_C[1:] - A[1:] * math.log(xi_max)) > math.log(1e-22):
            xi_max *= 1.25
            if xi_max > 1e12:
                raise KernelError("kernel envelope does not decay")
    if not 0 < xi_min < xi_max:
        raise ValueError("need 0 < xi_min < xi_max")

    u0, u1 = math.log(xi_min), math.log(xi_max)
    rng = np.random.default_rng(seed)
    du = 0.004
    while True:
        n = int(math.ceil((u1 - u0) / du)) + 1
        du_eff = (u1 - u0) / (n - 1)
        u = u0 + du_eff * np.arange(n)
        vals, slopes = direct(u, with_slope=True)
        cache = KernelCache(weight, alpha, tag, width, kind, u0, du_eff, vals, slopes, target_err,
                            log_C, complex(residue))
        # midpoints are where Hermite error peaks; add random points
        mids = u0 + du_eff * (np.arange(0, n - 1, max(1, (n - 1) // 400)) + 0.5)
        probe = np.concatenate([mids, rng.uniform(u0, u1, 200)])
        err = np.max(np.abs(cache(np.exp(probe)) - direct(probe)[0]))
        if err <= 0.5 * target_err:
            return KernelCache(weight, alpha, tag, width, kind, u0, du_eff, vals, slopes,
                               max(2.0 * err, 1e-15), log_C, complex(residue))
        if du < 1e-4:
            raise KernelError(f"interpolation error {err:.2e} above target {target_err:.2e}")
        du /= 2


class KernelBank:
    """Thread-safe memo of kernel caches keyed by (weight, alpha, tag, width, kind)."""

    def __init__(self, tag: str = "unit", width: float = 1.0, target_err: float = 1e-13):
        if tag not in G_TAGS:
            raise ValueError(f"unknown G variant {tag!r}; known: {G_TAGS}")
        self.tag = tag
        self.width = width
        self.target_err = target_err
        self._caches: dict[tuple, KernelCache] = {}
        self._lock = threading.Lock()

    def get(self, weight: int, alpha: complex, kind: str = "omega") -> KernelCache:
        key = (weight, complex(alpha), kind)
        with self._lock:
            cache = self._caches.get(key)
            if cache is None:
                cache = build_kernel_cache(weight, alpha, self.tag, target_err=self.target_err,
                                           width=self.width, kind=kind)
                self._caches[key] = cache
        return cache

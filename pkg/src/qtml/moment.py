"""Smoothed first moments over the family chi_{8d}, their predicted main terms and residual diagnostics.

    M(alpha, ell) = sum over odd squarefree d > 0 of chi_{8d}(ell) L(1/2+alpha, f x chi_{8d}) Phi(d/X)
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import arith
from .analysis.kernel import KernelBank
from .analysis.special import digamma, loggamma
from .analysis.window import WindowSpec, default_window, mellin, mellin_derivative
from .eigenform import EigenformTable, TableTooShort
from .euler.local import EulerContext
from .euler.products import Z_star_derivative, ZN_accelerated
from .euler.symsquare import sym_square_derivative, sym_square_L, sym_square_value
from .lfun import afe_value, central_derivative

CSV_HEADER = "# qtml v1"
CSV_COLUMNS = ("X", "M", "MT", "R", "R_norm")
DEFAULT_P = 10**6
DEFAULT_DEPTH = 1


@dataclass(frozen=True)
class MomentRequest:
    weight: int
    X_grid: tuple[float, ...]
    ell: int = 1
    alpha: complex = 0.0
    window: WindowSpec = field(default_factory=default_window)
    derivative: bool = False
    prime_cutoff: int = DEFAULT_P
    accel_depth: int = DEFAULT_DEPTH
    workers: int = 1
    afe_tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "X_grid", tuple(float(x) for x in self.X_grid))
        if not self.X_grid:
            raise ValueError("X grid is empty")
        if any(x <= 0 for x in self.X_grid) or list(self.X_grid) != sorted(set(self.X_grid)):
            raise ValueError("X grid must be positive and strictly increasing")
        arith.split_squarefree(self.ell)
        if self.derivative:
            if self.weight % 4 != 2:
                raise ValueError("the derivative moment needs weight = 2 (mod 4)")
            if self.alpha != 0:
                raise ValueError("the derivative moment is taken at alpha = 0")
        a = complex(self.alpha)
        for X in self.X_grid:
            if X > math.e and (abs(a.real) > 1.0 / math.log(X) + 1e-12 or abs(a.imag) > math.log(X) ** 2):
                raise ValueError(f"alpha={a} outside the shift range at X={X}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def d_range(self, X: float) -> np.ndarray:
        lo = max(1, math.ceil(X * self.window.x_lo))
        hi = math.floor(X * self.window.x_hi)
        return arith.SquarefreeStream(lo, hi, odd_only=True).array() if hi >= lo else np.zeros(0, np.int64)


@dataclass(frozen=True)
class MomentRow:
    X: float
    M: float
    MT: float
    R: float
    R_norm: float
    M_error: float  # truncation + kernel bound of the measured side


@dataclass
class MomentReport:
    rows: list[MomentRow]
    metadata: dict
    fit: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([repr(r.X), repr(r.M), repr(r.MT), repr(r.R), repr(r.R_norm)])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"metadata": self.metadata, "rows": [asdict(r) for r in self.rows], "fit": self.fit,
               "diagnostics": self.diagnostics}
        return json.dumps(doc, indent=2, sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj)}")


# -- measured side ------------------------------------------------------------------


def _chunks(values: np.ndarray, workers: int) -> list[np.ndarray]:
    count = max(1, min(len(values), 4 * workers))
    return [c for c in np.array_split(values, count) if c.size]


def _per_d(table, request, bank, ds, X, derivative):
    out = []
    for d in ds:
        d = int(d)
        chi = arith.kronecker(8 * d, request.ell)
        phi = float(request.window(np.array([d / X]))[0].real)
        if chi == 0 or phi == 0.0:
            out.append((0.0, 0.0))
            continue
        if derivative:
            val = central_derivative(table, d, bank, tol=request.afe_tol)
            err = 0.0
        else:
            res = afe_value(table, 8 * d, request.alpha, bank, tol=request.afe_tol)
            val, err = res.value, res.tail_bound + res.kernel_bound
        out.append((chi * val * phi, abs(phi) * err))
    return out


def _sum_over_d(table, request, bank, X, derivative) -> tuple[complex, float]:
    ds = request.d_range(X)
    if ds.size == 0:
        return 0j, 0.0
    need = _required_length(request, X)
    if need > table.N_max:
        raise TableTooShort(need, table.N_max)
    chunks = _chunks(ds, request.workers)
    if request.workers == 1:
        parts = [_per_d(table, request, bank, c, X, derivative) for c in chunks]
    else:
        with ThreadPoolExecutor(request.workers) as pool:
            parts = list(pool.map(lambda c: _per_d(table, request, bank, c, X, derivative), chunks))
    terms = [t for part in parts for t in part]  # d-order regardless of scheduling
    vals = [complex(v) for v, _ in terms]
    total = complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))
    return total, math.fsum(e for _, e in terms)


def _required_length(request: MomentRequest, X: float) -> int:
    """Coefficient count needed at the largest d (about 12 conductors with the unit kernel)."""
    return int(8 * X * request.window.x_hi * 12) + 1


def brute_moment(request: MomentRequest, table: EigenformTable, bank: KernelBank | None = None) -> list[tuple[float, complex, float]]:
    """(X, M(X), error bound) for each grid point by enumerating d."""
    if table.weight != request.weight:
        raise ValueError("table weight differs from the request")
    bank = bank or KernelBank()
    out = []
    for X in request.X_grid:
        total, err = _sum_over_d(table, request, bank, X, False)
        out.append((X, total, err))
    return out


def derivative_brute_moment(request: MomentRequest, table: EigenformTable,
                            bank: KernelBank | None = None) -> list[tuple[float, float]]:
    """(X, sum of L'(1/2, f x chi_{8d}) chi_{8d}(ell) Phi(d/X)) for each grid point."""
    if not request.derivative:
        raise ValueError("request does not carry the derivative flag")
    bank = bank or KernelBank()
    return [(X, _sum_over_d(table, request, bank, X, True)[0].real) for X in request.X_grid]


# -- predicted side -----------------------------------------------------------------


def gamma_alpha(weight: int, alpha: complex) -> complex:
    """(8/2pi)^{-2 alpha} Gamma(k/2 - alpha) / Gamma(k/2 + alpha)."""
    a = complex(alpha)
    return complex(np.exp(-2 * a * math.log(8 / (2 * math.pi)) + loggamma(weight / 2 - a) - loggamma(weight / 2 + a)))


@dataclass(frozen=True)
class _Arithmetic:
    L_sym: complex
    Z: complex


class MainTermModel:
    """Evaluates the two-term prediction, memoising the arithmetic factors per alpha."""

    def __init__(self, table: EigenformTable, ell: int = 1, window: WindowSpec | None = None,
                 P: int = DEFAULT_P, depth: int = DEFAULT_DEPTH):
        self.table = table
        self.ell = ell
        self.window = window or default_window()
        self.P = min(P, table.N_max)
        self.depth = depth
        self.ctx = EulerContext(table, ell, self.P, depth)
        self._memo: dict[complex, _Arithmetic] = {}

    @property
    def ell1(self) -> int:
        return self.ctx.ell1

    def arithmetic(self, gamma: complex) -> _Arithmetic:
        """L(1 + 2 gamma, sym^2 f) and Z(1/2 + gamma, ell)."""
        g = complex(gamma)
        if g not in self._memo:
            L = sym_square_value(self.table, 1 + 2 * g).value
            Z = ZN_accelerated(self.ctx, g, self.depth, self.P, tol=None).value
            self._memo[g] = _Arithmetic(L, Z)
        return self._memo[g]

    def first_term(self, alpha: complex, X: float, window: WindowSpec | None = None) -> complex:
        """4 X Phi~(1) L(1+2a, sym^2 f) Z(1/2+a, ell) / (pi^2 ell1^{1/2+a})."""
        a = complex(alpha)
        w = window or self.window
        ar = self.arithmetic(a)
        return 4 * X * mellin(w, 1.0) * ar.L_sym * ar.Z * self.ell1 ** (-0.5 - a) / math.pi**2

    def second_term(self, alpha: complex, X: float) -> complex:
        """i^k 4 gamma_a X^{1-2a} Phi~(1-2a) L(1-2a, sym^2 f) Z(1/2-a, ell) / (pi^2 ell1^{1/2-a})."""
        a = complex(alpha)
        ar = self.arithmetic(-a)
        k = self.table.weight
        return ((1j) ** (k % 4) * 4 * gamma_alpha(k, a) * X ** (1 - 2 * a) * mellin(self.window, 1 - 2 * a)
                * ar.L_sym * ar.Z * self.ell1 ** (-0.5 + a) / math.pi**2)

    def second_term_by_shift(self, alpha: complex, X: float) -> complex:
        """i^k gamma_a X^{-2a} times the first term at -a with the window x^{-2a} Phi(x)."""
        a = complex(alpha)
        k = self.table.weight
        shifted = self.window.shifted(-2 * a)
        return (1j) ** (k % 4) * gamma_alpha(k, a) * X ** (-2 * a) * self.first_term(-a, X, shifted)

    def __call__(self, alpha: complex, X: float) -> complex:
        return self.first_term(alpha, X) + self.second_term(alpha, X)


def main_term(request: MomentRequest, table: EigenformTable, model: MainTermModel | None = None) -> list[complex]:
    model = model or MainTermModel(table, request.ell, request.window, request.prime_cutoff, request.accel_depth)
    return [model(request.alpha, X) for X in request.X_grid]


@dataclass(frozen=True)
class Bracket:
    log_X: float
    sym_ratio: float  # 2 L'(1, sym^2 f) / L(1, sym^2 f)
    z_ratio: float  # Z*'(0) / Z*(0)
    log_const: float  # log(8 / 2 pi)
    digamma_term: float  # psi(k/2)
    window_ratio: float  # Phi~'(1) / Phi~(1)
    prefactor: float  # 8 Phi~(1) L(1, sym^2 f) Z*(0) / pi^2

    @property
    def total(self) -> float:
        return self.log_X + self.sym_ratio + self.z_ratio + self.log_const + self.digamma_term + self.window_ratio

    def value(self, X: float) -> float:
        """Prediction at X; log X is taken from the argument."""
        return self.prefactor * X * (self.total - self.log_X + math.log(X))


def derivative_bracket(table: EigenformTable, window: WindowSpec | None = None, X: float = 1.0,
                       P: int = DEFAULT_P, depth: int = DEFAULT_DEPTH, h: float = 1e-3) -> Bracket:
    """Assemble the bracket of the derivative main term from its components."""
    k = table.weight
    if k % 4 != 2:
        raise ValueError("the derivative main term needs weight = 2 (mod 4)")
    window = window or default_window()
    P = min(P, table.N_max)
    L1 = sym_square_L(table, 1.0)
    dL = sym_square_derivative(table, 1.0, h).value
    Zs = ZN_accelerated(EulerContext(table, 1, P, depth), 0.0, depth, P, tol=None).value.real
    dZ = Z_star_derivative(table, 1, P, depth, h).value
    m1 = mellin(window, 1.0).real
    dm = mellin_derivative(window, 1.0).real
    return Bracket(math.log(X), 2 * dL / L1, dZ, math.log(8 / (2 * math.pi)), float(np.real(digamma(k / 2))),
                   dm / m1, 8 * m1 * L1 * Zs / math.pi**2)


def derivative_main_term(table: EigenformTable, window: WindowSpec | None, X: float, **kw) -> float:
    return derivative_bracket(table, window, X, **kw).value(X)


# -- residuals -------------------------------------------------------------------------


def residual_analysis(X: list[float], R: list[float], noise: list[float] | None = None,
                      vary_factor: float = 4.0, n_boot: int = 2000, seed: int = 0) -> dict:
    """Least-squares slope of log|R| against log X with a bootstrap 95% band."""
    X = np.asarray(X, dtype=float)
    R = np.abs(np.asarray(R, dtype=float))
    if X.size < 3:
        raise ValueError("residual analysis needs at least 3 grid points")
    noise = np.zeros(X.shape) if noise is None else np.asarray(noise, dtype=float)
    out: dict = {"points": int(X.size)}
    floor = R <= np.maximum(noise, 0.0) + 1e-300
    if floor.any():
        out.update(slope=None, band=None, noise_floor=True,
                   note="residual indistinguishable from quadrature error")
        return out
    lx, lr = np.log(X), np.log(R)
    slope = float(np.polyfit(lx, lr, 1)[0])
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        idx = rng.integers(0, X.size, X.size)
        if np.unique(lx[idx]).size < 2:
            continue
        boots.append(np.polyfit(lx[idx], lr[idx], 1)[0])
    band = [float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5))] if boots else None
    norm = R / np.sqrt(X)
    ratio = float(norm.max() / norm.min())
    out.update(slope=slope, band=band, noise_floor=False, norm_ratio=ratio,
               norm_flag=bool(ratio > vary_factor))
    return out


def run_moment(request: MomentRequest, table: EigenformTable, bank: KernelBank | None = None,
               seed: int = 0) -> MomentReport:
    """Measured side, prediction and residual fit, assembled into a report."""
    bank = bank or KernelBank()
    if request.derivative:
        measured = [(X, complex(v), 0.0) for X, v in derivative_brute_moment(request, table, bank)]
        br = derivative_bracket(table, request.window, request.X_grid[0], request.prime_cutoff, request.accel_depth)
        predicted = [complex(br.value(X)) for X in request.X_grid]
        diag = {"bracket": asdict(br)}
    else:
        measured = brute_moment(request, table, bank)
        model = MainTermModel(table, request.ell, request.window, request.prime_cutoff, request.accel_depth)
        predicted = main_term(request, table, model)
        diag = {"terms": [{"X": X, "first": model.first_term(request.alpha, X),
                           "second": model.second_term(request.alpha, X)} for X in request.X_grid]}
    rows = []
    for (X, M, err), MT in zip(measured, predicted):
        M_r, MT_r = M.real, MT.real
        if abs(complex(request.alpha).imag) > 0:
            M_r, MT_r = abs(M), abs(MT)
        R = M_r - MT_r
        rows.append(MomentRow(X, M_r, MT_r, R, R / math.sqrt(X), err))
    meta = {"weight": request.weight, "ell": request.ell, "alpha": complex(request.alpha),
            "window": request.window.tag, "derivative": request.derivative,
            "prime_cutoff": request.prime_cutoff, "accel_depth": request.accel_depth,
            "afe_tol": request.afe_tol, "table_N_max": table.N_max, "g_variant": bank.tag}
    fit = {}
    if len(rows) >= 3:
        fit = residual_analysis([r.X for r in rows], [r.R for r in rows], [r.M_error for r in rows], seed=seed)
    return MomentReport(rows, meta, fit, diag)

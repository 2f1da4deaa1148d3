"""Command-line front end: ``qtml coeffs|verify|moment|constants``.

Exit codes: 0 success, 1 verification or run failure, 2 usage/config error,
3 environment (disk/cache) error.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

from . import config as cfgmod
from .analysis.kernel import KernelBank
from .analysis.special import digamma
from .analysis.window import mellin, mellin_derivative, window_from_tag
from .eigenform import (IntegrityError, SUPPORTED_WEIGHTS, TableTooShort, cache_path, default_cache_dir,
                        load_or_build)
from .euler import EulerContext, Z_star_derivative, ZN_accelerated
from .euler.symsquare import sym_square_derivative, sym_square_value
from .moment import MomentReport, MomentRequest, residual_analysis, run_moment
from .verify import NEEDS_TABLE, SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ENV = 0, 1, 2, 3
VERIFY_N_MAX = 200_000


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--weight", type=int, help="12, 16, 18, 20, 22 or 26 (default 12)")
    p.add_argument("--ell", type=int, help="odd twist parameter ell (default 1)")
    p.add_argument("--alpha-re", type=float, help="real part of the shift alpha")
    p.add_argument("--alpha-im", type=float, help="imaginary part of the shift alpha")
    p.add_argument("--x-grid", help="comma-separated X values")
    p.add_argument("--window", help="window tag; only bump is available")
    p.add_argument("--g-variant", help="unit, simple or zeta_damped (default unit)")
    p.add_argument("--prime-cutoff", type=int, help="largest prime in the Euler products (default 10**6)")
    p.add_argument("--accel-depth", type=int, help="zeta acceleration depth N (default 1)")
    p.add_argument("--workers", type=int, help="threads for the sum over d")
    p.add_argument("--cache-dir", help="coefficient cache directory (default $QTML_CACHE_DIR)")
    p.add_argument("--out", help="output stem; writes STEM.csv and STEM.json")
    p.add_argument("--seed", type=int, help="seed for sampled checks and the bootstrap")
    p.add_argument("--n-max", type=int, help="coefficient table length")
    p.add_argument("--derivative", action="store_true", default=None, help="derivative moment (weight 2 mod 4)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qtml", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("coeffs", help="build or load the normalized coefficient table")
    _common(p)
    p = sub.add_parser("verify", help="run an identity-check suite")
    p.add_argument("suite", help=", ".join(SUITES))
    _common(p)
    p = sub.add_parser("moment", help="measured moment vs main term over an X grid")
    _common(p)
    p = sub.add_parser("constants", help="print the main-term constants")
    _common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> cfgmod.RunConfig:
    base = cfgmod.load(args.config) if args.config else cfgmod.RunConfig()
    grid = cfgmod.parse_grid(args.x_grid) if args.x_grid is not None else None
    return base.updated(weight=args.weight, ell=args.ell, alpha_re=args.alpha_re, alpha_im=args.alpha_im,
                        x_grid=grid, window=args.window, g_variant=args.g_variant,
                        prime_cutoff=args.prime_cutoff, accel_depth=args.accel_depth, workers=args.workers,
                        cache_dir=args.cache_dir, out=args.out, seed=args.seed, derivative=args.derivative,
                        n_max=args.n_max)


def _cache_dir(cfg: cfgmod.RunConfig) -> Path:
    return Path(cfg.cache_dir) if cfg.cache_dir else default_cache_dir()


def _table(cfg: cfgmod.RunConfig, n_max: int):
    return load_or_build(cfg.weight, n_max, _cache_dir(cfg))


def cmd_coeffs(cfg: cfgmod.RunConfig) -> int:
    n_max = cfg.n_max or cfg.prime_cutoff
    path = cache_path(_cache_dir(cfg), cfg.weight, n_max)
    hit = path.exists()
    t0 = time.perf_counter()
    table = _table(cfg, n_max)
    print(f"weight={table.weight} N_max={table.N_max} checksum={table.checksum:#018x}")
    print(f"{'cache hit' if hit else 'built'} {path} ({path.stat().st_size} bytes, {time.perf_counter() - t0:.1f}s)")
    return EXIT_OK


def cmd_verify(cfg: cfgmod.RunConfig, suite: str) -> int:
    if suite not in SUITES:
        print(f"unknown suite {suite!r}; known: {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_USAGE
    table = _table(cfg, cfg.n_max or VERIFY_N_MAX) if suite in NEEDS_TABLE else None
    cases = run_suite(suite, table, cfg.seed)
    for c in cases:
        print(f"{'ok  ' if c.ok else 'FAIL'} {c.label:<36} defect={c.defect:.3e} tol={c.tol:.0e}")
    bad = sum(not c.ok for c in cases)
    print(f"suite {suite}: {len(cases) - bad}/{len(cases)} within tolerance")
    return EXIT_OK if bad == 0 else EXIT_FAIL


def _request(cfg: cfgmod.RunConfig, grid) -> MomentRequest:
    return MomentRequest(cfg.weight, tuple(grid), cfg.ell, cfg.alpha, window_from_tag(cfg.window), cfg.derivative,
                         cfg.prime_cutoff, cfg.accel_depth, cfg.workers)


def _write(report: MomentReport, out: str, failure: str | None = None) -> None:
    if not out:
        return
    csv_text = report.to_csv()
    if failure:
        csv_text += f"# FAILED: {failure}\n"
        report.diagnostics["failure"] = failure
    Path(out).with_suffix(".csv").write_text(csv_text, encoding="utf-8")
    Path(out).with_suffix(".json").write_text(report.to_json() + "\n", encoding="utf-8")


def cmd_moment(cfg: cfgmod.RunConfig) -> int:
    _request(cfg, cfg.x_grid)  # validate the whole request up front
    need = int(8 * max(cfg.x_grid) * window_from_tag(cfg.window).x_hi * 12) + 1
    table = _table(cfg, cfg.n_max or max(need, cfg.prime_cutoff))
    bank = KernelBank(cfg.g_variant, width=4.0 if cfg.g_variant != "unit" else 1.0)
    report = MomentReport([], {"config": cfg.emit()})
    try:
        for X in cfg.x_grid:
            part = run_moment(_request(cfg, [X]), table, bank, cfg.seed)
            report.rows.extend(part.rows)
            report.metadata.update(part.metadata)
            report.diagnostics.setdefault("per_X", []).append(part.diagnostics)
    except (ArithmeticError, TableTooShort, ValueError) as exc:
        _write(report, cfg.out, str(exc))
        print(f"moment run failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if len(report.rows) >= 3:
        report.fit = residual_analysis([r.X for r in report.rows], [r.R for r in report.rows],
                                       [r.M_error for r in report.rows], seed=cfg.seed)
    _write(report, cfg.out)
    print(f"{'X':>10} {'M':>16} {'MT':>16} {'R':>14} {'R/sqrt(X)':>12}")
    for r in report.rows:
        print(f"{r.X:>10.1f} {r.M:>16.9f} {r.MT:>16.9f} {r.R:>14.6e} {r.R_norm:>12.4e}")
    if report.fit:
        print("fit:", {k: v for k, v in report.fit.items() if k != "points"})
    return EXIT_OK


def cmd_constants(cfg: cfgmod.RunConfig) -> int:
    P = cfg.prime_cutoff
    table = _table(cfg, cfg.n_max or P)
    P = min(P, table.N_max)
    k, N = cfg.weight, max(cfg.accel_depth, 1)
    w = window_from_tag(cfg.window)
    m1, dm = mellin(w, 1.0).real, mellin_derivative(w, 1.0).real
    L = sym_square_value(table, 1.0)
    dL = sym_square_derivative(table, 1.0)
    ctx = EulerContext(table, 1, P, N)
    Zs = ZN_accelerated(ctx, 0.0, N, P, tol=None)
    half = ZN_accelerated(ctx, 0.0, N, P // 2, tol=None).value.real
    dZ = Z_star_derivative(table, 1, P, N)
    rows = [
        ("8/pi^2", f"{8 / math.pi**2:.12f}", "exact"),
        ("Phi~(1)", f"{m1:.10g}", "adaptive quadrature"),
        ("L(1,sym^2 f)", f"{L.value.real:.10g}", f"series bound {L.bound:.1e}, {L.terms} terms"),
        ("L'(1,sym^2 f)", f"{dL.value:.8g}", f"step-halving ratio {dL.step_ratio:.2f}"),
        ("Z*(0)", f"{Zs.value.real:.8g}", f"P={P} N={N}, |Z(P)-Z(P/2)|={abs(Zs.value.real - half):.1e}"),
        ("Z*'(0)/Z*(0)", f"{dZ.value:.8g}", f"complex-step route {dZ.complex_step:.8g}"),
        ("digamma(k/2)", f"{complex(digamma(k / 2)).real:.12g}", "exact up to roundoff"),
        ("Phi~'(1)/Phi~(1)", f"{dm / m1:.10g}", "adaptive quadrature"),
        ("main constant", f"{8 * m1 * L.value.real * Zs.value.real / math.pi**2:.8g}", "8 Phi~(1) L Z*/pi^2"),
    ]
    if cfg.ell != 1:
        Zl = ZN_accelerated(EulerContext(table, cfg.ell, P, N), 0.0, N, P, tol=None).value.real
        rows.append((f"Z(1/2,{cfg.ell})/Z(1/2,1)", f"{Zl / Zs.value.real:.8g}", "same cutoff"))
    for name, val, diag in rows:
        print(f"{name:<22} {val:>22}   {diag}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "coeffs":
            return cmd_coeffs(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.suite)
        if args.command == "moment":
            return cmd_moment(cfg)
        return cmd_constants(cfg)
    except IntegrityError as exc:
        print(f"cache integrity failure, refusing to run: {exc}", file=sys.stderr)
        return EXIT_ENV
    except OSError as exc:
        print(f"environment error: {exc}", file=sys.stderr)
        return EXIT_ENV
    except (cfgmod.ConfigError, ValueError) as exc:
        if "weight" in str(exc) and str(SUPPORTED_WEIGHTS) not in str(exc):
            exc = ValueError(f"{exc}; supported weights: {SUPPORTED_WEIGHTS}")
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())

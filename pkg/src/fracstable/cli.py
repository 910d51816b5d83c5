"""Command-line front end.

Subcommands: exponents, stability, fraclap, extend, minimal, energy,
verify.  All outputs are deterministic; CSV uses 17 significant
digits, '.' decimal and the literal ``inf`` for infinities.  With
``--plot`` each report also renders a matplotlib figure next to the
delimited output.

Exit codes: 0 success, 2 invalid parameters (domain errors), 3
solver/quadrature non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .exponents import (ConvergenceError, cond_gamma_form, joseph_lundgren,
                        region_table, stability_verdict, tail_margin)
from .extension import (AxisymGrid, SolverError, extended_singular,
                        minimal_branch, weighted_flux)
from .fraclap import (DEFAULT_SPEC, QuadratureError, QuadratureSpec,
                      frac_lap_power, frac_lap_radial, gaussian,
                      hardy_quotient, verify_rho_bounds)
from .monotonicity import energy_report
from .special import (DomainError, Params, hardy_constant, kappa,
                      lambda_of_alpha, singular_amplitude, sobolev_exponent)


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return format(x, ".17g")
    return str(x)


def _write_rows(header: list[str], rows: list[list], fmt: str,
                out: Optional[str]) -> None:
    if fmt == "csv":
        lines = [",".join(header)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        objs = [{k: (None if isinstance(v, float) and math.isnan(v) else
                     ("inf" if isinstance(v, float) and math.isinf(v) else v))
                 for k, v in zip(header, row)} for row in rows]
        text = json.dumps(objs, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _figure_path(args) -> Path:
    if args.out:
        return Path(args.out).with_suffix(".png")
    return Path(f"fracstable_{args.command}.png")


def _save_figure(fig, args) -> None:
    path = _figure_path(args)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    print(f"figure written to {path}", file=sys.stderr)


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v != ""]


def _parse_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v != ""]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_exponents(args) -> int:
    n_vals = _parse_ints(args.n)
    s_vals = _parse_floats(args.s)
    rows = region_table(n_vals, s_vals, tol=args.tol)
    table = [[r.n, r.s, r.p_S, r.p_c, r.tail_margin] for r in rows]
    _write_rows(["n", "s", "p_S", "p_c", "tail_margin"], table,
                args.format, args.out)
    for r in rows:
        if r.error:
            print(f"row (n={r.n}, s={r.s}): {r.error}", file=sys.stderr)
    if args.plot:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(6, 4))
        for n in n_vals:
            ss = [r.s for r in rows if r.n == n and not r.error]
            pc = [r.p_c for r in rows if r.n == n and not r.error]
            finite = [(a, b) for a, b in zip(ss, pc) if math.isfinite(b)]
            if finite:
                ax.plot(*zip(*finite), "o-", label=f"n={n}")
            inf_s = [a for a, b in zip(ss, pc) if math.isinf(b)]
            if inf_s:
                ax.plot(inf_s, [0] * len(inf_s), "x", color="gray")
        ax.set_xlabel("s")
        ax.set_ylabel("dividing exponent p_c  (x marks p_c = inf)")
        ax.legend()
        _save_figure(fig, args)
    return 0


def _cmd_stability(args) -> int:
    params = Params(args.n_int, args.s_val, args.p)
    v = stability_verdict(params)
    lhs, rhs = cond_gamma_form(params)
    row = [params.n, params.s, params.p, v.margin, v.cond_holds,
           v.singular_solution_stable, lhs, rhs]
    _write_rows(["n", "s", "p", "margin", "cond_holds",
                 "singular_solution_stable", "gamma_lhs", "gamma_rhs"],
                [row], args.format, args.out)
    if args.plot:
        plt = _pyplot()
        p_s = sobolev_exponent(params.n, params.s)
        ps = np.linspace(p_s * 1.001, max(3 * p_s, 2 * params.p), 200)
        margins = [stability_verdict(Params(params.n, params.s, p)).margin
                   for p in ps]
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(ps, margins)
        ax.axhline(0.0, color="k", lw=0.8)
        ax.axvline(params.p, color="r", ls="--", label=f"p = {params.p}")
        ax.set_xlabel("p")
        ax.set_ylabel("instability margin p*lambda(a*) - Lambda")
        ax.legend()
        _save_figure(fig, args)
    return 0


def _cmd_fraclap(args) -> int:
    n, s = args.n_int, args.s_val
    spec = QuadratureSpec(tolerance=args.tol) if args.tol != 1e-10 \
        else DEFAULT_SPEC
    if args.beta is not None:
        betas = [args.beta]
    elif args.p is not None:
        betas = [2 * s / (args.p - 1)]
    else:
        betas = list(np.linspace(0.15, 0.85, 8) * (n - 2 * s))
    rows = []
    for beta in betas:
        num = frac_lap_power(n, s, beta, spec)
        exact = lambda_of_alpha(n, s, (n - 2 * s) / 2 - beta)
        rows.append([n, s, beta, num, exact, num - exact])
    _write_rows(["n", "s", "beta", "quadrature", "closed_form", "error"],
                rows, args.format, args.out)
    if args.plot:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(6, 4))
        arr = np.array([[r[2], r[3], r[4]] for r in rows])
        ax.plot(arr[:, 0], arr[:, 2], "-", label="closed form")
        ax.plot(arr[:, 0], arr[:, 1], "o", label="quadrature")
        ax.set_xlabel("power beta of |x|^{-beta}")
        ax.set_ylabel("eigenvalue of (-Delta)^s")
        ax.legend()
        _save_figure(fig, args)
    return 0


def _cmd_extend(args) -> int:
    params = Params(args.n_int, args.s_val, args.p)
    grid = AxisymGrid.graded(params.n, params.s, args.grid_nr, args.grid_nt)
    bar_us = extended_singular(params)
    values = bar_us.on_grid(grid)
    rr, tt = np.meshgrid(grid.r_nodes, grid.t_nodes, indexing="ij")
    rows = [[r, t, u] for r, t, u in
            zip(rr.ravel(), tt.ravel(), values.ravel())]
    _write_rows(["r", "t", "u"], rows, args.format, args.out)
    if args.out:
        sidecar = {"params": {"n": params.n, "s": params.s, "p": params.p},
                   "grid_shape": list(grid.shape),
                   "field": "extended singular solution",
                   "amplitude": bar_us.amplitude}
        Path(args.out).with_suffix(".meta.json").write_text(
            json.dumps(sidecar, indent=2) + "\n")
    if args.plot:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(6, 5))
        with np.errstate(invalid="ignore"):
            pc = ax.pcolormesh(rr, tt, np.where(np.isfinite(values),
                                                values, np.nan),
                               shading="auto")
        fig.colorbar(pc, ax=ax, label="extension of A |x|^{-2s/(p-1)}")
        ax.set_xlabel("r")
        ax.set_ylabel("t")
        _save_figure(fig, args)
    return 0


def _cmd_minimal(args) -> int:
    params = Params(args.n_int, args.s_val, args.p)
    grid = AxisymGrid.graded(params.n, params.s, args.grid_nr, args.grid_nt)
    lams = _parse_floats(args.lam)
    branch = minimal_branch(params, lams, grid, tol=args.tol)
    field = branch.solutions[-1]
    rr, tt = np.meshgrid(grid.r_nodes, grid.t_nodes, indexing="ij")
    rows = [[r, t, u] for r, t, u in
            zip(rr.ravel(), tt.ravel(), field.values.ravel())]
    _write_rows(["r", "t", "u"], rows, args.format, args.out)
    sidecar = {"params": {"n": params.n, "s": params.s, "p": params.p},
               "grid_shape": list(grid.shape),
               "lambda_values": branch.lambda_values,
               "iterations": branch.iterations,
               "sup_values": branch.sup_values.tolist(),
               "rescale_factors": branch.rescale_factors.tolist()}
    if args.out:
        Path(args.out).with_suffix(".meta.json").write_text(
            json.dumps(sidecar, indent=2) + "\n")
    else:
        print(json.dumps(sidecar), file=sys.stderr)
    if args.plot:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(6, 4))
        for lam, sol in zip(branch.lambda_values, branch.solutions):
            ax.plot(grid.r_nodes, sol.trace, label=f"lambda={lam}")
        ax.set_xlabel("r")
        ax.set_ylabel("trace of the minimal solution")
        ax.legend()
        _save_figure(fig, args)
    return 0


def _cmd_energy(args) -> int:
    params = Params(args.n_int, args.s_val, args.p)
    grid = AxisymGrid.graded(params.n, params.s, args.grid_nr, args.grid_nt)
    lam = _parse_floats(args.lam)[0]
    branch = minimal_branch(params, [lam], grid, tol=args.tol)
    rep = energy_report(branch.solutions[0], params)
    rows = [[l, e, e1, e2, d, dfd] for l, e, e1, e2, d, dfd in
            zip(rep.lambda_grid, rep.E, rep.E1, rep.E2,
                rep.dE_formula, rep.dE_fd)]
    _write_rows(["lambda", "E", "E1", "E2", "dE_formula", "dE_fd"],
                rows, args.format, args.out)
    if args.plot:
        plt = _pyplot()
        fig, axes = plt.subplots(1, 2, figsize=(10, 4))
        axes[0].plot(rep.lambda_grid, rep.E, "o-", label="E")
        axes[0].plot(rep.lambda_grid, rep.E1, "--", label="E1")
        axes[0].plot(rep.lambda_grid, rep.E2, "--", label="E2")
        axes[0].set_xlabel("lambda")
        axes[0].set_ylabel("scaled energy")
        axes[0].legend()
        axes[1].plot(rep.lambda_grid, rep.dE_formula, "o-", label="surface formula")
        axes[1].plot(rep.lambda_grid, rep.dE_fd, "x--", label="finite difference")
        axes[1].set_xlabel("lambda")
        axes[1].set_ylabel("dE/dlambda")
        axes[1].legend()
        _save_figure(fig, args)
    return 0


def _cmd_verify(args) -> int:
    checks: list[tuple[str, bool, str]] = []

    def add(name, ok, detail=""):
        checks.append((name, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {name}" +
              (f" ({detail})" if detail else ""))

    # Gamma layer symmetry and Hardy identity
    worst = 0.0
    for n in range(1, 10):
        for s in np.linspace(0.1, 0.9, 9):
            if n <= 2 * s:
                continue
            lam0 = lambda_of_alpha(n, s, 0.0)
            worst = max(worst, abs(lam0 - hardy_constant(n, s)) / lam0)
            alpha = 0.4 * (n - 2 * s)
            worst = max(worst, abs(lambda_of_alpha(n, s, alpha)
                                   - lambda_of_alpha(n, s, -alpha)))
    add("eigenvalue symmetry and Hardy identity", worst < 1e-12,
        f"worst {worst:.2e}")

    # condition equivalence on a sample grid
    bad = 0
    rng_pts = [(n, s, p) for n in (1, 3, 7, 11) for s in (0.25, 0.5, 0.75)
               for p in (1.5, 3.0, 8.0)]
    for n, s, p in rng_pts:
        params = Params(n, s, p)
        if not params.supercritical:
            continue
        lhs, rhs = cond_gamma_form(params)
        v = stability_verdict(params)
        if (lhs > rhs) != v.cond_holds:
            bad += 1
    add("Gamma-form vs margin sign agreement", bad == 0, f"{bad} mismatches")

    # quadrature master oracle at the closed-form point
    val = frac_lap_power(3, 0.5, 0.5)
    add("power-function quadrature (3, 1/2, 1/2) = 1/2",
        abs(val - 0.5) < 1e-6, f"value {val:.10f}")

    # singular-solution residual at |x| = 1
    params = Params(3, 0.5, 3.0)
    amp = singular_amplitude(3, 0.5, 3.0)
    lap = frac_lap_power(3, 0.5, params.gamma_exp) * amp
    add("singular solution solves the equation at |x|=1",
        abs(lap - amp ** params.p) < 1e-5 * amp ** params.p)

    # extension flux identity for a Gaussian
    g = gaussian()
    flux = weighted_flux(g, 1, 0.5, 0.7)
    ref = kappa(0.5) * frac_lap_radial(g, 1, 0.5, 0.7)
    add("weighted flux = kappa * fractional Laplacian",
        abs(flux - ref) <= 1e-3 * abs(ref), f"rel {abs(flux-ref)/abs(ref):.1e}")

    # Hardy quotient inequality
    q = hardy_quotient(gaussian(), 3, 0.5)
    add("Hardy quotient >= optimal constant",
        q >= hardy_constant(3, 0.5) - 1e-8, f"quotient {q:.6f}")

    # kernel two-sided bound
    lo, hi = verify_rho_bounds(2, 1, 0.5, np.geomspace(0.1, 100.0, 12))
    add("cutoff kernel two-sided bound", 0 < lo <= hi and hi / lo < 50,
        f"band ratio {hi/lo:.2f}")

    ok = all(c[1] for c in checks)
    print(f"{sum(c[1] for c in checks)}/{len(checks)} checks passed")
    return 0 if ok else 3


# ---------------------------------------------------------------------------
# Parser and dispatch
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracstable",
        description="Numerical toolkit for the fractional Lane-Emden "
                    "equation (-Delta)^s u = |u|^{p-1} u")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n_list=False, s_list=False, need_p=False):
        if n_list:
            p.add_argument("--n", default="3",
                           help="dimension(s), comma separated")
        else:
            p.add_argument("--n", dest="n_int", type=int, default=3,
                           help="spatial dimension")
        if s_list:
            p.add_argument("--s", default="0.5",
                           help="fractional order(s) in (0,1), comma separated")
        else:
            p.add_argument("--s", dest="s_val", type=float, default=0.5,
                           help="fractional order in (0,1)")
        p.add_argument("--p", type=float, default=None if not need_p else 3.0,
                       help="nonlinearity exponent")
        p.add_argument("--grid-nr", dest="grid_nr", type=int, default=64)
        p.add_argument("--grid-nt", dest="grid_nt", type=int, default=64)
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--lambda", dest="lam", default="0.5",
                       help="boundary factor(s) in (0,1), comma separated")
        p.add_argument("--out", default=None, help="output file path")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--plot", action="store_true",
                       help="render a matplotlib figure next to the output")
        p.add_argument("--config", default=None,
                       help="JSON file overriding flag defaults")

    p = sub.add_parser("exponents", help="p_S / p_c / tail-margin table")
    common(p, n_list=True, s_list=True)

    p = sub.add_parser("stability", help="stability verdict of the "
                                         "singular solution")
    common(p, need_p=True)

    p = sub.add_parser("fraclap", help="fractional Laplacian of power "
                                       "functions vs the closed form")
    common(p)
    p.add_argument("--beta", type=float, default=None,
                   help="power of |x|^{-beta} (default: a beta sweep)")

    p = sub.add_parser("extend", help="extended singular solution field dump")
    common(p, need_p=True)

    p = sub.add_parser("minimal", help="minimal solution(s) of the "
                                       "half-ball problem")
    common(p, need_p=True)

    p = sub.add_parser("energy", help="scaled-energy report for a minimal "
                                      "solution")
    common(p, need_p=True)

    p = sub.add_parser("verify", help="run the cross-module oracle checks")
    common(p)
    return parser


_DISPATCH = {
    "exponents": _cmd_exponents,
    "stability": _cmd_stability,
    "fraclap": _cmd_fraclap,
    "extend": _cmd_extend,
    "minimal": _cmd_minimal,
    "energy": _cmd_energy,
    "verify": _cmd_verify,
}


def _apply_config(args) -> None:
    if getattr(args, "config", None):
        overrides = json.loads(Path(args.config).read_text())
        for key, value in overrides.items():
            attr = key.replace("-", "_")
            if not hasattr(args, attr):
                raise DomainError(f"unknown config key {key!r}")
            setattr(args, attr, value)


def run(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        if getattr(args, "p", None) is None and args.command in (
                "stability", "extend", "minimal", "energy"):
            raise DomainError(f"{args.command} requires --p")
        return _DISPATCH[args.command](args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, ConvergenceError, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Acceptance suite: one test per numbered criterion, each printing the
quantities it checks.  Run with -v for a per-criterion pass/fail line."""

import math
import time

import numpy as np
import pytest

from fracstable import (Params, RadialFunction, classical_joseph_lundgren,
                        cond_gamma_form, cond_margin, energy_derivative,
                        energy_report, extended_singular, frac_lap_power,
                        frac_lap_radial, gaussian, hardy_constant,
                        hardy_quotient, hs_seminorm_sq, joseph_lundgren,
                        kappa, kernel_mass, lambda_of_alpha, minimal_branch,
                        pohozaev_residual, rescale_blowup, singular_amplitude,
                        sobolev_exponent, stability_form, verify_rho_bounds,
                        weighted_flux)
from fracstable import AxisymGrid, bubble, energy
from fracstable.monotonicity import _PolarView, _radial_rule, _theta_rule

from conftest import PARAMS_STABLE, PARAMS_UNSTABLE


def _singular_solution(params):
    a = singular_amplitude(params.n, params.s, params.p)
    g = params.gamma_exp
    return RadialFunction(lambda r: a * np.asarray(r, float) ** (-g),
                          decay_rate=g, singular_exponent=g)


def _hardy_family(n, s, eps):
    w = (n - 2 * s) / 2 - eps
    return RadialFunction(lambda r: r ** (-w) * np.exp(-r ** 2),
                          decay_rate=math.inf, singular_exponent=w)


def _sample_triples(count, seed=20240817):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(1, 26))
        s = float(rng.uniform(0.05, 0.95))
        if n <= 2 * s:
            continue
        p = sobolev_exponent(n, s) * (1 + float(rng.uniform(0.01, 5.0)))
        out.append((n, s, p))
    return out


def test_criterion_01_eigenvalue_symmetry_and_hardy_value():
    """lambda(0) equals the Hardy constant to 1e-13 and lambda is even
    in alpha to 1e-12, over a 9 x 9 parameter grid."""
    worst_zero, worst_sym = 0.0, 0.0
    for n in range(1, 10):
        for s in np.linspace(0.05, 0.95, 9):
            if n <= 2 * s:
                continue
            lam0 = lambda_of_alpha(n, s, 0.0)
            h = hardy_constant(n, s)
            worst_zero = max(worst_zero, abs(lam0 - h) / h)
            a = 0.41 * (n - 2 * s)
            lp, lm = lambda_of_alpha(n, s, a), lambda_of_alpha(n, s, -a)
            worst_sym = max(worst_sym, abs(lp - lm) / lp)
    print(f"criterion 01: max rel err lambda(0) vs Hardy {worst_zero:.2e}, "
          f"symmetry {worst_sym:.2e}")
    assert worst_zero <= 1e-13
    assert worst_sym <= 1e-12


def test_criterion_02_stability_condition_gamma_form():
    """The stability margin agrees with 2^{2s} (lhs - rhs) of the
    Gamma-ratio form on 500 deterministic samples."""
    worst = 0.0
    for n, s, p in _sample_triples(500):
        params = Params(n, s, p)
        margin = cond_margin(params)
        lhs, rhs = cond_gamma_form(params)
        err = abs(margin - 2 ** (2 * s) * (lhs - rhs)) / (1 + abs(margin))
        worst = max(worst, err)
    print(f"criterion 02: max normalized discrepancy {worst:.2e} over 500 "
          f"samples")
    assert worst <= 1e-10


def test_criterion_03_dividing_exponent_classical_limit():
    """The dividing exponent approaches the classical second critical
    exponent as s -> 1 (within 1% at s = 0.999 for n >= 11) and is
    infinite for n <= 10 near s = 1 and at (3, 1/2)."""
    for n in (11, 12, 15, 20):
        pc = joseph_lundgren(n, 0.999)
        ref = classical_joseph_lundgren(n)
        print(f"criterion 03: n={n} p_c(0.999)={pc:.6f} classical={ref:.6f}")
        assert abs(pc - ref) <= 0.01 * ref
    assert math.isinf(joseph_lundgren(3, 0.5))
    for n in range(3, 11):
        pc = joseph_lundgren(n, 0.999)
        print(f"criterion 03: n={n} p_c(0.999)={pc}")
        assert math.isinf(pc), (
            f"p_c({n}, 0.999) = {pc} is finite; the tail margin at s just "
            f"below 1 is negative for n = 10, so a finite dividing exponent "
            f"exists there")


def test_criterion_04_power_eigenvalue_quadrature():
    """Quadrature of the operator on power functions reproduces the
    closed-form eigenvalue to 1e-6 on 10 seeded samples."""
    t0 = time.time()
    assert frac_lap_power(3, 0.5, 0.5) == pytest.approx(0.5, rel=1e-6)
    rng = np.random.default_rng(42)
    worst = 0.0
    k = 0
    while k < 10:
        n = int(rng.integers(1, 12))
        s = float(rng.uniform(0.1, 0.9))
        if n <= 2 * s:
            continue
        beta = float(rng.uniform(0.1, 0.9)) * (n - 2 * s)
        ref = lambda_of_alpha(n, s, (n - 2 * s) / 2 - beta)
        val = frac_lap_power(n, s, beta)
        worst = max(worst, abs(val - ref) / ref)
        k += 1
    dt = time.time() - t0
    print(f"criterion 04: max rel err {worst:.2e} over 10 samples "
          f"({dt:.1f}s)")
    assert worst <= 1e-6
    assert dt < 300


def test_criterion_05_singular_solution_residual():
    """A |x|^{-2s/(p-1)} satisfies the equation pointwise at (3, 1/2, 3)
    to relative 1e-5 at r in {0.5, 1, 2}."""
    params = PARAMS_UNSTABLE
    u = _singular_solution(params)
    worst = 0.0
    for r in (0.5, 1.0, 2.0):
        lhs = frac_lap_radial(u, params.n, params.s, r)
        rhs = float(u(r)) ** params.p
        worst = max(worst, abs(lhs - rhs) / rhs)
    print(f"criterion 05: max rel residual {worst:.2e}")
    assert worst <= 1e-5


def test_criterion_06_extension_flux_identity():
    """The weighted flux of the extension reproduces kappa_s times the
    nonlocal operator (1e-3) and the Poisson kernel has unit mass
    (1e-10) at seeded evaluation points."""
    g = gaussian()
    worst_flux = 0.0
    for n in (1, 3):
        ref = kappa(0.5) * frac_lap_radial(g, n, 0.5, 0.0)
        val = weighted_flux(g, n, 0.5, 0.0)
        worst_flux = max(worst_flux, abs(val - ref) / abs(ref))
    rng = np.random.default_rng(11)
    worst_mass = 0.0
    for _ in range(10):
        n = int(rng.integers(1, 6))
        s = float(rng.uniform(0.15, 0.85))
        x = float(rng.uniform(0.0, 2.0))
        t = float(rng.uniform(0.05, 1.5))
        worst_mass = max(worst_mass, abs(kernel_mass(n, s, x, t) - 1.0))
    print(f"criterion 06: flux rel err {worst_flux:.2e}, kernel mass "
          f"defect {worst_mass:.2e}")
    assert worst_flux <= 1e-3
    assert worst_mass <= 1e-10


def test_criterion_07_pohozaev_critical_decay():
    """The normalized critical-decay profile has Pohozaev residual below
    1e-3 of the natural energy scale."""
    n, s = 3, 0.5
    p = (n + 2 * s) / (n - 2 * s)
    raw = bubble(n, s)
    c = frac_lap_radial(raw, n, s, 1.0) / float(raw(1.0)) ** p
    u = bubble(n, s, amplitude=c ** (1 / (p - 1)))
    scale = (n - 2 * s) / 2 * hs_seminorm_sq(u, n, s)
    res = pohozaev_residual(u, n, s, p)
    print(f"criterion 07: residual {res:.3e}, scale {scale:.3e}")
    assert abs(res) <= 1e-3 * scale


def test_criterion_08_hardy_inequality_family():
    """The Hardy quotient stays above the sharp constant on a 10-member
    near-optimizer family and comes within 5% at the sharpest member."""
    n, s = 3, 0.5
    lam = hardy_constant(n, s)
    eps_values = np.geomspace(0.5, 0.05, 10)
    quotients = [hardy_quotient(_hardy_family(n, s, e), n, s)
                 for e in eps_values]
    print("criterion 08: quotients/Lambda =",
          np.array2string(np.array(quotients) / lam, precision=4))
    assert all(q >= lam - 1e-8 for q in quotients)
    assert all(a > b for a, b in zip(quotients, quotients[1:]))
    assert quotients[-1] <= 1.05 * lam


def test_criterion_09_stability_dichotomy():
    """The second-variation form is negative for some test function at
    the condition-holding point and nonnegative on the same family at
    the condition-failing point."""
    results = {}
    for params in (PARAMS_UNSTABLE, PARAMS_STABLE):
        u = _singular_solution(params)
        quots = []
        for eps in (0.3, 0.15, 0.05):
            phi = _hardy_family(params.n, params.s, eps)
            q = stability_form(u, phi, params.n, params.s, params.p)
            quots.append(q / hs_seminorm_sq(phi, params.n, params.s))
        results[(params.n, params.s, params.p)] = quots
        print(f"criterion 09: {params.n, params.s, params.p} normalized "
              f"form values {np.round(quots, 4)}")
    assert min(results[(3, 0.5, 3.0)]) < 0
    assert all(q >= -1e-8 for q in results[(11, 0.5, 4.0)])


def test_criterion_10_energy_monotonicity(branch128):
    """The scaled energy of a minimal solution is nondecreasing with the
    derivative identity matching finite differences within 5% away from
    the grid endpoints; on the exact homogeneous field the energy is
    constant to 1e-3 with derivative below 1e-8 of its scale."""
    field = branch128.solutions[1]        # lambda = 0.5
    rep = energy_report(field, PARAMS_STABLE)
    rel = np.abs(rep.dE_formula[1:-1] - rep.dE_fd[1:-1]) \
        / np.abs(rep.dE_fd[1:-1])
    print(f"criterion 10: min increment {rep.min_increment():.3e}, "
          f"max interior dE mismatch {rel.max():.3e}")
    assert rep.min_increment() >= -1e-6
    assert rel.max() <= 0.05
    bar_us = extended_singular(PARAMS_STABLE)
    es = [energy(bar_us, PARAMS_STABLE, lam)[0] for lam in (0.3, 0.6, 1.2)]
    scale = abs(es[0])
    de = max(abs(energy_derivative(bar_us, PARAMS_STABLE, lam))
             for lam in (0.5, 1.0))
    print(f"criterion 10: homogeneous spread {(max(es) - min(es)) / scale:.2e}"
          f", derivative/scale {de / scale:.2e}")
    assert max(es) - min(es) <= 1e-3 * scale
    assert de <= 1e-8 * scale


def test_criterion_11_minimal_branch_structure(branch128, bar_us_stable):
    """The minimal branch converges for each boundary factor, is
    nodewise nondecreasing, sandwiched between zero and the singular
    field, with strictly increasing normalizations and admissible
    rescalings."""
    t0 = time.time()
    grid = branch128.solutions[0].grid
    us_grid = bar_us_stable.on_grid(grid)
    inside = grid.inside()
    inside[0, 0] = False
    prev = None
    for lam, field, it in zip(branch128.lambda_values, branch128.solutions,
                              branch128.iterations):
        assert np.all(field.values >= -1e-12)
        assert np.all(field.values[inside] <= us_grid[inside] * (1 + 1e-9))
        if prev is not None:
            assert np.all(field.values >= prev - 1e-10)
        prev = field.values
    m = branch128.sup_values
    assert np.all(np.diff(m) > 0)
    for j in range(len(m)):
        v = rescale_blowup(branch128, j)
        assert v.values[0, 0] == pytest.approx(1.0, rel=1e-14)
        vg = bar_us_stable.on_grid(v.grid)
        mask = np.isfinite(vg)
        mask[0, 0] = False
        assert np.all(v.values[mask] <= vg[mask] * (1 + 1e-9))
    dt = time.time() - t0
    print(f"criterion 11: iterations {branch128.iterations}, "
          f"sup values {np.round(m, 5)} ({dt:.1f}s checks)")
    assert dt < 600


def test_criterion_12_kernel_ratio_bounds():
    """The averaged kernel times (1+|x|^2)^{n/2+s} stays inside a
    two-sided band with ratio at most 1.05 out to radius 100."""
    radii = np.geomspace(0.01, 100.0, 25)
    lo, hi = verify_rho_bounds(2, 1, 0.5, radii)
    print(f"criterion 12: band [{lo:.6f}, {hi:.6f}], ratio {hi / lo:.4f}")
    assert 0 < lo <= hi
    assert 1.4 < lo and hi < 1.8
    assert hi / lo <= 1.05


def test_criterion_13_blowup_energy_scaling():
    """Near the endpoint of the minimal branch the truncated energy
    integrals scale with the homogeneity exponent n - 2s(p+1)/(p-1)
    within 0.2 in the log-log slope."""
    n, s = 20, 0.5
    p = 1.15 * joseph_lundgren(n, s)
    params = Params(n, s, p)
    target = n - 2 * s * (p + 1) / (p - 1)
    grid = AxisymGrid.graded(n, s, 96, 96)
    branch = minimal_branch(params, [0.99, 0.999], grid,
                            max_iter=2000, tol=1e-9)
    field = branch.solutions[-1]
    view = _PolarView(field)
    th, wth = _theta_rule(n, s, 48)
    radii = np.geomspace(0.5, 0.95, 8)
    bulk, pot = [], []
    for rmax in radii:
        rad, wrad = _radial_rule(0.0, rmax, panels=8, order=12)
        rr = rad[:, None]
        tt = np.broadcast_to(th[None, :], (len(rad), len(th)))
        g = view.grad_sq(np.broadcast_to(rr, tt.shape), tt)
        integ = g * rr ** (n + 1 - 2 * s) * np.cos(tt) ** (n - 1)
        bulk.append(float(wrad @ integ @ wth))
        tr = view.trace(rad)
        pot.append(float(np.dot(wrad, rad ** (n - 1)
                                * np.abs(tr) ** (p + 1))))
    slope_bulk = np.polyfit(np.log(radii), np.log(bulk), 1)[0]
    slope_pot = np.polyfit(np.log(radii), np.log(pot), 1)[0]
    print(f"criterion 13: target slope {target:.3f}, bulk {slope_bulk:.3f}, "
          f"trace potential {slope_pot:.3f}, iterations "
          f"{branch.iterations}")
    assert abs(slope_bulk - target) <= 0.2
    assert abs(slope_pot - target) <= 0.2

"""Extension layer: Poisson kernel, weighted flux, the degenerate
finite-volume solver, the minimal branch and the half-sphere profile."""

import math

import numpy as np
import pytest

from fracstable import (AxisymGrid, DomainError, Params, RadialFunction,
                        extended_singular, frac_lap_radial, gaussian, kappa,
                        kernel_mass, lambda_of_alpha, poisson_extend,
                        power_function, rescale_blowup, solve_linear_degenerate,
                        solve_minimal, sphere_profile, weighted_flux)

from conftest import PARAMS_STABLE


def test_kernel_mass_normalization():
    rng = np.random.default_rng(7)
    for _ in range(5):
        n = int(rng.integers(1, 6))
        s = float(rng.uniform(0.15, 0.85))
        x = float(rng.uniform(0.0, 2.0))
        t = float(rng.uniform(0.05, 1.5))
        assert kernel_mass(n, s, x, t) == pytest.approx(1.0, abs=1e-10)


def test_poisson_extend_constant_and_trace():
    one = RadialFunction(lambda r: np.ones_like(np.asarray(r, float)),
                         decay_rate=0.0)
    assert poisson_extend(one, 3, 0.5, 0.4, 0.8) == pytest.approx(1.0,
                                                                  abs=1e-11)
    g = gaussian()
    assert poisson_extend(g, 3, 0.5, 0.6, 1e-3) == pytest.approx(
        float(g(0.6)), abs=1e-2)
    with pytest.raises(DomainError):
        poisson_extend(g, 3, 0.5, 0.5, 0.0)


def test_poisson_extend_power_homogeneity():
    n, s, alpha = 3, 0.5, 0.4
    w = (n - 2 * s) / 2 - alpha
    u = power_function(w)
    mu = 2.0
    a = poisson_extend(u, n, s, mu * 0.5, mu * 0.3)
    b = mu ** (-w) * poisson_extend(u, n, s, 0.5, 0.3)
    assert a == pytest.approx(b, rel=1e-6)


def test_weighted_flux_identities():
    one = RadialFunction(lambda r: np.ones_like(np.asarray(r, float)),
                         decay_rate=0.0)
    assert weighted_flux(one, 1, 0.5, 0.3) == pytest.approx(0.0, abs=1e-9)
    g = gaussian()
    for n in (1, 3):
        ref = kappa(0.5) * frac_lap_radial(g, n, 0.5, 0.0)
        assert weighted_flux(g, n, 0.5, 0.0) == pytest.approx(ref, rel=1e-3)
    # power data: flux = kappa_s * lambda(alpha) at |x| = 1
    n, s, alpha = 3, 0.5, 0.4
    u = power_function((n - 2 * s) / 2 - alpha)
    ref = kappa(s) * lambda_of_alpha(n, s, alpha)
    assert weighted_flux(u, n, s, 1.0) == pytest.approx(ref, rel=1e-3)


def test_grid_weight_exactness():
    grid = AxisymGrid.graded(3, 0.75, 40, 40)
    e = 2 - 2 * grid.s
    total = grid.cell_t_measure().sum()
    assert total == pytest.approx(grid.radius ** e / e, rel=1e-14)
    assert grid.cell_r_measure().sum() == pytest.approx(
        grid.radius ** grid.n / grid.n, rel=1e-14)
    with pytest.raises(DomainError):
        AxisymGrid(n=3, s=0.5, r_nodes=np.array([0.0, 1.0]),
                   t_nodes=np.array([0.1, 1.0]), radius=1.0)


def test_linear_solver_constants_exact():
    grid = AxisymGrid.graded(3, 0.5, 24, 24)
    field = solve_linear_degenerate(grid, lambda r, t: 1.0, lambda r: 0.0)
    assert np.max(np.abs(field.values - 1.0)) <= 1e-12


def test_linear_solver_maximum_principle():
    grid = AxisymGrid.graded(3, 0.5, 24, 24)
    inside = grid.inside()
    for k in range(1, 6):
        def bdata(r, t, k=k):
            return math.cos(k * math.atan2(t, r)) + 0.3 * k * r
        field = solve_linear_degenerate(grid, bdata, lambda r: 0.0)
        lo, hi = field.values[~inside].min(), field.values[~inside].max()
        assert field.values[inside].min() >= lo - 1e-10
        assert field.values[inside].max() <= hi + 1e-10


def test_linear_solver_manufactured_singular():
    """Boundary + flux data of the extended singular solution must
    reproduce it on the grid interior."""
    params = Params(3, 0.5, 3.0)
    bar_us = extended_singular(params)
    grid = AxisymGrid.graded(3, 0.5, 64, 64)
    flux = kappa(params.s) * np.asarray(
        bar_us.boundary_function(grid.r_nodes)) ** params.p
    flux[0] = flux[1]    # origin cell carries the (integrable) singularity
    field = solve_linear_degenerate(
        grid, lambda r, t: float(bar_us(r, t)), flux)
    exact = bar_us.on_grid(grid)
    inside = grid.inside()
    inside[0, 0] = False      # exact field is infinite at the corner node
    num = np.sqrt(np.mean((field.values[inside] - exact[inside]) ** 2))
    den = np.sqrt(np.mean(exact[inside] ** 2))
    assert num / den < 0.05


def test_minimal_solution_basics(bar_us_stable, branch_small):
    params = PARAMS_STABLE
    grid = branch_small.solutions[0].grid
    zero, it = solve_minimal(params, 0.0, grid, bar_us_stable)
    assert it == 0 and np.all(zero.values == 0)
    us_grid = bar_us_stable.on_grid(grid)
    inside = grid.inside()
    inside[0, 0] = False
    prev = None
    for lam, field in zip(branch_small.lambda_values, branch_small.solutions):
        assert np.all(field.values >= -1e-12)
        assert np.all(field.values[inside] <= us_grid[inside] * (1 + 1e-9))
        if prev is not None:
            assert np.all(field.values >= prev - 1e-10)
        prev = field.values
    assert np.all(np.diff(branch_small.sup_values) > 0)
    with pytest.raises(DomainError):
        solve_minimal(params, 1.0, grid, bar_us_stable)


def test_rescale_blowup(branch_small):
    bar_us = extended_singular(PARAMS_STABLE)
    for j in range(len(branch_small.lambda_values)):
        v = rescale_blowup(branch_small, j)
        assert v.values[0, 0] == pytest.approx(1.0, rel=1e-14)
        us_grid = bar_us.on_grid(v.grid)
        mask = np.isfinite(us_grid)
        mask[0, 0] = False
        assert np.all(v.values[mask] <= us_grid[mask] * (1 + 1e-9))


def test_trace_flux_accessor(branch_small):
    """The discrete weighted flux of a converged minimal solution must
    reproduce the imposed nonlinearity away from the corner."""
    field = branch_small.solutions[-1]
    params = PARAMS_STABLE
    target = kappa(params.s) * field.trace ** params.p
    r = field.grid.r_nodes
    sel = (r > 0.1) & (r < 0.7)
    rel = np.abs(field.flux[sel] - target[sel]) / np.abs(target[sel])
    # first-order one-sided difference on a coarse graded grid
    assert np.median(rel) < 0.35


def test_sphere_profile_comparison_and_crosscheck():
    n, s = 3, 0.5
    th0, phi0 = sphere_profile(n, s, 0.0)
    assert phi0[0] == pytest.approx(1.0, abs=0)
    width = (n - 2 * s) / 2
    for frac in (0.1, 0.3):
        th_a, phi_a = sphere_profile(n, s, frac * width)
        assert np.all(phi0 <= phi_a + 1e-12)
    # Poisson extension of the power trace restricted to the unit
    # half-sphere equals the profile
    alpha = 0.5
    u = power_function(width - alpha)
    th, phi = sphere_profile(n, s, alpha)
    for theta in (0.3, 0.8, 1.3):
        ext = poisson_extend(u, n, s, math.cos(theta), math.sin(theta))
        interp = np.interp(theta, th, phi)
        assert interp == pytest.approx(ext, rel=1e-3)
    with pytest.raises(DomainError):
        sphere_profile(n, s, width)

"""Degenerate-elliptic extension machinery in the upper half space.

Three layers:

* quadrature of the extension kernel P(X,y) = p_{n,s} t^{2s} |X-y|^{-(n+2s)}
  for radial boundary data, with the weighted normal derivative
  -lim t^{1-2s} d/dt recovered by extrapolation;
* a finite-volume solver for div(t^{1-2s} r^{n-1} grad u) = 0 on the
  quarter disk {r^2 + t^2 <= 1, r,t >= 0}, with the weight entering
  only through exact per-cell integrals so the degeneracy at t = 0 is
  handled without evaluating t^{1-2s} pointwise;
* the monotone (lagged-flux) iteration producing the minimal solution
  of the half-ball problem with boundary data lambda * (extended
  singular solution), and the rescaling that extracts bounded entire
  profiles from the branch as lambda -> 1.

The half-sphere two-point problem for the angular profile of the
extended power function |x|^{-(n-2s)/2+alpha} uses the same
exact-weight transmissibilities in the polar angle.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate, interpolate, sparse
from scipy.sparse.linalg import spsolve

from .fraclap import (DEFAULT_SPEC, QuadratureSpec, RadialFunction,
                      _peaked_polar_integral, frac_lap_radial, sphere_area)
from .special import DomainError, Params, kappa, poisson_constant, singular_amplitude


class SolverError(RuntimeError):
    """Linear or nonlinear solve failed to converge."""


# ---------------------------------------------------------------------------
# Poisson extension of radial boundary data
# ---------------------------------------------------------------------------

def _kernel_angular(n: int, s: float, r: float, rho: float, t: float,
                    extra: int = 0, nodes: int = 32) -> float:
    """int_{S^{n-1}} (|r*e1 - rho*w|^2 + t^2)^{-(n+2s)/2 - extra} dsigma."""
    q = (n + 2 * s) / 2 + extra
    c0 = (r - rho) ** 2 + t * t
    if n == 1:
        return c0 ** (-q) + ((r + rho) ** 2 + t * t) ** (-q)
    inner = _peaked_polar_integral(n, q, c0, 2 * r * rho, nodes=nodes)
    return sphere_area(n - 1) * inner


def _radial_kernel_integral(f: Callable[[float], float], n: int, s: float,
                            r: float, t: float, spec: QuadratureSpec,
                            extra: int = 0) -> float:
    """int_0^inf rho^{n-1} f(rho) * angular kernel d rho, split at the
    peak rho ~ r."""
    def g(rho):
        return rho ** (n - 1) * f(rho) * _kernel_angular(
            n, s, r, rho, t, extra, nodes=max(spec.angular_nodes // 2, 24))

    def q(lo, hi):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(g, lo, hi, epsabs=1e-13,
                                    epsrel=max(spec.tolerance, 1e-10),
                                    limit=400)
        return val

    total = 0.0
    if r > 0:
        # the kernel peaks at rho = r with width ~ t
        total += q(0.0, r) + q(r, 4 * r + 10 * t + 1)
        lo = 4 * r + 10 * t + 1
    else:
        lo = 0.0
    total += q(lo, np.inf)
    return float(total)


def poisson_extend(u: RadialFunction, n: int, s: float,
                   x_norm: float, t: float,
                   spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Extension value at X = (x, t), |x| = x_norm, t > 0.

    Self-normalizing: the numerator and the kernel mass are computed by
    the same quadrature and divided, so the kernel integrates to one
    exactly as used.
    """
    if t <= 0:
        raise DomainError("poisson_extend requires t > 0")
    if not u.check_integrability(n, s):
        raise DomainError("input violates the kernel-weighted "
                          "integrability condition")
    num = _radial_kernel_integral(lambda rho: float(u(rho)), n, s,
                                  x_norm, t, spec)
    den = _radial_kernel_integral(lambda rho: 1.0, n, s, x_norm, t, spec)
    return num / den


def kernel_mass(n: int, s: float, x_norm: float, t: float,
                spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Numerically integrated Poisson kernel; equals 1 for the exact
    normalization p_{n,s}."""
    den = _radial_kernel_integral(lambda rho: 1.0, n, s, x_norm, t, spec)
    return poisson_constant(n, s) * t ** (2 * s) * den


def _flux_at(u: RadialFunction, n: int, s: float, x_norm: float, t: float,
             spec: QuadratureSpec) -> float:
    """-t^{1-2s} d/dt of the extension, by differentiating the kernel."""
    # d/dt [t^{2s} (d^2+t^2)^{-q}] = 2s t^{2s-1} (.)^{-q} - 2q t^{2s+1} (.)^{-q-1}
    q = (n + 2 * s) / 2
    base = _radial_kernel_integral(lambda rho: float(u(rho)), n, s,
                                   x_norm, t, spec)
    extra = _radial_kernel_integral(lambda rho: float(u(rho)), n, s,
                                    x_norm, t, spec, extra=1)
    p_ns = poisson_constant(n, s)
    return -p_ns * (2 * s * base - 2 * q * t * t * extra)


def weighted_flux(u: RadialFunction, n: int, s: float, x_norm: float,
                  spec: QuadratureSpec = DEFAULT_SPEC,
                  t0: float = 5e-2, levels: int = 4) -> float:
    """-lim_{t->0} t^{1-2s} d/dt of the extension at |x| = x_norm.

    The flux expands as F(t) = F0 + a t^{2-2s} + O(t^2); Richardson
    extrapolation in t^{2-2s} over a halving t-sequence recovers F0.
    Equals kappa_s * (-Delta)^s u.
    """
    ts = [t0 / 2 ** k for k in range(levels)]
    vals = [_flux_at(u, n, s, x_norm, t, spec) for t in ts]
    expo = 2 - 2 * s
    for _ in range(len(vals) - 1):
        new = []
        for f_coarse, f_fine in zip(vals[:-1], vals[1:]):
            w = 2 ** expo
            new.append((w * f_fine - f_coarse) / (w - 1))
        vals = new
        expo += expo if expo < 2 else 0  # next-order term ~ t^2; keep simple
    return vals[0]


# ---------------------------------------------------------------------------
# Graded axisymmetric grid and finite-volume solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxisymGrid:
    """Tensor grid on [0,R] x [0,T] masked to the quarter disk
    r^2 + t^2 <= radius^2, carrying exact per-cell integrals of the
    measures r^{n-1} dr and t^{1-2s} dt."""

    n: int
    s: float
    r_nodes: np.ndarray
    t_nodes: np.ndarray
    radius: float

    @classmethod
    def graded(cls, n: int, s: float, n_r: int, n_t: int,
               radius: float = 1.0) -> "AxisymGrid":
        """Uniform r-grid; t-grid equidistributed in the weight measure
        t^{1-2s} dt so the first cell carries O(1/n_t) of the mass."""
        r = np.linspace(0.0, radius, n_r + 1)
        j = np.arange(n_t + 1) / n_t
        t = radius * j ** (1.0 / (2 - 2 * s))
        return cls(n=n, s=s, r_nodes=r, t_nodes=t, radius=radius)

    def __post_init__(self):
        if np.any(np.diff(self.r_nodes) <= 0) or np.any(np.diff(self.t_nodes) <= 0):
            raise DomainError("grid nodes must be strictly increasing")
        if self.t_nodes[0] != 0:
            raise DomainError("t grid must start at the trace line t = 0")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.r_nodes), len(self.t_nodes)

    def _half(self, nodes: np.ndarray) -> np.ndarray:
        mid = 0.5 * (nodes[:-1] + nodes[1:])
        return np.concatenate([[nodes[0]], mid, [nodes[-1]]])

    def cell_r_measure(self) -> np.ndarray:
        """Exact integral of r^{n-1} dr over each node's control cell."""
        h = self._half(self.r_nodes)
        n = self.n
        return (h[1:] ** n - h[:-1] ** n) / n

    def cell_t_measure(self) -> np.ndarray:
        """Exact integral of t^{1-2s} dt over each node's control cell."""
        h = self._half(self.t_nodes)
        e = 2 - 2 * self.s
        return (h[1:] ** e - h[:-1] ** e) / e

    def r_transmissibility(self) -> np.ndarray:
        """Face factor r_face^{n-1} / dr for each r-face."""
        h = 0.5 * (self.r_nodes[:-1] + self.r_nodes[1:])
        return h ** (self.n - 1) / np.diff(self.r_nodes)

    def t_transmissibility(self) -> np.ndarray:
        """Exact-weight factor 2s / (t_{j+1}^{2s} - t_j^{2s}) per t-face;
        finite at the trace face because the weight integral converges."""
        e = 2 * self.s
        return e / (self.t_nodes[1:] ** e - self.t_nodes[:-1] ** e)

    def inside(self) -> np.ndarray:
        """Mask of unknown nodes (strictly inside the quarter disk)."""
        rr, tt = np.meshgrid(self.r_nodes, self.t_nodes, indexing="ij")
        return rr ** 2 + tt ** 2 < self.radius ** 2 * (1 - 1e-12)


@dataclass
class ExtField:
    """Discrete axisymmetric field on an AxisymGrid; values[i, j] at
    (r_nodes[i], t_nodes[j])."""

    grid: AxisymGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise DomainError("field shape does not match grid")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field contains non-finite values")

    @property
    def trace(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def flux(self) -> np.ndarray:
        """Discrete -t^{1-2s} d/dt at the trace: since u ~ u0 + c t^{2s}
        near t = 0, the weighted difference 2s (u0 - u1) / t1^{2s} is
        first order in the weighted variable."""
        t1 = self.grid.t_nodes[1]
        e = 2 * self.grid.s
        return e * (self.values[:, 0] - self.values[:, 1]) / t1 ** e

    def interpolator(self):
        return interpolate.RegularGridInterpolator(
            (self.grid.r_nodes, self.grid.t_nodes), self.values,
            bounds_error=False, fill_value=None)


FluxData = Union[Callable[[float], float], np.ndarray]


def _cell_flux_integrals(grid: AxisymGrid, flux_data: FluxData) -> np.ndarray:
    """Per-trace-node integral of r^{n-1} * flux over the control cell."""
    a = grid.cell_r_measure()
    if isinstance(flux_data, np.ndarray):
        return a * flux_data
    h = grid._half(grid.r_nodes)
    x, w = np.polynomial.legendre.leggauss(16)
    out = np.empty(len(grid.r_nodes))
    for i, (lo, hi) in enumerate(zip(h[:-1], h[1:])):
        rr = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        vals = np.array([flux_data(float(r)) * r ** (grid.n - 1) for r in rr])
        out[i] = 0.5 * (hi - lo) * float(np.dot(w, vals))
    return out


def solve_linear_degenerate(grid: AxisymGrid,
                            boundary_data: Callable[[float, float], float],
                            flux_data: FluxData,
                            residual_tol: float = 1e-10) -> ExtField:
    """Finite-volume solve of div(t^{1-2s} r^{n-1} grad u) = 0 on the
    quarter disk, Dirichlet on the spherical arc (boundary_data,
    evaluated at masked-out nodes) and prescribed weighted flux
    -t^{1-2s} du/dt = flux_data on the trace segment."""
    nr, nt = grid.shape
    inside = grid.inside()
    a = grid.cell_r_measure()
    b = grid.cell_t_measure()
    tr = grid.r_transmissibility()
    tt = grid.t_transmissibility()

    idx = -np.ones((nr, nt), dtype=int)
    unknowns = np.argwhere(inside)
    for k, (i, j) in enumerate(unknowns):
        idx[i, j] = k
    n_unk = len(unknowns)
    if n_unk == 0:
        raise DomainError("grid has no interior nodes")

    bvals = np.zeros((nr, nt))
    for i in range(nr):
        for j in range(nt):
            if not inside[i, j]:
                bvals[i, j] = boundary_data(grid.r_nodes[i], grid.t_nodes[j])

    g_int = _cell_flux_integrals(grid, flux_data)

    rows, cols, data = [], [], []
    rhs = np.zeros(n_unk)

    def couple(k, i, j, i2, j2, t_face):
        if idx[i2, j2] >= 0:
            rows.append(k); cols.append(idx[i2, j2]); data.append(-t_face)
        else:
            rhs[k] += t_face * bvals[i2, j2]
        rows.append(k); cols.append(k); data.append(t_face)

    for k, (i, j) in enumerate(unknowns):
        if i > 0:
            couple(k, i, j, i - 1, j, b[j] * tr[i - 1])
        if i < nr - 1:
            couple(k, i, j, i + 1, j, b[j] * tr[i])
        if j > 0:
            couple(k, i, j, i, j - 1, a[i] * tt[j - 1])
        if j < nt - 1:
            couple(k, i, j, i, j + 1, a[i] * tt[j])
        if j == 0:
            rhs[k] += g_int[i]

    mat = sparse.csr_matrix((data, (rows, cols)), shape=(n_unk, n_unk))
    sol = spsolve(mat, rhs)
    if not np.all(np.isfinite(sol)):
        raise SolverError("sparse solve produced non-finite values")

    resid = mat @ sol - rhs
    scale = np.abs(mat).sum(axis=1).A1 * (np.abs(sol).max() + 1.0)
    rel = np.abs(resid) / scale
    if rel.max() > residual_tol:
        raise SolverError(f"discrete residual {rel.max():.2e} above "
                          f"{residual_tol}")

    values = bvals.copy()
    for k, (i, j) in enumerate(unknowns):
        values[i, j] = sol[k]
    return ExtField(grid=grid, values=values)


# ---------------------------------------------------------------------------
# Extended singular solution and minimal branch
# ---------------------------------------------------------------------------

class ExtendedSingular:
    """Extension of A |x|^{-2s/(p-1)}: homogeneous of degree -2s/(p-1)
    with angular profile computed once by Poisson quadrature on the
    unit half circle and spline-interpolated."""

    def __init__(self, params: Params, n_theta: int = 48,
                 spec: QuadratureSpec = DEFAULT_SPEC):
        if not params.supercritical:
            raise DomainError("extended singular solution needs p > p_S")
        self.params = params
        self.amplitude = singular_amplitude(params.n, params.s, params.p)
        gamma = params.gamma_exp
        u_s = RadialFunction(lambda r: self.amplitude * np.asarray(r) ** (-gamma),
                             decay_rate=gamma, singular_exponent=gamma)
        thetas = np.linspace(0.0, math.pi / 2, n_theta + 1)
        prof = np.empty_like(thetas)
        prof[0] = self.amplitude
        p_ns = poisson_constant(params.n, params.s)
        for k, th in enumerate(thetas[1:], start=1):
            # analytic kernel normalization; cheaper than self-normalizing
            t = math.sin(th)
            num = _radial_kernel_integral(lambda rho: float(u_s(rho)),
                                          params.n, params.s,
                                          math.cos(th), t, spec)
            prof[k] = p_ns * t ** (2 * params.s) * num
        self._spline = interpolate.CubicSpline(thetas, prof)
        self.gamma = gamma
        self.boundary_function = u_s

    def __call__(self, r, t):
        r = np.asarray(r, dtype=float)
        t = np.asarray(t, dtype=float)
        rad = np.hypot(r, t)
        theta = np.arctan2(t, r)
        return rad ** (-self.gamma) * self._spline(theta)

    def profile(self, theta):
        """Angular profile g(theta) with u(R, theta) = R^{-gamma} g(theta)."""
        return self._spline(theta)

    def profile_derivative(self, theta):
        """d g / d theta of the angular profile."""
        return self._spline(theta, 1)

    def on_grid(self, grid: AxisymGrid) -> np.ndarray:
        rr, tt = np.meshgrid(grid.r_nodes, grid.t_nodes, indexing="ij")
        rad = np.hypot(rr, tt)
        with np.errstate(divide="ignore"):
            vals = rad ** (-self.gamma) * self._spline(np.arctan2(tt, rr))
        return vals


@functools.lru_cache(maxsize=8)
def extended_singular(params: Params) -> ExtendedSingular:
    """Cached construction; the angular profile quadrature dominates the
    cost of a minimal-branch run."""
    return ExtendedSingular(params)


@dataclass
class MinimalBranch:
    params: Params
    lambda_values: list
    solutions: list          # ExtField per lambda
    iterations: list

    @property
    def sup_values(self) -> np.ndarray:
        """Normalization values m_j = u_{lambda_j}(0) at the origin."""
        return np.array([f.values[0, 0] for f in self.solutions])

    @property
    def rescale_factors(self) -> np.ndarray:
        p, s = self.params.p, self.params.s
        return self.sup_values ** ((p - 1) / (2 * s))


def solve_minimal(params: Params, lam: float, grid: AxisymGrid,
                  bar_us: ExtendedSingular,
                  tol: float = 1e-8, max_iter: int = 200,
                  start: Optional[np.ndarray] = None) -> tuple[ExtField, int]:
    """Minimal solution of the half-ball problem with boundary data
    lam * (extended singular solution), by lagged-flux monotone
    iteration from zero (or a supplied subsolution).

    Iterates are nondecreasing and sandwiched in [0, extended singular
    solution]; violation of the supersolution bound aborts the scheme.
    """
    if not 0 <= lam < 1:
        raise DomainError(f"lambda must lie in [0, 1), got {lam}")
    if lam == 0:
        zero = ExtField(grid=grid, values=np.zeros(grid.shape))
        return zero, 0
    n, s, p = params.n, params.s, params.p
    k_s = kappa(s)
    us_grid = bar_us.on_grid(grid)

    def boundary(r, t):
        return lam * float(bar_us(r, t))

    u_prev = np.zeros(grid.shape) if start is None else start.copy()
    for it in range(1, max_iter + 1):
        flux = k_s * np.maximum(u_prev[:, 0], 0.0) ** p
        field = solve_linear_degenerate(grid, boundary, flux)
        diff = np.max(np.abs(field.values - u_prev))
        inside = grid.inside()
        if np.any(field.values[inside] > us_grid[inside] * (1 + 1e-9)):
            raise SolverError("iterate exceeded the singular supersolution; "
                              "scheme failure (lambda too close to 1?)")
        u_prev = field.values
        if diff <= tol:
            return field, it
    raise SolverError(f"monotone iteration not converged after {max_iter} "
                      f"iterations (last increment {diff:.3e})")


def minimal_branch(params: Params, lambda_values: Sequence[float],
                   grid: AxisymGrid, bar_us: Optional[ExtendedSingular] = None,
                   tol: float = 1e-8, max_iter: int = 200) -> MinimalBranch:
    """Build the nondecreasing family of minimal solutions, warm-starting
    each solve from the previous one (a subsolution of the next problem)."""
    if bar_us is None:
        bar_us = extended_singular(params)
    lams = sorted(lambda_values)
    sols, iters = [], []
    start = None
    for lam in lams:
        field, it = solve_minimal(params, lam, grid, bar_us,
                                  tol=tol, max_iter=max_iter, start=start)
        sols.append(field)
        iters.append(it)
        start = field.values
    return MinimalBranch(params=params, lambda_values=list(lams),
                         solutions=sols, iterations=iters)


def rescale_blowup(branch: MinimalBranch, j: int) -> ExtField:
    """v_j(X) = m_j^{-1} u_{lambda_j}(X / R_j) with R_j = m_j^{(p-1)/(2s)};
    v_j(0) = 1 by construction and the grid dilates by R_j."""
    field = branch.solutions[j]
    m_j = branch.sup_values[j]
    if m_j <= 0:
        raise DomainError("rescale requires a positive supremum")
    r_j = branch.rescale_factors[j]
    grid = field.grid
    new_grid = AxisymGrid(n=grid.n, s=grid.s,
                          r_nodes=grid.r_nodes * r_j,
                          t_nodes=grid.t_nodes * r_j,
                          radius=grid.radius * r_j)
    return ExtField(grid=new_grid, values=field.values / m_j)


# ---------------------------------------------------------------------------
# Half-sphere angular profile
# ---------------------------------------------------------------------------

def sphere_profile(n: int, s: float, alpha: float, ode_nodes: int = 400,
                   theta_nodes: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray]:
    """Angular profile phi_alpha on the half sphere: solves

        -d/dth [ (cos th)^{n-1} (sin th)^{1-2s} phi' ]
            + C (cos th)^{n-1} (sin th)^{1-2s} phi = 0,

    C = ((n-2s)/2)^2 - alpha^2, with phi = 1 at the equator th = 0 and
    natural zero-flux at the pole th = pi/2.  Returns (theta, phi).
    """
    if not 0 <= alpha < (n - 2 * s) / 2:
        raise DomainError(f"alpha must lie in [0, (n-2s)/2), got {alpha}")
    coeff = ((n - 2 * s) / 2) ** 2 - alpha ** 2
    if theta_nodes is None:
        j = np.arange(ode_nodes + 1) / ode_nodes
        theta_nodes = (math.pi / 2) * j ** (1.0 / (2 - 2 * s))
    th = np.asarray(theta_nodes, dtype=float)
    m = len(th)

    def weight(x):
        return np.cos(x) ** (n - 1) * np.sin(x) ** (1 - 2 * s)

    # exact-weight transmissibility 1 / int dx / weight on each interval;
    # integrable at th=0, divergent at the pole for n >= 2 (zero flux)
    trans = np.empty(m - 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for k in range(m - 1):
            val, _ = integrate.quad(lambda x: 1.0 / weight(x), th[k], th[k + 1],
                                    epsabs=0, epsrel=1e-11, limit=200)
            trans[k] = 1.0 / val if np.isfinite(val) and val > 0 else 0.0

    half = np.concatenate([[th[0]], 0.5 * (th[:-1] + th[1:]), [th[-1]]])
    mass = np.empty(m)
    for k in range(m):
        mass[k], _ = integrate.quad(weight, half[k], half[k + 1],
                                    epsabs=0, epsrel=1e-11, limit=200)

    # unknowns are nodes 1..m-1 (node 0 Dirichlet = 1)
    main = np.zeros(m - 1)
    lower = np.zeros(m - 2)
    upper = np.zeros(m - 2)
    rhs = np.zeros(m - 1)
    for k in range(1, m):
        row = k - 1
        main[row] += coeff * mass[k] + trans[k - 1]
        if k - 1 >= 1:
            lower[row - 1] = -trans[k - 1]
        else:
            rhs[row] += trans[k - 1] * 1.0
        if k < m - 1:
            main[row] += trans[k]
            upper[row] = -trans[k]
    mat = sparse.diags([lower, main, upper], [-1, 0, 1], format="csr")
    phi_inner = spsolve(mat, rhs)
    phi = np.concatenate([[1.0], phi_inner])
    if not np.all(np.isfinite(phi)):
        raise SolverError("half-sphere profile solve failed")
    return th, phi

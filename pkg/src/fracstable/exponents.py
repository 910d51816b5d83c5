"""Stability dividing line for the fractional Lane-Emden equation.

The singular solution A |x|^{-2s/(p-1)} is unstable exactly when

    p * lambda(alpha*) > Lambda_{n,s},

equivalently when the printed Gamma-ratio inequality

    p Gamma(n/2 - s/(p-1)) Gamma(s + s/(p-1))
      / (Gamma(s/(p-1)) Gamma((n-2s)/2 - s/(p-1)))
      > Gamma((n+2s)/4)^2 / Gamma((n-2s)/4)^2

holds.  The generalized Joseph-Lundgren exponent p_c(n, s) is the zero
in p of the margin p*lambda(alpha*) - Lambda_{n,s}, or +inf when the
margin stays positive for all p (detected through its analytic p->inf
limit rather than a large-p probe).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .special import (DomainError, Params, hardy_constant, lambda_of_alpha,
                      log_gamma, sobolev_exponent)


class ConvergenceError(RuntimeError):
    """A numerical iteration failed to reach its target tolerance."""


@dataclass(frozen=True)
class StabilityVerdict:
    params: Params
    margin: float

    @property
    def cond_holds(self) -> bool:
        return self.margin > 0

    @property
    def singular_solution_stable(self) -> bool:
        return not self.cond_holds


def cond_margin(params: Params) -> float:
    """Instability margin p*lambda(alpha*) - Lambda_{n,s}.

    Positive sign is algebraically equivalent to the Gamma-ratio
    inequality: with alpha* = (n-2s)/2 - 2s/(p-1) the four Gamma
    arguments match pairwise and the 2^{2s} factors cancel.
    """
    n, s, p = params.n, params.s, params.p
    if n <= 2 * s:
        raise DomainError(f"cond_margin requires n > 2s, got n={n}, s={s}")
    if not params.supercritical:
        raise DomainError(
            f"cond_margin requires p > p_S = {params.p_S}, got p={p}")
    return p * lambda_of_alpha(n, s, params.alpha_star) - hardy_constant(n, s)


def stability_verdict(params: Params) -> StabilityVerdict:
    return StabilityVerdict(params=params, margin=cond_margin(params))


def cond_gamma_form(params: Params) -> tuple[float, float]:
    """Both sides of the instability condition exactly as printed."""
    n, s, p = params.n, params.s, params.p
    if n <= 2 * s:
        raise DomainError(f"cond_gamma_form requires n > 2s, got n={n}, s={s}")
    q = s / (p - 1)
    for arg in (n / 2 - q, s + q, q, (n - 2 * s) / 2 - q):
        if arg <= 0:
            raise DomainError(f"Gamma argument {arg} <= 0 in condition")
    lhs = p * math.exp(log_gamma(n / 2 - q) + log_gamma(s + q)
                       - log_gamma(q) - log_gamma((n - 2 * s) / 2 - q))
    rhs = math.exp(2 * log_gamma((n + 2 * s) / 4) - 2 * log_gamma((n - 2 * s) / 4))
    return lhs, rhs


def tail_margin(n: int, s: float) -> float:
    """p -> inf limit of the instability margin.

    Since Gamma(s/(p-1)) ~ (p-1)/s, p*lambda(alpha*) tends to
    L = 2^{2s} s Gamma(s) Gamma(n/2) / Gamma((n-2s)/2); the returned
    value is L - Lambda_{n,s}.  Nonnegative tail margin means the
    singular solution is unstable for every p, i.e. p_c = +inf.
    """
    if n <= 2 * s:
        raise DomainError(f"tail_margin requires n > 2s, got n={n}, s={s}")
    limit = math.exp(2 * s * math.log(2) + math.log(s) + log_gamma(s)
                     + log_gamma(n / 2) - log_gamma((n - 2 * s) / 2))
    return limit - hardy_constant(n, s)


def classical_joseph_lundgren(n: int) -> float:
    """Local-case (s -> 1) Joseph-Lundgren exponent; +inf for n <= 10."""
    if n <= 10:
        return math.inf
    return ((n - 2) ** 2 - 4 * n + 8 * math.sqrt(n - 1)) / ((n - 2) * (n - 10))


def joseph_lundgren(n: int, s: float, tol: float = 1e-10,
                    max_bisect: int = 200) -> float:
    """Generalized Joseph-Lundgren exponent p_c(n, s).

    Returns +inf when tail_margin(n,s) >= 0; otherwise brackets the
    sign change of cond_margin in p by doubling from 2*p_S and
    bisects until |margin| <= tol.
    """
    if tail_margin(n, s) >= 0:
        return math.inf
    p_s = sobolev_exponent(n, s)
    if math.isinf(p_s):
        # n <= 2s is excluded by tail_margin already
        raise DomainError("p_S is infinite; no supercritical range")

    def margin(p: float) -> float:
        return cond_margin(Params(n, s, p))

    lo = p_s * (1 + 1e-9)
    hi = 2 * p_s
    while margin(hi) > 0:
        lo = hi
        hi *= 2
        if hi > 1e12:
            raise ConvergenceError("no sign change found up to p = 1e12")
    for _ in range(max_bisect):
        mid = 0.5 * (lo + hi)
        m = margin(mid)
        if abs(m) <= tol:
            return mid
        if m > 0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(
        f"bisection did not reach |margin| <= {tol} in {max_bisect} steps")


@dataclass(frozen=True)
class ExponentTableRow:
    n: int
    s: float
    p_S: float
    p_c: float
    tail_margin: float
    error: str = ""


def region_table(n_values, s_values, tol: float = 1e-10) -> list[ExponentTableRow]:
    """Evaluate (p_S, p_c, tail margin) over a grid, n outer, s inner.

    Per-row domain errors are recorded in the row rather than aborting
    the table.
    """
    rows = []
    for n in n_values:
        for s in s_values:
            try:
                rows.append(ExponentTableRow(
                    n=n, s=s,
                    p_S=sobolev_exponent(n, s),
                    p_c=joseph_lundgren(n, s, tol=tol),
                    tail_margin=tail_margin(n, s)))
            except (DomainError, ConvergenceError) as exc:
                rows.append(ExponentTableRow(
                    n=n, s=s, p_S=sobolev_exponent(n, s),
                    p_c=math.nan, tail_margin=math.nan, error=str(exc)))
    return rows

"""Closed-form constants for the fractional Lane-Emden problem.

Everything here is an exact Gamma-function expression evaluated in log
space: the integral normalization A_{n,s}, the extension constant
kappa_s, the optimal Hardy constant Lambda_{n,s}, the power-function
eigenvalue lambda(alpha) and the amplitude of the explicit singular
solution A |x|^{-2s/(p-1)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.special import gammaln


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if x <= 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return float(gammaln(x))


def _gamma(x: float) -> float:
    return math.exp(log_gamma(x))


def sobolev_exponent(n: int, s: float) -> float:
    """Critical exponent (n+2s)/(n-2s); +inf when n <= 2s."""
    if n <= 2 * s:
        return math.inf
    return (n + 2 * s) / (n - 2 * s)


@dataclass(frozen=True)
class Params:
    """Problem triple (n, s, p) with the derived exponents attached.

    alpha_star = (n-2s)/2 - 2s/(p-1) is the homogeneity offset of the
    singular solution; beta = (2s/(p-1))(n-2s-2s/(p-1)) is the
    zero-order coefficient of the half-sphere equation.
    """

    n: int
    s: float
    p: float

    def __post_init__(self):
        if self.n < 1 or int(self.n) != self.n:
            raise DomainError(f"n must be an integer >= 1, got {self.n}")
        if not 0 < self.s < 1:
            raise DomainError(f"s must lie in (0,1), got {self.s}")
        if self.p <= 1:
            raise DomainError(f"p must exceed 1, got {self.p}")

    @property
    def p_S(self) -> float:
        return sobolev_exponent(self.n, self.s)

    @property
    def gamma_exp(self) -> float:
        """Decay/blow-up exponent 2s/(p-1) of the singular solution."""
        return 2 * self.s / (self.p - 1)

    @property
    def alpha_star(self) -> float:
        return (self.n - 2 * self.s) / 2 - self.gamma_exp

    @property
    def beta(self) -> float:
        return self.gamma_exp * (self.n - 2 * self.s - self.gamma_exp)

    @property
    def supercritical(self) -> bool:
        return self.p > self.p_S


def normalizing_constant(n: int, s: float) -> float:
    """A_{n,s} = 2^{2s-1} Gamma((n+2s)/2) / (pi^{n/2} |Gamma(-s)|).

    |Gamma(-s)| is evaluated as Gamma(1-s)/s via the recurrence, never
    by calling Gamma at a negative argument.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not 0 < s < 1:
        raise DomainError(f"s must lie in (0,1), got {s}")
    log_abs_gamma_neg_s = log_gamma(1 - s) - math.log(s)
    log_a = ((2 * s - 1) * math.log(2) + log_gamma((n + 2 * s) / 2)
             - (n / 2) * math.log(math.pi) - log_abs_gamma_neg_s)
    return math.exp(log_a)


def kappa(s: float) -> float:
    """Extension constant kappa_s = Gamma(1-s) / (2^{2s-1} Gamma(s))."""
    if not 0 < s < 1:
        raise DomainError(f"s must lie in (0,1), got {s}")
    return math.exp(log_gamma(1 - s) - (2 * s - 1) * math.log(2) - log_gamma(s))


def poisson_constant(n: int, s: float) -> float:
    """Normalization p_{n,s} = Gamma(n/2+s) / (pi^{n/2} Gamma(s)) of the
    extension kernel t^{2s} |X-y|^{-(n+2s)}."""
    if not 0 < s < 1:
        raise DomainError(f"s must lie in (0,1), got {s}")
    return math.exp(log_gamma(n / 2 + s) - (n / 2) * math.log(math.pi) - log_gamma(s))


def lambda_of_alpha(n: int, s: float, alpha: float) -> float:
    """Eigenvalue lambda(alpha) of the power function |x|^{-(n-2s)/2+alpha}:

        lambda(alpha) = 2^{2s} Gamma((n+2s+2a)/4) Gamma((n+2s-2a)/4)
                              / (Gamma((n-2s-2a)/4) Gamma((n-2s+2a)/4))

    Defined for |alpha| < (n-2s)/2 (Gamma pole at the boundary).
    """
    if n <= 2 * s:
        raise DomainError(f"lambda(alpha) requires n > 2s, got n={n}, s={s}")
    half_width = (n - 2 * s) / 2
    if abs(alpha) >= half_width:
        raise DomainError(
            f"|alpha|={abs(alpha)} must be < (n-2s)/2 = {half_width}")
    log_val = (2 * s * math.log(2)
               + log_gamma((n + 2 * s + 2 * alpha) / 4)
               + log_gamma((n + 2 * s - 2 * alpha) / 4)
               - log_gamma((n - 2 * s - 2 * alpha) / 4)
               - log_gamma((n - 2 * s + 2 * alpha) / 4))
    return math.exp(log_val)


def hardy_constant(n: int, s: float) -> float:
    """Optimal constant Lambda_{n,s} = 2^{2s} Gamma((n+2s)/4)^2 / Gamma((n-2s)/4)^2
    of the fractional Hardy inequality."""
    if n <= 2 * s:
        raise DomainError(f"hardy_constant requires n > 2s, got n={n}, s={s}")
    return lambda_of_alpha(n, s, 0.0)


def singular_amplitude(n: int, s: float, p: float) -> float:
    """Amplitude A of the singular solution u_s = A |x|^{-2s/(p-1)}:
    A^{p-1} = lambda(alpha*) with alpha* = (n-2s)/2 - 2s/(p-1).

    Requires p > p_S(n,s) so that alpha* > 0.
    """
    params = Params(n, s, p)
    if not params.supercritical:
        raise DomainError(
            f"singular_amplitude requires p > p_S = {params.p_S}, got p={p}")
    return lambda_of_alpha(n, s, params.alpha_star) ** (1 / (p - 1))

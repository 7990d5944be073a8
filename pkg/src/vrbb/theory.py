"""Closed-form convergence-rate constants and feasibility conditions.

Pure arithmetic on reals; nothing here runs an optimizer. Infeasibility
of a parameter choice is a first-class result except where a stated
precondition is violated, which raises.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple


class InfeasibleConfigurationError(ValueError):
    """A precondition inequality fails; carries the violated margin."""

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class BoundaryCaseError(ValueError):
    """A sign-aware expression sits exactly on its zero denominator."""


@dataclass(frozen=True)
class TheoryConstants:
    """Smoothness/convexity constants and their importance-sampling analogues.

    L_q = max_i L/(n q_i) and mu_q = min_i mu/(n q_i); the ratios
    L_r = L/L_q and mu_r = mu_q/mu are both <= 1, and the approximate
    condition number kappa_plus = L_q/mu_q dominates kappa. kappa_r and
    kappa_r_plus fold in the hedge envelope (alpha_hat, alpha_tilde).
    """

    L: float
    mu: float
    kappa: float
    L_q: float
    mu_q: float
    L_r: float
    mu_r: float
    kappa_plus: float
    alpha_hat: float
    alpha_tilde: float
    kappa_r: float
    kappa_r_plus: float


def compute_constants(problem, dist, bounds):
    """Evaluate all constants for a problem, a distribution, and hedge bounds."""
    L = problem.smoothness_constant()
    mu = problem.strong_convexity_constant()
    kappa = L / mu
    smin = float(dist.scaled.min())
    smax = float(dist.scaled.max())
    L_q = L / smin
    mu_q = mu / smax
    L_r = smin
    mu_r = 1.0 / smax
    kappa_plus = L_q / mu_q
    a_hat, a_til = bounds.alpha_hat, bounds.alpha_tilde
    return TheoryConstants(
        L=L,
        mu=mu,
        kappa=kappa,
        L_q=L_q,
        mu_q=mu_q,
        L_r=L_r,
        mu_r=mu_r,
        kappa_plus=kappa_plus,
        alpha_hat=a_hat,
        alpha_tilde=a_til,
        kappa_r=a_hat * kappa + 1.0 - a_til,
        kappa_r_plus=a_hat * kappa_plus + 1.0 - a_til,
    )


def check_theorem1_condition(b, gamma, m, n, const, b_bar):
    """Inner-loop feasibility of (b, gamma) for the recursive engine."""
    c = const
    lin = (c.alpha_hat * gamma * c.L + (1.0 - c.alpha_tilde) * gamma * c.mu) / (
        c.mu * b_bar
    )
    if b >= n or n == 1:
        quad = 0.0
    else:
        ratio = (
            c.alpha_hat * gamma * c.L**2 + (1.0 - c.alpha_tilde) * gamma * c.mu * c.L
        ) / (c.mu * c.L * b_bar)
        quad = m * (n - b) / (b * (n - 1)) * ratio**2
    return quad + lin <= 1.0


def check_theorem1_plus_condition(b, gamma, m, n, const, b_bar):
    """Importance-sampling analogue of the inner-loop feasibility check."""
    c = const
    lin = c.L_r * (
        c.alpha_hat * gamma * c.L_q + (1.0 - c.alpha_tilde) * gamma * c.mu_q
    ) / (c.mu_q * b_bar)
    if b >= n or n == 1:
        quad = 0.0
    else:
        ratio = (
            c.alpha_hat * gamma * c.L_q + (1.0 - c.alpha_tilde) * gamma * c.mu_q
        ) / (c.mu_q * b_bar)
        quad = m * c.L_r**2 * (n - b) / (b * (n - 1)) * ratio**2
    return quad + lin <= 1.0


def sarah_inner_rate(m, const, gamma, b_bar):
    """Per-inner-loop coefficient: E||grad P(w_m)||^2 <= rate * initial gap."""
    c = const
    return (
        2.0
        * b_bar
        * c.mu
        * c.L
        / (gamma * (m + 1) * (c.alpha_hat * c.L + (1.0 - c.alpha_tilde) * c.mu))
    )


def sarah_inner_rate_plus(m, const, gamma, b_bar):
    c = const
    return (
        2.0
        * b_bar
        * c.mu_q
        * c.L_q
        / (gamma * (m + 1) * (c.alpha_hat * c.L_q + (1.0 - c.alpha_tilde) * c.mu_q))
    )


def sarah_outer_rate(m, const, gamma, b_bar):
    """Per-epoch contraction factor of the squared gradient norm."""
    return const.kappa * b_bar / (gamma * (m + 1) * const.kappa_r)


def sarah_outer_rate_plus(m, const, gamma, b_bar):
    return const.mu_r * const.kappa_plus * b_bar / (gamma * (m + 1) * const.kappa_r_plus)


def sarah_m_required(eps, sigma0, const, gamma, b_bar):
    """Inner iterations for an eps-accurate squared gradient norm, given
    an initial objective gap sigma0."""
    _require_positive(eps=eps, sigma0=sigma0, gamma=gamma, b_bar=b_bar)
    value = 2.0 * b_bar * const.mu * sigma0 * const.kappa / (eps * gamma * const.kappa_r)
    return max(0, math.ceil(value - 1.0))


def sarah_m_required_plus(eps, sigma0, const, gamma, b_bar):
    _require_positive(eps=eps, sigma0=sigma0, gamma=gamma, b_bar=b_bar)
    value = (
        2.0
        * b_bar
        * const.mu_q
        * sigma0
        * const.kappa_plus
        / (eps * gamma * const.kappa_r_plus)
    )
    return max(0, math.ceil(value - 1.0))


def rbb_m_required(eps, sigma0, mu, gamma, b_bar):
    """Hedge-off reference count."""
    _require_positive(eps=eps, sigma0=sigma0, gamma=gamma, b_bar=b_bar)
    return max(0, math.ceil(2.0 * b_bar * mu * sigma0 / (eps * gamma) - 1.0))


def sarah_s_required(eps, zeta, const, gamma, m, b_bar):
    """Epochs for an eps-accurate squared gradient norm, given the
    initial squared gradient norm zeta."""
    _require_positive(eps=eps, zeta=zeta, gamma=gamma, b_bar=b_bar)
    denom = (
        math.log(const.kappa_r)
        - math.log(const.kappa)
        + math.log(gamma * (m + 1))
        - math.log(b_bar)
    )
    if denom <= 0:
        raise InfeasibleConfigurationError(
            "per-epoch factor is not a contraction", margin=denom
        )
    return max(0, math.ceil((math.log(zeta) - math.log(eps)) / denom))


def sarah_s_required_plus(eps, zeta, const, gamma, m, b_bar):
    _require_positive(eps=eps, zeta=zeta, gamma=gamma, b_bar=b_bar)
    denom = (
        math.log(const.kappa_r_plus)
        - math.log(const.mu_r * const.kappa_plus)
        + math.log(gamma * (m + 1))
        - math.log(b_bar)
    )
    if denom <= 0:
        raise InfeasibleConfigurationError(
            "per-epoch factor is not a contraction", margin=denom
        )
    return max(0, math.ceil((math.log(zeta) - math.log(eps)) / denom))


def rbb_s_required(eps, zeta, gamma, m, b_bar):
    """Hedge-off reference epoch count."""
    _require_positive(eps=eps, zeta=zeta, gamma=gamma, b_bar=b_bar)
    denom = math.log(gamma * (m + 1)) - math.log(b_bar)
    if denom <= 0:
        raise InfeasibleConfigurationError(
            "per-epoch factor is not a contraction", margin=denom
        )
    return max(0, math.ceil((math.log(zeta) - math.log(eps)) / denom))


class RateResult(NamedTuple):
    rho: float
    feasible: bool


def ms2gd_rate(m, b, b_bar, gamma2, const):
    """Linear rate of the semi-stochastic engine; requires b*b_bar > 4*kappa_r*gamma2."""
    den = b * b_bar - 4.0 * gamma2 * const.kappa_r
    if den <= 0:
        raise InfeasibleConfigurationError(
            "need b * b_bar > 4 * gamma2 * kappa_r", margin=den
        )
    rho = const.kappa * b * b_bar**2 / (m * gamma2 * const.kappa_r * den) + (
        2.0 * gamma2 * const.kappa_r / den
    )
    return RateResult(rho=rho, feasible=rho < 1.0)


def ms2gd_plus_rate(m, b, b_bar, gamma2, const):
    """Importance-sampling analogue; requires b*b_bar > 4*kappa_r_plus*gamma2*L_r."""
    den = b * b_bar - 4.0 * gamma2 * const.kappa_r_plus * const.L_r
    if den <= 0:
        raise InfeasibleConfigurationError(
            "need b * b_bar > 4 * gamma2 * kappa_r_plus * L_r", margin=den
        )
    rho = const.mu_r * const.kappa_plus * b * b_bar**2 / (
        m * gamma2 * const.kappa_r_plus * den
    ) + (2.0 * gamma2 * const.kappa_r_plus * const.L_r / den)
    return RateResult(rho=rho, feasible=rho < 1.0)


def rbb_ms2gd_rate(m, b, b_bar, const):
    """Hedge-off reference rate (mu b b_bar^2 + 2 m L) / (mu b b_bar m - 4 m L)."""
    den = const.mu * b * b_bar * m - 4.0 * m * const.L
    if den <= 0:
        raise InfeasibleConfigurationError(
            "need mu * b * b_bar > 4 * L", margin=den
        )
    rho = (const.mu * b * b_bar**2 + 2.0 * m * const.L) / den
    return RateResult(rho=rho, feasible=rho < 1.0)


class HalvingCondition(NamedTuple):
    """Batch-correction threshold that halves the hedge-off rate.

    direction ">" means b_bar must exceed the threshold, "<" that it
    must stay below it (threshold <= 0 with "<" admits no batch size).
    """

    threshold: float
    direction: str

    def admits(self, b_bar):
        if self.direction == ">":
            return b_bar > self.threshold
        return b_bar < self.threshold


def ms2gd_halving_condition(c, const, gamma2, m):
    """Sign-aware form of: A * b_bar < c * B * m, where A and B compare the
    hedged condition number against the plain one at rate level c."""
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    x = const.kappa / (const.kappa_r * gamma2)
    a_term = (1.0 + 2.0 * c) * x**2 - 1.0 - c
    b_term = (1.0 + 2.0 * c) * x / 2.0 - 1.0 - c
    if a_term == 0.0:
        raise BoundaryCaseError("denominator term is exactly zero")
    threshold = c * b_term * m / a_term
    direction = ">" if a_term < 0 else "<"
    return HalvingCondition(threshold=threshold, direction=direction)


def gradient_dominated_rates(delta, const, gamma, m, b_bar):
    """Rate constants under delta-gradient dominance, delta < 1/(2 mu)."""
    if not 0 < delta < 1.0 / (2.0 * const.mu):
        raise ValueError("delta must lie in (0, 1/(2 mu))")
    c = const
    rho = (
        2.0
        * b_bar
        * c.mu
        * c.L
        * delta
        / (gamma * (m + 1) * (c.alpha_hat * c.L + (1.0 - c.alpha_tilde) * c.mu))
    )
    rho_plus = (
        2.0
        * b_bar
        * c.mu_q
        * c.L_q
        * delta
        / (gamma * (m + 1) * (c.alpha_hat * c.L_q + (1.0 - c.alpha_tilde) * c.mu_q))
    )
    return rho, rho_plus


def _require_positive(**kwargs):
    for name, value in kwargs.items():
        if not value > 0:
            raise ValueError(f"{name} must be > 0, got {value}")

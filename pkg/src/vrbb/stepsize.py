"""Hedged Barzilai-Borwein step-size rules.

The hedged step is an affine combination of the two BB quotients,
computed from stochastic curvature on two independent index batches and
scaled by gamma / max(b1, b2). The affine weight c = alpha ** h(arg)
exceeds 1, so the first quotient is amplified and the second offsets the
surplus. A decaying adaptor h relaxes the amplification over the run.

Rule functions return None when a quotient is degenerate or the combined
value is not positive; callers route that through `safeguard`.
"""

import math
from dataclasses import dataclass, field

import numpy as np

# Curvature products are flagged relative to ||s||*||y|| so the tolerance
# carries no unit dependence.
CURVATURE_RTOL = 1e-12

# The inverse-linear adaptor is undefined at argument 0; loop indicators
# start at 1, and this floor guards explicitly-zero sigma pairs.
ADAPTOR_ARG_FLOOR = 1e-3

ADAPTOR_KINDS = ("constant", "inverse_linear", "table")


def bb1_raw(s_vec, y_vec):
    """||s||^2 / (s.y); None when the curvature product is not positive."""
    s_vec = np.asarray(s_vec, dtype=np.float64)
    y_vec = np.asarray(y_vec, dtype=np.float64)
    sty = float(s_vec @ y_vec)
    tol = CURVATURE_RTOL * _norm(s_vec) * _norm(y_vec)
    if not sty > tol:
        return None
    return float(s_vec @ s_vec) / sty


def bb2_raw(s_vec, y_vec):
    """(s.y) / ||y||^2; None when y is degenerate relative to s."""
    s_vec = np.asarray(s_vec, dtype=np.float64)
    y_vec = np.asarray(y_vec, dtype=np.float64)
    yty = float(y_vec @ y_vec)
    tol = CURVATURE_RTOL * _norm(s_vec) * _norm(y_vec)
    if not yty > tol:
        return None
    return float(s_vec @ y_vec) / yty


def _norm(v):
    return math.sqrt(float(v @ v))


def adaptor_value(adaptor, sigma1, sigma2, s, k, table=None):
    """h evaluated at the iteration indicator sigma1*s + sigma2*k.

    "constant" is identically 1 (non-adaptive hedging). "inverse_linear"
    is (1 + a)/a with a the floored indicator, decaying toward 1.
    "table" is a step function over the indicator given as sorted
    (threshold, value) pairs.
    """
    if adaptor == "constant":
        return 1.0
    arg = sigma1 * s + sigma2 * k
    if adaptor == "inverse_linear":
        a = max(arg, ADAPTOR_ARG_FLOOR)
        return (1.0 + a) / a
    if adaptor == "table":
        return _table_lookup(table, arg)
    raise ValueError(f"unknown adaptor kind {adaptor!r}")


def _table_lookup(table, arg):
    if not table:
        raise ValueError("table adaptor requires a non-empty (threshold, value) table")
    thresholds = np.asarray([p[0] for p in table], dtype=np.float64)
    values = np.asarray([p[1] for p in table], dtype=np.float64)
    pos = int(np.searchsorted(thresholds, arg, side="right")) - 1
    return float(values[max(pos, 0)])


@dataclass(frozen=True)
class HedgeBounds:
    """Extremes of alpha ** h(.) over the configured iteration range."""

    alpha_hat: float
    alpha_tilde: float


def hedge_bounds(adaptor, alpha, sigma1, sigma2, s_max, m, table=None):
    """alpha_hat = alpha**max(h), alpha_tilde = alpha**min(h) over the
    grid s in [1, s_max], k in [1, m]."""
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if s_max < 1 or m < 1:
        raise ValueError("s_max and m must be >= 1")
    if adaptor == "constant":
        return HedgeBounds(alpha_hat=float(alpha), alpha_tilde=float(alpha))
    if adaptor == "inverse_linear":
        # h is non-increasing in the indicator, so the extremes sit at the
        # grid corners.
        h_hi = adaptor_value(adaptor, sigma1, sigma2, 1, 1)
        h_lo = adaptor_value(adaptor, sigma1, sigma2, s_max, m)
        return HedgeBounds(alpha_hat=float(alpha) ** h_hi, alpha_tilde=float(alpha) ** h_lo)
    if adaptor == "table":
        if s_max * m > 50_000_000:
            raise ValueError("table adaptor grid too large to scan")
        args = (
            sigma1 * np.arange(1, s_max + 1)[:, None]
            + sigma2 * np.arange(1, m + 1)[None, :]
        ).ravel()
        thresholds = np.asarray([p[0] for p in table], dtype=np.float64)
        values = np.asarray([p[1] for p in table], dtype=np.float64)
        pos = np.maximum(np.searchsorted(thresholds, args, side="right") - 1, 0)
        h = values[pos]
        return HedgeBounds(
            alpha_hat=float(alpha) ** float(h.max()),
            alpha_tilde=float(alpha) ** float(h.min()),
        )
    raise ValueError(f"unknown adaptor kind {adaptor!r}")


@dataclass(frozen=True)
class CurvatureSnapshot:
    """Iterate displacement and two batch-gradient displacements.

    y1/y2 hold plain subset-gradient differences for the base rule and
    importance-weighted ones for the plus rule.
    """

    s_vec: np.ndarray
    y1: np.ndarray
    y2: np.ndarray


@dataclass(frozen=True)
class HedgeConfig:
    """Knobs of the hedged rule.

    gamma scales the recursive-estimator variant, gamma2 the
    semi-stochastic one. b1/b2 are the curvature batch sizes; the rule
    divides by max(b1, b2). alpha = 1 turns hedging off and recovers the
    plain random-BB1 rule.
    """

    alpha: float = 1.0
    adaptor: str = "constant"
    sigma1: float = 0.0
    sigma2: float = 0.0
    gamma: float = 1.0
    gamma2: float = 1.0
    b1: int = 1
    b2: int = 1
    fallback_c: float | None = None
    table: tuple = field(default=None)

    @property
    def b_bar(self):
        return max(self.b1, self.b2)

    def validate(self):
        if not self.alpha >= 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if self.adaptor not in ADAPTOR_KINDS:
            raise ValueError(f"adaptor must be one of {ADAPTOR_KINDS}")
        if self.adaptor == "table" and not self.table:
            raise ValueError("table adaptor requires table points")
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise ValueError("sigma1 and sigma2 must be >= 0")
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if not self.gamma2 > 0:
            raise ValueError("gamma2 must be > 0")
        if self.b1 < 1 or self.b2 < 1:
            raise ValueError("b1 and b2 must be >= 1")
        if self.fallback_c is not None and not self.fallback_c > 0:
            raise ValueError("fallback_c must be > 0 when set")
        return self


def rhbb_step(snapshot, cfg, s, k, mode="sarah"):
    """Candidate hedged step at epoch s, inner step k.

    mode "sarah" applies gamma, mode "ms2gd" applies gamma2. Returns
    None when either quotient is flagged or the combination is not a
    positive finite number; the caller applies `safeguard`.
    """
    if mode == "sarah":
        gamma = cfg.gamma
    elif mode == "ms2gd":
        gamma = cfg.gamma2
    else:
        raise ValueError(f"mode must be 'sarah' or 'ms2gd', got {mode!r}")
    q1 = bb1_raw(snapshot.s_vec, snapshot.y1)
    q2 = bb2_raw(snapshot.s_vec, snapshot.y2)
    if q1 is None or q2 is None:
        return None
    c = cfg.alpha ** adaptor_value(cfg.adaptor, cfg.sigma1, cfg.sigma2, s, k, cfg.table)
    value = gamma / cfg.b_bar * (c * q1 + (1.0 - c) * q2)
    if not (math.isfinite(value) and value > 0):
        return None
    return value


def rhbb_plus_step(snapshot, cfg, s, k, mode="sarah"):
    """Same combination as `rhbb_step`, on a snapshot whose y1/y2 are
    importance-weighted subset-gradient differences."""
    return rhbb_step(snapshot, cfg, s, k, mode=mode)


def safeguard(candidate, last_good, eta0):
    """Positive step fallback: candidate if valid, else the last accepted
    step, else the cold-start constant eta0."""
    if not eta0 > 0:
        raise ValueError("eta0 must be > 0")
    if candidate is not None and math.isfinite(candidate) and candidate > 0:
        return candidate
    if last_good is not None:
        return last_good
    return eta0

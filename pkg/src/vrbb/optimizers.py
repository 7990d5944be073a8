"""Iteration engines.

Two variance-reduced engines share the epoch skeleton: an exact gradient
at the snapshot, one deterministic step, then m-1 stochastic updates
driven by either the recursive estimator (running difference chain) or
the semi-stochastic estimator (anchored to the snapshot gradient).
Baselines: plain SVRG with a constant step and SVRG with an epoch-level
BB1 step.

A single run is strictly sequential; the recursive estimator is order
dependent. Runs are deterministic functions of (problem, config, seed)
and may execute concurrently since they share nothing mutable.
"""

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import sampling, stepsize

ENGINES = ("mb-sarah", "ms2gd", "svrg", "svrg-bb")
RULES = ("rhbb", "rhbb+", "rbb", "rbb+")
DISTRIBUTIONS = ("uniform", "option1", "option2")


class DivergenceError(RuntimeError):
    """A run produced a non-finite iterate. Carries the last finite trace."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def parse_algorithm(algorithm):
    """Split an algorithm id into (engine, rule, inner_only).

    Ids: "<engine>[-in]-<rule>" for the variance-reduced engines, plus
    the baselines "svrg" and "svrg-bb".
    """
    if algorithm in ("svrg", "svrg-bb"):
        return algorithm, None, False
    for engine in ("mb-sarah", "ms2gd"):
        for prefix, inner in ((f"{engine}-in-", True), (f"{engine}-", False)):
            if algorithm.startswith(prefix):
                rule = algorithm[len(prefix):]
                if rule in RULES:
                    return engine, rule, inner
    raise ValueError(f"unknown algorithm id {algorithm!r}")


@dataclass(frozen=True)
class RunConfig:
    """One run of one algorithm on one problem."""

    algorithm: str = "mb-sarah-rhbb"
    epochs: int = 15
    m: int | None = None  # None -> ceil(n / b), one inner pass per epoch
    b: int = 4
    hedge: stepsize.HedgeConfig = field(default_factory=stepsize.HedgeConfig)
    eta0: tuple = (0.1,)  # deterministic-step schedule, cycled per epoch
    distribution: str = "uniform"
    tau: float = 2.0
    eval_every: int = 100  # inner-only trace cadence, in updates
    include_stepsize_passes: bool = True
    label: str | None = None

    @property
    def display_label(self):
        return self.label if self.label is not None else self.algorithm

    def resolved_m(self, n):
        if self.m is not None:
            return self.m
        return max(1, math.ceil(n / self.b))

    def validate(self):
        engine, rule, _ = parse_algorithm(self.algorithm)
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be >= 1 when given")
        if self.b < 1:
            raise ValueError("b must be >= 1")
        if not self.eta0 or any(not e > 0 for e in self.eta0):
            raise ValueError("eta0 schedule must be non-empty and positive")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
        if rule in ("rhbb", "rbb") and self.distribution != "uniform":
            raise ValueError(
                f"{self.algorithm} samples curvature batches uniformly; "
                f"distribution {self.distribution!r} requires a '+' rule"
            )
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        self.hedge.validate()
        return self


@dataclass(frozen=True)
class TraceRecord:
    epoch: int
    effective_passes: float
    grad_norm: float
    objective: float
    step_min: float
    step_mean: float
    step_max: float
    safeguards: int


@dataclass
class RunTrace:
    records: list
    status: str = "ok"
    final_w: np.ndarray | None = None


@dataclass(frozen=True)
class StepEvent:
    """Per-step debug payload handed to the optional on_step hook."""

    epoch: int
    k: int
    w: np.ndarray
    v: np.ndarray
    snapshot: stepsize.CurvatureSnapshot | None
    eta: float
    safeguarded: bool


class EvalCounter:
    """Component-gradient evaluation counter.

    Effective passes divide total evaluations by n. Step-size batch
    evaluations are tracked separately and excluded from the total when
    the config says so; gradient-norm evaluations made only for the
    trace never count.
    """

    def __init__(self, n, include_stepsize=True):
        self.n = n
        self.include_stepsize = include_stepsize
        self.main_evals = 0
        self.stepsize_evals = 0

    def add(self, k):
        self.main_evals += k

    def add_stepsize(self, k):
        self.stepsize_evals += k

    def effective_passes(self):
        total = self.main_evals
        if self.include_stepsize:
            total += self.stepsize_evals
        return total / self.n


class _WindowStats:
    def __init__(self):
        self.reset()

    def reset(self):
        self.count = 0
        self.total = 0.0
        self.lo = math.inf
        self.hi = -math.inf
        self.safeguards = 0

    def add(self, eta, safeguarded):
        self.count += 1
        self.total += eta
        self.lo = min(self.lo, eta)
        self.hi = max(self.hi, eta)
        if safeguarded:
            self.safeguards += 1

    def snapshot(self):
        if self.count == 0:
            return (0.0, 0.0, 0.0, 0)
        return (self.lo, self.total / self.count, self.hi, self.safeguards)


def build_distribution(cfg, problem):
    """Sampling distribution for the curvature batches of one run."""
    if cfg.distribution == "uniform":
        return sampling.uniform_distribution(problem.n)
    dataset = getattr(problem, "dataset", None)
    if dataset is None:
        raise ValueError(
            f"distribution {cfg.distribution!r} needs per-row dataset statistics"
        )
    if cfg.distribution == "option1":
        return sampling.option1_distribution(dataset, cfg.tau)
    return sampling.option2_distribution(dataset, cfg.tau)


def run_mb_sarah(problem, cfg, rng, on_step=None, debug=False, trace_every=None):
    """Recursive-estimator engine: v_k = grad P_S(w_k) - grad P_S(w_{k-1}) + v_{k-1}."""
    return _run_vr_engine(problem, cfg, rng, "mb-sarah", on_step, debug, trace_every)


def run_ms2gd(problem, cfg, rng, on_step=None, debug=False, trace_every=None):
    """Semi-stochastic engine: v_k = grad P_S(w_k) - grad P_S(anchor) + grad P(anchor)."""
    return _run_vr_engine(problem, cfg, rng, "ms2gd", on_step, debug, trace_every)


def run_inner_only(problem, cfg, rng, on_step=None, debug=False):
    """Single-epoch variant traced every cfg.eval_every updates."""
    if cfg.epochs != 1:
        raise ValueError("inner-only runs require epochs == 1")
    engine, _, _ = parse_algorithm(cfg.algorithm)
    if engine == "mb-sarah":
        return run_mb_sarah(
            problem, cfg, rng, on_step=on_step, debug=debug, trace_every=cfg.eval_every
        )
    if engine == "ms2gd":
        return run_ms2gd(
            problem, cfg, rng, on_step=on_step, debug=debug, trace_every=cfg.eval_every
        )
    raise ValueError(f"inner-only variant not defined for {cfg.algorithm!r}")


def run(problem, cfg, seed_or_rng, on_step=None, debug=False):
    """Dispatch a validated config to its engine."""
    cfg.validate()
    rng = np.random.default_rng(seed_or_rng)
    engine, _, inner_only = parse_algorithm(cfg.algorithm)
    if inner_only:
        return run_inner_only(problem, cfg, rng, on_step=on_step, debug=debug)
    if engine == "mb-sarah":
        return run_mb_sarah(problem, cfg, rng, on_step=on_step, debug=debug)
    if engine == "ms2gd":
        return run_ms2gd(problem, cfg, rng, on_step=on_step, debug=debug)
    if engine == "svrg":
        return run_svrg(problem, cfg, rng, on_step=on_step)
    return run_svrg_bb(problem, cfg, rng, on_step=on_step)


def _effective_hedge(hedge, rule):
    # The plain random-BB baselines are the hedged rule with the hedge
    # switched off.
    if rule in ("rbb", "rbb+"):
        return dataclasses.replace(hedge, alpha=1.0, adaptor="constant")
    return hedge


def _check_finite(w, records, what):
    if not np.all(np.isfinite(w)):
        raise DivergenceError(
            f"non-finite {what}", RunTrace(records=records, status="diverged")
        )


def _run_vr_engine(problem, cfg, rng, engine, on_step, debug, trace_every):
    cfg.validate()
    _, rule, _ = parse_algorithm(cfg.algorithm)
    if rule is None:
        raise ValueError(f"{cfg.algorithm!r} is not a variance-reduced engine id")
    hedge = _effective_hedge(cfg.hedge, rule).validate()
    plus = rule.endswith("+")
    mode = "sarah" if engine == "mb-sarah" else "ms2gd"

    n, d = problem.n, problem.d
    m = cfg.resolved_m(n)
    dist = build_distribution(cfg, problem)
    winv = dist.inv_scaled if plus else None
    # A numerically-uniform distribution keeps the without-replacement
    # draw so the '+' rule is bit-identical to the plain rule on it.
    weighted_draw = plus and not dist.is_uniform

    rng_s, rng_s1, rng_s2 = sampling.spawn_rngs(rng, 3)
    counter = EvalCounter(n, cfg.include_stepsize_passes)
    stats = _WindowStats()
    records = []
    updates = 0
    last_good = None
    w_tilde = np.zeros(d)
    pending_grad = None

    def emit_inner_record():
        grad = problem.full_gradient(w)  # evaluation only, not counted
        lo, mean, hi, sg = stats.snapshot()
        rec = TraceRecord(
            epoch=updates,
            effective_passes=counter.effective_passes(),
            grad_norm=float(np.linalg.norm(grad)),
            objective=problem.objective(w),
            step_min=lo,
            step_mean=mean,
            step_max=hi,
            safeguards=sg,
        )
        _check_record(rec, records)
        records.append(rec)
        stats.reset()

    for s in range(1, cfg.epochs + 1):
        g0 = pending_grad if pending_grad is not None else problem.full_gradient(w_tilde)
        counter.add(n)
        eta0 = cfg.eta0[(s - 1) % len(cfg.eta0)]

        w_prev = w_tilde
        if engine == "mb-sarah":
            v = g0
        else:
            anchor = w_tilde
            phi = g0
            v = phi
        w = w_prev - eta0 * v
        updates += 1
        stats.add(eta0, False)
        _check_finite(w, records, "iterate")
        if trace_every is not None and updates % trace_every == 0:
            emit_inner_record()

        if m > 1:
            s_idx = sampling.draw_uniform_subsets(rng_s, n, cfg.b, m - 1)
            if weighted_draw:
                s1_idx = sampling.draw_weighted_multisets(rng_s1, dist, hedge.b1, m - 1)
                s2_idx = sampling.draw_weighted_multisets(rng_s2, dist, hedge.b2, m - 1)
            else:
                s1_idx = sampling.draw_uniform_subsets(rng_s1, n, hedge.b1, m - 1)
                s2_idx = sampling.draw_uniform_subsets(rng_s2, n, hedge.b2, m - 1)

        for k in range(1, m):
            S = s_idx[k - 1]
            if engine == "mb-sarah":
                v_prev = v
                v = problem.subset_gradient_diff(w, w_prev, S) + v
            else:
                v = problem.subset_gradient_diff(w, anchor, S) + phi
            counter.add(2 * cfg.b)
            if debug and engine == "mb-sarah":
                recomputed = problem.subset_gradient(w, S) - problem.subset_gradient(
                    w_prev, S
                )
                np.testing.assert_allclose(v - v_prev, recomputed, atol=1e-10)
            _check_finite(v, records, "estimate")

            y1 = problem.subset_gradient_diff(w, w_prev, s1_idx[k - 1], winv)
            y2 = problem.subset_gradient_diff(w, w_prev, s2_idx[k - 1], winv)
            counter.add_stepsize(2 * hedge.b1 + 2 * hedge.b2)
            snap = stepsize.CurvatureSnapshot(s_vec=w - w_prev, y1=y1, y2=y2)
            if plus:
                candidate = stepsize.rhbb_plus_step(snap, hedge, s, k, mode=mode)
            else:
                candidate = stepsize.rhbb_step(snap, hedge, s, k, mode=mode)
            fallback = hedge.fallback_c if hedge.fallback_c is not None else eta0
            eta = stepsize.safeguard(candidate, last_good, fallback)
            safeguarded = candidate is None
            if not safeguarded:
                last_good = eta
            stats.add(eta, safeguarded)
            if on_step is not None:
                on_step(StepEvent(s, k, w, v, snap, eta, safeguarded))

            w_prev, w = w, w - eta * v
            updates += 1
            _check_finite(w, records, "iterate")
            if trace_every is not None and updates % trace_every == 0:
                emit_inner_record()

        w_tilde = w
        pending_grad = problem.full_gradient(w_tilde)
        if trace_every is None:
            lo, mean, hi, sg = stats.snapshot()
            rec = TraceRecord(
                epoch=s,
                effective_passes=counter.effective_passes(),
                grad_norm=float(np.linalg.norm(pending_grad)),
                objective=problem.objective(w_tilde),
                step_min=lo,
                step_mean=mean,
                step_max=hi,
                safeguards=sg,
            )
            _check_record(rec, records)
            records.append(rec)
            stats.reset()

    if trace_every is not None and updates % trace_every != 0:
        w = w_tilde
        emit_inner_record()
    return RunTrace(records=records, status="ok", final_w=w_tilde)


def _check_record(rec, records):
    vals = (rec.effective_passes, rec.grad_norm, rec.objective)
    if not all(math.isfinite(v) for v in vals):
        raise DivergenceError(
            "non-finite trace record", RunTrace(records=records, status="diverged")
        )


def run_svrg(problem, cfg, rng, on_step=None):
    """Plain SVRG: constant step, single-index inner sampling."""
    return _run_svrg_family(problem, cfg, rng, bb=False, on_step=on_step)


def run_svrg_bb(problem, cfg, rng, on_step=None):
    """SVRG with an epoch-level BB1 step from snapshot differences.

    The first epoch uses the constant schedule; afterwards
    eta_s = ||dw||^2 / (m * dw.dphi) for consecutive snapshots.
    """
    return _run_svrg_family(problem, cfg, rng, bb=True, on_step=on_step)


def _run_svrg_family(problem, cfg, rng, bb, on_step):
    cfg.validate()
    n, d = problem.n, problem.d
    m = cfg.m if cfg.m is not None else n  # one inner index draw per example
    rng_i = sampling.spawn_rngs(rng, 1)[0]
    counter = EvalCounter(n, cfg.include_stepsize_passes)
    records = []
    w_tilde = np.zeros(d)
    pending_grad = None
    prev_snapshot = None
    prev_phi = None
    eta = cfg.eta0[0]
    safeguards_total = 0

    for s in range(1, cfg.epochs + 1):
        phi = pending_grad if pending_grad is not None else problem.full_gradient(w_tilde)
        counter.add(n)
        if bb and prev_snapshot is not None:
            dw = w_tilde - prev_snapshot
            dphi = phi - prev_phi
            den = float(dw @ dphi)
            if den > 1e-300:
                eta = float(dw @ dw) / (m * den)
            else:
                safeguards_total += 1  # keep the previous step
        elif not bb:
            eta = cfg.eta0[(s - 1) % len(cfg.eta0)]
        prev_snapshot = w_tilde
        prev_phi = phi

        w = w_tilde
        idx = rng_i.integers(0, n, size=m)
        for k in range(m):
            g = problem.subset_gradient_diff(w, w_tilde, idx[k : k + 1]) + phi
            counter.add(2)
            if on_step is not None:
                on_step(StepEvent(s, k + 1, w, g, None, eta, False))
            w = w - eta * g
            _check_finite(w, records, "iterate")
        w_tilde = w
        pending_grad = problem.full_gradient(w_tilde)
        rec = TraceRecord(
            epoch=s,
            effective_passes=counter.effective_passes(),
            grad_norm=float(np.linalg.norm(pending_grad)),
            objective=problem.objective(w_tilde),
            step_min=eta,
            step_mean=eta,
            step_max=eta,
            safeguards=safeguards_total,
        )
        _check_record(rec, records)
        records.append(rec)
        safeguards_total = 0
    return RunTrace(records=records, status="ok", final_w=w_tilde)

"""Experiment harness: config files, suite execution, trace CSVs, summaries.

A suite is one dataset plus a list of run configs and a list of seeds;
every (config, seed) pair executes independently and writes its own CSV,
so a diverging run can never corrupt a sibling's output. Reruns with the
same inputs produce byte-identical files.
"""

import csv
import math
import os
import re
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import yaml

from . import optimizers, stepsize, theory
from .data import load_libsvm
from .model import LogisticL2Problem
from .optimizers import RunConfig, TraceRecord

DATA_DIR_ENV = "VRBB_DATA_DIR"

TRACE_HEADER = (
    "algo,seed,epoch,effective_passes,grad_norm,objective,"
    "step_min,step_mean,step_max,safeguards,status"
)


class ConfigError(ValueError):
    """Invalid or unknown configuration content, reported with its key path."""


# Keys accepted inside a run mapping, with the spec knob each one reaches.
RUN_KEYS = {
    "algorithm": "engine + step rule id",
    "label": "display label for traces",
    "epochs": "outer epoch count",
    "m": "inner update frequency",
    "b": "estimator batch size",
    "eta0": "deterministic-step schedule (scalar or list, cycled)",
    "alpha": "hedge base",
    "adaptor": "adaptor kind: constant | inverse_linear | table",
    "sigma1": "epoch indicator weight",
    "sigma2": "inner indicator weight",
    "gamma": "recursive-engine step scale",
    "gamma2": "semi-stochastic-engine step scale",
    "b1": "first curvature batch size",
    "b2": "second curvature batch size",
    "fallback_c": "safeguard cold-start override",
    "table": "adaptor table points",
    "distribution": "curvature sampling law: uniform | option1 | option2",
    "tau": "distribution sharpening exponent",
    "eval_every": "inner-only trace cadence",
    "include_stepsize_passes": "count curvature batches in effective passes",
}

TOP_KEYS = ("name", "dataset", "dim", "lambda", "seeds", "preset", "preset_args",
            "defaults", "runs")

_HEDGE_KEYS = ("alpha", "adaptor", "sigma1", "sigma2", "gamma", "gamma2", "b1",
               "b2", "fallback_c", "table")


@dataclass(frozen=True)
class ExperimentSuite:
    name: str
    dataset_path: Path
    dim: int | None
    lam: float
    seeds: tuple
    configs: tuple


def _build_run_config(raw, where):
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: run entry must be a mapping")
    unknown = set(raw) - set(RUN_KEYS)
    if unknown:
        raise ConfigError(f"{where}: unknown key {sorted(unknown)[0]!r}")
    hedge_kwargs = {}
    run_kwargs = {}
    for key, value in raw.items():
        if key in _HEDGE_KEYS:
            if key == "table" and value is not None:
                value = tuple((float(a), float(h)) for a, h in value)
            hedge_kwargs[key] = value
        elif key == "eta0":
            if isinstance(value, (int, float)):
                value = (float(value),)
            else:
                value = tuple(float(v) for v in value)
            run_kwargs[key] = value
        else:
            run_kwargs[key] = value
    cfg = RunConfig(hedge=stepsize.HedgeConfig(**hedge_kwargs), **run_kwargs)
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    return cfg


def load_config(path, overrides=None):
    """Load and fully validate a suite; unknown keys are hard errors."""
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    unknown = set(doc) - set(TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown key {sorted(unknown)[0]!r}")
    overrides = overrides or {}

    dataset = doc.get("dataset")
    if not dataset:
        raise ConfigError("missing dataset")
    dataset_path = resolve_dataset_path(dataset, base=path.parent)

    seeds = overrides.get("seeds") or doc.get("seeds", [0])
    if isinstance(seeds, int):
        seeds = [seeds]
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ConfigError("seeds must be non-empty")

    defaults = doc.get("defaults", {}) or {}
    if not isinstance(defaults, dict):
        raise ConfigError("defaults: must be a mapping")
    run_dicts = []
    if doc.get("preset"):
        run_dicts.extend(expand_preset(doc["preset"], doc.get("preset_args") or {}))
    for entry in doc.get("runs", []) or []:
        run_dicts.append(entry)
    if not run_dicts:
        raise ConfigError("no runs: provide 'runs' or 'preset'")

    configs = []
    for i, raw in enumerate(run_dicts):
        merged = {**defaults, **raw}
        if overrides.get("include_stepsize_passes") is not None:
            merged["include_stepsize_passes"] = overrides["include_stepsize_passes"]
        configs.append(_build_run_config(merged, where=f"runs[{i}]"))

    labels = [c.display_label for c in configs]
    dupes = {l for l in labels if labels.count(l) > 1}
    if dupes:
        raise ConfigError(f"duplicate run label {sorted(dupes)[0]!r}")

    lam = float(doc.get("lambda", 1e-2))
    if not lam > 0:
        raise ConfigError("lambda must be > 0")
    dim = doc.get("dim")
    return ExperimentSuite(
        name=str(doc.get("name") or path.stem),
        dataset_path=dataset_path,
        dim=None if dim is None else int(dim),
        lam=lam,
        seeds=seeds,
        configs=tuple(configs),
    )


def resolve_dataset_path(dataset, base=None):
    """Resolve a dataset path against the config dir, then $VRBB_DATA_DIR."""
    p = Path(dataset)
    candidates = [p]
    if not p.is_absolute():
        if base is not None:
            candidates.append(Path(base) / p)
        env = os.environ.get(DATA_DIR_ENV)
        if env:
            candidates.append(Path(env) / p)
    for cand in candidates:
        if cand.exists():
            return cand.resolve()
    raise ConfigError(f"dataset not found: {dataset}")


def build_problem(suite):
    dataset = load_libsvm(suite.dataset_path, dim=suite.dim)
    return LogisticL2Problem(dataset, suite.lam)


# ---------------------------------------------------------------------------
# Presets: common benchmark parameter grids, selectable by suite id.

_BASE = {"b": 4, "b1": 40, "b2": 40, "eta0": 0.1, "epochs": 15,
         "include_stepsize_passes": False}


def _vr(engine, rule, alpha=1.0, label=None, **extra):
    run = dict(_BASE)
    run.update(algorithm=f"{engine}-{rule}", alpha=float(alpha))
    if label is None:
        label = f"{engine}-{rule}" if rule.split("-")[-1] in ("rbb", "rbb+") else \
            f"{engine}-{rule}({alpha:g})"
    run["label"] = label
    run.update(extra)
    return run


def _alpha_sweep(engine, alphas, **extra):
    runs = [_vr(engine, "rbb", **extra)]
    runs += [_vr(engine, "rhbb", a, **extra) for a in alphas]
    return runs


def _adaptive_sweep(engine, alphas, sigma1, sigma2, **extra):
    runs = [_vr(engine, "rbb", **extra)]
    for a in alphas:
        runs.append(_vr(engine, "rhbb", a, label=f"{engine}-rhbb({a:g})-pure", **extra))
        runs.append(
            _vr(engine, "rhbb", a, label=f"{engine}-rhbb({a:g})-adaptive",
                adaptor="inverse_linear", sigma1=sigma1, sigma2=sigma2, **extra)
        )
    return runs


def _plus_sweep(engine, alphas, option, gamma, **extra):
    scale = {"gamma": gamma, "gamma2": gamma}
    runs = [
        _vr(engine, "rbb", **scale, **extra),
        _vr(engine, "rbb+", distribution=option, tau=2.0, **scale, **extra),
    ]
    for a in alphas:
        runs.append(_vr(engine, "rhbb", a, **scale, **extra))
        runs.append(
            _vr(engine, "rhbb+", a, distribution=option, tau=2.0, **scale, **extra)
        )
    return runs


def _preset_hedge(engine, default_alphas):
    def build(args):
        return _alpha_sweep(engine, args.get("alphas", default_alphas),
                            **_only(args, "epochs", "m"))
    return build


def _preset_engines_race(args):
    alphas = args.get("alphas", [2, 3, 4, 5])
    extra = _only(args, "epochs", "m")
    runs = []
    for engine in ("mb-sarah", "ms2gd"):
        runs += [_vr(engine, "rhbb", a, **extra) for a in alphas]
    return runs


def _preset_eta0_mix(args):
    engine = args.get("engine", "mb-sarah")
    schedules = {
        "const-0.05": [0.05], "const-0.1": [0.1], "const-0.5": [0.5],
        "const-1": [1.0],
        "mix1": [0.05, 0.1, 0.5, 1.0], "mix2": [1.0, 0.5, 0.1, 0.05],
        "mix3": [0.5, 1.0, 0.05, 0.1], "mix4": [1.0, 0.05, 0.1, 0.5],
    }
    return [
        _vr(engine, "rhbb", 3, label=f"{engine}-rhbb(3)-eta0-{name}", eta0=sched,
            **_only(args, "epochs", "m"))
        for name, sched in schedules.items()
    ]


def _preset_inner_only(engine):
    def build(args):
        alphas = args.get("alphas", [2, 3, 4, 5])
        extra = {"epochs": 1, "m": args.get("m", 20000),
                 "eval_every": args.get("eval_every", 500)}
        runs = [_vr(engine, "in-rbb", **extra)]
        runs += [_vr(engine, "in-rhbb", a, **extra) for a in alphas]
        return runs
    return build


def _preset_bh_sweep(engine):
    def build(args):
        alphas = args.get("alphas", [3, 6])
        sizes = args.get("sizes", [20, 30, 40, 50, 60])
        extra = _only(args, "epochs", "m")
        return [
            _vr(engine, "rhbb", a, label=f"{engine}-rhbb({a:g})-bh{bh}",
                b1=bh, b2=bh, **extra)
            for a in alphas for bh in sizes
        ]
    return build


def _preset_plus(engine, option):
    def build(args):
        return _plus_sweep(engine, args.get("alphas", [3, 6, 8]), option,
                           args.get("gamma", 0.8), **_only(args, "epochs", "m"))
    return build


def _preset_adaptive(engine, sigma1, sigma2):
    def build(args):
        return _adaptive_sweep(engine, args.get("alphas", [2, 3, 4, 5]),
                               args.get("sigma1", sigma1),
                               args.get("sigma2", sigma2),
                               **_only(args, "epochs", "m"))
    return build


def _preset_adaptive_plus(engine, option):
    def build(args):
        alphas = args.get("alphas", [2, 3, 4, 5])
        gamma = args.get("gamma", 0.8)
        extra = _only(args, "epochs", "m")
        scale = {"gamma": gamma, "gamma2": gamma}
        runs = []
        for a in alphas:
            runs.append(
                _vr(engine, "rhbb+", a, label=f"{engine}-rhbb+({a:g})-pure",
                    distribution=option, tau=2.0, **scale, **extra)
            )
            runs.append(
                _vr(engine, "rhbb+", a, label=f"{engine}-rhbb+({a:g})-adaptive",
                    distribution=option, tau=2.0, adaptor="inverse_linear",
                    sigma1=0.6, sigma2=0.2, **scale, **extra)
            )
        return runs
    return build


def _preset_baselines(args):
    eta = args.get("svrg_eta", 0.05)
    extra = _only(args, "epochs", "m")
    runs = [
        _vr("mb-sarah", "rhbb", args.get("alpha", 3), **extra),
        _vr("ms2gd", "rhbb", args.get("alpha", 3), **extra),
        dict(_BASE, algorithm="svrg", label="svrg", eta0=eta, **extra),
        dict(_BASE, algorithm="svrg-bb", label="svrg-bb", eta0=eta, **extra),
    ]
    if args.get("adaptive"):
        runs.insert(2, _vr("mb-sarah", "rhbb", args.get("alpha", 3),
                           label="mb-sarah-rhbb(3)-adaptive",
                           adaptor="inverse_linear", sigma1=0.8, sigma2=0.8, **extra))
        runs.insert(3, _vr("ms2gd", "rhbb", args.get("alpha", 3),
                           label="ms2gd-rhbb(3)-adaptive",
                           adaptor="inverse_linear", sigma1=0.8, sigma2=0.8, **extra))
    return runs


def _only(args, *keys):
    return {k: args[k] for k in keys if k in args}


PRESETS = {
    "fig2": _preset_hedge("mb-sarah", [2, 3, 4, 5]),
    "fig3": _preset_hedge("ms2gd", [2, 3, 4, 5]),
    "fig4": _preset_hedge("mb-sarah", [10, 11, 12, 13]),
    "fig5": _preset_hedge("ms2gd", [10, 11, 12, 13]),
    "fig6": _preset_eta0_mix,
    "fig7": _preset_engines_race,
    "fig8": _preset_inner_only("mb-sarah"),
    "fig9": _preset_inner_only("ms2gd"),
    "fig10": _preset_bh_sweep("mb-sarah"),
    "fig11": _preset_bh_sweep("ms2gd"),
    "fig12": _preset_plus("mb-sarah", "option1"),
    "fig13": _preset_plus("mb-sarah", "option2"),
    "fig14": _preset_plus("ms2gd", "option1"),
    "fig15": _preset_plus("ms2gd", "option2"),
    "fig16": _preset_baselines,
    "fig17": _preset_adaptive("mb-sarah", 0.6, 0.2),
    "fig18": _preset_adaptive("ms2gd", 0.6, 0.2),
    "fig19": _preset_adaptive("mb-sarah", 0.7, 0.1),
    "fig20": _preset_adaptive("ms2gd", 0.7, 0.1),
    "fig21": _preset_adaptive("mb-sarah", 0.4, 0.4),
    "fig22": _preset_adaptive("ms2gd", 0.4, 0.4),
    "fig23": _preset_adaptive_plus("mb-sarah", "option1"),
    "fig24": _preset_adaptive_plus("mb-sarah", "option2"),
    "fig25": _preset_adaptive_plus("ms2gd", "option1"),
    "fig26": _preset_adaptive_plus("ms2gd", "option2"),
    "fig27": lambda args: _preset_baselines({**args, "adaptive": True}),
}


def expand_preset(name, args):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}")
    if not isinstance(args, dict):
        raise ConfigError("preset_args must be a mapping")
    return PRESETS[name](args)


# ---------------------------------------------------------------------------
# Suite execution and trace files.

@dataclass(frozen=True)
class TraceData:
    label: str
    seed: int
    records: tuple
    status: str


@dataclass
class SuiteResult:
    files: list
    traces: list
    n_diverged: int


def _slug(label):
    return re.sub(r"[^A-Za-z0-9.+()-]+", "-", label).strip("-")


def _execute_run(problem, cfg, seed):
    try:
        trace = optimizers.run(problem, cfg, seed)
    except optimizers.DivergenceError as exc:
        trace = exc.trace
    return TraceData(
        label=cfg.display_label,
        seed=seed,
        records=tuple(trace.records),
        status=trace.status,
    )


_WORKER_PROBLEM = None
_WORKER_SUITE = None


def _worker_init(suite):
    global _WORKER_PROBLEM, _WORKER_SUITE
    _WORKER_SUITE = suite
    _WORKER_PROBLEM = build_problem(suite)


def _worker_run(cfg, seed):
    return _execute_run(_WORKER_PROBLEM, cfg, seed)


def run_suite(suite, out_dir, jobs=1, problem=None):
    """Execute every (config, seed) pair and write one CSV per pair."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pairs = [(cfg, seed) for cfg in suite.configs for seed in suite.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_worker_init, initargs=(suite,)
        ) as pool:
            traces = list(pool.map(_worker_run, *zip(*pairs)))
    else:
        if problem is None:
            problem = build_problem(suite)
        traces = [_execute_run(problem, cfg, seed) for cfg, seed in pairs]

    files = []
    n_diverged = 0
    for trace in traces:
        path = out_dir / f"{_slug(trace.label)}__seed{trace.seed}.csv"
        write_trace_csv(path, trace)
        files.append(path)
        if trace.status != "ok":
            n_diverged += 1
    return SuiteResult(files=files, traces=traces, n_diverged=n_diverged)


def _f(x):
    return format(float(x), ".17g")


def write_trace_csv(path, trace):
    lines = [TRACE_HEADER]
    for r in trace.records:
        lines.append(
            ",".join(
                [
                    trace.label,
                    str(trace.seed),
                    str(r.epoch),
                    _f(r.effective_passes),
                    _f(r.grad_norm),
                    _f(r.objective),
                    _f(r.step_min),
                    _f(r.step_mean),
                    _f(r.step_max),
                    str(r.safeguards),
                    trace.status,
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty trace file")
    records = tuple(
        TraceRecord(
            epoch=int(r["epoch"]),
            effective_passes=float(r["effective_passes"]),
            grad_norm=float(r["grad_norm"]),
            objective=float(r["objective"]),
            step_min=float(r["step_min"]),
            step_mean=float(r["step_mean"]),
            step_max=float(r["step_max"]),
            safeguards=int(r["safeguards"]),
        )
        for r in rows
    )
    return TraceData(
        label=rows[0]["algo"],
        seed=int(rows[0]["seed"]),
        records=records,
        status=rows[0]["status"],
    )


def passes_to_tolerance(records, tol):
    """First effective-passes value at which grad_norm <= tol, linearly
    interpolated between the two straddling records; inf if never."""
    prev = None
    for rec in records:
        if rec.grad_norm <= tol:
            if prev is None:
                return rec.effective_passes
            g0, g1 = prev.grad_norm, rec.grad_norm
            p0, p1 = prev.effective_passes, rec.effective_passes
            return p0 + (p1 - p0) * (g0 - tol) / (g0 - g1)
        prev = rec
    return math.inf


@dataclass
class Summary:
    tolerance: float
    per_seed: dict
    medians: dict
    ranking: list
    wins: dict
    warning: str | None

    def render_text(self):
        out = [f"passes to grad_norm <= {self.tolerance:g} (median over seeds)"]
        if self.warning:
            out.append(f"warning: {self.warning}")
        for label in self.ranking:
            med = self.medians[label]
            shown = "inf" if math.isinf(med) else f"{med:.4g}"
            vals = ", ".join(
                "inf" if math.isinf(v) else f"{v:.4g}" for v in self.per_seed[label]
            )
            out.append(f"  {label}: {shown}   [{vals}]")
        unranked = sorted(set(self.medians) - set(self.ranking))
        for label in unranked:
            out.append(f"  {label}: inf   (never reached tolerance)")
        if self.ranking:
            out.append("win matrix (row beats column):")
            for a in self.ranking:
                row = "".join(
                    "." if a == c else ("W" if self.wins[a][c] else "-")
                    for c in self.ranking
                )
                out.append(f"  {a:40s} {row}")
        return "\n".join(out)


def summarize(traces, tolerance):
    """Per-label median passes-to-tolerance, ranking, and win matrix."""
    if not traces:
        raise ValueError("summarize needs at least one trace")
    per_seed = {}
    for trace in traces:
        per_seed.setdefault(trace.label, []).append(
            passes_to_tolerance(trace.records, tolerance)
        )
    medians = {label: statistics.median(vals) for label, vals in per_seed.items()}
    finite = [l for l in medians if math.isfinite(medians[l])]
    warning = None
    if not finite:
        warning = "no algorithm reached the tolerance; ranking is empty"
    ranking = sorted(finite, key=lambda l: medians[l])
    wins = {
        a: {c: medians[a] < medians[c] for c in medians} for a in medians
    }
    return Summary(
        tolerance=tolerance,
        per_seed=per_seed,
        medians=medians,
        ranking=ranking,
        wins=wins,
        warning=warning,
    )


def emit_plot_data(traces, out_dir):
    """One two-column (passes, grad_norm) data file per trace plus a manifest.

    Rows with non-positive grad_norm are dropped so the files can feed a
    log-scale axis directly; the manifest notes how many were dropped.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    files = []
    for trace in traces:
        name = f"{_slug(trace.label)}__seed{trace.seed}.dat"
        kept, dropped = [], 0
        for r in trace.records:
            if r.grad_norm > 0:
                kept.append(f"{_f(r.effective_passes)} {_f(r.grad_norm)}")
            else:
                dropped += 1
        (out_dir / name).write_text("\n".join(kept) + "\n")
        files.append(out_dir / name)
        note = f" dropped_nonpositive={dropped}" if dropped else ""
        manifest.append(
            f"{name}\tlabel={trace.label}\tseed={trace.seed}\trows={len(kept)}{note}"
        )
    (out_dir / "manifest.txt").write_text("\n".join(manifest) + "\n")
    return files


# ---------------------------------------------------------------------------
# Feasibility report for the rate-constant evaluators.

THEORY_CSV_HEADER = (
    "label,algorithm,n,m,L,mu,kappa,L_q,mu_q,kappa_plus,alpha_hat,alpha_tilde,"
    "kappa_r,kappa_r_plus,thm1_ok,thm1_plus_ok,inner_rate,outer_rate,"
    "ms2gd_rho,ms2gd_rho_plus,m_required,s_required"
)


def theory_report(suite, problem=None, eps=None, sigma0=None, zeta=None):
    """Evaluate constants, conditions, and rates for every run config.

    Returns (text, csv_lines). eps/sigma0/zeta are caller-supplied
    accuracy and initial-gap estimates; iteration requirements are
    reported only when they are given.
    """
    if problem is None:
        problem = build_problem(suite)
    n = problem.n
    text = [f"suite {suite.name}: n={n}, d={problem.d}, lambda={suite.lam:g}"]
    csv_lines = [THEORY_CSV_HEADER]
    for cfg in suite.configs:
        engine, rule, _ = optimizers.parse_algorithm(cfg.algorithm)
        hedge = cfg.hedge
        m = cfg.resolved_m(n)
        dist = optimizers.build_distribution(cfg, problem)
        if engine in ("svrg", "svrg-bb"):
            bounds = stepsize.HedgeBounds(1.0, 1.0)
        else:
            eff = optimizers._effective_hedge(hedge, rule)
            bounds = stepsize.hedge_bounds(
                eff.adaptor, eff.alpha, eff.sigma1, eff.sigma2,
                cfg.epochs, m, eff.table,
            )
        const = theory.compute_constants(problem, dist, bounds)
        b_bar = hedge.b_bar
        thm1 = theory.check_theorem1_condition(cfg.b, hedge.gamma, m, n, const, b_bar)
        thm1p = theory.check_theorem1_plus_condition(
            cfg.b, hedge.gamma, m, n, const, b_bar
        )
        inner = theory.sarah_inner_rate(m, const, hedge.gamma, b_bar)
        outer = theory.sarah_outer_rate(m, const, hedge.gamma, b_bar)

        def _rate(fn, *args):
            try:
                return fn(*args).rho
            except theory.InfeasibleConfigurationError:
                return math.nan

        rho = _rate(theory.ms2gd_rate, m, cfg.b, b_bar, hedge.gamma2, const)
        rho_p = _rate(theory.ms2gd_plus_rate, m, cfg.b, b_bar, hedge.gamma2, const)

        m_req = s_req = None
        if eps is not None and sigma0 is not None:
            m_req = theory.sarah_m_required(eps, sigma0, const, hedge.gamma, b_bar)
        if eps is not None and zeta is not None:
            try:
                s_req = theory.sarah_s_required(
                    eps, zeta, const, hedge.gamma, m, b_bar
                )
            except theory.InfeasibleConfigurationError:
                s_req = -1

        text.append(
            f"[{cfg.display_label}] m={m} b={cfg.b} b_bar={b_bar} "
            f"alpha_hat={const.alpha_hat:.6g} alpha_tilde={const.alpha_tilde:.6g}"
        )
        text.append(
            f"  kappa={const.kappa:.6g} kappa+={const.kappa_plus:.6g} "
            f"kappa_r={const.kappa_r:.6g} kappa_r+={const.kappa_r_plus:.6g}"
        )
        text.append(
            f"  inner-loop condition: {'ok' if thm1 else 'VIOLATED'}"
            f" (weighted: {'ok' if thm1p else 'VIOLATED'})"
        )
        text.append(
            f"  recursive rates: inner={inner:.6g} outer/epoch={outer:.6g}"
        )
        rho_s = "infeasible" if math.isnan(rho) else f"{rho:.6g}"
        rho_ps = "infeasible" if math.isnan(rho_p) else f"{rho_p:.6g}"
        text.append(f"  semi-stochastic rates: rho={rho_s} rho+={rho_ps}")
        if m_req is not None:
            text.append(f"  required inner updates for eps={eps:g}: {m_req}")
        if s_req is not None:
            shown = "infeasible" if s_req < 0 else str(s_req)
            text.append(f"  required epochs for eps={eps:g}: {shown}")

        csv_lines.append(
            ",".join(
                [
                    cfg.display_label,
                    cfg.algorithm,
                    str(n),
                    str(m),
                    _f(const.L), _f(const.mu), _f(const.kappa),
                    _f(const.L_q), _f(const.mu_q), _f(const.kappa_plus),
                    _f(const.alpha_hat), _f(const.alpha_tilde),
                    _f(const.kappa_r), _f(const.kappa_r_plus),
                    str(int(thm1)), str(int(thm1p)),
                    _f(inner), _f(outer),
                    "" if math.isnan(rho) else _f(rho),
                    "" if math.isnan(rho_p) else _f(rho_p),
                    "" if m_req is None else str(m_req),
                    "" if s_req is None else str(s_req),
                ]
            )
        )
    return "\n".join(text), csv_lines

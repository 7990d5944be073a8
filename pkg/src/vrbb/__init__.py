"""Variance-reduced stochastic optimizers with hedged Barzilai-Borwein
step sizes, importance sampling, rate-constant evaluators, and a
benchmark harness for sparse logistic regression."""

from .data import (
    ParseError,
    SparseDataset,
    SparseExample,
    UnsupportedLabelsError,
    load_libsvm,
    parse_libsvm,
    remap_labels,
)
from .model import LogisticL2Problem
from .optimizers import (
    DivergenceError,
    RunConfig,
    RunTrace,
    TraceRecord,
    run,
    run_inner_only,
    run_mb_sarah,
    run_ms2gd,
    run_svrg,
    run_svrg_bb,
)
from .sampling import (
    DegenerateDistributionError,
    SamplingDistribution,
    draw_uniform_subset,
    draw_weighted_multiset,
    option1_distribution,
    option2_distribution,
    spawn_rngs,
    uniform_distribution,
)
from .stepsize import (
    CurvatureSnapshot,
    HedgeBounds,
    HedgeConfig,
    adaptor_value,
    bb1_raw,
    bb2_raw,
    hedge_bounds,
    rhbb_plus_step,
    rhbb_step,
    safeguard,
)
from .theory import (
    InfeasibleConfigurationError,
    TheoryConstants,
    compute_constants,
)

__all__ = [name for name in dir() if not name.startswith("_")]

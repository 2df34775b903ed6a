"""Cusp-bifurcation voter simulation and the data-fusion analysis built on it."""
from .cusp import (
    CriticalPointSet,
    CuspParams,
    MinimizerConfig,
    Stability,
    critical_points,
    fold_boundary_b,
    gradient,
    is_bistable,
    local_minimum_from,
    potential,
)
from .datastore import DbTable, export_csv, import_csv, join, split
from .influence import apply_intervention, fusion_gain, rank_targets, susceptibility
from .models import (
    FeatureSpec,
    MetricsReport,
    PolynomialLogisticRegression,
    evaluate,
    expand_features,
    fit,
    independence_test,
    predict_proba,
    probability_grid,
)
from .sampler import CuspLatentTransformer, Person, SamplerConfig, sample_population, sample_vote, vote_probability

__version__ = "0.1.0"

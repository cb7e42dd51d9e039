"""Quantify the explainability of classifiers and augment it with
Shapley-value explanations scored by fidelity metrics."""

from .config import PipelineConfig
from .fidelity import (
    FidelityCurve,
    MetricKind,
    curve_auc,
    fraction_grid,
    keep_absolute_resample,
    keep_positive_mask,
    keep_positive_resample,
)
from .pipeline import PipelineStageError, ReportBundle, run_iris_pipeline, run_merlot_pipeline
from .shapley import (
    FULL,
    BackgroundSet,
    RankDeficiencyError,
    ShapleyAttribution,
    exact_shapley,
    grouped_shap,
    kernel_shap,
    stratified_background,
    stratified_indices,
)
from .taxonomy import (
    Aggregation,
    Clause,
    DeclineFamily,
    ExplanationAssessment,
    Rule,
    RuleSet,
    UnderstandabilityParams,
    explainability,
    rule_complexity,
    ruleset_complexity,
    total_explainability,
    total_two,
    understandability,
)

__version__ = "0.1.0"

__all__ = [
    "Aggregation",
    "BackgroundSet",
    "Clause",
    "DeclineFamily",
    "ExplanationAssessment",
    "FULL",
    "FidelityCurve",
    "MetricKind",
    "PipelineConfig",
    "PipelineStageError",
    "RankDeficiencyError",
    "ReportBundle",
    "Rule",
    "RuleSet",
    "ShapleyAttribution",
    "UnderstandabilityParams",
    "curve_auc",
    "exact_shapley",
    "explainability",
    "fraction_grid",
    "grouped_shap",
    "keep_absolute_resample",
    "keep_positive_mask",
    "keep_positive_resample",
    "kernel_shap",
    "rule_complexity",
    "ruleset_complexity",
    "run_iris_pipeline",
    "run_merlot_pipeline",
    "stratified_background",
    "stratified_indices",
    "total_explainability",
    "total_two",
    "understandability",
]

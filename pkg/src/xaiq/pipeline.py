"""End-to-end case-study pipelines.

run_iris_pipeline trains an RBF SVM on the bundled Iris table, extracts
interval rules, and walks the full assessment chain: rule complexity,
understandability sweep, Shapley attributions, keep-absolute fidelity,
and the combined total explainability.

run_merlot_pipeline does the same for the content-based recommender on
the synthetic learning-resource catalog: merge, association analysis,
discipline grouping, grouped Shapley attributions, fidelity, and the
total-explainability sweep.

Both emit a report bundle: ``summary.json`` (sorted keys, so re-runs
under one config are byte-identical), ``curves/*.csv``, ``plots/*.svg``
with a CSV twin for every figure, and ``rules/*.txt``.
"""

from __future__ import annotations

import csv
import json
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .dataio import (
    DISCIPLINE_LEVEL_COLUMNS,
    DISCIPLINES_COLUMN,
    GROUPED_FEATURE_COLUMNS,
    IRIS_LABEL,
    UNGROUPED_FEATURE_COLUMNS,
    correlation_matrix,
    encode,
    filter_by_average_rating,
    group_disciplines,
    load_csv,
    load_iris,
    make_array_predictor,
    merge_resources_ratings,
    split_features_labels,
    synthesize_merlot,
)
from .fidelity import keep_absolute_resample
from .models.base import OutputKind
from .models.recommender import DEFAULT_PROFILE, RecommenderModel, UserProfile, recommender_rules
from .models.svm import SvmConfig, train_svm
from .models.extraction import extract_rules
from .plots import bar_plot, heatmap, line_plot
from .shapley import BackgroundSet, grouped_shap, kernel_shap, stratified_background, stratified_indices
from .taxonomy import (
    Clause,
    Rule,
    RuleSet,
    UnderstandabilityParams,
    rule_complexity,
    ruleset_complexity,
    total_two,
    understandability,
)

__all__ = ["PipelineStageError", "ReportBundle", "run_iris_pipeline", "run_merlot_pipeline"]


class PipelineStageError(RuntimeError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"pipeline stage {stage!r} failed: {cause}")
        self.stage = stage


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineStageError:
        raise
    except Exception as exc:
        raise PipelineStageError(name, exc) from exc


@dataclass(frozen=True)
class ReportBundle:
    """What a pipeline run produced and where it lives."""

    summary: dict
    output_dir: Path

    @property
    def summary_path(self) -> Path:
        return self.output_dir / "summary.json"


def _jsonify(value):
    """Coerce numpy scalars/arrays into plain JSON-stable Python values."""
    if isinstance(value, dict):
        return {str(k): _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonify(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):  # before int: bool subclasses int
        return bool(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    return value


def _write_summary(output_dir: Path, summary: dict) -> Path:
    path = output_dir / "summary.json"
    payload = json.dumps(_jsonify(summary), indent=2, sort_keys=True) + "\n"
    path.write_text(payload)
    return path


def _write_csv(path: Path, header: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


def _write_frame_csv(path: Path, frame, index_label: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index_label=index_label)
    return path


def _write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text if text.endswith("\n") else text + "\n")
    return path


def _omega_b_grid(config: PipelineConfig) -> np.ndarray:
    return np.linspace(config.omega_b_min, config.omega_b_max, config.omega_b_points)


def _understandability_sweep(omega: float, grid: np.ndarray, families) -> dict[str, np.ndarray]:
    return {
        family: np.array([
            understandability(omega, UnderstandabilityParams(omega_b=b, family=family))
            for b in grid
        ])
        for family in families
    }


def _total_sweep(u_by_family: dict[str, np.ndarray], auc: float) -> dict[str, np.ndarray]:
    return {
        family: np.array([total_two(float(u), auc) for u in values])
        for family, values in u_by_family.items()
    }


def _sweep_csv_and_plot(
    out: Path, stem: str, grid: np.ndarray, series: dict[str, np.ndarray],
    *, title: str, ylabel: str,
) -> tuple[str, str]:
    labels = list(series)
    csv_rel = f"curves/{stem}.csv"
    svg_rel = f"plots/{stem}.svg"
    _write_csv(
        out / csv_rel,
        ["omega_b"] + [f"{ylabel_key(label)}" for label in labels],
        (
            [float(b)] + [float(series[label][i]) for label in labels]
            for i, b in enumerate(grid)
        ),
    )
    line_plot(
        grid, {label: series[label] for label in labels}, out / svg_rel,
        title=title, xlabel="tolerable complexity omega_b", ylabel=ylabel,
        ylim=(0.0, 1.05),
    )
    return csv_rel, svg_rel


def ylabel_key(label: str) -> str:
    return label.replace(" ", "_").lower()


_METRIC_NOTES = {
    "rule_complexity": "omega = (clauses / distinct features referenced) * (clauses - 1), averaged over rules",
    "understandability": "U(omega; omega_b): gaussian exp(-(omega/(3 omega_b))^2), sht 1 - tanh(omega/(3 omega_b))^2",
    "explainability": "E = interpretability * completeness * understandability; both factors are 1 for a white-box explained by its own rules",
    "keep_absolute_auc": "accuracy while unmasking features by descending |phi|, hidden features resampled from the background; trapezoidal AUC over the kept fraction",
    "total_explainability": "tot(e1, e2) = 1 - (1 - e1)(1 - e2), here tot(U(omega_b), keep-absolute AUC) per grid point",
    "mean_abs_phi": "mean of |Shapley value| per feature over the explained instances",
    "association": "pearson r (numeric pairs), cramers V (categorical pairs), correlation ratio (mixed pairs)",
}


# ---------------------------------------------------------------------------
# Iris / SVM case study


def _rules_in_raw_units(rules: RuleSet, means: np.ndarray, stds: np.ndarray,
                        feature_names) -> RuleSet:
    """Map standardized interval bounds back to original feature units."""
    scale = {name: (means[j], stds[j]) for j, name in enumerate(feature_names)}

    def back(clause: Clause) -> Clause:
        mu, sd = scale[clause.feature]
        return Clause(
            feature=clause.feature,
            lower=round(mu + sd * clause.lower, 6),
            upper=round(mu + sd * clause.upper, 6),
        )

    return RuleSet(
        rules=tuple(
            Rule(clauses=tuple(back(c) for c in r.clauses), label=r.label)
            for r in rules.rules
        ),
        feature_universe=rules.feature_universe,
        aggregation=rules.aggregation,
    )


def run_iris_pipeline(config: PipelineConfig | None = None) -> ReportBundle:
    """Train, extract, attribute, and score the Iris SVM end to end."""
    config = config or PipelineConfig()
    out = config.resolved_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    artifacts: dict[str, list[str]] = {"curves": [], "plots": [], "rules": []}

    with _stage("load"):
        table = load_iris()
        raw, y, feature_names = split_features_labels(table, IRIS_LABEL)
        # the RBF kernel weighs features by variance, so bring them to a
        # common scale before training; bounds are mapped back for display
        means, stds = raw.mean(axis=0), raw.std(axis=0)
        X = (raw - means) / stds

    with _stage("train"):
        model = train_svm(X, y, SvmConfig(seed=config.rng_seed))
        predicted = model.predict(X)
        accuracy = float((predicted == y).mean())

    with _stage("rules"):
        rules = extract_rules(model, X, y, feature_names)
        per_rule = [rule_complexity(r, rules) for r in rules.rules]
        omega = ruleset_complexity(rules)
        artifacts["rules"].append("rules/svm_rules.txt")
        _write_text(
            out / "rules/svm_rules.txt",
            _rules_in_raw_units(rules, means, stds, feature_names).describe(),
        )

    grid = _omega_b_grid(config)
    with _stage("explainability_sweep"):
        u_by_family = _understandability_sweep(omega, grid, config.families)
        # white-box model explained by its own extracted rules: E = U
        csv_rel, svg_rel = _sweep_csv_and_plot(
            out, "explainability", grid,
            {f"{fam} family" : u_by_family[fam] for fam in config.families},
            title="Explainability of the rule-explained SVM",
            ylabel="explainability",
        )
        artifacts["curves"].append(csv_rel)
        artifacts["plots"].append(svg_rel)

    with _stage("attributions"):
        background = stratified_background(
            X, y, config.background_fraction, config.rng_seed
        )
        classes = list(model.classes)
        n, p = X.shape
        phi_per_class = np.zeros((n, len(classes), p))
        for c in range(len(classes)):
            margin_c = lambda rows, _c=c: model.decision_function(rows)[:, _c]
            for i in range(n):
                att = kernel_shap(
                    margin_c, X[i], background,
                    n_samples=config.shap_budget,
                    rng_seed=config.rng_seed,
                    feature_names=feature_names,
                )
                phi_per_class[i, c] = att.phi
        predicted_idx = model.decision_function(X).argmax(axis=1)
        phi_predicted = phi_per_class[np.arange(n), predicted_idx]

        mean_abs_by_class = np.abs(phi_per_class).mean(axis=0)  # (k, p)
        mean_abs_total = np.abs(phi_per_class).mean(axis=(0, 1))
        importance_rel = "curves/importance.csv"
        _write_csv(
            out / importance_rel,
            ["feature"] + [f"mean_abs_phi_{c}" for c in classes] + ["mean_abs_phi"],
            (
                [feature_names[j]]
                + [float(mean_abs_by_class[c, j]) for c in range(len(classes))]
                + [float(mean_abs_total[j])]
                for j in range(p)
            ),
        )
        bar_rel = "plots/importance.svg"
        bar_plot(
            feature_names,
            {str(c): mean_abs_by_class[k] for k, c in enumerate(classes)},
            out / bar_rel,
            title="Feature importance of the Iris SVM",
            xlabel="mean |phi| (per-class margins)",
        )
        artifacts["curves"].append(importance_rel)
        artifacts["plots"].append(bar_rel)

    with _stage("fidelity"):
        curve = keep_absolute_resample(
            model.decision_function, X, y, phi_predicted, background,
            rng_seed=config.rng_seed, draws=config.metric_draws,
            output_kind=OutputKind.MARGIN, classes=classes,
        )
        curve_rel = "curves/keep_absolute.csv"
        curve.to_csv(out / curve_rel)
        fid_rel = "plots/keep_absolute.svg"
        line_plot(
            curve.fractions, {"accuracy": curve.scores}, out / fid_rel,
            title="Keep-absolute (resample) fidelity of the Iris SVM",
            xlabel="fraction of features kept", ylabel="accuracy",
            ylim=(0.0, 1.05),
        )
        artifacts["curves"].append(curve_rel)
        artifacts["plots"].append(fid_rel)

    with _stage("total_explainability"):
        tot_by_family = _total_sweep(u_by_family, curve.auc)
        csv_rel, svg_rel = _sweep_csv_and_plot(
            out, "total_explainability", grid,
            {f"{fam} family": tot_by_family[fam] for fam in config.families},
            title="Total explainability: extracted rules plus attributions",
            ylabel="total explainability",
        )
        artifacts["curves"].append(csv_rel)
        artifacts["plots"].append(svg_rel)

    with _stage("report"):
        order = np.argsort(-mean_abs_total, kind="stable")
        summary = {
            "pipeline": "iris_svm",
            "config": config.to_json_dict(),
            "standardized_features": True,
            "training_accuracy": accuracy,
            "n_support_vectors": int(sum(len(b.support_indices) for b in model.binaries)),
            "rules": {
                "count": len(rules.rules),
                "complexity_mean": float(omega),
                "complexity_min": float(min(per_rule)),
                "complexity_max": float(max(per_rule)),
            },
            "interpretability": 1.0,
            "completeness": 1.0,
            "explainability_sweep": {
                fam: {
                    "min": float(u_by_family[fam].min()),
                    "max": float(u_by_family[fam].max()),
                } for fam in config.families
            },
            "attributions": {
                "n_explained": int(n),
                "background_rows": int(background.size),
                "explained_output": "per-class margins",
            },
            "importance": {
                "mean_abs_phi": {feature_names[j]: float(mean_abs_total[j]) for j in range(p)},
                "ranking": [feature_names[j] for j in order],
            },
            "keep_absolute": {
                "auc": float(curve.auc),
                "fractions": list(curve.fractions),
                "counts": list(curve.counts),
                "scores": list(curve.scores),
                "accuracy_top2": float(curve.score_at_count(2)),
            },
            "total_explainability": {
                fam: {
                    "min": float(tot_by_family[fam].min()),
                    "max": float(tot_by_family[fam].max()),
                } for fam in config.families
            },
            "omega_b_grid": {
                "min": config.omega_b_min,
                "max": config.omega_b_max,
                "points": config.omega_b_points,
            },
            "artifacts": artifacts,
            "metric_notes": _METRIC_NOTES,
        }
        _write_summary(out, summary)

    return ReportBundle(summary=_jsonify(summary), output_dir=out)


# ---------------------------------------------------------------------------
# Recommender / learning-resource case study


def _feature_groups() -> dict[str, tuple[int, ...]]:
    """Group map from ungrouped feature positions to grouped names."""
    positions = {name: i for i, name in enumerate(UNGROUPED_FEATURE_COLUMNS)}
    groups: dict[str, tuple[int, ...]] = {}
    for name in GROUPED_FEATURE_COLUMNS:
        if name == DISCIPLINES_COLUMN:
            groups[name] = tuple(positions[c] for c in DISCIPLINE_LEVEL_COLUMNS)
        else:
            groups[name] = (positions[name],)
    return groups


def run_merlot_pipeline(config: PipelineConfig | None = None) -> ReportBundle:
    """Assess and augment the explainability of the resource recommender."""
    config = config or PipelineConfig()
    out = config.resolved_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    artifacts: dict[str, list[str]] = {"curves": [], "plots": [], "rules": []}

    with _stage("inputs"):
        if config.resources_path or config.ratings_path:
            if not (config.resources_path and config.ratings_path):
                raise ValueError("resources_path and ratings_path must be given together")
            resources = load_csv(config.resources_path)
            ratings = load_csv(config.ratings_path)
        else:
            resources, ratings = synthesize_merlot(
                config.n_resources, config.n_ratings, config.rng_seed,
                planted_correlation=config.planted_correlation,
            )
        profile = (
            UserProfile.load(config.profile_path) if config.profile_path else DEFAULT_PROFILE
        )

    with _stage("merge"):
        merged = merge_resources_ratings(resources, ratings)
        if config.min_average_rating is not None:
            merged = filter_by_average_rating(merged, config.min_average_rating)
        merged_features = merged.select(list(UNGROUPED_FEATURE_COLUMNS))

    with _stage("association"):
        corr_before = correlation_matrix(merged_features)
        level_pairs = [
            (a, b)
            for i, a in enumerate(DISCIPLINE_LEVEL_COLUMNS)
            for b in DISCIPLINE_LEVEL_COLUMNS[i + 1:]
        ]
        level_values = [corr_before.value(a, b) for a, b in level_pairs]
        level_max = float(np.nanmax(level_values))
        grouping_applied = level_max >= config.grouping_trigger

        before_rel = "curves/association_ungrouped.csv"
        _write_frame_csv(out / before_rel, corr_before.to_frame(), "feature")
        heat_before_rel = "plots/association_ungrouped.svg"
        heatmap(
            np.abs(corr_before.values), list(corr_before.columns),
            out / heat_before_rel,
            title="Association strength before discipline grouping",
        )
        artifacts["curves"].append(before_rel)
        artifacts["plots"].append(heat_before_rel)

        corr_after = None
        if grouping_applied:
            corr_after = correlation_matrix(group_disciplines(merged_features))
            after_rel = "curves/association_grouped.csv"
            _write_frame_csv(out / after_rel, corr_after.to_frame(), "feature")
            heat_after_rel = "plots/association_grouped.svg"
            heatmap(
                np.abs(corr_after.values), list(corr_after.columns),
                out / heat_after_rel,
                title="Association strength after discipline grouping",
            )
            artifacts["curves"].append(after_rel)
            artifacts["plots"].append(heat_after_rel)

    with _stage("encode"):
        items = resources.select(list(UNGROUPED_FEATURE_COLUMNS))
        encoded_u, rules_u = encode(items)
        grouped_items = group_disciplines(items)
        encoded_g, rules_g = encode(grouped_items)
        X_u = encoded_u.frame.to_numpy(dtype=float)
        X_g = encoded_g.frame.to_numpy(dtype=float)

    with _stage("model"):
        model = RecommenderModel(profile=profile)
        full_result = model.recommend(items.frame)
        y_true = full_result.decisions.astype(int)
        predict_ungrouped = make_array_predictor(
            model, rules_u, columns=UNGROUPED_FEATURE_COLUMNS
        )
        predict_grouped = make_array_predictor(
            model, rules_g, columns=GROUPED_FEATURE_COLUMNS
        )

    with _stage("background"):
        bg_idx = stratified_indices(y_true, config.background_fraction, config.rng_seed)
        background_u = BackgroundSet(rows=X_u[bg_idx], strata_label=y_true[bg_idx])
        background_g = BackgroundSet(rows=X_g[bg_idx], strata_label=y_true[bg_idx])

    with _stage("attributions"):
        explained_idx = stratified_indices(
            y_true, config.n_explained / len(X_u), config.rng_seed + 1
        )
        groups = _feature_groups()
        group_names = list(groups)
        phi = np.zeros((len(explained_idx), len(group_names)))
        for row, i in enumerate(explained_idx):
            att = grouped_shap(
                predict_ungrouped, X_u[i], background_u, groups,
                n_samples=config.shap_budget, rng_seed=config.rng_seed,
            )
            phi[row] = att.phi

        mean_abs = np.abs(phi).mean(axis=0)
        order = np.argsort(-mean_abs, kind="stable")
        importance_rel = "curves/importance.csv"
        _write_csv(
            out / importance_rel,
            ["feature", "mean_abs_phi"],
            ([group_names[j], float(mean_abs[j])] for j in range(len(group_names))),
        )
        bar_rel = "plots/importance.svg"
        bar_plot(
            group_names, mean_abs, out / bar_rel,
            title="Feature importance of the recommender",
            xlabel="mean |phi| (recommendation decision)",
        )
        artifacts["curves"].append(importance_rel)
        artifacts["plots"].append(bar_rel)

    with _stage("fidelity"):
        curve = keep_absolute_resample(
            predict_grouped, X_g[explained_idx], y_true[explained_idx], phi,
            background_g, rng_seed=config.rng_seed, draws=config.metric_draws,
            output_kind=OutputKind.PROBABILITY,
        )
        curve_rel = "curves/keep_absolute.csv"
        curve.to_csv(out / curve_rel)
        fid_rel = "plots/keep_absolute.svg"
        line_plot(
            curve.fractions, {"accuracy": curve.scores}, out / fid_rel,
            title="Keep-absolute (resample) fidelity of the recommender",
            xlabel="fraction of features kept", ylabel="accuracy",
            ylim=(0.0, 1.05),
        )
        artifacts["curves"].append(curve_rel)
        artifacts["plots"].append(fid_rel)

    with _stage("rules"):
        profile_rules = recommender_rules(profile)
        per_rule = [rule_complexity(r, profile_rules) for r in profile_rules.rules]
        omega_m = ruleset_complexity(profile_rules)
        artifacts["rules"].append("rules/recommender_rules.txt")
        _write_text(out / "rules/recommender_rules.txt", profile_rules.describe())

    grid = _omega_b_grid(config)
    with _stage("total_explainability"):
        u_by_family = _understandability_sweep(omega_m, grid, config.families)
        tot_by_family = _total_sweep(u_by_family, curve.auc)
        csv_rel, svg_rel = _sweep_csv_and_plot(
            out, "total_explainability", grid,
            {f"{fam} family": tot_by_family[fam] for fam in config.families},
            title="Total explainability of the rule-matched recommender",
            ylabel="total explainability",
        )
        artifacts["curves"].append(csv_rel)
        artifacts["plots"].append(svg_rel)

    with _stage("report"):
        summary = {
            "pipeline": "merlot_recommender",
            "config": config.to_json_dict(),
            "data": {
                "n_resources": int(len(resources)),
                "n_ratings": int(len(ratings)),
                "n_recommended": int(y_true.sum()),
                "synthesized": config.resources_path is None,
            },
            "association": {
                "max_offdiagonal_ungrouped": float(corr_before.max_offdiagonal()),
                "max_discipline_level_pair": level_max,
                "grouping_trigger": config.grouping_trigger,
                "grouping_applied": bool(grouping_applied),
                "max_offdiagonal_grouped": (
                    float(corr_after.max_offdiagonal()) if corr_after is not None else None
                ),
            },
            "attributions": {
                "n_explained": int(len(explained_idx)),
                "n_recommended_explained": int(y_true[explained_idx].sum()),
                "background_rows": int(background_u.size),
                "explained_output": "recommendation decision",
                "feature_groups": {k: list(v) for k, v in _feature_groups().items()},
            },
            "importance": {
                "mean_abs_phi": {group_names[j]: float(mean_abs[j]) for j in range(len(group_names))},
                "ranking": [group_names[j] for j in order],
            },
            "keep_absolute": {
                "auc": float(curve.auc),
                "fractions": list(curve.fractions),
                "counts": list(curve.counts),
                "scores": list(curve.scores),
                "accuracy_top2": float(curve.score_at_count(2)),
            },
            "rules": {
                "count": len(profile_rules.rules),
                "complexity_mean": float(omega_m),
                "complexity_min": float(min(per_rule)),
                "complexity_max": float(max(per_rule)),
            },
            "total_explainability": {
                fam: {
                    "min": float(tot_by_family[fam].min()),
                    "max": float(tot_by_family[fam].max()),
                } for fam in config.families
            },
            "omega_b_grid": {
                "min": config.omega_b_min,
                "max": config.omega_b_max,
                "points": config.omega_b_points,
            },
            "artifacts": artifacts,
            "metric_notes": _METRIC_NOTES,
        }
        _write_summary(out, summary)

    return ReportBundle(summary=_jsonify(summary), output_dir=out)

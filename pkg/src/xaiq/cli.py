"""Command-line surface.

Subcommands:

- ``iris`` / ``merlot`` run the two case-study pipelines end to end.
- ``explain`` attributes one prediction of the bundled Iris SVM.
- ``rules`` prints the extracted SVM rules or the recommender's rule.
- ``metrics`` evaluates the score algebra from the shell (tot,
  understandability, complexity).
- ``correlate`` prints the association matrix of a CSV.
- ``synth`` writes a synthetic resource/rating pair of CSVs.

Success exits 0. Argument validation errors exit 2 with usage (argparse
default). Runtime failures exit 1 after printing a one-line JSON error
object to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import PipelineConfig
from .dataio import (
    IRIS_LABEL,
    group_disciplines,
    load_csv,
    load_iris,
    save_csv,
    split_features_labels,
    synthesize_merlot,
)
from .models.recommender import DEFAULT_PROFILE, UserProfile, recommender_rules
from .models.svm import SvmConfig, train_svm
from .models.extraction import extract_rules
from .pipeline import PipelineStageError, run_iris_pipeline, run_merlot_pipeline
from .shapley import exact_shapley, kernel_shap, stratified_background
from .taxonomy import (
    UnderstandabilityParams,
    total_explainability,
    understandability,
)

__all__ = ["main"]


def _int_or_full(text: str):
    if text == "full":
        return None
    return int(text)


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with PipelineConfig fields")
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--seed", dest="rng_seed", type=int)
    parser.add_argument("--omega-b-min", dest="omega_b_min", type=float)
    parser.add_argument("--omega-b-max", dest="omega_b_max", type=float)
    parser.add_argument("--omega-b-points", dest="omega_b_points", type=int)
    parser.add_argument("--family", choices=("gaussian", "sht", "both"))
    parser.add_argument("--background-fraction", dest="background_fraction", type=float)
    parser.add_argument("--shap-budget", dest="shap_budget", type=int)
    parser.add_argument(
        "--metric-draws", dest="metric_draws",
        help="resample draws per fidelity point; 'full' averages the whole background",
    )


_CONFIG_FLAGS = (
    "output_dir", "rng_seed", "omega_b_min", "omega_b_max", "omega_b_points",
    "family", "background_fraction", "shap_budget",
    "resources_path", "ratings_path", "profile_path",
    "n_resources", "n_ratings", "n_explained",
    "planted_correlation", "grouping_trigger", "min_average_rating",
)


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    overrides = {
        name: getattr(args, name)
        for name in _CONFIG_FLAGS
        if getattr(args, name, None) is not None
    }
    # the draws flag keeps its raw string so that 'full' (meaning None,
    # whole-background averaging) stays distinguishable from flag absence
    raw_draws = getattr(args, "metric_draws", None)
    if raw_draws is not None:
        overrides["metric_draws"] = None if raw_draws == "full" else int(raw_draws)
    if args.config:
        return PipelineConfig.from_json(args.config, **overrides)
    return PipelineConfig(**overrides)


def _iris_model(seed: int, background_fraction: float):
    table = load_iris()
    raw, y, names = split_features_labels(table, IRIS_LABEL)
    X = (raw - raw.mean(axis=0)) / raw.std(axis=0)
    model = train_svm(X, y, SvmConfig(seed=seed))
    background = stratified_background(X, y, background_fraction, seed)
    return model, X, y, names, background


def _cmd_iris(args) -> int:
    bundle = run_iris_pipeline(_build_config(args))
    print(json.dumps({"summary": str(bundle.summary_path)}))
    return 0


def _cmd_merlot(args) -> int:
    bundle = run_merlot_pipeline(_build_config(args))
    print(json.dumps({"summary": str(bundle.summary_path)}))
    return 0


def _cmd_explain(args) -> int:
    model, X, _, names, background = _iris_model(args.seed, args.background_fraction)
    if not (0 <= args.instance < len(X)):
        raise ValueError(f"instance index must lie in [0, {len(X) - 1}]")
    x = X[args.instance]
    target = int(model.decision_function(x.reshape(1, -1)).argmax(axis=1)[0])
    margin = lambda rows: model.decision_function(rows)[:, target]
    if args.exact:
        attribution = exact_shapley(margin, x, background, feature_names=names)
        method = "exact"
    else:
        attribution = kernel_shap(
            margin, x, background,
            n_samples="full" if args.budget is None else args.budget,
            rng_seed=args.seed, feature_names=names,
        )
        method = "kernel"
    print(json.dumps({
        "model": args.model,
        "instance": args.instance,
        "explained_class": str(model.classes[target]),
        "method": method,
        "base_value": attribution.phi0,
        "prediction": attribution.prediction,
        "phi": {name: float(v) for name, v in zip(names, attribution.phi)},
    }, indent=2, sort_keys=True))
    return 0


def _cmd_rules(args) -> int:
    if args.which == "iris":
        model, X, y, names, _ = _iris_model(args.seed, 0.1)
        rules = extract_rules(model, X, y, names)
    else:
        profile = UserProfile.load(args.profile) if args.profile else DEFAULT_PROFILE
        rules = recommender_rules(profile, split_disjunctions=args.split)
    if args.json:
        print(json.dumps(rules.to_json_dict(), indent=2, sort_keys=True))
    else:
        print(rules.describe())
    return 0


def _cmd_metrics(args) -> int:
    if args.metric == "tot":
        print(total_explainability(args.values))
    elif args.metric == "understandability":
        params = UnderstandabilityParams(omega_b=args.omega_b, family=args.family)
        print(understandability(args.omega, params))
    else:  # complexity
        if args.model_features < 1 or args.clauses < 1:
            raise ValueError("clause and feature counts must be positive")
        print((args.clauses / args.model_features) * (args.clauses - 1))
    return 0


def _cmd_correlate(args) -> int:
    from .dataio import correlation_matrix

    data = load_csv(args.csv)
    if args.columns:
        data = data.select([c.strip() for c in args.columns.split(",")])
    if args.group_disciplines:
        data = group_disciplines(data)
    result = correlation_matrix(data)
    payload = {
        "columns": list(result.columns),
        "values": [[float(v) for v in row] for row in result.values],
        "methods": [[str(m) for m in row] for row in result.methods],
        "max_offdiagonal": result.max_offdiagonal(),
    }
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        result.to_frame().to_csv(args.output, index_label="feature")
        payload["output"] = args.output
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_synth(args) -> int:
    resources, ratings = synthesize_merlot(
        args.resources, args.ratings, args.seed,
        planted_correlation=args.planted_correlation,
    )
    out = Path(args.output_dir)
    save_csv(resources, out / "resources.csv")
    save_csv(ratings, out / "ratings.csv")
    print(json.dumps({
        "resources": str(out / "resources.csv"),
        "ratings": str(out / "ratings.csv"),
    }))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xaiq",
        description="Quantify and augment model explainability.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_iris = sub.add_parser("iris", help="run the Iris SVM case study")
    _add_pipeline_flags(p_iris)
    p_iris.set_defaults(func=_cmd_iris)

    p_merlot = sub.add_parser("merlot", help="run the recommender case study")
    _add_pipeline_flags(p_merlot)
    p_merlot.add_argument("--resources", dest="resources_path")
    p_merlot.add_argument("--ratings", dest="ratings_path")
    p_merlot.add_argument("--profile", dest="profile_path")
    p_merlot.add_argument("--n-resources", dest="n_resources", type=int)
    p_merlot.add_argument("--n-ratings", dest="n_ratings", type=int)
    p_merlot.add_argument("--n-explained", dest="n_explained", type=int)
    p_merlot.add_argument("--planted-correlation", dest="planted_correlation", type=float)
    p_merlot.add_argument("--grouping-trigger", dest="grouping_trigger", type=float)
    p_merlot.add_argument(
        "--min-average-rating", dest="min_average_rating", type=float,
        help="drop resources whose mean rating falls below this (off by default)",
    )
    p_merlot.set_defaults(func=_cmd_merlot)

    p_explain = sub.add_parser("explain", help="attribute one prediction")
    p_explain.add_argument("--model", choices=("iris-svm",), required=True)
    p_explain.add_argument("--instance", type=int, required=True)
    mode = p_explain.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--kernel", action="store_true")
    p_explain.add_argument(
        "--budget", type=_int_or_full, default=None,
        help="kernel coalition budget; 'full' enumerates all",
    )
    p_explain.add_argument("--seed", type=int, default=0)
    p_explain.add_argument("--background-fraction", type=float, default=0.1)
    p_explain.set_defaults(func=_cmd_explain)

    p_rules = sub.add_parser("rules", help="print IF-THEN rules")
    p_rules.add_argument("which", choices=("iris", "recommender"))
    p_rules.add_argument("--profile", help="profile JSON for the recommender")
    p_rules.add_argument("--split", action="store_true",
                         help="one rule per allowed value combination")
    p_rules.add_argument("--seed", type=int, default=0)
    p_rules.add_argument("--json", action="store_true", help="emit the rule set as JSON")
    p_rules.set_defaults(func=_cmd_rules)

    p_metrics = sub.add_parser("metrics", help="evaluate score formulas")
    metric_sub = p_metrics.add_subparsers(dest="metric", required=True)
    m_tot = metric_sub.add_parser("tot", help="total explainability of the values")
    m_tot.add_argument("values", type=float, nargs="+")
    m_u = metric_sub.add_parser("understandability")
    m_u.add_argument("omega", type=float)
    m_u.add_argument("--omega-b", dest="omega_b", type=float, required=True)
    m_u.add_argument("--family", choices=("gaussian", "sht"), default="gaussian")
    m_c = metric_sub.add_parser("complexity")
    m_c.add_argument("--clauses", type=int, required=True)
    m_c.add_argument("--model-features", dest="model_features", type=int, required=True)
    p_metrics.set_defaults(func=_cmd_metrics)

    p_corr = sub.add_parser("correlate", help="association matrix of a CSV")
    p_corr.add_argument("csv")
    p_corr.add_argument("--columns", help="comma-separated column subset")
    p_corr.add_argument("--group-disciplines", action="store_true")
    p_corr.add_argument("--output", help="also write the matrix as CSV")
    p_corr.set_defaults(func=_cmd_correlate)

    p_synth = sub.add_parser("synth", help="write synthetic resource/rating CSVs")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--resources", type=int, default=500)
    p_synth.add_argument("--ratings", type=int, default=2000)
    p_synth.add_argument("--planted-correlation", type=float, default=0.95)
    p_synth.add_argument("--output-dir", default="xaiq_out")
    p_synth.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineStageError as exc:
        error = {"error": type(exc).__name__, "stage": exc.stage, "message": str(exc)}
    except Exception as exc:  # argparse handles usage errors before this
        error = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(error, sort_keys=True), file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())

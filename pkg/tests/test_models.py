"""Tests for the SVM, rule extraction, and the preference recommender."""

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xaiq.dataio import IRIS_LABEL, SchemaError, load_iris, split_features_labels, synthesize_merlot
from xaiq.models.extraction import _interval_rule, class_prototypes, extract_rules
from xaiq.models.recommender import (
    DEFAULT_PROFILE,
    FIELD_COLUMNS,
    RecommenderModel,
    UserProfile,
    recommender_predict,
    recommender_rules,
)
from xaiq.models.svm import (
    BinarySvm,
    ConvergenceError,
    SvmConfig,
    SvmModel,
    train_svm,
)
from xaiq.taxonomy import rule_complexity, ruleset_complexity


@pytest.fixture(scope="module")
def iris():
    return split_features_labels(load_iris(), IRIS_LABEL)


@pytest.fixture(scope="module")
def iris_model(iris):
    X, y, _ = iris
    return train_svm(X, y, SvmConfig())


def blobs(seed=7, n=15, spread=0.4):
    rng = np.random.default_rng(seed)
    a = rng.normal(loc=(-3.0, -3.0), scale=spread, size=(n, 2))
    b = rng.normal(loc=(3.0, 3.0), scale=spread, size=(n, 2))
    X = np.vstack([a, b])
    y = np.array(["neg"] * n + ["pos"] * n)
    return X, y


class TestSvmConfig:
    def test_defaults_valid(self):
        config = SvmConfig()
        assert config.c == 1.0 and config.kernel == "rbf"

    @pytest.mark.parametrize("kwargs", [
        {"c": 0.0}, {"c": -1.0}, {"kernel": "poly"}, {"gamma": 0.0},
        {"tolerance": 0.0}, {"max_passes": 0}, {"max_iterations": 0},
    ])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            SvmConfig(**kwargs)


class TestTrainSvm:
    def test_two_point_set_separates(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1])
        model = train_svm(X, y)
        assert (model.predict(X) == y).all()

    def test_separable_blobs_zero_error(self):
        X, y = blobs()
        model = train_svm(X, y)
        assert (model.predict(X) == y).all()

    def test_iris_training_accuracy(self, iris, iris_model):
        X, y, _ = iris
        accuracy = (iris_model.predict(X) == y).mean()
        assert accuracy >= 0.95

    def test_duplicating_rows_keeps_decisions(self):
        X, y = blobs()
        base = train_svm(X, y)
        doubled = train_svm(np.vstack([X, X]), np.concatenate([y, y]))
        assert (doubled.predict(X) == base.predict(X)).all()
        np.testing.assert_allclose(
            doubled.decision_function(X), base.decision_function(X), atol=0.05
        )

    def test_row_permutation_keeps_separable_predictions(self):
        X, y = blobs()
        base = train_svm(X, y)
        perm = np.random.default_rng(3).permutation(len(X))
        permuted = train_svm(X[perm], y[perm])
        assert (permuted.predict(X) == base.predict(X)).all()

    def test_row_permutation_near_invariant_on_iris(self, iris, iris_model):
        # the exact dual optimum is order-free; the simplified solver may
        # flip a handful of boundary points, so bound the agreement rate
        X, y, _ = iris
        base = iris_model.predict(X)
        for seed in (1, 3, 4):
            perm = np.random.default_rng(seed).permutation(len(X))
            permuted = train_svm(X[perm], y[perm], SvmConfig())
            assert (permuted.predict(X) == base).mean() >= 0.97

    def test_training_is_deterministic(self, iris, iris_model):
        X, y, _ = iris
        again = train_svm(X, y, SvmConfig())
        np.testing.assert_array_equal(
            again.decision_function(X), iris_model.decision_function(X)
        )

    def test_non_numeric_features_rejected(self):
        X = np.array([["a", "b"], ["c", "d"]], dtype=object)
        with pytest.raises(ValueError, match="numeric"):
            train_svm(X, np.array([0, 1]))

    def test_non_finite_features_rejected(self):
        X = np.array([[0.0, np.nan], [1.0, 1.0]])
        with pytest.raises(ValueError, match="non-finite"):
            train_svm(X, np.array([0, 1]))

    def test_single_class_rejected(self):
        X = np.zeros((3, 2))
        with pytest.raises(ValueError, match="2 classes"):
            train_svm(X, np.array([1, 1, 1]))

    def test_label_length_mismatch(self):
        with pytest.raises(ValueError, match="labels"):
            train_svm(np.zeros((3, 2)), np.array([0, 1]))

    def test_iteration_cap_raises_with_violation(self, iris):
        X, y, _ = iris
        with pytest.raises(ConvergenceError) as err:
            train_svm(X, y, SvmConfig(max_iterations=2))
        assert err.value.kkt_violation > 0
        assert "KKT" in str(err.value)


class TestSvmModel:
    def test_decision_function_shape_and_argmax(self, iris, iris_model):
        X, _, _ = iris
        margins = iris_model.decision_function(X)
        assert margins.shape == (len(X), 3)
        picks = np.asarray(iris_model.classes, dtype=object)[margins.argmax(axis=1)]
        np.testing.assert_array_equal(picks, iris_model.predict(X))

    def test_dual_coefficients_respect_box(self, iris_model):
        for binary in iris_model.binaries:
            assert (np.abs(binary.coefficients) <= iris_model.config.c + 1e-9).all()
            assert (np.abs(binary.coefficients) > 0).all()

    def test_classes_sorted_and_plain(self, iris_model):
        assert iris_model.classes == ("setosa", "versicolor", "virginica")
        assert all(isinstance(c, str) for c in iris_model.classes)

    def test_single_row_input(self, iris, iris_model):
        X, _, _ = iris
        single = iris_model.decision_function(X[0])
        assert single.shape == (1, 3)

    def test_json_round_trip_exact(self, iris, iris_model, tmp_path):
        X, _, _ = iris
        path = tmp_path / "model.json"
        iris_model.save(path)
        loaded = SvmModel.load(path)
        assert loaded.classes == iris_model.classes
        np.testing.assert_array_equal(
            loaded.decision_function(X), iris_model.decision_function(X)
        )


class TestRuleExtraction:
    def test_support_vector_prototype_rectangle(self):
        rule = _interval_rule(
            np.array([5.1, 3.5, 1.4, 0.2]),
            np.array([5.0, 3.4, 1.5, 0.3]),
            ("sepal_length", "sepal_width", "petal_length", "petal_width"),
            "setosa",
        )
        bounds = {c.feature: (c.lower, c.upper) for c in rule.clauses}
        assert bounds == {
            "sepal_length": (5.0, 5.1),
            "sepal_width": (3.4, 3.5),
            "petal_length": (1.4, 1.5),
            "petal_width": (0.2, 0.3),
        }
        assert rule.label == "setosa"

    def test_identical_pair_gives_point_intervals(self):
        point = np.array([1.0, 2.0])
        rule = _interval_rule(point, point.copy(), ("a", "b"), "x")
        assert all(c.lower == c.upper for c in rule.clauses)

    def test_iris_rules_all_have_complexity_three(self, iris, iris_model):
        X, y, names = iris
        ruleset = extract_rules(iris_model, X, y, names)
        assert len(ruleset.rules) > 0
        for rule in ruleset.rules:
            assert rule_complexity(rule, ruleset) == pytest.approx(3.0)
        assert ruleset_complexity(ruleset) == pytest.approx(3.0)

    def test_rectangles_contain_generators(self, iris, iris_model):
        X, y, names = iris
        ruleset = extract_rules(iris_model, X, y, names)
        support = sorted({i for idx in iris_model.support_rows().values() for i in idx})
        centroids = {
            cls: X[y == cls].mean(axis=0) for cls in iris_model.classes
        }
        name_pos = {n: k for k, n in enumerate(names)}
        covered = []
        for idx in support:
            point, cls = X[idx], y[idx]
            hit = False
            for rule in ruleset.rules:
                if rule.label != str(cls):
                    continue
                inside_sv = all(
                    c.lower - 1e-12 <= point[name_pos[c.feature]] <= c.upper + 1e-12
                    for c in rule.clauses
                )
                inside_proto = all(
                    c.lower - 1e-12 <= centroids[cls][name_pos[c.feature]] <= c.upper + 1e-12
                    for c in rule.clauses
                )
                if inside_sv and inside_proto:
                    hit = True
                    break
            covered.append(hit)
        assert all(covered)

    def test_duplicates_merged(self):
        X = np.array([[0.0, 0.0], [0.0, 0.0], [4.0, 4.0], [4.0, 4.0]])
        y = np.array(["a", "a", "b", "b"])
        model = train_svm(X, y, SvmConfig(kernel="linear"))
        ruleset = extract_rules(model, X, y, ("u", "v"))
        assert len(ruleset.rules) == len(set(ruleset.rules))
        # duplicated rows collapse to at most one rule per class
        assert len(ruleset.rules) <= 2

    def test_medoid_prototypes_are_data_points(self):
        rng = np.random.default_rng(0)
        points = rng.normal(size=(12, 3))
        medoids = class_prototypes(points, 3)
        assert medoids.shape == (3, 3)
        for m in medoids:
            assert any(np.array_equal(m, p) for p in points)

    def test_centroid_prototype_default(self):
        points = np.array([[0.0, 0.0], [2.0, 2.0]])
        np.testing.assert_allclose(class_prototypes(points, 1), [[1.0, 1.0]])

    def test_multi_prototype_extraction_runs(self, iris, iris_model):
        X, y, names = iris
        ruleset = extract_rules(iris_model, X, y, names, n_prototypes_per_class=3)
        for rule in ruleset.rules:
            assert rule_complexity(rule, ruleset) == pytest.approx(3.0)

    def test_class_without_support_vectors_rejected(self):
        empty = BinarySvm(
            support_vectors=np.zeros((0, 2)),
            coefficients=np.zeros(0),
            bias=0.0,
            support_indices=(),
        )
        loaded = BinarySvm(
            support_vectors=np.array([[0.0, 0.0]]),
            coefficients=np.array([1.0]),
            bias=0.0,
            support_indices=(0,),
        )
        model = SvmModel(
            classes=("a", "b"), binaries=(loaded, empty), kernel="linear", gamma=1.0
        )
        X = np.array([[0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(ValueError, match="without support vectors"):
            extract_rules(model, X, np.array(["a", "b"]), ("u", "v"))

    def test_feature_name_count_checked(self, iris, iris_model):
        X, y, _ = iris
        with pytest.raises(ValueError, match="names"):
            extract_rules(iris_model, X, y, ("just_one",))


def matching_item():
    return {
        "type": "Tutorial",
        "language": "English",
        "difficulty": "Media",
        "format": "Text",
        "duration": "0-30",
        "min_age": 10,
        "max_age": 16,
        "discipline_level_0": "Business",
        "discipline_level_1": "Economics",
        "discipline_level_2": "Micro",
        "discipline_level_3": "Absent",
    }


class TestUserProfile:
    def test_default_profile_fields(self):
        assert DEFAULT_PROFILE.disciplines == ("Business",)
        assert DEFAULT_PROFILE.min_age == 0 and DEFAULT_PROFILE.max_age == 100
        assert DEFAULT_PROFILE.checked_fields() == (
            "disciplines", "language", "difficulty", "duration", "format", "type", "age",
        )

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            UserProfile(disciplines=())

    def test_age_pair_enforced(self):
        with pytest.raises(ValueError, match="together"):
            UserProfile(disciplines=("Business",), min_age=5)
        with pytest.raises(ValueError, match="exceeds"):
            UserProfile(disciplines=("Business",), min_age=10, max_age=5)

    def test_fully_unconstrained_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            UserProfile()

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "profile.json"
        DEFAULT_PROFILE.save(path)
        assert UserProfile.load(path) == DEFAULT_PROFILE


class TestRecommenderPredict:
    def test_fully_matching_item_recommended(self):
        frame = pd.DataFrame([matching_item()])
        result = recommender_predict(frame, DEFAULT_PROFILE)
        assert result.decisions.tolist() == [True]
        assert result.scores[0] == pytest.approx(1.0)

    def test_single_field_mismatch_blocks(self):
        item = matching_item()
        item["discipline_level_0"] = "Humanities"
        result = recommender_predict(pd.DataFrame([item]), DEFAULT_PROFILE)
        assert result.decisions.tolist() == [False]
        assert result.scores[0] == pytest.approx(6 / 7)

    def test_age_overlap_semantics(self):
        narrow = UserProfile(disciplines=("Business",), min_age=18, max_age=20)
        item = matching_item()  # ages 10..16, disjoint from 18..20
        result = recommender_predict(pd.DataFrame([item]), narrow)
        assert not result.decisions[0]
        touching = dict(item, max_age=18)  # shared endpoint counts as overlap
        result = recommender_predict(pd.DataFrame([touching]), narrow)
        assert result.decisions[0]

    def test_full_age_range_passes_everything(self):
        resources, _ = synthesize_merlot(n_resources=50, n_ratings=10, rng_seed=1)
        age_only = UserProfile(min_age=0, max_age=100, disciplines=None)
        with pytest.raises(ValueError):
            UserProfile()  # sanity: some constraint is required
        result = recommender_predict(resources.frame, age_only)
        assert result.decisions.all()

    def test_universal_profile_recommends_everything(self):
        resources, _ = synthesize_merlot(n_resources=120, n_ratings=10, rng_seed=5)
        frame = resources.frame
        universal = UserProfile(
            disciplines=tuple(sorted(frame["discipline_level_0"].unique())),
            language=tuple(sorted(frame["language"].unique())),
            difficulty=tuple(sorted(frame["difficulty"].unique())),
            duration=tuple(sorted(frame["duration"].unique())),
            format=tuple(sorted(frame["format"].unique())),
            type=tuple(sorted(frame["type"].unique())),
            min_age=0,
            max_age=100,
        )
        result = recommender_predict(frame, universal)
        assert result.decisions.all()
        np.testing.assert_allclose(result.scores, 1.0)

    def test_missing_column_named(self):
        frame = pd.DataFrame([matching_item()]).drop(columns=["difficulty"])
        with pytest.raises(SchemaError, match="difficulty"):
            recommender_predict(frame, DEFAULT_PROFILE)

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_enlarging_preferences_is_monotone(self, seed):
        rng = np.random.default_rng(seed)
        resources, _ = synthesize_merlot(
            n_resources=30, n_ratings=5, rng_seed=int(rng.integers(2**31))
        )
        frame = resources.frame
        base = DEFAULT_PROFILE
        extra = {
            "disciplines": ("Humanities",),
            "difficulty": ("Bassa",),
            "format": ("Website",),
            "type": ("Presentation",),
        }
        field = list(extra)[int(rng.integers(len(extra)))]
        enlarged_values = tuple(getattr(base, field)) + extra[field]
        enlarged = UserProfile(**{
            **{f: getattr(base, f) for f in FIELD_COLUMNS},
            "min_age": base.min_age,
            "max_age": base.max_age,
            field: enlarged_values,
        })
        before = recommender_predict(frame, base).decisions
        after = recommender_predict(frame, enlarged).decisions
        assert (after | ~before).all()  # recommended stays recommended


class TestRecommenderModel:
    def test_decision_output_is_binary_float(self):
        frame = pd.DataFrame([matching_item(), dict(matching_item(), format="Website")])
        model = RecommenderModel()
        out = model.predict_frame(frame)
        assert out.dtype == float
        assert out.tolist() == [1.0, 0.0]

    def test_score_output_is_match_ratio(self):
        frame = pd.DataFrame([dict(matching_item(), format="Website")])
        model = RecommenderModel(output="score")
        assert model.predict_frame(frame)[0] == pytest.approx(6 / 7)

    def test_invalid_output_rejected(self):
        with pytest.raises(ValueError, match="output"):
            RecommenderModel(output="margin")


class TestRecommenderRules:
    def test_default_profile_complexity(self):
        ruleset = recommender_rules(DEFAULT_PROFILE)
        assert len(ruleset.rules) == 1
        rule = ruleset.rules[0]
        assert len(rule.clauses) == 7
        assert len(rule.features) == 7
        assert rule_complexity(rule, ruleset) == pytest.approx(6.0)
        assert ruleset_complexity(ruleset) == pytest.approx(6.0)

    def test_single_field_profile_scores_zero(self):
        ruleset = recommender_rules(UserProfile(disciplines=("Business",)))
        assert len(ruleset.rules[0].clauses) == 1
        assert ruleset_complexity(ruleset) == pytest.approx(0.0)

    def test_age_clause_carries_window(self):
        ruleset = recommender_rules(DEFAULT_PROFILE)
        age_clauses = [c for c in ruleset.rules[0].clauses if c.feature == "age"]
        assert len(age_clauses) == 1
        assert (age_clauses[0].lower, age_clauses[0].upper) == (0.0, 100.0)

    def test_split_disjunctions_preserves_per_rule_complexity(self):
        ruleset = recommender_rules(DEFAULT_PROFILE, split_disjunctions=True)
        assert len(ruleset.rules) == 16  # product of preference set sizes
        for rule in ruleset.rules:
            assert len(rule.clauses) == 7
            assert rule_complexity(rule, ruleset) == pytest.approx(6.0)
        assert ruleset_complexity(ruleset) == pytest.approx(6.0)

    def test_rules_describe_renders_if_then(self):
        text = recommender_rules(DEFAULT_PROFILE).rules[0].describe()
        assert text.startswith("IF ")
        assert "THEN Recommended" in text
        assert "disciplines" in text and "age" in text

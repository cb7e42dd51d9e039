"""Tests for the keep-positive and keep-absolute fidelity metrics."""

import csv

import numpy as np
import pytest

from xaiq.fidelity import (
    FidelityCurve,
    MetricKind,
    curve_auc,
    fraction_grid,
    keep_absolute_resample,
    keep_positive_mask,
    keep_positive_resample,
)
from xaiq.models.base import OutputKind
from xaiq.shapley import BackgroundSet, exact_shapley


def linear_model(weights):
    weights = np.asarray(weights, dtype=float)
    return lambda rows: rows @ weights


def make_curve(fractions, scores):
    fr = np.asarray(fractions, dtype=float)
    sc = np.asarray(scores, dtype=float)
    auc = float(np.trapezoid(sc, fr) / (fr[-1] - fr[0]))
    return FidelityCurve(
        metric_kind=MetricKind.KEEP_POSITIVE_MASK,
        fractions=tuple(fr),
        scores=tuple(sc),
        counts=tuple(int(np.ceil(t * (len(fr) - 1))) for t in fr),
        auc=auc,
    )


class TestFidelityCurve:
    def test_grid_helper(self):
        assert fraction_grid(4) == (0.0, 0.25, 0.5, 0.75, 1.0)
        with pytest.raises(ValueError):
            fraction_grid(0)

    def test_constant_curve_auc_one(self):
        assert curve_auc(make_curve([0, 0.5, 1], [1.0, 1.0, 1.0])) == pytest.approx(1.0)

    def test_linear_rise_auc_half(self):
        assert curve_auc(make_curve([0, 0.5, 1], [0.0, 0.5, 1.0])) == pytest.approx(0.5)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError, match="2 points"):
            FidelityCurve(
                metric_kind=MetricKind.KEEP_POSITIVE_MASK,
                fractions=(0.0,), scores=(1.0,), counts=(0,), auc=1.0,
            )

    def test_fractions_must_increase_from_zero_to_one(self):
        with pytest.raises(ValueError, match="increasing"):
            make_curve([0, 0.5, 0.5, 1], [0, 0, 0, 0])
        with pytest.raises(ValueError, match="start at 0"):
            make_curve([0.1, 0.5, 1], [0, 0, 0])

    def test_auc_consistency_enforced(self):
        with pytest.raises(ValueError, match="does not match"):
            FidelityCurve(
                metric_kind=MetricKind.KEEP_POSITIVE_MASK,
                fractions=(0.0, 1.0), scores=(0.0, 1.0), counts=(0, 2), auc=0.9,
            )

    def test_score_at_count(self):
        curve = make_curve([0, 0.5, 1], [0.2, 0.6, 0.9])
        assert curve.score_at_count(1) == pytest.approx(0.6)
        with pytest.raises(ValueError, match="keeps"):
            curve.score_at_count(5)

    def test_csv_export(self, tmp_path):
        curve = make_curve([0, 0.5, 1], [0.2, 0.6, 0.9])
        path = tmp_path / "curve.csv"
        curve.to_csv(path)
        with open(path) as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["fraction", "count", "score"]
        assert float(rows[1][0]) == 0.0 and float(rows[-1][2]) == 0.9


@pytest.fixture
def linear_setup():
    rng = np.random.default_rng(0)
    weights = np.array([2.0, -1.0, 0.5, 1.5])
    model = linear_model(weights)
    background = BackgroundSet(rows=rng.normal(size=(30, 4)))
    instances = rng.normal(size=(6, 4))
    attributions = [exact_shapley(model, x, background) for x in instances]
    return model, weights, background, instances, attributions


class TestKeepPositiveMask:
    def test_zero_fraction_hits_base_value_for_linear(self, linear_setup):
        model, _, background, instances, attributions = linear_setup
        curve = keep_positive_mask(model, instances, attributions, background)
        phi0 = model(background.rows).mean()
        assert curve.scores[0] == pytest.approx(phi0, abs=1e-9)

    def test_full_fraction_masks_only_negative_phi(self, linear_setup):
        model, _, background, instances, attributions = linear_setup
        curve = keep_positive_mask(model, instances, attributions, background)
        means = background.rows.mean(axis=0)
        expected = []
        for x, att in zip(instances, attributions):
            masked = np.where(att.phi > 0, x, means)
            expected.append(model(masked[None, :])[0])
        assert curve.scores[-1] == pytest.approx(np.mean(expected), abs=1e-9)

    def test_monotone_for_positive_weights(self):
        rng = np.random.default_rng(1)
        model = linear_model([1.0, 2.0, 3.0])
        background = BackgroundSet(rows=rng.normal(size=(20, 3)))
        instances = background.rows.mean(axis=0) + rng.uniform(0.5, 1.5, size=(5, 3))
        attributions = [exact_shapley(model, x, background) for x in instances]
        curve = keep_positive_mask(model, instances, attributions, background)
        assert (np.diff(curve.scores) >= -1e-12).all()

    def test_no_positive_attributions_stays_fully_masked(self):
        rng = np.random.default_rng(2)
        model = linear_model([1.0, 1.0])
        background = BackgroundSet(rows=rng.normal(size=(15, 2)))
        instance = background.rows.mean(axis=0) - 1.0  # both phi negative
        att = exact_shapley(model, instance, background)
        assert (att.phi < 0).all()
        curve = keep_positive_mask(model, instance[None, :], [att], background)
        assert curve.scores[0] == pytest.approx(curve.scores[-1], abs=1e-12)

    def test_counts_axis(self, linear_setup):
        model, _, background, instances, attributions = linear_setup
        curve = keep_positive_mask(model, instances, attributions, background)
        assert curve.counts == (0, 1, 2, 3, 4)

    def test_attribution_count_mismatch(self, linear_setup):
        model, _, background, instances, attributions = linear_setup
        with pytest.raises(ValueError, match="attributions"):
            keep_positive_mask(model, instances, attributions[:-1], background)

    def test_multioutput_model_rejected(self, linear_setup):
        _, _, background, instances, attributions = linear_setup
        two_headed = lambda rows: np.stack([rows.sum(axis=1), rows.sum(axis=1)], axis=1)
        with pytest.raises(ValueError, match="scalar-output"):
            keep_positive_mask(two_headed, instances, attributions, background)


class TestKeepPositiveResample:
    def test_zero_fraction_equals_mean_background_prediction(self, linear_setup):
        model, _, background, instances, attributions = linear_setup
        curve = keep_positive_resample(model, instances, attributions, background)
        assert curve.scores[0] == pytest.approx(model(background.rows).mean(), abs=1e-9)

    def test_linear_model_agrees_with_mask_variant(self, linear_setup):
        model, _, background, instances, attributions = linear_setup
        masked = keep_positive_mask(model, instances, attributions, background)
        resampled = keep_positive_resample(model, instances, attributions, background)
        np.testing.assert_allclose(resampled.scores, masked.scores, atol=1e-9)

    def test_seed_determinism_with_draws(self, linear_setup):
        model, _, background, instances, attributions = linear_setup
        first = keep_positive_resample(
            model, instances, attributions, background, rng_seed=5, draws=4
        )
        second = keep_positive_resample(
            model, instances, attributions, background, rng_seed=5, draws=4
        )
        assert first.scores == second.scores
        third = keep_positive_resample(
            model, instances, attributions, background, rng_seed=6, draws=4
        )
        assert first.scores != third.scores


class TestKeepAbsoluteResample:
    def setup_method(self):
        rng = np.random.default_rng(3)
        self.weights = np.array([3.0, -2.0, 0.5])
        self.margin_model = lambda rows: rows @ self.weights
        self.background = BackgroundSet(rows=rng.normal(size=(40, 3)))
        self.instances = rng.normal(size=(25, 3))
        self.labels = (self.instances @ self.weights > 0).astype(int)
        self.attributions = [
            exact_shapley(self.margin_model, x, self.background) for x in self.instances
        ]

    def test_full_fraction_recovers_plain_accuracy(self):
        curve = keep_absolute_resample(
            self.margin_model, self.instances, self.labels, self.attributions,
            self.background, output_kind=OutputKind.MARGIN,
        )
        plain = ((self.margin_model(self.instances) > 0).astype(int) == self.labels).mean()
        assert curve.scores[-1] == pytest.approx(plain)
        assert plain == 1.0

    def test_accuracy_never_exceeds_one(self):
        curve = keep_absolute_resample(
            self.margin_model, self.instances, self.labels, self.attributions,
            self.background, output_kind=OutputKind.MARGIN,
        )
        assert all(0.0 <= s <= 1.0 for s in curve.scores)

    def test_missing_labels_rejected(self):
        with pytest.raises(ValueError, match="labels"):
            keep_absolute_resample(
                self.margin_model, self.instances, None, self.attributions,
                self.background,
            )

    def test_label_length_checked(self):
        with pytest.raises(ValueError, match="labels"):
            keep_absolute_resample(
                self.margin_model, self.instances, self.labels[:-1],
                self.attributions, self.background,
            )

    def test_multiclass_argmax_with_class_names(self):
        rng = np.random.default_rng(4)
        centers = np.array([[0.0, 0.0], [4.0, 4.0]])
        X = np.vstack([rng.normal(c, 0.3, size=(10, 2)) for c in centers])
        labels = np.array(["low"] * 10 + ["high"] * 10, dtype=object)
        def margins(rows):
            return -np.stack(
                [np.linalg.norm(rows - c, axis=1) for c in centers], axis=1
            )
        background = BackgroundSet(rows=X)
        attributions = np.tile([1.0, 0.5], (20, 1))
        curve = keep_absolute_resample(
            margins, X, labels, attributions, background,
            output_kind=OutputKind.MARGIN, classes=("low", "high"),
        )
        assert curve.scores[-1] == 1.0

    def test_probability_threshold_at_half(self):
        model = lambda rows: rows.mean(axis=1)  # outputs already in [0,1]
        background = BackgroundSet(rows=np.array([[0.0, 0.0], [1.0, 1.0]]))
        instances = np.array([[0.9, 0.9], [0.1, 0.1]])
        labels = np.array([1, 0])
        attributions = np.array([[0.5, 0.4], [0.5, 0.4]])
        curve = keep_absolute_resample(
            model, instances, labels, attributions, background,
            output_kind=OutputKind.PROBABILITY,
        )
        assert curve.scores[-1] == 1.0

    def test_tie_break_keeps_lowest_index(self):
        # equal |phi|: the first feature must be kept at k=1
        model = lambda rows: rows[:, 0]
        background = BackgroundSet(rows=np.array([[-5.0, 0.0], [-5.0, 0.0]]))
        instances = np.array([[5.0, 0.0]])
        labels = np.array([1])
        attributions = np.array([[1.0, 1.0]])
        curve = keep_absolute_resample(
            model, instances, labels, attributions, background,
            output_kind=OutputKind.MARGIN,
        )
        # keeping feature 0 keeps the margin positive at the midpoint
        assert curve.scores[1] == 1.0

    def test_seed_determinism_with_draws(self):
        first = keep_absolute_resample(
            self.margin_model, self.instances, self.labels, self.attributions,
            self.background, rng_seed=7, draws=3, output_kind=OutputKind.MARGIN,
        )
        second = keep_absolute_resample(
            self.margin_model, self.instances, self.labels, self.attributions,
            self.background, rng_seed=7, draws=3, output_kind=OutputKind.MARGIN,
        )
        assert first.scores == second.scores

    def test_permuting_features_and_attributions_together_is_invariant(self):
        perm = np.array([2, 0, 1])
        permuted_model = lambda rows: rows @ self.weights[perm]
        phi = np.vstack([a.phi for a in self.attributions])
        base = keep_absolute_resample(
            self.margin_model, self.instances, self.labels, phi,
            self.background, output_kind=OutputKind.MARGIN,
        )
        permuted = keep_absolute_resample(
            permuted_model, self.instances[:, perm], self.labels, phi[:, perm],
            BackgroundSet(rows=self.background.rows[:, perm]),
            output_kind=OutputKind.MARGIN,
        )
        np.testing.assert_allclose(permuted.scores, base.scores, atol=1e-12)


class TestGridValidation:
    def test_custom_grid_must_span_unit_interval(self, ):
        model = linear_model([1.0, 1.0])
        background = BackgroundSet(rows=np.zeros((3, 2)))
        instances = np.ones((2, 2))
        attributions = np.ones((2, 2))
        with pytest.raises(ValueError, match="start at 0"):
            keep_positive_mask(model, instances, attributions, background, grid=[0.5, 1.0])
        with pytest.raises(ValueError, match="increasing"):
            keep_positive_mask(model, instances, attributions, background, grid=[0.0, 0.0, 1.0])
        with pytest.raises(ValueError, match="lie in"):
            keep_positive_mask(model, instances, attributions, background, grid=[0.0, 1.5])

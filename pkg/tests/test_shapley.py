from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import curveshap as cs
from curveshap import errors
from curveshap.curves import Strategy, default_grid
from curveshap.game import GameSpec, PayoffTable, Target, evaluate_all, evaluate_slices
from curveshap.shapley import (
    Attribution,
    auc_roc_consistency,
    shapley_curve,
    shapley_exact,
    shapley_sampled,
    shapley_sampled_curve,
)

from conftest import make_blobs
from oracles import random_game, shapley_all_permutations


def table_from_dict(payoffs, n, names=None):
    names = names or tuple(f"f{i}" for i in range(n))
    return PayoffTable(n, payoffs, Target.auc(), None, names, 0)


@pytest.fixture(scope="module")
def banknote_auc_table(banknote_split):
    train, test = banknote_split
    return evaluate_all(GameSpec(Target.auc(), train, test))


@pytest.fixture(scope="module")
def roc_tables(banknote_split):
    train, test = banknote_split
    spec = GameSpec(
        Target.roc_slice(0.0), train, test, strategy=Strategy.INTERPOLATION
    )
    return evaluate_slices(spec, default_grid())


class TestExact:
    def test_two_player_hand_values(self):
        t = table_from_dict({0b00: 0.0, 0b01: 0.2, 0b10: 0.1, 0b11: 0.4}, 2)
        attr = shapley_exact(t)
        np.testing.assert_allclose(attr.values, [0.25, 0.15])
        assert attr.baseline == 0.5
        assert attr.total == pytest.approx(0.9)

    def test_null_player(self):
        # feature 1 never changes any payoff
        t = table_from_dict({0b00: 0.0, 0b01: 0.3, 0b10: 0.0, 0b11: 0.3}, 2)
        attr = shapley_exact(t)
        assert attr.values[1] == 0.0
        assert attr.values[0] == pytest.approx(0.3)

    def test_incomplete_table(self):
        t = table_from_dict({0b00: 0.0, 0b01: 0.2}, 2)
        with pytest.raises(errors.IncompleteTable):
            shapley_exact(t)

    def test_efficiency_on_banknote(self, banknote_auc_table):
        attr = shapley_exact(banknote_auc_table)
        grand = banknote_auc_table[banknote_auc_table.full_mask]
        assert abs(attr.values.sum() - grand) < 1e-9
        assert attr.total == pytest.approx(0.5 + grand)

    def test_by_name(self, banknote_auc_table):
        attr = shapley_exact(banknote_auc_table)
        assert attr.by_name("variance") == attr.values[0]
        with pytest.raises(ValueError):
            attr.by_name("nope")


@settings(max_examples=60)
@given(seed=st.integers(0, 100_000), n=st.integers(1, 5))
def test_exact_matches_all_permutation_oracle(seed, n):
    payoffs = random_game(np.random.default_rng(seed), n)
    attr = shapley_exact(table_from_dict(payoffs, n))
    expected = shapley_all_permutations(payoffs, n)
    np.testing.assert_allclose(attr.values, expected, atol=1e-12)


@settings(max_examples=30)
@given(seed=st.integers(0, 100_000), n=st.integers(1, 5))
def test_symmetric_players_get_equal_shares(seed, n):
    """Interchangeable players receive identical attributions."""
    rng = np.random.default_rng(seed)
    payoffs = random_game(rng, n)
    # make players 0 and 1 symmetric by symmetrizing the payoff function
    if n >= 2:
        symmetric = {}
        for mask, v in payoffs.items():
            swapped = (mask & ~0b11) | ((mask & 0b01) << 1) | ((mask & 0b10) >> 1)
            symmetric[mask] = 0.5 * (v + payoffs[swapped])
        symmetric[0] = 0.0
        attr = shapley_exact(table_from_dict(symmetric, n))
        assert abs(attr.values[0] - attr.values[1]) < 1e-9


class TestSampled:
    def test_exhaustive_permutations_equal_exact(self, blobs):
        train, test = cs.split(blobs, cs.SplitSpec(0.7, 1))
        spec = GameSpec(Target.auc(), train, test)
        n = spec.n
        exact = shapley_exact(evaluate_all(spec))
        sampled = shapley_sampled(
            spec, samples=factorial(n), seed=0, without_replacement=True
        )
        np.testing.assert_allclose(sampled.values, exact.values, atol=1e-12)

    def test_single_sample_efficiency(self, banknote_split):
        train, test = banknote_split
        spec = GameSpec(Target.auc(), train, test)
        attr = shapley_sampled(spec, samples=1, seed=11)
        assert abs(attr.total - attr.baseline - attr.values.sum()) < 1e-12

    def test_deterministic_per_seed(self, banknote_split):
        train, test = banknote_split
        spec = GameSpec(Target.auc(), train, test)
        a = shapley_sampled(spec, samples=50, seed=3)
        b = shapley_sampled(spec, samples=50, seed=3)
        np.testing.assert_array_equal(a.values, b.values)
        c = shapley_sampled(spec, samples=50, seed=4)
        assert not np.array_equal(a.values, c.values)

    def test_rmse_decreases_with_samples(self):
        rng = np.random.default_rng(12)
        d = make_blobs(rng, n_rows=120, n_features=4, informative=2)
        train, test = cs.split(d, cs.SplitSpec(0.7, 2))
        spec = GameSpec(Target.auc(), train, test)
        exact = shapley_exact(evaluate_all(spec)).values

        def rmse(samples):
            est = shapley_sampled(spec, samples=samples, seed=5).values
            return float(np.sqrt(np.mean((est - exact) ** 2)))

        assert rmse(10_000) < rmse(100)

    def test_rejects_zero_samples(self, banknote_split):
        train, test = banknote_split
        spec = GameSpec(Target.auc(), train, test)
        with pytest.raises(errors.DataError):
            shapley_sampled(spec, samples=0, seed=0)


class TestCurve:
    def test_grid_assembly(self, roc_tables):
        curve = shapley_curve(roc_tables)
        assert curve.values.shape == (4, 101)
        assert curve.abscissae[0] == 0.0 and curve.abscissae[-1] == 1.0
        assert curve.kind == "roc_slice"

    def test_single_point_matches_exact(self, roc_tables):
        curve = shapley_curve(roc_tables[20:21])
        exact = shapley_exact(roc_tables[20])
        np.testing.assert_array_equal(curve.values[:, 0], exact.values)
        assert curve.reference[0] == exact.total

    def test_efficiency_at_every_point(self, roc_tables):
        curve = shapley_curve(roc_tables)
        gap = curve.values.sum(axis=0) - (curve.reference - curve.baselines)
        assert np.max(np.abs(gap)) < 1e-9

    def test_right_endpoint_sums_to_zero(self, roc_tables):
        curve = shapley_curve(roc_tables[-1:])
        assert abs(curve.values[:, 0].sum()) < 1e-9

    def test_series_lookup(self, roc_tables):
        curve = shapley_curve(roc_tables)
        np.testing.assert_array_equal(curve.series("variance"), curve.values[0])

    def test_mixed_tables_rejected(self, roc_tables, banknote_split):
        train, test = banknote_split
        prc = evaluate_slices(
            GameSpec(
                Target.prc_slice(0.5), train, test, strategy=Strategy.INTERPOLATION
            ),
            np.array([0.5]),
        )
        with pytest.raises(errors.DataError):
            shapley_curve([roc_tables[0], prc[0]])

    def test_sampled_curve_matches_shape(self, banknote_split):
        train, test = banknote_split
        spec = GameSpec(
            Target.roc_slice(0.0), train, test, strategy=Strategy.INTERPOLATION
        )
        grid = np.linspace(0.0, 1.0, 11)
        curve = shapley_sampled_curve(spec, grid, samples=24, seed=0)
        assert curve.values.shape == (4, 11)
        gap = curve.values.sum(axis=0) - (curve.reference - curve.baselines)
        assert np.max(np.abs(gap)) < 1e-9


class TestConsistency:
    def test_banknote_discrepancy_small(self, banknote_split, banknote_auc_table):
        train, test = banknote_split
        area = shapley_exact(banknote_auc_table)
        spec = GameSpec(
            Target.roc_slice(0.0), train, test, strategy=Strategy.INTERPOLATION
        )
        curve = shapley_curve(evaluate_slices(spec, default_grid()))
        disc = auc_roc_consistency(area, curve)
        assert disc.shape == (4,)
        assert (disc <= 0.02).all()

    def test_single_feature_closed_form(self, banknote_split):
        train, test = banknote_split
        train1, test1 = cs.project(train, [0]), cs.project(test, [0])
        area = shapley_exact(evaluate_all(GameSpec(Target.auc(), train1, test1)))
        spec = GameSpec(
            Target.roc_slice(0.0), train1, test1, strategy=Strategy.INTERPOLATION
        )
        curve = shapley_curve(evaluate_slices(spec, default_grid()))
        disc = auc_roc_consistency(area, curve)
        # n=1: the φ series IS the curve minus the diagonal; only grid error remains
        assert disc[0] <= 0.01

    def test_zero_game_has_zero_discrepancy(self):
        names = ("a",)
        area = Attribution(names, np.zeros(1), 0.5, 0.5, Target.auc())
        grid = default_grid()
        curve = cs.CurveAttribution(
            names,
            grid,
            np.zeros((1, grid.size)),
            grid.copy(),
            grid.copy(),
            "roc_slice",
        )
        np.testing.assert_array_equal(auc_roc_consistency(area, curve), [0.0])

    def test_grid_too_coarse(self, banknote_split):
        train, test = banknote_split
        area = shapley_exact(evaluate_all(GameSpec(Target.auc(), train, test)))
        spec = GameSpec(
            Target.roc_slice(0.0), train, test, strategy=Strategy.INTERPOLATION
        )
        curve = shapley_curve(evaluate_slices(spec, np.linspace(0, 1, 5)))
        with pytest.raises(errors.GridTooCoarse):
            auc_roc_consistency(area, curve)


class TestProperties:
    def test_null_player_constant_feature(self, banknote_split):
        train, test = banknote_split
        pad_train = cs.Dataset(
            np.hstack([train.features, np.full((train.n_rows, 1), 2.5)]),
            train.labels,
            train.feature_names + ("pad",),
        )
        pad_test = cs.Dataset(
            np.hstack([test.features, np.full((test.n_rows, 1), 2.5)]),
            test.labels,
            test.feature_names + ("pad",),
        )
        attr = shapley_exact(evaluate_all(GameSpec(Target.auc(), pad_train, pad_test)))
        assert abs(attr.by_name("pad")) <= 1e-6

    def test_duplicate_feature_symmetry(self, banknote_split):
        train, test = banknote_split
        dup_train = cs.duplicate_feature(train, 0, "variance_copy")
        dup_test = cs.duplicate_feature(test, 0, "variance_copy")
        attr = shapley_exact(evaluate_all(GameSpec(Target.auc(), dup_train, dup_test)))
        assert abs(attr.by_name("variance") - attr.by_name("variance_copy")) < 1e-9

    def test_attribution_rejects_inefficiency(self):
        with pytest.raises(errors.DataError):
            Attribution(("a",), np.array([0.2]), 0.5, 0.9, Target.auc())

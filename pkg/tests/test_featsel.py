"""Ranking ensemble behavior: planted-signal recovery, null uniformity,
aggregation arithmetic, correlation oracles."""

import math
import warnings

import numpy as np
import pytest

from corteml import featsel
from corteml.errors import ComputeError


def planted(seed, n=100, p=15, signal=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    return X, X[:, signal].copy()


class TestLinearRankings:
    def test_planted_signal_rank_one(self):
        hits = {"ols": 0, "lasso": 0, "ridge": 0}
        for seed in range(20):
            X, y = planted(seed)
            for ranking in featsel.rank_by_linear_models(X, y, seed=seed):
                hits[ranking.method] += ranking.ranks[3] == 1
        for method, count in hits.items():
            assert count >= 19, (method, count)

    def test_null_rank_frequencies_near_uniform(self):
        # y independent of X: no feature may take rank 1 more than 3x the
        # uniform share across 100 seeds
        counts = {"ols": np.zeros(15), "lasso": np.zeros(15), "ridge": np.zeros(15)}
        for seed in range(100):
            rng = np.random.default_rng(10_000 + seed)
            X = rng.normal(size=(60, 15))
            y = rng.normal(size=60)
            for ranking in featsel.rank_by_linear_models(X, y, seed=seed):
                counts[ranking.method][np.argmin(ranking.ranks)] += 1
        for method, freq in counts.items():
            assert freq.max() <= 3 * 100 / 15, (method, freq)

    def test_duplicated_column_ridge_splits_weight(self):
        # 5-point instance solved against the closed-form normal equations
        x = np.array([0.2, 1.1, -0.7, 2.0, -1.4])
        noise = np.array([0.3, -0.2, 0.9, -0.5, 0.1])
        X = np.column_stack([x, x, noise])
        y = 2.0 * x
        Xs = (X - X.mean(0)) / X.std(0)
        yc = y - y.mean()
        w_oracle = np.linalg.solve(Xs.T @ Xs + 1.0 * np.eye(3), Xs.T @ yc)
        assert abs(w_oracle[0] - w_oracle[1]) <= 1e-10  # duplicate shares weight
        _, _, ridge = featsel.rank_by_linear_models(X, y)
        assert np.abs(ridge.scores - np.abs(w_oracle)).max() <= 1e-10
        assert set(np.flatnonzero(ridge.ranks <= 3)) >= {0, 1}

    def test_underdetermined(self):
        X, y = planted(0, n=12, p=15)
        with pytest.raises(ComputeError, match="underdetermined"):
            featsel.rank_by_linear_models(X, y)

    def test_zero_variance_column_ranked_last(self):
        X, y = planted(1)
        X[:, 7] = 4.2
        with pytest.warns(UserWarning, match="zero-variance"):
            ols, lasso, ridge = featsel.rank_by_linear_models(X, y)
        for ranking in (ols, lasso, ridge):
            assert ranking.ranks[7] == 15
            assert ranking.scores[7] == 0.0


class TestRfe:
    def test_two_feature_dominance(self):
        rng = np.random.default_rng(0)
        x1 = rng.normal(size=40)
        x2 = rng.normal(size=40)
        ranking = featsel.rfe_rank(np.column_stack([x1, x2]), x1.copy())
        assert ranking.ranks[0] == 1 and ranking.ranks[1] == 2

    def test_planted_signal(self):
        hits = sum(featsel.rfe_rank(*planted(seed)).ranks[3] == 1 for seed in range(20))
        assert hits >= 18

    def test_permutation_equivariance(self):
        # distinct true weights so no |coefficient| ties arise
        rng = np.random.default_rng(5)
        X = rng.normal(size=(100, 15))
        y = X @ np.linspace(1.5, 0.1, 15) + 0.01 * rng.normal(size=100)
        base = featsel.rfe_rank(X, y).ranks
        perm = np.array([4, 0, 14, 2, 7, 1, 3, 9, 5, 13, 6, 11, 8, 12, 10])
        permuted = featsel.rfe_rank(X[:, perm], y).ranks
        assert np.array_equal(permuted, base[perm])

    def test_agrees_with_ols_on_noiseless_signal(self):
        X, y = planted(9)
        ols, _, _ = featsel.rank_by_linear_models(X, y)
        rfe = featsel.rfe_rank(X, y)
        assert ols.ranks[3] == 1 and rfe.ranks[3] == 1


class TestForest:
    def test_importances_sum_to_one(self):
        X, y = planted(2)
        ranking = featsel.rf_importance(X, y, seed=0)
        assert abs(ranking.scores.sum() - 1.0) <= 1e-9

    def test_planted_signal(self):
        hits = 0
        for seed in range(20):
            X, y = planted(seed)
            hits += featsel.rf_importance(X, y, seed=seed).ranks[3] == 1
        assert hits >= 18

    def test_deterministic(self):
        X, y = planted(4)
        a = featsel.rf_importance(X, y, seed=11)
        b = featsel.rf_importance(X, y, seed=11)
        assert np.array_equal(a.ranks, b.ranks)
        assert np.array_equal(a.scores, b.scores)

    def test_too_few_samples(self):
        X, y = planted(0, n=8)
        with pytest.raises(ComputeError, match="too few"):
            featsel.rf_importance(X, y)


class TestAffineInvariance:
    def test_all_rankings_unchanged_by_column_rescaling(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(60, 15))
        y = X @ np.linspace(2.0, 0.2, 15) + 0.05 * rng.normal(size=60)
        before = featsel.rank_ensemble(X, y, seed=0)
        X2 = X.copy()
        X2[:, 4] = 2.5 * X2[:, 4] - 3.0
        X2[:, 9] = -1.5 * X2[:, 9] + 0.25
        after = featsel.rank_ensemble(X2, y, seed=0)
        for r_before, r_after in zip(before, after):
            assert np.array_equal(r_before.ranks, r_after.ranks), r_before.method


class TestAggregate:
    def make_ranking(self, method, ranks):
        ranks = np.asarray(ranks, dtype=np.int64)
        return featsel.FeatureRanking(method=method, ranks=ranks, scores=1.0 / ranks)

    def test_unanimity(self):
        ranks = np.arange(1, 16)
        rankings = [self.make_ranking(m, ranks) for m in ("a", "b", "c")]
        agg = featsel.aggregate_rankings(rankings, k=5)
        assert np.array_equal(agg.selected, np.arange(5))

    def test_tie_broken_by_canonical_order(self):
        r1 = np.array([1, 3] + list(range(2, 15)))  # cannot collide: build explicitly
        r1 = np.array([1, 3, 2] + list(range(4, 16)))
        r2 = np.array([3, 1, 2] + list(range(4, 16)))
        agg = featsel.aggregate_rankings(
            [self.make_ranking("m1", r1), self.make_ranking("m2", r2)], k=1
        )
        # features 0 and 1 tie at mean rank 2; canonical order wins
        assert agg.mean_rank[0] == agg.mean_rank[1] == 2.0
        assert agg.selected.tolist() == [0]

    def test_hand_built_matrix(self):
        rng = np.random.default_rng(8)
        mat = np.stack([rng.permutation(15) + 1 for _ in range(5)])
        rankings = [self.make_ranking(f"m{i}", mat[i]) for i in range(5)]
        agg = featsel.aggregate_rankings(rankings, k=5)
        hand_mean = [sum(mat[m][j] for m in range(5)) / 5 for j in range(15)]
        assert np.abs(agg.mean_rank - hand_mean).max() == 0.0
        hand_top = sorted(sorted(range(15), key=lambda j: (hand_mean[j], j))[:5])
        assert agg.selected.tolist() == hand_top

    def test_method_order_irrelevant(self):
        rng = np.random.default_rng(3)
        mat = np.stack([rng.permutation(15) + 1 for _ in range(5)])
        rankings = [self.make_ranking(f"m{i}", mat[i]) for i in range(5)]
        a = featsel.aggregate_rankings(rankings, k=5)
        b = featsel.aggregate_rankings(rankings[::-1], k=5)
        assert np.array_equal(a.selected, b.selected)
        assert np.array_equal(a.mean_rank, b.mean_rank)

    def test_empty_list(self):
        with pytest.raises(ComputeError):
            featsel.aggregate_rankings([], k=5)


class TestCorrelate:
    def test_perfect_line(self):
        x = np.linspace(0, 1, 20)
        rep = featsel.correlate(x[:, None], 2 * x + 1)
        assert rep.r[0] == 1.0
        assert rep.p[0] < 1e-12

    def test_hand_pearson(self):
        x = np.array([1.0, 2.0, 3.0])
        y = np.array([1.0, 2.0, 3.5])
        # oracle: direct centered-moment arithmetic
        dx, dy = x - x.mean(), y - y.mean()
        r_hand = (dx @ dy) / math.sqrt((dx @ dx) * (dy @ dy))
        rep = featsel.correlate(x[:, None], y)
        assert abs(rep.r[0] - r_hand) <= 1e-12
        assert abs(rep.r[0] - 0.99340) <= 2e-5

    def test_orthogonal(self):
        x = np.array([-1.0, 0.0, 1.0, 2.0, -2.0])
        y = np.array([1.0, -2.0, 1.0, 0.0, 0.0])
        y = y - y.mean()
        y -= (y @ (x - x.mean())) / ((x - x.mean()) @ (x - x.mean())) * (x - x.mean())
        rep = featsel.correlate(x[:, None], y)
        assert abs(rep.r[0]) <= 1e-12
        assert abs(rep.p[0] - 1.0) <= 1e-9

    def test_symmetry_and_affine(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=30)
        y = rng.normal(size=30)
        r_xy = featsel.correlate(x[:, None], y).r[0]
        r_yx = featsel.correlate(y[:, None], x).r[0]
        assert abs(r_xy - r_yx) <= 1e-12
        r_scaled = featsel.correlate((-2.0 * x + 3.0)[:, None], y).r[0]
        assert abs(r_scaled + r_xy) <= 1e-12

    def test_zero_variance_feature_flagged(self):
        X = np.column_stack([np.full(10, 3.3), np.arange(10.0)])
        with pytest.warns(UserWarning, match="zero-variance"):
            rep = featsel.correlate(X, np.arange(10.0))
        assert rep.degenerate == [0]
        assert rep.r[0] == 0.0 and rep.p[0] == 1.0

    def test_degenerate_y(self):
        with pytest.raises(ComputeError, match="zero variance"):
            featsel.correlate(np.arange(10.0)[:, None], np.full(10, 1.0))

    def test_too_small(self):
        with pytest.raises(ComputeError, match="n >= 3"):
            featsel.correlate(np.arange(2.0)[:, None], np.arange(2.0))


class TestCsvSurfaces:
    def test_ranking_round_trip(self, tmp_path):
        X, y = planted(7, n=60)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rankings = featsel.rank_ensemble(X, y, seed=0)
        agg = featsel.aggregate_rankings(rankings, k=5)
        names = [f"f{i:02d}" for i in range(15)]
        path = tmp_path / "ranking.csv"
        featsel.write_ranking_csv(path, names, rankings, agg)
        selected = featsel.read_selection(path, names)
        assert selected == agg.selected.tolist()

    def test_correlation_csv(self, tmp_path):
        X, y = planted(3, n=30)
        rep = featsel.correlate(X, y)
        path = tmp_path / "corr.csv"
        featsel.write_correlation_csv(path, [f"f{i}" for i in range(15)], rep)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "feature,r,p"
        assert len(lines) == 16

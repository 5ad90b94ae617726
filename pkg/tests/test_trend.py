import math

import numpy as np
import pytest

from trendweight.clustering import TopicCluster
from trendweight.trend import (
    FrequencySeries,
    TrendConfig,
    build_frequency_series,
    compute_mape,
    fit_all_trends,
    fit_trend,
)


def cluster_with_counts(topic_id, counts):
    c = TopicCluster(topic_id=topic_id, centroid=np.array([1.0]))
    for q, n in enumerate(counts, start=1):
        if n:
            c.counts_by_quarter[q] = n
        c.member_ids.extend(f"t{topic_id}q{q}i{j}" for j in range(n))
    return c


def series(values, topic_id=0):
    f = np.asarray(values, dtype=np.float64)
    return FrequencySeries(topic_id=topic_id, f=f, raw_counts=(f * 100).astype(np.int64))


class TestFrequencySeries:
    def test_share_arithmetic(self):
        clusters = [cluster_with_counts(0, [10, 10]), cluster_with_counts(1, [30, 30])]
        out = build_frequency_series(clusters, Q_train=2, theta_count=1)
        assert np.allclose(out[0].f, [0.25, 0.25])
        assert np.allclose(out[1].f, [0.75, 0.75])

    def test_theta_count_drops_small_topics(self):
        clusters = [cluster_with_counts(0, [15, 14]), cluster_with_counts(1, [20, 20])]
        out = build_frequency_series(clusters, Q_train=2, theta_count=30)
        assert [s.topic_id for s in out] == [1]

    def test_boundary_count_kept(self):
        clusters = [cluster_with_counts(0, [15, 15])]
        out = build_frequency_series(clusters, Q_train=2, theta_count=30)
        assert [s.topic_id for s in out] == [0]

    def test_single_topic_degenerate_normalization(self):
        clusters = [cluster_with_counts(0, [5, 0, 9])]
        (s,) = build_frequency_series(clusters, Q_train=3, theta_count=1)
        assert np.array_equal(s.f, [1.0, 0.0, 1.0])

    def test_shares_sum_to_one_per_quarter(self):
        rng = np.random.default_rng(0)
        clusters = [
            cluster_with_counts(t, rng.integers(0, 40, size=6).tolist()) for t in range(5)
        ]
        out = build_frequency_series(clusters, Q_train=6, theta_count=1)
        total = np.sum([s.f for s in out], axis=0)
        counts = np.sum([s.raw_counts for s in out], axis=0)
        for q in range(6):
            expected = 1.0 if counts[q] > 0 else 0.0
            assert total[q] == pytest.approx(expected, abs=1e-9)

    def test_all_dropped_returns_empty(self, caplog):
        clusters = [cluster_with_counts(0, [1, 1])]
        assert build_frequency_series(clusters, Q_train=2, theta_count=30) == []


class TestMape:
    def test_perfect_fit(self):
        assert compute_mape([0.5, 0.25], [0.5, 0.25]) == 0.0

    def test_hand_arithmetic(self):
        assert compute_mape([0.2, 0.4], [0.1, 0.5]) == pytest.approx(0.375, abs=1e-12)

    def test_all_zero_actuals_give_inf(self):
        assert compute_mape([0.0, 0.0], [0.1, 0.2]) == math.inf

    def test_near_zero_actuals_skipped(self):
        got = compute_mape([1e-9, 0.5], [10.0, 0.25])
        assert got == pytest.approx(0.5, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            compute_mape([0.1], [0.1, 0.2])


class TestFitTrend:
    def test_constant_series_any_lambda(self):
        for lam in (0.0, 0.1, 0.5, 5.0):
            cfg = TrendConfig(ridge_lambda_delta=lam, ridge_lambda_beta=lam or 0.1)
            fit = fit_trend(series([0.5] * 8), cfg, target_quarter_of_year=1)
            assert fit.forecast == pytest.approx(0.5, abs=1e-6)

    def test_noise_free_linear_recovery(self):
        q = np.arange(1, 9)
        f = 0.1 + 0.05 * q
        cfg = TrendConfig(n_changepoints=0, ridge_lambda_delta=0.0, ridge_lambda_beta=0.0)
        fit = fit_trend(series(f), cfg, target_quarter_of_year=1)
        assert fit.k == pytest.approx(0.05, abs=1e-9)
        assert fit.m == pytest.approx(0.1, abs=1e-9)
        assert fit.forecast == pytest.approx(0.55, abs=1e-9)
        assert np.allclose(fit.beta, 0.0, atol=1e-9)

    def test_noise_free_seasonal_recovery(self):
        pattern = np.array([0.06, -0.02, -0.01, -0.03])  # zero-sum
        target_qoy = 1  # ordinal 13 is Q1, so ordinal q has qoy ((q-1) % 4) + 1
        q = np.arange(1, 13)
        qoy = ((q - 1) % 4) + 1
        f = 0.25 + pattern[qoy - 1]
        cfg = TrendConfig(n_changepoints=0, ridge_lambda_delta=0.0, ridge_lambda_beta=0.0)
        fit = fit_trend(series(f), cfg, target_quarter_of_year=target_qoy)
        assert np.allclose(fit.beta, pattern, atol=1e-8)
        assert fit.k == pytest.approx(0.0, abs=1e-8)
        assert fit.m == pytest.approx(0.25, abs=1e-8)
        assert fit.forecast == pytest.approx(0.25 + pattern[0], abs=1e-8)

    def test_exact_recovery_of_random_generators(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            k, m = rng.uniform(-0.02, 0.02), rng.uniform(0.1, 0.5)
            b123 = rng.uniform(-0.05, 0.05, size=3)
            beta = np.append(b123, -b123.sum())
            q = np.arange(1, 13)
            qoy = ((q - 1) % 4) + 1
            f = k * q + m + beta[qoy - 1]
            cfg = TrendConfig(n_changepoints=0, ridge_lambda_delta=0.0, ridge_lambda_beta=0.0)
            fit = fit_trend(series(f), cfg, target_quarter_of_year=1)
            assert fit.k == pytest.approx(k, abs=1e-8)
            assert fit.m == pytest.approx(m, abs=1e-8)
            assert np.allclose(fit.beta, beta, atol=1e-8)

    def test_matches_lstsq_oracle_with_ridge(self):
        # independent check of the penalized solve: build the same design by
        # hand and solve the augmented least-squares system with numpy.lstsq
        rng = np.random.default_rng(10)
        f = np.clip(0.3 + 0.02 * np.arange(1, 13) + rng.normal(0, 0.05, 12), 0, 1)
        cfg = TrendConfig(n_changepoints=2, ridge_lambda_delta=0.7, ridge_lambda_beta=0.2)
        fit = fit_trend(series(f), cfg, target_quarter_of_year=1)

        q = np.arange(1, 13, dtype=float)
        qoy = ((q.astype(int) - 1) % 4) + 1
        cols = [q, np.ones_like(q)]
        for s in fit.changepoints:
            cols.append(np.where(q >= s, q - s, 0.0))
        for o in (1, 2, 3):
            cols.append(np.where(qoy == o, 1.0, np.where(qoy == 4, -1.0, 0.0)))
        X = np.column_stack(cols)
        J = len(fit.changepoints)
        P = np.zeros((2 + J + 3, 2 + J + 3))
        P[2 : 2 + J, 2 : 2 + J] = 0.7 * np.eye(J)
        P[2 + J :, 2 + J :] = 0.2 * (np.eye(3) + np.ones((3, 3)))
        # augmented system: minimize ||Xt - f||^2 + t' P t via sqrt(P) rows
        w, v = np.linalg.eigh(P)
        sqrtP = v @ np.diag(np.sqrt(np.maximum(w, 0))) @ v.T
        Xa = np.vstack([X, sqrtP])
        ya = np.concatenate([f, np.zeros(2 + J + 3)])
        theta, *_ = np.linalg.lstsq(Xa, ya, rcond=None)
        got = np.concatenate([[fit.k, fit.m], fit.delta, fit.beta[:3]])
        assert np.allclose(got, theta, atol=1e-8)

    def test_continuity_at_changepoints(self):
        rng = np.random.default_rng(11)
        f = np.clip(0.3 + rng.normal(0, 0.1, 16), 0, 1)
        cfg = TrendConfig(n_changepoints=3, ridge_lambda_delta=0.01, ridge_lambda_beta=0.01)
        fit = fit_trend(series(f), cfg, target_quarter_of_year=1)
        assert fit.changepoints
        for j, s in enumerate(fit.changepoints):
            # left limit uses segments before s; the right side adds delta_j, gamma_j
            jump = fit.delta[j] * s + fit.gamma[j]
            assert abs(jump) < 1e-9
            left = fit.trend_component(s - 1e-9)
            right = fit.trend_component(s + 1e-9)
            assert right - left == pytest.approx(0.0, abs=1e-6)

    def test_gamma_is_minus_s_delta_exactly(self):
        rng = np.random.default_rng(12)
        f = np.clip(0.4 + rng.normal(0, 0.08, 12), 0, 1)
        fit = fit_trend(series(f), TrendConfig(n_changepoints=3), target_quarter_of_year=2)
        for s, d, g in zip(fit.changepoints, fit.delta, fit.gamma):
            assert g == -s * d

    def test_zero_sum_beta(self):
        rng = np.random.default_rng(13)
        f = np.clip(0.4 + rng.normal(0, 0.08, 12), 0, 1)
        fit = fit_trend(series(f), TrendConfig(), target_quarter_of_year=3)
        assert float(fit.beta.sum()) == pytest.approx(0.0, abs=1e-9)

    def test_decomposition_exactness(self):
        rng = np.random.default_rng(14)
        f = np.clip(0.4 + 0.01 * np.arange(12) + rng.normal(0, 0.05, 12), 0, 1)
        fit = fit_trend(series(f), TrendConfig(), target_quarter_of_year=4)
        n1 = fit.n_quarters + 1
        total = fit.trend_component(n1) + fit.seasonal_component(4)
        assert fit.predict(n1) == pytest.approx(total, abs=1e-12)
        assert fit.forecast == max(0.0, total)

    def test_forecast_clamped_at_zero(self):
        f = np.linspace(0.5, 0.01, 10)  # steep decline crosses zero soon after
        cfg = TrendConfig(n_changepoints=0, ridge_lambda_delta=0.0, ridge_lambda_beta=0.0)
        fit = fit_trend(series(f), cfg, target_quarter_of_year=1)
        assert fit.forecast >= 0.0

    def test_ridge_shrinks_delta_and_beta(self):
        rng = np.random.default_rng(15)
        f = np.clip(0.3 + rng.normal(0, 0.1, 16), 0, 1)
        free = fit_trend(
            series(f),
            TrendConfig(n_changepoints=3, ridge_lambda_delta=0.0, ridge_lambda_beta=0.0),
            target_quarter_of_year=1,
        )
        ridged = fit_trend(
            series(f),
            TrendConfig(n_changepoints=3, ridge_lambda_delta=1.0, ridge_lambda_beta=1.0),
            target_quarter_of_year=1,
        )
        norm_free = np.linalg.norm(np.concatenate([free.delta, free.beta]))
        norm_ridged = np.linalg.norm(np.concatenate([ridged.delta, ridged.beta]))
        assert norm_ridged < norm_free

    def test_deterministic(self):
        rng = np.random.default_rng(16)
        f = np.clip(0.4 + rng.normal(0, 0.08, 12), 0, 1)
        a = fit_trend(series(f), TrendConfig(), target_quarter_of_year=1)
        b = fit_trend(series(f), TrendConfig(), target_quarter_of_year=1)
        assert a.k == b.k and a.m == b.m
        assert np.array_equal(a.delta, b.delta) and np.array_equal(a.beta, b.beta)
        assert a.forecast == b.forecast

    def test_too_short_series_excluded(self):
        with pytest.raises(ValueError, match="excluded"):
            fit_trend(series([0.5, 0.5, 0.5]), TrendConfig(), target_quarter_of_year=1)

    def test_singular_system_takes_jitter_path(self, caplog):
        # 4 observations vs 5 free parameters with no ridge: the normal
        # equations are singular, so the solver must jitter and still return
        # a finite in-sample-exact fit instead of garbage
        cfg = TrendConfig(n_changepoints=0, ridge_lambda_delta=0.0, ridge_lambda_beta=0.0)
        with caplog.at_level("WARNING"):
            fit = fit_trend(series([0.5] * 4), cfg, target_quarter_of_year=1)
        assert "jitter" in caplog.text
        assert np.all(np.isfinite(fit.fitted))
        assert np.allclose(fit.fitted, 0.5, atol=1e-6)
        assert np.isfinite(fit.forecast)

    def test_fit_all_collects_exclusions(self):
        ok = series([0.5] * 8, topic_id=0)
        short = series([0.5] * 3, topic_id=1)
        fits, excluded = fit_all_trends([ok, short], TrendConfig(), target_quarter_of_year=1)
        assert set(fits) == {0}
        assert excluded[0][0] == 1

    def test_default_changepoint_count(self):
        fit = fit_trend(series([0.5] * 4), TrendConfig(), target_quarter_of_year=1)
        assert len(fit.changepoints) <= 1  # min(3, 4-3) = 1
        fit = fit_trend(series([0.5] * 20), TrendConfig(), target_quarter_of_year=1)
        assert len(fit.changepoints) == 3
        assert all(2 <= s <= 16 for s in fit.changepoints)  # first 80% of 20

    def test_in_sample_quarter_of_year_anchoring(self):
        fit = fit_trend(series([0.5] * 8), TrendConfig(), target_quarter_of_year=3)
        # ordinal 9 is the target: Q3; counting back, ordinal 1 is also Q3
        assert fit.quarter_of_year(9) == 3
        assert fit.quarter_of_year(8) == 2
        assert fit.quarter_of_year(1) == 3

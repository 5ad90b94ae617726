"""Per-topic quarterly frequency series and the decomposable trend model.

The model for a topic's frequency at quarter ordinal q is

    y(q) = [k + sum_{j: s_j <= q} delta_j] * q + [m + sum_{j: s_j <= q} gamma_j]
           + beta_{quarter_of_year(q)}

with the continuity constraint gamma_j = -s_j * delta_j (the trend line is
unbroken at every changepoint) and zero-sum seasonal coefficients
(beta_4 = -beta_1 - beta_2 - beta_3).  Substituting the constraints makes
the model linear in (k, m, delta, beta_1..3); it is fitted by ridge
least squares via the normal equations, which keeps the solve exact,
deterministic, and dependency-free.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from trendweight.clustering import TopicCluster

logger = logging.getLogger(__name__)

CHANGEPOINT_RANGE = 0.8  # changepoints live in the first 80% of the window
MAPE_FLOOR = 1e-6  # quarters with smaller actuals are skipped, not epsilon-padded


@dataclass(frozen=True)
class TrendConfig:
    n_changepoints: int | None = None  # None -> min(3, max(0, Q_train - 3))
    ridge_lambda_delta: float = 0.5
    ridge_lambda_beta: float = 0.1
    theta_count: int = 30

    def __post_init__(self):
        if self.n_changepoints is not None and self.n_changepoints < 0:
            raise ValueError("n_changepoints must be >= 0")
        if self.ridge_lambda_delta < 0 or self.ridge_lambda_beta < 0:
            raise ValueError("ridge strengths must be >= 0")


@dataclass
class FrequencySeries:
    """Normalized share of one topic per quarter, over the training window."""

    topic_id: int
    f: np.ndarray  # index 0 is quarter ordinal 1
    raw_counts: np.ndarray

    @property
    def n_quarters(self) -> int:
        return len(self.f)


@dataclass
class TrendFit:
    """Fitted trend parameters, in-sample quality, and next-quarter forecast."""

    topic_id: int
    k: float
    m: float
    changepoints: tuple[int, ...]
    delta: np.ndarray
    gamma: np.ndarray  # -s_j * delta_j, kept explicit for reporting
    beta: np.ndarray  # length 4, zero-sum
    mape: float
    forecast: float  # max(0, trend + seasonal) at Q_train + 1
    fitted: np.ndarray
    n_quarters: int
    target_quarter_of_year: int

    def quarter_of_year(self, q: float) -> int:
        """Quarter-of-year at ordinal q, anchored on the forecast target."""
        offset = int(round(q)) - (self.n_quarters + 1)
        return (self.target_quarter_of_year - 1 + offset) % 4 + 1

    def trend_component(self, q: float) -> float:
        rate = self.k + sum(d for s, d in zip(self.changepoints, self.delta) if s <= q)
        offs = self.m + sum(g for s, g in zip(self.changepoints, self.gamma) if s <= q)
        return rate * q + offs

    def seasonal_component(self, quarter_of_year: int) -> float:
        return float(self.beta[quarter_of_year - 1])

    def predict(self, q: float) -> float:
        return self.trend_component(q) + self.seasonal_component(self.quarter_of_year(q))


def build_frequency_series(
    clusters: list[TopicCluster], Q_train: int, theta_count: int
) -> list[FrequencySeries]:
    """Quarterly frequency shares for every big-enough topic.

    Topics with fewer than ``theta_count`` members in the window are
    dropped.  Shares are normalized across the retained topics within each
    quarter; a quarter where every retained topic has zero count keeps
    share 0 for all of them.
    """
    if Q_train < 2:
        raise ValueError(f"need at least 2 training quarters, got {Q_train}")
    retained = []
    for c in clusters:
        total = sum(c.count_in(q) for q in range(1, Q_train + 1))
        if total < theta_count:
            logger.debug("dropping topic %d: %d members < theta_count %d", c.topic_id, total, theta_count)
        else:
            retained.append(c)
    if not retained:
        logger.warning("all %d topics below theta_count=%d; no frequency series", len(clusters), theta_count)
        return []

    counts = np.array(
        [[c.count_in(q) for q in range(1, Q_train + 1)] for c in retained], dtype=np.float64
    )
    denom = counts.sum(axis=0)
    shares = np.divide(counts, denom, out=np.zeros_like(counts), where=denom > 0)
    return [
        FrequencySeries(topic_id=c.topic_id, f=shares[i], raw_counts=counts[i].astype(np.int64))
        for i, c in enumerate(retained)
    ]


def _place_changepoints(n_quarters: int, n_changepoints: int) -> tuple[int, ...]:
    """Evenly spaced integer changepoints over the first 80% of the window.

    Ordinal 1 is never a changepoint (a hinge there is collinear with the
    base trend); duplicates from rounding are collapsed.
    """
    hist = int(math.floor(n_quarters * CHANGEPOINT_RANGE))
    if n_changepoints <= 0 or hist < 2:
        return ()
    raw = np.linspace(1.0, float(hist), n_changepoints + 1)[1:]
    points = sorted({int(p) for p in np.round(raw) if 2 <= int(p) <= hist})
    return tuple(points)


def _design_matrix(
    n_quarters: int, changepoints: tuple[int, ...], target_qoy: int
) -> np.ndarray:
    q = np.arange(1, n_quarters + 1, dtype=np.float64)
    cols = [q, np.ones_like(q)]
    for s in changepoints:
        cols.append(np.where(q >= s, q - s, 0.0))
    # zero-sum seasonal dummies: beta_4 is parameterized as -(b1 + b2 + b3)
    qoy = np.array(
        [((target_qoy - 1 + (int(x) - (n_quarters + 1))) % 4) + 1 for x in q], dtype=np.int64
    )
    for o in (1, 2, 3):
        cols.append(np.where(qoy == o, 1.0, np.where(qoy == 4, -1.0, 0.0)))
    return np.column_stack(cols)


def _penalty_matrix(n_changepoints: int, lam_delta: float, lam_beta: float) -> np.ndarray:
    n = 2 + n_changepoints + 3
    P = np.zeros((n, n), dtype=np.float64)
    for j in range(n_changepoints):
        P[2 + j, 2 + j] = lam_delta
    # ||beta||^2 with beta_4 = -(b1+b2+b3) is B^T (I + 11^T) B on the free block
    b = 2 + n_changepoints
    P[b : b + 3, b : b + 3] = lam_beta * (np.eye(3) + np.ones((3, 3)))
    return P


def fit_trend(
    series: FrequencySeries, config: TrendConfig, target_quarter_of_year: int
) -> TrendFit:
    """Fit the trend + quarterly-seasonality model and forecast one step ahead.

    The in-sample quarter-of-year labels are derived by counting backwards
    from ``target_quarter_of_year`` at ordinal Q_train + 1, which is valid
    because ordinals cover consecutive calendar quarters.  The forecast is
    clamped at zero: frequencies are shares.
    """
    if not 1 <= target_quarter_of_year <= 4:
        raise ValueError(f"target_quarter_of_year must be 1..4, got {target_quarter_of_year}")
    n = series.n_quarters
    if n < 4:
        raise ValueError(
            f"topic {series.topic_id}: {n} observations < 4; excluded from trend fitting"
        )
    J = config.n_changepoints
    if J is None:
        J = min(3, max(0, n - 3))
    changepoints = _place_changepoints(n, J)

    X = _design_matrix(n, changepoints, target_quarter_of_year)
    P = _penalty_matrix(len(changepoints), config.ridge_lambda_delta, config.ridge_lambda_beta)
    y = np.asarray(series.f, dtype=np.float64)

    theta = _solve_normal_equations(X, P, y, series.topic_id)

    k, m = float(theta[0]), float(theta[1])
    delta = theta[2 : 2 + len(changepoints)].copy()
    b123 = theta[2 + len(changepoints) :]
    beta = np.append(b123, -float(b123.sum()))
    gamma = -np.array(changepoints, dtype=np.float64) * delta
    fitted = X @ theta
    mape = compute_mape(y, fitted)

    fit = TrendFit(
        topic_id=series.topic_id,
        k=k,
        m=m,
        changepoints=changepoints,
        delta=delta,
        gamma=gamma,
        beta=beta,
        mape=mape,
        forecast=0.0,
        fitted=fitted,
        n_quarters=n,
        target_quarter_of_year=target_quarter_of_year,
    )
    raw = float(fit.trend_component(n + 1)) + fit.seasonal_component(target_quarter_of_year)
    fit.forecast = max(0.0, raw)
    return fit


COND_LIMIT = 1e10  # beyond this the solve is numerically meaningless


def _solve_normal_equations(X: np.ndarray, P: np.ndarray, y: np.ndarray, topic_id: int) -> np.ndarray:
    A = X.T @ X + P
    b = X.T @ y
    for attempt in range(2):
        theta = None
        if np.linalg.cond(A) < COND_LIMIT:
            try:
                theta = np.linalg.solve(A, b)
            except np.linalg.LinAlgError:
                theta = None
        if theta is not None and np.all(np.isfinite(theta)):
            return theta
        if attempt == 0:
            logger.warning("topic %d: singular normal equations; retrying with jitter", topic_id)
            A = A + 1e-6 * np.eye(A.shape[0])
    raise ValueError(f"topic {topic_id}: normal equations singular even after jitter; excluded")


def compute_mape(actual: np.ndarray, fitted: np.ndarray) -> float:
    """Mean absolute percentage error over quarters with non-negligible actuals.

    Quarters with actual below 1e-6 are skipped rather than epsilon-padded;
    if no quarter qualifies the result is +inf so the topic gets filtered.
    """
    actual = np.asarray(actual, dtype=np.float64)
    fitted = np.asarray(fitted, dtype=np.float64)
    if actual.shape != fitted.shape:
        raise ValueError(f"length mismatch: {actual.shape} vs {fitted.shape}")
    if actual.size == 0:
        raise ValueError("compute_mape needs at least one observation")
    mask = actual >= MAPE_FLOOR
    if not mask.any():
        return math.inf
    return float(np.mean(np.abs(actual[mask] - fitted[mask]) / actual[mask]))


def fit_all_trends(
    series_list: list[FrequencySeries], config: TrendConfig, target_quarter_of_year: int
) -> tuple[dict[int, TrendFit], list[tuple[int, str]]]:
    """Fit every topic independently; collect exclusions instead of failing."""
    fits: dict[int, TrendFit] = {}
    excluded: list[tuple[int, str]] = []
    for series in series_list:
        try:
            fits[series.topic_id] = fit_trend(series, config, target_quarter_of_year)
        except ValueError as e:
            logger.warning("trend fit excluded topic %d: %s", series.topic_id, e)
            excluded.append((series.topic_id, str(e)))
    return fits, excluded


def write_trend_report(
    path: str | Path, series_list: list[FrequencySeries], fits: dict[int, TrendFit]
) -> None:
    """CSV report: parameters, MAPE, per-quarter actual and fitted shares, forecast."""
    series_by_id = {s.topic_id: s for s in series_list}
    n = max((s.n_quarters for s in series_list), default=0)
    header = (
        ["topic_id", "k", "m", "changepoints", "delta", "gamma",
         "beta_q1", "beta_q2", "beta_q3", "beta_q4", "mape", "forecast"]
        + [f"actual_q{i}" for i in range(1, n + 1)]
        + [f"fitted_q{i}" for i in range(1, n + 1)]
    )
    lines = [",".join(header)]
    for topic_id in sorted(fits):
        fit = fits[topic_id]
        s = series_by_id[topic_id]
        row = [
            str(topic_id), repr(float(fit.k)), repr(float(fit.m)),
            ";".join(str(c) for c in fit.changepoints),
            ";".join(repr(float(d)) for d in fit.delta),
            ";".join(repr(float(g)) for g in fit.gamma),
            *(repr(float(b)) for b in fit.beta),
            repr(float(fit.mape)), repr(float(fit.forecast)),
            *(repr(float(v)) for v in s.f),
            *(repr(float(v)) for v in fit.fitted),
        ]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

#!/usr/bin/env python3
"""From topic forecasts to clamped training weights.

Prepares one rolling cell on the synthetic benchmark, then shows how each
topic's forecast share relates to its historical share and how the raw
ratio is clamped into [theta_lower, theta_upper].  Topics filtered by MAPE
keep weight 1.

Run:  python3 demos/forecast_reweighting.py
"""

from collections import Counter

from trendweight.clustering import ClusteringConfig
from trendweight.pipeline import prepare_cell
from trendweight.synthetic import default_spec, generate_synthetic
from trendweight.trend import TrendConfig
from trendweight.weights import ReweightConfig, forecast_weights

TARGET = 18  # 2020Q2: the periodic topic's peak quarter

corpus = generate_synthetic(default_spec(seed=0))
cell = prepare_cell(corpus, TARGET, seed=0,
                    clustering_config=ClusteringConfig(theta_sim=0.5),
                    trend_config=TrendConfig())
config = ReweightConfig(theta_mape=0.8, theta_lower=0.3, theta_upper=2.0)
assignments = forecast_weights(cell.fits, cell.series, cell.membership, config)

total_hist = sum(s.raw_counts.sum() for s in cell.series)
forecast_total = sum(max(0.0, f.forecast) for f in cell.fits.values())
weight_of = {}
for a in assignments:
    if a.topic_id is not None and a.topic_id not in weight_of:
        weight_of[a.topic_id] = (a.raw_ratio, a.weight)

print(f"target quarter {TARGET} (Q{cell.target_quarter_of_year}); "
      f"{len(cell.series)} retained topics\n")
print("topic  planted    hist_share  fcast_share  raw_ratio  weight   mape")
for s in cell.series:
    fit = cell.fits.get(s.topic_id)
    if fit is None:
        continue
    planted = Counter(m.split("q")[0] for m in cell.clusters[s.topic_id].member_ids).most_common(1)[0][0]
    hist = s.raw_counts.sum() / total_hist
    fshare = max(0.0, fit.forecast) / forecast_total if forecast_total else 0.0
    ratio, weight = weight_of.get(s.topic_id, (None, 1.0))
    ratio_str = f"{ratio:9.3f}" if ratio is not None else "  (mape-cut)"
    print(f"{s.topic_id:5d}  {planted:9s}  {hist:10.3f}  {fshare:11.3f}  {ratio_str}  {weight:6.3f}  {fit.mape:5.3f}")

n_boosted = sum(1 for a in assignments if a.weight > 1)
n_cut = sum(1 for a in assignments if a.weight < 1)
print(f"\n{len(assignments)} weighted instances: {n_boosted} up-weighted, {n_cut} down-weighted")

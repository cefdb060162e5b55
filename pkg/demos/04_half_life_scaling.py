"""
How fast does the tree forget?

Trees are built on rolling windows. For each starting window the fraction of
its edges still present k steps later is tracked, and the half-life is where
that fraction first reaches one half. Longer windows give smoother trees and
longer half-lives; the trend is summarised by a line through the origin.
"""

from corrtax.dynamics import (
    WindowPlan,
    edge_survival,
    half_life_scaling,
    rolling_trees,
    scaling_plot_data,
    tree_half_life,
)
from corrtax.panel import log_returns
from corrtax.synth import SectorConfig, generate_sector_market

cfg = SectorConfig([("p", 4, 0.3), ("q", 4, 0.3), ("r", 4, 0.3)], 400, seed=12)
returns = log_returns(generate_sector_market(cfg))

trees = rolling_trees(returns, WindowPlan(20, 2))
curve = edge_survival(trees)
print("survival from the first window:", [round(float(f), 2) for f in curve.fraction[:10]])
print("half-life (weeks):", tree_half_life(curve, step_duration=2.0).half_life)

result = half_life_scaling(returns, [8, 13, 20, 26, 39, 52], step=2)
print(scaling_plot_data(result))

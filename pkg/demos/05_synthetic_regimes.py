"""
Two qualitative regimes from the built-in generators.

A sector market has positive correlations within groups. A competitive market
shares a fixed total among artists, so one artist's gain is another's loss
and negative correlations dominate.
"""

import numpy as np

from corrtax.corrnet import census, correlation_matrix
from corrtax.panel import log_returns
from corrtax.synth import CompetitionConfig, SectorConfig, generate_competitive_market, generate_sector_market

for loading in (0.0, 0.3, 1.0):
    cfg = SectorConfig([("a", 5, loading), ("b", 5, loading)], 500, seed=1)
    print(f"sector loading {loading}:", census(correlation_matrix(log_returns(generate_sector_market(cfg)))).as_dict())

# churn scales the size of the weekly reallocation; the signs barely move
for churn in (0.05, 0.1, 0.5):
    cfg = CompetitionConfig(10, 500, seed=2010, churn=churn)
    corr = correlation_matrix(log_returns(generate_competitive_market(cfg)))
    mean = corr.rho[np.triu_indices(10, 1)].mean()
    print(f"competition churn {churn}: {census(corr).as_dict()}, mean rho {mean:.3f}")

# fewer competitors means each one's loss is felt more by the others
for n in (2, 5, 20):
    cfg = CompetitionConfig(n, 500, seed=2010)
    corr = correlation_matrix(log_returns(generate_competitive_market(cfg)))
    print(f"{n} competitors: mean rho {corr.rho[np.triu_indices(n, 1)].mean():.3f}")

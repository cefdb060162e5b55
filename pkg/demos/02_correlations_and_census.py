"""
Pairwise correlations, the distance metric, and the level census.

Thirty simulated assets compete for a fixed pool of sales, so most pairs end
up anti-correlated. The census splits the 435 pairs into strong, weak and
negative, and the top pairs are listed with their distances.
"""

import numpy as np

from corrtax.corrnet import census, correlation_matrix, distance_matrix, top_pairs
from corrtax.panel import log_returns
from corrtax.synth import CompetitionConfig, generate_competitive_market

panel = generate_competitive_market(CompetitionConfig(30, 300, seed=2010))
corr = correlation_matrix(log_returns(panel))
dist = distance_matrix(corr)

result = census(corr)
print("census:", result.as_dict())

for pair in top_pairs(corr, 5):
    print(f"{pair.rho:.2f}  {pair.first} – {pair.second}  (d = {pair.distance:.2f})")

upper = dist.d[np.triu_indices(dist.n_assets, 1)]
print(f"distances span [{upper.min():.3f}, {upper.max():.3f}] inside [0, 2]")

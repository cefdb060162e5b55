"""
Minimum spanning tree, subdominant ultrametric, and exports.

Two sectors of five assets each are driven by their own common factor. The
spanning tree keeps each sector connected, and the maximum edge along tree
paths reproduces the cophenetic distances of single linkage.
"""

import numpy as np

from corrtax.corrnet import correlation_matrix, distance_matrix
from corrtax.panel import log_returns
from corrtax.synth import SectorConfig, generate_sector_market
from corrtax.taxonomy import (
    cophenetic,
    export_dot,
    export_newick,
    minimum_spanning_tree,
    parse_newick,
    single_linkage,
    subdominant_ultrametric,
)

cfg = SectorConfig([("rap", 5, 1.0), ("rock", 5, 1.0)], 500, seed=3, noise_sd=0.1)
dist = distance_matrix(correlation_matrix(log_returns(generate_sector_market(cfg))))

tree = minimum_spanning_tree(dist)
for edge in tree.edges:
    print(f"{tree.assets[edge.i]:>8} -- {tree.assets[edge.j]:<8} {edge.weight:.4f}")
print(f"total weight {tree.total_weight:.4f}")

dendro = single_linkage(dist)
du = subdominant_ultrametric(tree).du
print("ultrametric matches cophenetic:", np.array_equal(du, cophenetic(dendro).du))

newick = export_newick(dendro)
print(newick)
back = parse_newick(newick)
order = [dist.assets.index(a) for a in back.assets]
print("newick round trip error:", np.abs(back.du - du[np.ix_(order, order)]).max())

print(export_dot(tree))

"""
The decoding graph of a rotated surface code
============================================

Build the graph for a small code, look at how vertices are numbered and
check the closed-form counts.
"""

import numpy as np

from dufsim import GraphConfig, build_decoding_graph, logical_cut

g = build_decoding_graph(GraphConfig(d=5, rounds=3))
print(g)

# real ids run row-major from the bottom-left corner, one layer per round
per_round = g.config.ancillas_per_round
for v in range(1, per_round + 1):
    print(v, "row", g.vertex_row[v - 1], "col", g.vertex_col[v - 1],
          "neighbours", g.adjacent_vertices(v))

# (d+1)(d-1)/2 ancillas per round, d(d-2) spatial and 2d boundary edges
d, r = g.config.d, g.config.rounds
print(g.kind_counts())
print("expected", dict(spatial=d * (d - 2) * r, temporal=(d * d - 1) // 2 * (r - 1),
                       boundary=2 * d * r))

# every boundary vertex hangs off a single edge
print("boundary degrees", set(g.degree(b) for b in g.boundary_ids))

# the logical cut: left-side boundary edges of every round
cut = logical_cut(g)
print(len(cut), "cut edges; columns", np.unique(g.vertex_col[g.edge_v[cut]]))

# the JSON dump is what `dufsim decode --dump-graph` writes
print(g.dumps()[:200], "...")

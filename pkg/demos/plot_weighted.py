"""
Weighted edges and latency
==========================

Draw per-edge error probabilities, quantize them to integer weights in
[2, w_max] and watch the mean cycle count as w_max grows.
"""

import numpy as np

from dufsim import (ExperimentConfig, GraphConfig, build_decoding_graph, quantize_weights,
                    run_experiment, sample_weighted_probabilities)

base = build_decoding_graph(GraphConfig(d=13))
p = sample_weighted_probabilities(base, mean=0.001, stddev=0.0005, rng_seed=0)
print("p range", p.min(), p.max())
for w_max in (2, 4, 8, 16):
    w = quantize_weights(p, w_max)
    print(w_max, np.bincount(w)[2:])

# heavier edges take more growth iterations to fill
for w_max in (2, 4, 8, 16):
    s = run_experiment(ExperimentConfig(d=13, trials=1000, weighted=True, w_max=w_max))
    print(f"w_max={w_max:2d} mean cycles={s.mean_cycles:.2f} "
          f"mean iterations={s.growth_iterations.mean():.2f}")

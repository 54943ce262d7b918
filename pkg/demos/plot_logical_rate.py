"""
Logical failure rate against physical error rate
================================================

A coarse accuracy check of the serial decoder: below the crossover a larger
code fails less often, above it more often.
"""

from dufsim import ExperimentConfig, run_experiment

TRIALS = 5000
ps = [0.005, 0.01, 0.015, 0.02, 0.025, 0.03]
print("p      " + "  ".join(f"d={d}" for d in (3, 5, 7)))
for p in ps:
    rates = [run_experiment(ExperimentConfig(d=d, p=p, trials=TRIALS, mode="serial")).logical_rate
             for d in (3, 5, 7)]
    print(f"{p:<6} " + "  ".join(f"{r:.4f}" for r in rates))

"""
Decoding time per round shrinks with distance
=============================================

Average simulated cycles divided by the number of rounds, for growing code
distance at a fixed physical error rate. The numbers are cycle counts of the
model, not hardware nanoseconds; the trend is the point.
"""

from dufsim import ExperimentConfig, format_report, sweep

TRIALS = 2000  # raise for smoother numbers

configs = [ExperimentConfig(d=d, p=0.001, trials=TRIALS, seed=1) for d in (5, 9, 13, 17, 21)]
stats = sweep(configs)
print(format_report(stats, "csv"))

for s in stats:
    print(f"d={s.config.d:2d}  cycles/round={s.mean_cycles / s.config.rounds:.3f}  "
          f"<=2 iterations: {s.fraction_iterations_at_most(2):.3f}")

# %%
# The cycle distribution has a long tail; the histogram is emitted as data.
tail = stats[-1]
print(tail.percentiles())
print(sorted(tail.cycle_histogram().items())[:10])

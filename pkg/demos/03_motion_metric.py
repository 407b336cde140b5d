"""The motion-adaption metric on its own.

A quadratic captures the smooth part of a speed profile over the crossing;
the residual spread is what is left after any gentle, planned speed change.
Stop-and-go behavior blows the residual up, steady walking does not.
"""

import numpy as np

from pvimine import classify, dataset_threshold, fit_quadratic

t = np.arange(0, 6, 0.04)

steady = 1.4 + 0.005 * np.sin(2 * np.pi * t / 3.0)
yielding = np.interp(t, [0, 2.0, 3.0, 4.0, 6.0], [1.5, 1.5, 0.0, 1.5, 1.5])

for name, v in [("steady walk", steady), ("stop and resume", yielding)]:
    fit = fit_quadratic(t, v)
    label = classify(fit, threshold=0.04).label
    print(f"{name:16s} beta {np.round(fit.beta, 3)} "
          f"residual_std {fit.residual_std:.4f} m/s -> {label}")

# with a whole dataset the threshold can be taken from the residual
# distribution instead of being fixed
stds = np.abs(np.random.default_rng(0).normal(0.01, 0.008, 500))
print(f"95th-percentile threshold over 500 crossings: "
      f"{dataset_threshold(stds, 0.95):.4f} m/s")

# %% [markdown]
# # Calibrating an overconfident classifier
#
# Two Gaussian classes `N(-2, 2)` and `N(2, 2)` with equal priors have the
# exact log posterior ratio `x`. A logistic classifier with slope 2 is
# therefore twice as confident as it should be; temperature scaling
# should find `T = 2`.

# %%
import numpy as np

from priorshift import (CALIBRATED, OVERCONFIDENT, GaussianPair,
                        apply_calibration, calibration_nll,
                        classifier_predictions, fit_bcts, fit_temperature,
                        generate_dataset)

x, y = generate_dataset(GaussianPair(), [0.5, 0.5], 50_000, seed=0)

for name, clf in (("calibrated", CALIBRATED), ("overconfident", OVERCONFIDENT)):
    _, z = classifier_predictions(clf, x)
    ts = fit_temperature(z, y)
    bcts = fit_bcts(z, y)
    print(f"{name:14s} TS T={ts.temperature:.3f}   BCTS T={bcts.temperature:.3f} b={np.round(bcts.biases, 3)}")
    print(f"{'':14s} NLL {calibration_nll(z, y, 1.0):.4f} -> {calibration_nll(z, y, bcts.temperature, bcts.biases):.4f}")

# %% [markdown]
# Biases matter when the logits carry a constant offset, for example a
# classifier whose intercept is wrong. BCTS absorbs the offset in `b`,
# while TS can only rescale.

# %%
_, z = classifier_predictions(CALIBRATED, x)
shifted = z.copy()
shifted[:, 1] += 1.0
ts, bcts = fit_temperature(shifted, y), fit_bcts(shifted, y)
print("TS   NLL", calibration_nll(shifted, y, ts.temperature))
print("BCTS NLL", calibration_nll(shifted, y, bcts.temperature, bcts.biases), "b =", np.round(bcts.biases, 3))

p = apply_calibration(shifted[:5], bcts)
print(np.round(p, 3))

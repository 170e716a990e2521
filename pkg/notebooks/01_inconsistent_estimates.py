# %% [markdown]
# # When matrix inversion leaves the simplex
#
# A classifier with 80% accuracy on both classes has the confusion matrix
# below. Suppose every test sample is assigned to class 0. Solving
# `C p = p(D)` then gives a negative prior for class 1, while the
# constrained likelihood estimate stays a valid distribution.

# %%
import numpy as np

from priorshift import (ConfusionMatrix, adapt_predictions_ratio,
                        cm_log_likelihood, estimate_priors_cm_map,
                        estimate_priors_cm_mle, estimate_priors_inversion,
                        estimate_ratio_bbse, DirichletHyperPrior)

cm = ConfusionMatrix([[0.8, 0.2], [0.2, 0.8]])
rates = np.array([1.0, 0.0])

print("inversion:", estimate_priors_inversion(cm, rates))

# %% [markdown]
# The likelihood of the observed decision counts is maximized over the
# simplex instead. With 1000 decisions for class 0 the optimum sits on
# the boundary.

# %%
counts = np.array([1000, 0])
p, report = estimate_priors_cm_mle(cm, counts)
print("cm-l:", p, report.termination, f"{len(report.trace)} iterations")

grid = np.linspace(0, 1, 11)
for g in grid[::2]:
    print(f"P0={g:.1f}  log-likelihood={cm_log_likelihood([g, 1 - g], cm, counts):10.3f}")

# %% [markdown]
# A Dirichlet hyper-prior pulls the estimate away from the boundary.

# %%
for alpha in (1.0, 3.0, 30.0):
    p_map, _ = estimate_priors_cm_map(cm, counts, DirichletHyperPrior(alpha))
    print(f"alpha={alpha:5.1f}  cm-m={np.round(p_map, 4)}")

# %% [markdown]
# Ratio estimation through the joint confusion matrix has the same
# problem. A negative weight cannot be used to reweight posteriors, so
# adaptation clamps it and warns.

# %%
joint = ConfusionMatrix([[0.4, 0.1], [0.1, 0.4]], form="joint")
w = estimate_ratio_bbse(joint, rates)
print("bbse weights:", w)
print(adapt_predictions_ratio([[0.5, 0.5], [0.3, 0.7]], w))

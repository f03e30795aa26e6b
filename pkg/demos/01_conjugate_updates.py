"""Watch a Beta posterior sharpen as evidence for one level arrives.

Each categorical level starts at a prior centred on the global positive rate.
Observations shift the mean toward the level's own rate and shrink the variance,
so rare levels stay close to the global rate while frequent ones speak for themselves.
"""

import numpy as np

from cbm_encoding import beta_moments, beta_prior_from_target, beta_update

rng = np.random.default_rng(0)
y_all = (rng.random(10_000) < 0.3).astype(int)
prior = beta_prior_from_target(y_all)
print(f"global rate {y_all.mean():.3f} -> prior Beta({prior.alpha:.3f}, {prior.beta:.3f})")

level_rate = 0.8
seen = (rng.random(200) < level_rate).astype(int)
print(f"\n{'rows':>5} {'mean':>8} {'std':>8}")
for n in (0, 1, 2, 5, 10, 50, 200):
    mean, var = beta_moments(beta_update(prior, seen[:n]), 2)
    print(f"{n:>5} {mean:8.4f} {np.sqrt(var):8.4f}")

# Folding one observation at a time lands on the same posterior.
step = prior
for v in seen:
    step = beta_update(step, [v])
batch = beta_update(prior, seen)
print(f"\nbatch {batch}\nfolded {step}")

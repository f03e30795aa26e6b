"""Fit an encoder on a small lead-scoring table, save it, and score new rows.

Three categorical columns become one posterior mean each; the two numeric
columns pass through. Levels never seen at fit time get the prior's moments.
"""

import tempfile
from pathlib import Path

import numpy as np

import cbm_encoding as cbm
from cbm_encoding import Dataset, TaskKind

rng = np.random.default_rng(1)
n = 2_000
source = rng.choice(["web", "referral", "event", "partner"], n)
industry = np.array([f"ind{k}" for k in rng.integers(0, 60, n)])
region = np.array([f"r{k}" for k in rng.integers(0, 8, n)])
lift = {"web": -0.5, "referral": 1.0, "event": 0.3, "partner": 0.6}
logit = -1 + np.vectorize(lift.get)(source) + 0.05 * (np.char.lstrip(industry, "ind").astype(int) - 30)
y = (rng.random(n) < 1 / (1 + np.exp(-logit))).astype(int)

train = Dataset.from_columns(
    {"source": source, "industry": industry, "region": region},
    {"employees": rng.lognormal(4, 1, n), "visits": rng.poisson(3, n).astype(float)},
    y, TaskKind.binary())

enc, z = cbm.fit_transform(train, q=2, noise_sigma=0.01, seed=0)
print("encoded width:", enc.width)
print("columns:", enc.column_labels)
for lvl, moments in sorted(enc.column("source").level_to_moments.items()):
    print(f"  source={lvl:<9} mean={moments[0]:.3f} var={moments[1]:.5f}")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "leads.cbm"
    enc.save(path)
    print(f"\nmodel file: {path.stat().st_size} bytes")
    loaded = cbm.load(path)

new = Dataset.from_columns(
    {"source": ["referral", "podcast"], "industry": ["ind59", "ind999"], "region": ["r1", "r1"]},
    {"employees": [120.0, 8.0], "visits": [4.0, 1.0]})
print("\nscored rows:")
print(np.round(loaded.transform(new).values, 4))

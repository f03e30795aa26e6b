"""Training cost and accuracy as rows and cardinality grow together.

Cardinality is a tenth of the row count. The Beta encoding stays one column
wide; dense one-hot grows with every new level. Pass ``--plot`` to draw the
curves with matplotlib if it is installed.
"""

import sys

from cbm_encoding.bench import ScalingConfig, run_scaling

sizes = tuple(range(2_000, 20_001, 2_000))
rows = run_scaling(ScalingConfig(sizes=sizes))

print(f"{'n':>6} {'encoder':>7} {'width':>6} {'time s':>8} {'acc':>7} {'acc ma5':>8}")
for r in rows:
    print(f"{r['n_rows']:>6} {r['encoder']:>7} {r['width']:>6} "
          f"{r['train_time']:8.3f} {r['accuracy']:7.4f} {r['accuracy_ma']:8.4f}")

if "--plot" in sys.argv:
    import matplotlib.pyplot as plt

    fig, (ax_t, ax_a) = plt.subplots(1, 2, figsize=(10, 4))
    for name in ("beta", "onehot"):
        mine = [r for r in rows if r["encoder"] == name]
        n = [r["n_rows"] for r in mine]
        ax_t.plot(n, [r["train_time_ma"] for r in mine], label=name)
        ax_a.plot(n, [r["accuracy_ma"] for r in mine], label=name)
    ax_t.set(xlabel="rows", ylabel="training time (s, MA5)")
    ax_a.set(xlabel="rows", ylabel="held-out accuracy (MA5)")
    ax_a.legend()
    fig.tight_layout()
    plt.show()

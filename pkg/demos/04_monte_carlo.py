# Bias-variance trade-off in the truncation order J.
#
# Run from the repository root: python demos/04_monte_carlo.py [outdir]
# %%
import sys
from pathlib import Path

import numpy as np

from curvespec.estimator import emse_curve
from curvespec.harness import ExperimentConfig, run_estimation_experiment
from curvespec.svgplot import Series, save

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)

base = {
    "truth": {"template": "five-lobe"},
    "noise": {"model": "p-order", "alpha": 1.0, "beta": 10.0, "p": 2, "J_max": 10},
    "n": 125, "T": 9, "replications": 100, "seed": 11,
}

# %% simulated mean ISE for each order against the formula
orders = list(range(0, 11))
sim = []
for J in orders:
    rep = run_estimation_experiment(ExperimentConfig.from_dict({**base, "J": J}))
    sim.append(rep.summary()["mean_ise"])
cfg = ExperimentConfig.from_dict({**base, "J": 10})
theory = emse_curve(cfg.truth, cfg.spectrum, cfg.T, orders)
for J, s, t in zip(orders, sim, theory["total"]):
    print(f"J={J:2d}  simulated {s:8.4f}  formula {t:8.4f}")
print("best order:", orders[int(np.argmin(theory["total"]))])

# %%
save(out / "04_monte_carlo.svg",
     [Series(orders, np.log10(theory["total"]), "formula"),
      Series(orders, np.log10(sim), "simulated", style="cross")],
     title="Expected ISE against truncation order", xlabel="J", ylabel="log10 ISE")
print("wrote", out / "04_monte_carlo.svg")

# Estimated noise variances per frequency, with their chi-square spread.
#
# Run from the repository root: python demos/02_noise_variances.py [outdir]
# %%
import sys
from pathlib import Path

import numpy as np

from curvespec.harness import ExperimentConfig, run_estimation_experiment
from curvespec.svgplot import Series, save

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)

# %% 100 contours per replication, 50 replications
cfg = ExperimentConfig.from_dict({
    "truth": {"template": "five-lobe"},
    "noise": {"model": "p-order", "alpha": 1.0, "beta": 10.0, "p": 2, "J_max": 10},
    "n": 125, "J": 10, "T": 99, "replications": 50, "seed": 7,
})
rep = run_estimation_experiment(cfg)
summ = rep.summary()

# %% the first replication alone, then the average over replications
j = np.arange(cfg.J + 1)
first = rep.records["sigma2_hat"][0]
for jj, a, b in zip(j, first, rep.theory["sigma2"]):
    print(f"j={jj:2d}  estimate {a:.5f}  true {b:.5f}")
print("chi-square means:", np.round(summ["chi2_mean"], 1), "expected", summ["chi2_dof"])

# %% log scale makes the decay visible
save(
    out / "02_noise_variances.svg",
    [Series(j, np.log10(first), "estimate (log10)", style="cross"),
     Series(j, np.log10(rep.theory["sigma2"]), "true (log10)", style="circle")],
    title="Noise variances", xlabel="j", ylabel="log10 sigma2_j",
)
print("wrote", out / "02_noise_variances.svg")

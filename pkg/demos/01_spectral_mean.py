# Spectral mean of a handful of noisy contours.
#
# Run from the repository root: python demos/01_spectral_mean.py [outdir]
# %%
import sys
from pathlib import Path

import numpy as np

from curvespec import ContourStack, estimate_curve, fit, make_grid, p_order_spectrum, synthesize
from curvespec.harness import template_coeffs
from curvespec.noise import draw_amplitudes, evaluate_series
from curvespec.svgplot import Series, save

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)
rng = np.random.default_rng(1)

# %% a five-lobed curve observed 20 times on the 125-point grid
truth = template_coeffs("five-lobe")
grid = make_grid(125)
spec = p_order_spectrum(1.0, 10.0, 2, 10)
A, B = draw_amplitudes(spec, rng, 20)
stack = ContourStack(grid, synthesize(truth, grid.theta) + evaluate_series(A, B, grid.theta))

# %% average the Fourier coefficients up to order 10
est = fit(stack, 10)
theta = np.linspace(-np.pi, np.pi, 400)
curve = estimate_curve(est, theta)
true_curve = synthesize(truth, theta)
print("max pointwise error:", np.abs(curve - true_curve).max())

# %% plot a few raw contours against the estimate
series = [Series(*np.vstack([c, c[:1]]).T, style="line", dashed=True) for c in stack.points[:3]]
series += [Series(*true_curve.T, "truth"), Series(*curve.T, "spectral mean")]
save(out / "01_spectral_mean.svg", series, title="Spectral mean of 20 contours", equal_aspect=True)
print("wrote", out / "01_spectral_mean.svg")

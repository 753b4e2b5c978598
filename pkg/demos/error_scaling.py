"""Estimation error against the theoretical scale and against a plain
nuclear-norm baseline.

Two experiments side by side:
  1. error versus upsilon = 2 sqrt(s) sqrt(log(m^2 p) / T), which the error
     should track linearly as the sample size varies;
  2. the graph-regularized Tucker fit against the raw nuclear-norm estimate
     on factors with smooth row structure (Laplacian eigenvectors), where
     the graph penalty has signal to exploit.

Run with: python3 demos/error_scaling.py   (about a minute)
"""

import numpy as np

from tuckervar import ScenarioSpec, StdgrConfig, error_curve
from tuckervar.benchmark import curve_csv_lines

# -- error versus the theoretical scale ------------------------------------
m, p, s = 16, 4, 2
targets = (0.35, 0.45, 0.55)
sizes = tuple(int(round(4 * s * np.log(m * m * p) / u**2)) for u in targets)
spec = ScenarioSpec(
    m=m, p=p, ranks=(2, 2, 2), superdiag=(2.0, 2.0),
    noise_scale=1.0, seeds=(0, 1, 2), sample_sizes=sizes,
)
rows = [r for r in error_curve(spec, StdgrConfig(c=2.0, ranks=(2, 2, 2)))
        if r.method == "graph_tucker"]
print("error versus the theoretical scale:")
for r in sorted(rows, key=lambda r: r.upsilon):
    print(f"  T={r.n_samples:4d}  upsilon={r.upsilon:.3f}  error={r.mean_error:.4f}")
xs = [r.upsilon for r in rows]
ys = [r.mean_error for r in rows]
print("  pearson correlation: %.3f" % np.corrcoef(xs, ys)[0, 1])

# -- graph-regularized fit versus the nuclear-norm baseline ----------------
spec2 = ScenarioSpec(
    m=20, p=4, ranks=(3, 3, 3), superdiag=(2.0, 2.0, 2.0),
    factor_style="laplacian-eigenvectors", noise_scale=0.5,
    seeds=(0, 1, 2), sample_sizes=(200, 400),
)
rows2 = error_curve(spec2, StdgrConfig(c=2.0, ranks=(3, 3, 3)))
print("\nmethod comparison (CSV schema used by the bench command):")
for line in curve_csv_lines(rows2):
    print(" ", line)

"""Mini oracle-complexity sweep: interpolation noise vs bounded variance.

Runs perturbed SGD on the strong-growth arm and on the additive-noise
control arm over a small accuracy grid, writes the trace/summary CSVs and a
log-log SVG, and fits the complexity exponents.  A smaller sibling of the
full benchmark in the acceptance suite.
"""

import tempfile
from pathlib import Path

from saddlescape import ExperimentSpec, fit_complexity_slope, run_experiment

GRID = (0.2, 0.1, 0.05)
SEEDS = (0, 1, 2)
out = Path(tempfile.mkdtemp(prefix="saddlescape_sweep_"))

sgc_arm = ExperimentSpec(
    problem=dict(family="multiplicative_saddle", dim=10, neg_count=1,
                 rho=2.0, quartic_coeff=0.008),
    algorithm="psgd", mode="first_order", sgc_arm=True,
    epsilon_grid=GRID, seeds=SEEDS, out_dir=str(out / "sgc"),
    max_steps=5000, c=0.01, stop_after_certified=True,
)
noise_arm = ExperimentSpec(
    problem=dict(family="multiplicative_saddle", dim=10, neg_count=1,
                 rho=1.0, quartic_coeff=0.008, sigma=0.5),
    algorithm="psgd", mode="first_order", sgc_arm=False,
    epsilon_grid=GRID, seeds=SEEDS, out_dir=str(out / "nosgc"),
    max_steps=5000, c=0.01, stop_after_certified=True,
)

rows_sgc = run_experiment(sgc_arm)
rows_add = run_experiment(noise_arm)

print(f"{'eps':>6} {'calls (strong growth)':>22} {'calls (bounded var)':>20} {'ratio':>7}")
for eps in GRID:
    a = next(r for r in rows_sgc if r.epsilon == eps).median_calls_to_first_certified
    b = next(r for r in rows_add if r.epsilon == eps).median_calls_to_first_certified
    print(f"{eps:6.2f} {a:22d} {b:20d} {b / a:7.1f}")

slope_sgc, se1 = fit_complexity_slope(rows_sgc)
slope_add, se2 = fit_complexity_slope(rows_add)
print(f"\nfitted log-log slope, strong-growth arm:   {slope_sgc:.2f} +/- {se1:.2f}")
print(f"fitted log-log slope, bounded-variance arm: {slope_add:.2f} +/- {se2:.2f}")
print(f"\ntraces, summaries, and SVG plots under: {out}")

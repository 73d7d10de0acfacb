"""
Hunting for spurious minima
===========================

Run a small fleet of gradient descents with n = k students from Xavier
initialization, group the limits up to permutation symmetry and describe
each class.
"""
import numpy as np

from relu_landscape import model
from relu_landscape.harness.experiments import describe_minimum, hunt_minima

k = 10
runs, catalog = hunt_minima(k, runs=20, seed=0, step_scale=5.0, max_iters=200_000)
print(f"{sum(r['termination'] == 'converged' for r in runs)}/{len(runs)} runs converged, "
      f"{len(catalog)} classes")
V = model.standard_teacher(k)
for idx, (W, mult) in enumerate(zip(catalog.representatives, catalog.multiplicities)):
    info = describe_minimum(W, V)
    print(f"class {idx}: seen {mult}x  F {info['F']:.3e}  norm sum {info['norm_sum']:.4f}  "
          f"min Hessian eig {info['min_hessian_eig']:.2e}  "
          f"min H' eig {np.min(info['h_prime_min_eigs']):+.3f}")

"""
Perturbed gradient descent near a balanced split
================================================

Estimate the local curvature and smoothness constants, derive the step,
noise and iteration count from the convergence recipe, and compare a short
run of the recipe with a larger practical step.
"""
import numpy as np

from relu_landscape import model, optimize, probes
from relu_landscape.harness.experiments import ball_init, estimate_constants

k, m, d, eps, delta = 2, 2, 20, 0.1, 0.01
V = model.standard_teacher(k, d)
base = probes.balanced_base(V, m)
lam, L = estimate_constants(V, base, m, eps, samples=50, seed=0)
rec = optimize.pgd_recipe(lam, L, delta, n=k * m)
print(f"lambda {lam:.3f}  L {L:.3f}  step {rec.step_size:.2e}  noise {rec.noise_level:.2e}  "
      f"T {rec.iters:.2e}")

W0 = ball_init(base, eps, seed=1)
print("initial squared distance", np.sum((W0 - base) ** 2))
for label, step in (("recipe", rec.step_size), ("practical", 1.0 / L)):
    out = optimize.perturbed_gradient_descent(
        W0, V, optimize.PGDConfig(step, rec.noise_level, 2000, seed=1), target=base)
    print(f"{label:9s}: squared distance after 2000 steps {np.sum((out.params - base) ** 2):.3e}")

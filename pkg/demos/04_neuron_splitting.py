"""
Turning a spurious minimum into a saddle
========================================

One student fitting two teachers settles at a critical point with positive
loss.  Splitting that neuron into (alpha w, (1 - alpha) w) keeps the point
critical, and the block H'_ii predicts a direction of negative curvature.
"""
import numpy as np

from relu_landscape import model, splitting
from relu_landscape.optimize import GDConfig, gradient_descent

V = model.standard_teacher(2)
rec = gradient_descent(np.array([[0.3, 0.5]]), V, GDConfig(0.5, 100_000, 1e-13))
W = rec.params
print("critical point", W.ravel(), " F =", rec.final_F, " |grad| =", rec.final_grad_norm)
print("mean curvature of H'_00:", model.mean_curvatures(W, V)[0])

for alpha in (0.25, 0.5, 0.75):
    cert = splitting.certify_saddle(W, V, 0, alpha)
    print(f"alpha={alpha}: curvature {cert.quadratic_value:+.6f}  "
          f"predicted {cert.predicted_value:+.6f}  |grad| after split {cert.grad_norm_at_split:.1e}")

"""
Curvature around balanced splits
================================

Perturb the balanced m-split minimum (each teacher shared by m students
with weight 1/m) and compare lhs = D^T H D with the conjectured lower
bound.  Adversarial perturbations cancel inside every group and make lhs
far smaller than Gaussian ones.
"""
import numpy as np

from relu_landscape import model, probes

k = 5
V = model.standard_teacher(k)
for m in (2, 5):
    base = probes.balanced_base(V, m)
    for mode in ("gaussian", "adversarial"):
        rows = [probes.curvature_breakdown(
            V, m, probes.sample_orthogonal_neighborhood(base, 1.0, mode, seed=s, m=m))
            for s in range(50)]
        lhs = np.array([r.lhs for r in rows])
        margins = np.array([r.margin for r in rows])
        print(f"m={m} {mode:11s}: min lhs {lhs.min():.3e}  min margin {margins.min():.3e}")

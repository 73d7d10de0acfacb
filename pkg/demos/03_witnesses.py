"""
Non-convexity, OPSC and PL near global minima
=============================================

Two students sharing one teacher direction form a global minimum for any
positive weights summing to one.  Tilting both off the teacher exposes a
negative Hessian direction; tilting them in opposite directions shows the
curvature toward the minimum and the PL ratio both vanish as eps -> 0.
"""
import numpy as np

from relu_landscape import model, probes

V = model.standard_teacher(2)

print("non-convexity witness (alpha1 = alpha2 = 1/2)")
for eps in (1e-1, 1e-2, 1e-3):
    w = probes.nonconvexity_witness(V, 0.5, 0.5, eps)
    print(f"  eps={eps:.0e}: Hessian value {w.value:+.6e}  closed form {w.exact_value:+.6e}")

print("opposite tilt")
eps = np.array([1e-1, 1e-2, 1e-3, 1e-4])
opsc = [probes.opsc_witness(V, 0.5, 0.5, e).normalized_form for e in eps]
pl = [probes.pl_witness(V, 0.5, 0.5, e) for e in eps]
for e, o, p in zip(eps, opsc, pl):
    print(f"  eps={e:.0e}: OPSC form {o:.3e}  F {p.F:.3e}  |grad|^2 {p.grad_norm_sq:.3e}  "
          f"PL ratio {p.pl_ratio:.3e}")
print("  log-log slopes: OPSC %.2f, F %.2f, |grad|^2 %.2f" % (
    probes.loglog_slope(eps, opsc), probes.loglog_slope(eps, [p.F for p in pl]),
    probes.loglog_slope(eps, [p.grad_norm_sq for p in pl])))

"""
Closed-form loss versus Monte Carlo
===================================

The population loss of a two-layer ReLU network under Gaussian inputs has a
closed form built from the pairwise kernel f(w, v).  Here we evaluate it,
check it against a Monte Carlo estimate, and check the analytic gradient
and Hessian against finite differences.
"""
import numpy as np

from relu_landscape import kernels, model, oracle

# the pairwise kernel at a few reference configurations
e1, e2 = np.eye(2)
print("f(e1, e1) =", kernels.pair_f(e1, e1))
print("f(e1, e2) =", kernels.pair_f(e1, e2), " (1/2pi =", 1 / (2 * np.pi), ")")

# a random student against the standard teacher
rng = np.random.default_rng(0)
V = model.standard_teacher(3, 4)
W = rng.normal(size=(4, 4))
F = model.objective(W, V)
est = oracle.mc_objective(W, V, 1_000_000, seed=1)
print(f"closed form {F:.6f}  MC {est.mean:.6f} +- {est.stderr:.6f}")

# derivatives against central differences
print("gradient rel err:", oracle.relative_error(oracle.fd_gradient(W, V), model.gradient(W, V)))
print("Hessian rel err: ", oracle.relative_error(oracle.fd_hessian(W, V), model.hessian(W, V)))

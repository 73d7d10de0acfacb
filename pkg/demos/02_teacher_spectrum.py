"""
Hessian spectrum at the teacher
===============================

With as many students as teachers, the Hessian at W = V is positive
definite with smallest eigenvalue at least 1/4 - 1/(2 pi).
"""
import numpy as np

from relu_landscape import model, spectral

bound = 0.25 - 1 / (2 * np.pi)
for k in (2, 3, 5, 8):
    V = model.standard_teacher(k)
    rep = spectral.eig_symmetric(model.hessian(V, V))
    print(f"k={k}: min eig {rep.min_eigenvalue:.6f}  max eig {rep.max_eigenvalue:.4f}  "
          f"bound {bound:.6f}")

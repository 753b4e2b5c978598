"""Tour of the third-order tensor kernels: unfoldings, mode products,
Kronecker structure and Tucker reconstruction.

Run with: python3 demos/tensor_algebra.py
"""

import numpy as np

from tuckervar import TuckerFactors, fold, kronecker, mode_product, tucker_reconstruct, unfold

rng = np.random.default_rng(0)

# A small tensor whose entries encode their own index: X_{ijl} = i + 2(j-1) + 4(l-1).
t = np.arange(1.0, 9.0).reshape((2, 2, 2), order="F")
print("mode-1 unfolding (columns are mode-1 fibers):")
print(unfold(t, 1))
print("mode-3 unfolding:")
print(unfold(t, 3))

# Folding inverts unfolding exactly, for every mode.
for mode in (1, 2, 3):
    assert np.array_equal(fold(unfold(t, mode), mode, t.shape), t)
print("\nfold(unfold(t, k), k) == t for all modes")

# A mode product multiplies every fiber of that mode; on the unfolding it is
# an ordinary matrix product.
a = rng.standard_normal((3, 2))
y = mode_product(t, a, 1)
print("\nmode product consistency |unfold(t x1 A, 1) - A unfold(t,1)| =",
      np.max(np.abs(unfold(y, 1) - a @ unfold(t, 1))))

# Tucker reconstruction: a small core expanded by three orthonormal factors.
def orthonormal(n, r):
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return q

core = rng.standard_normal((2, 2, 2))
factors = TuckerFactors(core=core, a1=orthonormal(6, 2), a2=orthonormal(6, 2), a3=orthonormal(4, 2))
w = tucker_reconstruct(factors)
print("\nreconstructed tensor shape:", w.shape)

# With orthonormal factors the reconstruction preserves the core's energy,
# and its mode-1 unfolding factors through a Kronecker product.
print("norm preserved:", abs(np.linalg.norm(w) - np.linalg.norm(core)) < 1e-12)
lhs = unfold(w, 1)
rhs = factors.a1 @ unfold(core, 1) @ kronecker(factors.a3, factors.a2).T
print("mode-1 factorization error:", np.max(np.abs(lhs - rhs)))

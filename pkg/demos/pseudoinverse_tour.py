"""Tour of the spectral pseudoinverse helpers.

Builds a rank-deficient Gram matrix, inverts it on its column space, and
shows the pieces the estimators rely on: the eigendecomposition, the
Moore-Penrose conditions, and the pair of projectors.

Run:  python3 demos/pseudoinverse_tour.py
"""

import numpy as np

from mpshrink import pseudo_inverse, quad_form, sym_eigen

rng = np.random.default_rng(7)

# A 6x6 Gram matrix of rank 4: six points in a 4-dimensional column space.
y = rng.standard_normal((4, 6))
s = y.T @ y

dec = sym_eigen(s)
print("eigenvalues (descending):")
print(np.array2string(dec.eigenvalues, precision=4, suppress_small=True))

res = pseudo_inverse(s)
print(f"\ndetected rank: {res.rank} (cutoff {res.cutoff:.3e})")

# The four Penrose conditions, each of which should vanish.
pinv = res.pinv
conditions = {
    "S S+ S = S": s @ pinv @ s - s,
    "S+ S S+ = S+": pinv @ s @ pinv - pinv,
    "(S S+)' = S S+": (s @ pinv).T - s @ pinv,
    "(S+ S)' = S+ S": (pinv @ s).T - pinv @ s,
}
print("\nPenrose condition residuals:")
for label, resid in conditions.items():
    print(f"  {label:15s} {np.abs(resid).max():.3e}")

# projector decomposes any vector into a column-space part and a remainder
x = rng.standard_normal(6)
inside = res.projector @ x
outside = res.complement @ x
print("\nsplit of a random vector:")
print(f"  ||P x||  = {np.linalg.norm(inside):.4f}")
print(f"  ||Qc x|| = {np.linalg.norm(outside):.4f}")
print(f"  recombination error = {np.linalg.norm(inside + outside - x):.3e}")

# The quadratic form x' S+ x only sees the column-space part.
f_full = quad_form(x, pinv)
f_inside = quad_form(inside, pinv)
print(f"\nx' S+ x       = {f_full:.6f}")
print(f"(P x)' S+ P x = {f_inside:.6f}   (same thing)")

"""Shrinkage estimators on a singular covariance estimate.

Draws one observation and one rank-deficient Wishart matrix, then walks
through what each estimator does to the observation: how far it shrinks,
what happens with the positive-part modification, and how the same code
reduces to the classical formula once the matrix has full rank.

Run:  python3 demos/shrinkage_basics.py
"""

import numpy as np

from mpshrink import (
    JamesStein,
    PositivePartJS,
    RngStream,
    Usual,
    domination_bound,
    estimate,
    estimator_label,
    js_default_constant,
    sample_wishart,
)

p, n = 10, 5
rng = RngStream(42, 0).generator()

theta = np.zeros(p)
x = rng.standard_normal(p)
draw = sample_wishart(n, np.eye(p), rng)

a = js_default_constant(p, n)
print(f"p = {p}, n = {n}: rank of S is {min(n, p)}")
print(f"shrinkage constant a = {a} (admissible range is (0, {domination_bound(p, n)}))")

print(f"\n||x|| = {np.linalg.norm(x):.4f}")
for spec in (Usual(), JamesStein(a), PositivePartJS(a)):
    out = estimate(spec, x, draw.s)
    moved = np.linalg.norm(out.delta - x)
    print(
        f"  {estimator_label(spec):10s} shrink factor {out.shrink_factor:8.4f}"
        f"   ||delta - x|| = {moved:.4f}   F = {out.f_value:.4f}"
    )

# Positive-part differs from plain James-Stein only when F drops below a.
# Force that by shrinking x toward the column space boundary.
x_small = 0.05 * x
out_js = estimate(JamesStein(a), x_small, draw.s)
out_pp = estimate(PositivePartJS(a), x_small, draw.s)
print(f"\nwith a small observation (F = {out_js.f_value:.4f} < a = {a}):")
print(f"  js  shrink factor {out_js.shrink_factor:8.4f}  (overshoots past zero)")
print(f"  js+ shrink factor {out_pp.shrink_factor:8.4f}  (clamped)")

# Full rank: same estimate() call, now equal to the classical inverse form.
n_big = 25
draw_big = sample_wishart(n_big, np.eye(p), rng)
a_big = js_default_constant(p, n_big)
out = estimate(JamesStein(a_big), x, draw_big.s)
f_inv = float(x @ np.linalg.inv(draw_big.s) @ x)
classical = (1.0 - a_big / f_inv) * x
print(f"\nfull-rank check (n = {n_big} >= p = {p}):")
print(f"  ||delta - classical|| = {np.linalg.norm(out.delta - classical):.3e}")

"""Split a scalar integrand with convex y-averaged profiles into a separately
convex part plus a null-class remainder, and confirm the remainder
integrates to zero against arbitrary u.

Run: python3 demos/decomposition.py
"""

import numpy as np

from nonlocal_lsc import build_grid, decompose, evaluate, parse, random_grid_function
from nonlocal_lsc.analysis import PhiNonconvexError
from nonlocal_lsc.grid import Domain

unit = Domain.interval()
f = parse("w1^2 * (y1 - 1/4) + z1^2 * (x1 - 1/4)", domain=unit, symmetric="declared")
grid = build_grid(unit, [64])
W = np.linspace(-2.0, 2.0, 33)
dec = decompose(f, grid, W)
y = grid.nodes[:, 0]
print(f"f = {f.text}")
print("  f is not separately convex: d^2f/dw^2 = 2(y - 1/4) < 0 for y < 1/4")
print(f"  y-mean of gamma: {dec.mean_gamma.min():.6f} .. {dec.mean_gamma.max():.6f}")
err = np.abs(dec.g - (y[None, :, None] - 0.5) * W[None, None, :] ** 2).max()
print(f"  g(x, y, w) = (y - 1/2) w^2 recovered, max error {err:.2e}")
ft = dec.f_tilde_table()
err = np.abs(ft - (W[:, None] ** 2 / 4 + W[None, :] ** 2 / 4)[None, None]).max()
print(f"  f_tilde = w^2/4 + z^2/4 recovered, max error {err:.2e}")
print(f"  f_tilde separately convex: {dec.checks['separate_convexity']['status']}")

f0 = parse("(y1 - 1/2) * w1^2 + (x1 - 1/2) * z1^2")
vals = [evaluate(f0, random_grid_function(build_grid(unit, [128]), 1, seed=s, scale=3)).value
        for s in range(5)]
print(f"\nnull-class part g(x,y,w) + g(y,x,z): J(u) on 5 random u = "
      + ", ".join(f"{v:.1e}" for v in vals))

try:
    decompose(parse("-w1^2 - z1^2", domain=unit), grid, W)
except PhiNonconvexError as exc:
    print(f"\n-w^2 - z^2 has concave profiles, so no decomposition: {exc}")

"""An integrand growing faster than any product of p-th powers admits an
L^1-bounded u with divergent block sums; a well-behaved one is minimised by
projected gradient descent.

Run: python3 demos/blowup_and_minimize.py
"""

from nonlocal_lsc import (GridFunction, MinimizeConfig, build_grid, check_homogeneous_bound,
                          grad_check, homogeneous_witness, minimize, parse,
                          random_grid_function)
from nonlocal_lsc.grid import Domain

unit = Domain.interval()
f = parse("exp(w1 * z1)", domain=unit)
bound = check_homogeneous_bound(f, 1)
print(f"exp(wz) against |f| <= C (1 + |w|)(1 + |z|): {bound.status}")
print("  box maxima of the ratio: "
      + ", ".join(f"{m:.3g}" for m in bound.details["box_maxima"]))
res = homogeneous_witness(f, 1)
d = res.diagnostics
print(f"blow-up witness on {res.u.grid.size} cells, ||u||_1 = {d['norm']:.4f}")
for k, (J, inc) in enumerate(zip(d["truncated_J"], d["increments"]), 1):
    print(f"  blocks 1..{k}: J = {J:10.4f}   (+{inc:.4f})")

g = parse("(w1 - z1)^2 + (w1 - x1)^2 + (z1 - y1)^2", domain=unit)
grid = build_grid(unit, [64])
print(f"\nminimising {g.text}")
print(f"  gradient check: {grad_check(g, random_grid_function(grid, 1, seed=1)):.2e}")
r = minimize(g, GridFunction.constant(grid, 0.0))
print(f"  converged={r.converged} in {r.iters} iterations, J* = {r.J_star:.6f}")
r = minimize(g, GridFunction.constant(grid, 0.0), MinimizeConfig(box=0.25))
print(f"  with |u| <= 0.25: J* = {r.J_star:.6f}, max u = {r.u_star.values.max():.3f}")

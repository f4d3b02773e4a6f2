"""Checkerboards cover about a quarter of any product set, and fast
oscillation between +1 and -1 separates a concave-in-(w - z) integrand from
its convex counterpart.

Run: python3 demos/checkerboard_and_oscillation.py
"""

from nonlocal_lsc import (GridFunction, SequencePlan, build_grid, coverage_fraction,
                          lsc_probe, parse, wlsc_verdict)
from nonlocal_lsc.grid import Domain
from nonlocal_lsc.witness import UNIT_SQUARE

print("share of (0,1)^2 covered by S x S^c, counting grid 4096 per axis")
for a in range(2, 11):
    print(f"  delta = 2^-{a:<2}  fraction = {coverage_fraction(UNIT_SQUARE, 2.0**-a):.6f}")

disc = (UNIT_SQUARE, lambda p: (p[:, 0] - 0.5) ** 2 + (p[:, 1] - 0.5) ** 2 < 0.16)
print(f"  a disc instead of the square, delta = 2^-7: "
      f"{coverage_fraction(disc, 2.0**-7, resolution=1024):.4f}")

unit = Domain.interval()
grid = build_grid(unit, [512])
plan = SequencePlan.oscillation(0.5, GridFunction.constant(grid, 1.0),
                                GridFunction.constant(grid, -1.0))
print("\nu_k alternates +1 / -1 on stripes of width 1/(2k); weak-star limit 0")
for text in ("-(w1 - z1)^2", "(w1 - z1)^2"):
    f = parse(text, domain=unit)
    verdict = wlsc_verdict(f)
    rep = lsc_probe(f, plan, k_max=32)
    print(f"  f = {text:13}  sampled verdict: {verdict.verdict} via {verdict.criterion}; "
          f"J(u_k) -> {rep.liminf_estimate:+.4f} vs J(0) = {rep.J_limit:+.1f}: {rep.verdict}")

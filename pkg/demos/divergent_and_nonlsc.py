"""A w-free integrand whose functional is finite for constants yet has no
p-bound, and its symmetrised negative, which breaks lower semi-continuity
along u_k = 1/k.

Run: python3 demos/divergent_and_nonlsc.py
"""

from nonlocal_lsc import (BoundCertificate, GridFunction, SequencePlan, build_grid, builtin,
                          evaluate, lsc_probe, validate_p_bound_certificate)

f3 = builtin("example-3-divergent")
grid = build_grid(f3.domain, [512])
print("f(x, y, w, z) = step(z - x) step(1 - z) / z on (0, 1)")
for c in (0.25, 0.5, 1.0, 2.0):
    J = evaluate(f3, GridFunction.constant(grid, c)).value
    print(f"  J(psi = {c:4}) = {J:.6f}   (measure of the set where 0 < psi <= 1)")

# Any constant certificate fails as x -> 0, where int 1/z over [x, 1] blows up.
cert = BoundCertificate.constant(build_grid(f3.domain, [64]), 1.0, 1e4, 1e4, 1e4)
v = validate_p_bound_certificate(f3, cert)
print(f"\nconstant certificate (alpha = beta = C = 1e4): {v.status}")
print(f"  witness x = {v.witness['x'][0]:.3g}: |f| = {v.witness['abs_f']:.4g} > "
      f"bound {v.witness['bound']:.4g}")

f4 = builtin("example-4-nonlsc")
rep = lsc_probe(f4, SequencePlan.scalar_shrink(build_grid(f4.domain, [1024])), k_max=32)
print("\nsymmetrised negative: u_k = 1/k -> 0 strongly")
for k in (1, 2, 4, 8, 16, 32):
    print(f"  J(u_{k:<2}) = {rep.J_values[k - 1]: .5f}")
print(f"  J(0) = {rep.J_limit:.1f}; liminf estimate {rep.liminf_estimate:.4f}; "
      f"verdict {rep.verdict}, margin {rep.margin:.4f}")

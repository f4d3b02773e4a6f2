"""Discretised non-local functionals J(u) = int int f(x, y, u(x), u(y)) dx dy:
quadrature, growth and convexity checks, witness constructions, and minimisation."""

__version__ = "0.1.0"

from .grid import (Domain, Grid, GridFunction, InvalidDomainError, build_grid, lp_norm,
                   measure, p_function, random_grid_function)
from .integrand import (Integrand, IntegrandDeriv, PoleError, Symmetry, builtin,
                        builtin_names, check_pairwise_symmetry, differentiate, eval_point,
                        parse, symmetrize)
from .functional import FunctionalValue, PhiProfile, evaluate, gradient, phi_profile
from .verdict import DEFAULT_SEED, PropertyVerdict, Sampler
from .analysis import (BoundCertificate, Decomposition, PhiNonconvexError,
                       check_homogeneous_bound, check_null_class, check_phi_convex,
                       check_separately_convex, decompose, replay,
                       validate_p_bound_certificate, wlsc_verdict)
from .witness import (Checkerboard, LscProbeReport, SequencePlan, checkerboard_membership,
                      coverage_fraction, homogeneous_witness, integrability_witness,
                      lsc_probe, oscillation_sequence)
from .minimize import MinimizeConfig, MinimizeResult, grad_check, minimize

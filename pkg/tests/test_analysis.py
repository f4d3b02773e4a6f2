import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonlocal_lsc.analysis import (BoundCertificate, PhiNonconvexError, UnsupportedError,
                                   check_homogeneous_bound, check_null_class,
                                   check_phi_convex, check_separately_convex, decompose,
                                   default_psi_suite, gamma_ladder, random_w_triples, replay,
                                   tabulate_g, tabulate_h, validate_p_bound_certificate,
                                   wlsc_verdict)
from nonlocal_lsc.grid import Domain, build_grid
from nonlocal_lsc.integrand import builtin, check_pairwise_symmetry, parse
from nonlocal_lsc.verdict import Sampler

SMALL = Sampler(budget=400)


def unit(n):
    return build_grid(Domain.interval(), [n])


# -- bounds ---------------------------------------------------------------


def test_homogeneous_bound_examples():
    v = check_homogeneous_bound(parse("w1^2 * z1^2"), 2)
    assert v.passed and v.details["C"] == pytest.approx(1.0, rel=0.05)
    v = check_homogeneous_bound(parse("1"), 2)
    assert v.passed and v.details["C"] == 1.0
    v = check_homogeneous_bound(parse("exp(w1 * z1)"), 1)
    assert v.refuted and replay(parse("exp(w1 * z1)"), v)


def test_certificate_examples():
    g = unit(16)
    ok = validate_p_bound_certificate(parse("(w1 - z1)^2"),
                                      BoundCertificate.constant(g, 1.0, 2, 2, 0, p=2))
    assert ok.passed
    zero = validate_p_bound_certificate(parse("0"), BoundCertificate.constant(g, 1.0, 0, 0, 0))
    assert zero.passed
    cert = BoundCertificate.constant(g, 1.0, 5.0, 5.0, 5.0, p=2)
    bad = validate_p_bound_certificate(builtin("example-3-divergent"), cert)
    assert bad.refuted and bad.witness["x"][0] < 0.2
    assert replay(builtin("example-3-divergent"), bad, cert=cert)


def test_certificate_rejects_negative_tables():
    with pytest.raises(ValueError):
        BoundCertificate.constant(unit(4), 1.0, -1, 0, 0)


# -- convexity ------------------------------------------------------------


@pytest.mark.parametrize("text", ["(w1 - z1)^2", "w1 * z1", "exp(w1) * (1 + x1) + z1^4"])
def test_separately_convex_passes(text):
    assert check_separately_convex(parse(text), SMALL).passed


def test_separately_convex_refutes_concave():
    f = parse("-w1^2")
    v = check_separately_convex(f, SMALL)
    assert v.refuted and v.witness["slot"] == "w"
    assert v.witness["f_mid"] > v.witness["theta"] * v.witness["f_w1"] + \
        (1 - v.witness["theta"]) * v.witness["f_w2"]
    assert replay(f, v)


def test_phi_convex_examples():
    suite = default_psi_suite(parse("w1"), count=4, nodes=32)
    assert check_phi_convex(parse("w1^2 + z1^2"), suite).passed
    f = parse("-(w1 - z1)^2")
    v = check_phi_convex(f, suite)
    assert v.refuted and replay(f, v, psi_suite=suite)


def test_phi_convex_n2_example_with_hessian():
    f = builtin("example-n2-vector")
    suite = default_psi_suite(f, count=3, nodes=32)
    v = check_phi_convex(f, suite, w_triples=random_w_triples(2, 20), hessian=True)
    assert v.passed and v.details["min_hessian_det"] >= -1e-6


def test_n2_example_not_separately_convex():
    assert check_separately_convex(builtin("example-n2-vector"), SMALL).refuted


@settings(max_examples=12, deadline=None)
@given(a=st.floats(0, 3), b=st.floats(0, 3), c=st.floats(-1, 1), seed=st.integers(0, 999))
def test_separate_convexity_implies_profile_convexity(a, b, c, seed):
    # a*w^2 + b*z^2 + c*w*z*(x + y) is convex in each slot
    f = parse(f"{a!r} * w1^2 + {b!r} * z1^2 + {c!r} * w1 * z1 * (x1 + y1)")
    assert check_separately_convex(f, Sampler(budget=200, seed=seed)).passed
    suite = default_psi_suite(f, count=3, nodes=16, seed=seed)
    assert check_phi_convex(f, suite, w_triples=random_w_triples(1, 10, seed)).passed


def test_wlsc_verdicts():
    suite = default_psi_suite(parse("w1"), count=4, nodes=32)
    good = wlsc_verdict(parse("(w1 - z1)^2"), psi_suite=suite, sampler=SMALL)
    assert good.verdict == "wlsc-evidence" and good.criterion == "separate-convexity"
    bad = wlsc_verdict(parse("-(w1 - z1)^2"), psi_suite=suite, sampler=SMALL)
    assert bad.refuted and bad.criterion == "phi-convexity" and bad.witness
    f = builtin("example-n2-vector")
    n2 = wlsc_verdict(f, psi_suite=default_psi_suite(f, count=3, nodes=32), sampler=SMALL,
                      w_triples=random_w_triples(2, 20))
    assert n2.verdict == "wlsc-evidence" and n2.criterion == "phi-convexity"
    assert n2.choice_dependent and n2.symmetry == "refuted"


def test_pairwise_symmetry_witness_replays():
    f = parse("w1 * x1")
    assert replay(f, check_pairwise_symmetry(f))


# -- decomposition --------------------------------------------------------


W33 = np.linspace(-2, 2, 33)


def test_decompose_translation_invariant_quadratic():
    dec = decompose(parse("(w1 - z1)^2"), unit(16), W33)
    assert np.allclose(dec.gamma, 2.0) and np.allclose(dec.g, 0.0, atol=1e-12)
    assert dec.residual() <= 1e-12


def test_decompose_weighted_quadratic():
    g = unit(64)
    dec = decompose(builtin("weighted-quadratic"), g, W33)
    y = g.nodes[:, 0]
    expect_g = (y[None, :, None] - 0.5) * W33[None, None, :] ** 2
    assert np.max(np.abs(dec.g - expect_g)) <= 1e-3
    ft = dec.f_tilde_table()
    expect_ft = W33[:, None] ** 2 / 4 + W33[None, :] ** 2 / 4
    assert np.max(np.abs(ft - expect_ft[None, None])) <= 1e-3
    assert dec.checks["separate_convexity"]["status"] == "evidence-passed"
    assert dec.checks["g_ymean_max"] <= 1e-12
    assert np.allclose(dec.mean_gamma, 0.5)


def test_decompose_rejects_nonconvex_profile():
    with pytest.raises(PhiNonconvexError):
        decompose(parse("-w1^2 - z1^2"), unit(16), W33)


def test_decompose_rejects_vector_case():
    with pytest.raises(UnsupportedError):
        decompose(builtin("example-n2-vector"), unit(8), W33)


def test_decompose_needs_anchor():
    with pytest.raises(ValueError):
        decompose(parse("w1^2"), unit(8), np.linspace(-2, 2, 8))


def test_gamma_ladder_monotone_and_stable():
    f = parse("w1^2 + z1^2 + log(1 + exp(w1 + z1))")
    tables, _ = gamma_ladder(f, unit(4), np.linspace(-1, 1, 5))
    assert np.all(np.diff(tables, axis=0) <= 0)
    assert np.all(np.abs(tables[-1] - tables[-2]) <= 1e-6 * (1 + np.abs(tables[-2])))


def test_decomposition_z_dependent_hessian():
    f = parse("w1^2 * z1^2 * (x1 + y1) + w1^2 * (y1 - 0.25) + z1^2 * (x1 - 0.25)")
    dec = decompose(f, unit(8), np.linspace(-1, 1, 9), M_ladder=(1.0, 2.0, 4.0))
    # min over z of 2 z^2 (x + y) + 2 (y - 1/4) is attained at z = 0
    y = unit(8).nodes[:, 0]
    assert np.allclose(dec.gamma, 2 * (y[None, :, None] - 0.25), atol=1e-12)


def test_decomposition_artifacts(tmp_path):
    dec = decompose(builtin("weighted-quadratic"), unit(8), np.linspace(-1, 1, 9))
    tables = dec.tables_csv()
    assert set(tables) >= {"gamma", "g", "h"}
    assert tables["g"].splitlines()[0].startswith("x")
    assert '"checks"' in dec.to_json()


# -- null class -----------------------------------------------------------


def test_null_class_examples():
    g = unit(64)
    w = np.linspace(-2, 2, 17)
    gt = tabulate_g(lambda x, y, w: (y[..., 0] - 0.5) * w**2, g, w)
    assert check_null_class(gt, 0.0, g, w).passed
    bad = check_null_class(tabulate_g(lambda x, y, w: w**2 + 0 * x[..., 0], g, w), 0.0, g, w)
    assert bad.refuted and bad.witness["condition"] == "g-ymean"
    g2 = build_grid(Domain.unit_cube(2), [8, 8])
    w2 = np.linspace(-1, 1, 5)
    h = tabulate_h(lambda x, y: x[..., 0] + y[..., 0] - 1.0, g2)
    assert check_null_class(np.zeros((64, 64, 5)), h, g2, w2).passed
    h_bad = tabulate_h(lambda x, y: x[..., 0] - 0.5 + 0 * y[..., 0], g2)
    assert check_null_class(np.zeros((64, 64, 5)), h_bad, g2, w2).refuted

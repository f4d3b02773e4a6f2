import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonlocal_lsc import expr as ex
from nonlocal_lsc.grid import Domain
from nonlocal_lsc.integrand import (PoleError, Symmetry, builtin, builtin_names,
                                    check_pairwise_symmetry, differentiate, eval_point,
                                    n2_a, n2_b, parse, require_symmetric, resolve,
                                    symmetrize, verify_symmetry)


# -- parsing --------------------------------------------------------------


def test_parse_smooth_quadratic():
    f = parse("(w1 - z1)^2")
    assert f.smooth_w


def test_parse_example3_text_is_smooth_in_w():
    f = parse("step(z1 - x1) * step(1 - z1) / z1")
    assert f.smooth_w


def test_parse_error_offset():
    with pytest.raises(ex.ParseError) as info:
        parse("(w1 +")
    assert info.value.offset == 4


@pytest.mark.parametrize("text", ["w2", "x2", "q1", "foo(w1)", "min(w1)", "exp(w1, z1)",
                                  "w1 z1", "w1 ^ z1", "(w1"])
def test_parse_rejects(text):
    with pytest.raises(ex.ParseError):
        parse(text)


def test_parse_offsets_are_utf8_bytes():
    with pytest.raises(ex.ParseError) as info:
        parse("w1 + é")
    assert info.value.offset == 5
    with pytest.raises(ex.ParseError) as info:
        parse("éé")
    assert info.value.offset == 0


def test_unary_minus_and_negative_exponent():
    f = parse("-w1^2 + z1^-1")
    assert eval_point(f, 0.5, 0.5, 3.0, 2.0) == pytest.approx(-9.0 + 0.5)


def test_precedence_and_associativity():
    f = parse("w1 - z1 - 1 + 8 / 2 / 2 * 3")
    assert eval_point(f, 0, 0, 5.0, 2.0) == pytest.approx(5 - 2 - 1 + 6)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["(w1 - z1)^2", "w1 * z1 / (1 + x1^2)", "exp(-w1) - log(2 + z1^2)",
                        "min(w1, z1) + max(x1, y1)", "step(w1 - 0.5) * sqrt(abs(z1))",
                        "neg(w1)^3 - (y1 - x1) / 4"]),
       st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 1), st.floats(0, 1))
def test_print_parse_round_trip(text, w, z, x, y):
    node = ex.parse_expr(text)
    again = ex.parse_expr(ex.to_text(node))
    env = {"w1": np.float64(w), "z1": np.float64(z), "x1": np.float64(x), "y1": np.float64(y)}
    a, b = ex.evaluate(node, env), ex.evaluate(again, env)
    assert (a == b) or (math.isnan(a) and math.isnan(b))


# -- evaluation -----------------------------------------------------------


def test_eval_examples():
    assert eval_point(parse("(w1 - z1)^2"), 0, 0, 3.0, 1.0) == 4.0
    ex3 = builtin("example-3-divergent")
    assert eval_point(ex3, 0.5, 0.1, 0.0, 0.25) == 0.0
    assert eval_point(ex3, 0.25, 0.1, 0.0, 0.5) == 2.0


def test_masked_pole_is_zero_but_bare_pole_raises():
    ex3 = builtin("example-3-divergent")
    assert eval_point(ex3, 0.5, 0.5, 0.0, 0.0) == 0.0
    with pytest.raises(PoleError) as info:
        eval_point(parse("1 / z1"), 0.5, 0.5, 0.0, 0.0)
    assert info.value.locations


def test_vectorised_call_reports_pole_locations():
    f = parse("1 / (w1 - z1)")
    with pytest.raises(PoleError) as info:
        f(np.zeros((3, 1)), np.zeros((3, 1)), np.array([[1.0], [2.0], [3.0]]),
          np.array([[0.0], [2.0], [1.0]]))
    assert info.value.locations == [(1,)]


# -- symmetry -------------------------------------------------------------


def test_symmetrize_formula():
    s = symmetrize(parse("w1"))
    assert s.symmetric is Symmetry.VERIFIED
    assert eval_point(s, 0.1, 0.7, 2.0, 4.0) == pytest.approx(3.0)


def test_symmetrize_keeps_symmetric_integrand():
    f = parse("w1 * z1 * (x1 + y1)")
    s = symmetrize(f)
    rng = np.random.default_rng(0)
    x, y = rng.random((50, 1)), rng.random((50, 1))
    w, z = rng.normal(size=(50, 1)), rng.normal(size=(50, 1))
    assert np.allclose(s.raw(x, y, w, z), f.raw(x, y, w, z), rtol=1e-14, atol=0)


def test_symmetrize_idempotent():
    f = parse("w1^3 * exp(x1) - z1 * y1^2 + w1 * z1^2")
    s1, s2 = symmetrize(f), symmetrize(symmetrize(f))
    rng = np.random.default_rng(1)
    x, y = rng.random((200, 1)), rng.random((200, 1))
    w, z = rng.normal(size=(200, 1)), rng.normal(size=(200, 1))
    a, b = s1.raw(x, y, w, z), s2.raw(x, y, w, z)
    assert np.all(np.abs(a - b) <= 1e-12 * (1 + np.abs(a)))


def test_example4_is_symmetrised_example3():
    f4 = builtin("example-4-nonlsc")
    base = parse("neg(step(z1 - x1) * step(1 - z1) / z1)")
    s = symmetrize(base)
    rng = np.random.default_rng(2)
    x, y = rng.random((300, 1)), rng.random((300, 1))
    w, z = rng.uniform(0.01, 1.2, (300, 1)), rng.uniform(0.01, 1.2, (300, 1))
    assert np.allclose(f4.raw(x, y, w, z), s.raw(x, y, w, z), rtol=1e-14, atol=0)


def test_example4_hand_value():
    # x=0.1, z=0.5: -1/0.5 = -2 (0.5 in [0.1, 1]); y=0.9, w=0.5: w < y so 0
    f4 = builtin("example-4-nonlsc")
    assert eval_point(f4, 0.1, 0.9, 0.5, 0.5) == pytest.approx(-1.0)
    # both branches active
    assert eval_point(f4, 0.1, 0.2, 0.5, 0.5) == pytest.approx(-2.0)


def test_symmetry_checks():
    assert check_pairwise_symmetry(parse("w1 * z1"), 300).passed
    v = check_pairwise_symmetry(parse("w1"), 300)
    assert v.refuted and v.witness is not None
    f = parse("w1")
    w = v.witness
    a = eval_point(f, w["x"], w["y"], w["w"], w["z"])
    b = eval_point(f, w["y"], w["x"], w["z"], w["w"])
    assert abs(a - b) > 1e-9 * (1 + abs(a))
    assert check_pairwise_symmetry(builtin("example-n2-vector")).refuted


def test_require_symmetric():
    require_symmetric(parse("w1 * z1"))
    with pytest.raises(Exception):
        require_symmetric(parse("w1"))
    assert verify_symmetry(parse("w1 + z1")).symmetric is Symmetry.VERIFIED


# -- derivatives ----------------------------------------------------------


def test_derivative_examples():
    d = differentiate(parse("(w1 - z1)^2"))
    assert float(d.base.raw([0], [0], [3.0], [1.0], d.grad_w[0])) == 4.0
    assert float(d.base.raw([0], [0], [3.0], [1.0], d.hess_w[0][0])) == 2.0
    d = differentiate(builtin("weighted-quadratic"))
    for y in (0.0, 0.3, 0.9):
        assert float(d.base.raw([0.2], [y], [1.5], [-2.0], d.hess_w[0][0])) == \
            pytest.approx(2 * (y - 0.25), abs=1e-15)


def test_nonsmooth_rejected():
    with pytest.raises(ex.NonSmoothError):
        differentiate(parse("abs(w1) + z1"))
    with pytest.raises(ex.NonSmoothError):
        differentiate(builtin("example-4-nonlsc"))


def _fd_check(f, points=100, seed=0):
    d = differentiate(f)
    rng = np.random.default_rng(seed)
    dom = f.domain or Domain.unit_cube(f.dim_m)
    n = f.dim_n
    x = dom.lo + rng.random((points, f.dim_m)) * (dom.hi - dom.lo)
    y = dom.lo + rng.random((points, f.dim_m)) * (dom.hi - dom.lo)
    w = rng.uniform(-2, 2, (points, n))
    z = rng.uniform(-2, 2, (points, n))
    G, H = d.grad(x, y, w, z), d.hess(x, y, w, z)
    h = 1e-5
    for c in range(n):
        e = np.zeros(n)
        e[c] = h
        fd = (f.raw(x, y, w + e, z) - f.raw(x, y, w - e, z)) / (2 * h)
        assert np.all(np.abs(fd - G[:, c]) <= 1e-6 * (1 + np.abs(G[:, c])))
        fdg = (d.grad(x, y, w + e, z) - d.grad(x, y, w - e, z)) / (2 * h)
        assert np.all(np.abs(fdg - H[:, :, c]) <= 1e-6 * (1 + np.abs(H[:, :, c])))
    assert np.allclose(H, np.swapaxes(H, -1, -2), rtol=0, atol=1e-10)


@pytest.mark.parametrize("name", [n for n in builtin_names() if builtin(n).smooth_w])
def test_builtin_derivatives_match_finite_differences(name):
    _fd_check(builtin(name))


# -- builtins -------------------------------------------------------------


def test_builtin_registry():
    assert {"example-3-divergent", "example-4-nonlsc", "example-n2-vector"} <= set(builtin_names())
    with pytest.raises(KeyError):
        builtin("nope")
    assert resolve("builtin:product").name == "product"
    assert resolve("w1 + z1").text == "w1 + z1"


def test_n2_scalar_functions():
    assert float(n2_b(0.0)) == 1.0
    assert float(n2_a(3.0)) == 2.0
    s = np.linspace(-6, 6, 2001)
    a = n2_a(s)
    assert np.all(a >= 0)
    assert np.all(np.diff(a, 2) >= -1e-12)  # convex on the grid
    # C^2 matching at |s| = 2: value 1, slope 1, curvature 0
    t = 2.0
    assert float(n2_a(t)) == pytest.approx(1.0)
    eps = 1e-6
    assert (float(n2_a(t)) - float(n2_a(t - eps))) / eps == pytest.approx(1.0, abs=1e-5)


def test_n2_determinant_inequality():
    zeta = np.linspace(-8, 8, 4001)
    assert np.all(n2_b(zeta) * n2_b(-zeta) >= 1 - 1e-12)
    assert np.all(n2_b(zeta) + n2_b(-zeta) >= 2 - 1e-12)
    assert np.all((n2_a(zeta) + 1) ** 2 - zeta**2 >= -1e-12)


def test_n2_expression_matches_scalar_functions():
    f = builtin("example-n2-vector")
    z = np.linspace(-3, 3, 61)[:, None]
    ones = np.ones_like(z)
    # y >= 0: 0.5 (b(z) w1^2 + b(-z) w2^2); take w = (1, 0) and (0, 1)
    v1 = f.raw(0 * ones, 0.5 * ones, np.hstack([ones, 0 * ones]), np.hstack([z, 0 * z]))
    assert np.allclose(v1, 0.5 * n2_b(z[:, 0]))
    v2 = f.raw(0 * ones, 0.5 * ones, np.hstack([0 * ones, ones]), np.hstack([z, 0 * z]))
    assert np.allclose(v2, 0.5 * n2_b(-z[:, 0]))
    # y < 0: 0.5 a(z) |w|^2 + z w1 w2
    v3 = f.raw(0 * ones, -0.5 * ones, np.hstack([ones, ones]), np.hstack([z, 0 * z]))
    assert np.allclose(v3, n2_a(z[:, 0]) + z[:, 0])

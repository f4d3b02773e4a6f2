import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonlocal_lsc._summation import blocked_sum, compensated_row_sums, merge, stable_sum
from nonlocal_lsc.grid import (Domain, GridFunction, InvalidDomainError, build_grid,
                               grid_function_from_csv, grid_function_to_csv, lp_norm,
                               lp_norm_pow, measure, p_function, p_function_array,
                               parse_domain, parse_exponent, random_grid_function)


def test_build_grid_midpoints_1d():
    g = build_grid(Domain.interval(), [4])
    assert g.nodes[:, 0].tolist() == [0.125, 0.375, 0.625, 0.875]
    assert g.weight == 0.25


def test_build_grid_2d():
    g = build_grid(Domain.unit_cube(2), [2, 2])
    assert g.size == 4
    assert g.weight == 0.25


def test_zero_nodes_rejected():
    with pytest.raises(ValueError):
        build_grid(Domain.interval(), [0])


@pytest.mark.parametrize("box", [((1.0, 1.0),), ((2.0, 1.0),), ((0.0, math.inf),)])
def test_degenerate_box(box):
    with pytest.raises(InvalidDomainError):
        Domain(box)


def test_weights_sum_to_measure():
    d = Domain(((-1.0, 2.0), (0.0, 0.5)))
    g = build_grid(d, [30, 7])
    assert abs(g.total_measure - d.box_volume) <= 1e-12 * d.box_volume


def test_nodes_inside_their_cells():
    g = build_grid(Domain(((-1.0, 1.0), (0.0, 3.0))), [5, 6])
    assert np.array_equal(g.locate(g.nodes), g.cell_index)


def test_measure_examples():
    assert measure(Domain.interval()) == 1.0
    assert measure(Domain(((-1.0, 1.0), (-1.0, 1.0)))) == 4.0
    half = Domain(((0.0, 1.0),), mask=lambda p: p[:, 0] < 0.5)
    assert abs(measure(half, 10**4) - 0.5) <= 1e-4


def test_masked_measure_converges():
    d = Domain(((0.0, 1.0), (0.0, 1.0)), mask=lambda p: p[:, 0] + p[:, 1] < 1.0)
    for r in (16, 32, 64):
        assert abs(measure(d, r) - measure(d, 2 * r)) <= 2.0 / r


def test_mask_drops_cells():
    d = Domain(((0.0, 1.0),), mask=lambda p: p[:, 0] > 0.5)
    g = build_grid(d, [8])
    assert g.size == 4 and g.nodes.min() > 0.5
    assert g.snap(np.array([[0.1]]))[0] == -1


def test_p_function_examples():
    assert p_function([3.0, 4.0], 2) == pytest.approx(25.0)
    assert p_function(0.5, math.inf, 1.0) == 0.0
    assert p_function(2.0, math.inf, 1.0) == math.inf
    # strict inequality at the threshold
    assert p_function(1.0, "inf", 1.0) == 0.0


def test_exponent_parsing():
    assert parse_exponent("inf") == math.inf
    assert parse_exponent(2) == 2.0
    with pytest.raises(ValueError):
        parse_exponent(0.5)


def test_lp_norm_examples():
    g = build_grid(Domain.interval(), [100])
    assert lp_norm(GridFunction.constant(g, 1.0, p=2)) == pytest.approx(1.0, abs=1e-15)
    assert lp_norm(GridFunction.constant(g, -3.5, p=math.inf)) == 3.5
    fine = build_grid(Domain.interval(), [10**4])
    u = GridFunction.from_callable(fine, lambda x: x[:, 0], p=2)
    assert abs(lp_norm(u) - 1 / math.sqrt(3)) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), p=st.sampled_from([1.0, 1.5, 2.0, 3.0]),
       n=st.integers(1, 3))
def test_p_function_identity(seed, p, n):
    g = build_grid(Domain.interval(), [37])
    u = random_grid_function(g, n, seed=seed, scale=5.0, p=p)
    lhs = g.weight * stable_sum(p_function_array(u.values, p))
    assert lhs == lp_norm_pow(u)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), c=st.one_of(st.just(0.0), st.floats(1e-100, 1e3), st.floats(-1e3, -1e-100)),
       p=st.sampled_from([1.0, 2.0, math.inf]))
def test_lp_norm_homogeneous(seed, c, p):
    g = build_grid(Domain.unit_cube(2), [6, 5])
    u = random_grid_function(g, 2, seed=seed, p=p)
    assert lp_norm(u * c) == pytest.approx(abs(c) * lp_norm(u), rel=1e-12, abs=1e-300)


def test_grid_function_rejects_non_finite():
    g = build_grid(Domain.interval(), [3])
    with pytest.raises(ValueError):
        GridFunction(g, [0.0, math.nan, 1.0])
    with pytest.raises(ValueError):
        GridFunction(g, [0.0, 1.0])


def test_csv_round_trip(tmp_path):
    g = build_grid(Domain.unit_cube(2), [3, 4])
    u = random_grid_function(g, 2, seed=5)
    text = grid_function_to_csv(u, tmp_path / "u.csv")
    assert text.splitlines()[0] == "x_1,x_2,u_1,u_2"
    v = grid_function_from_csv(str(tmp_path / "u.csv"), g)
    assert np.array_equal(u.values, v.values)
    # rows in any order
    head, *rows = text.splitlines()
    shuffled = "\n".join([head] + rows[::-1]) + "\n"
    assert np.array_equal(grid_function_from_csv(shuffled, g).values, u.values)


def test_prolong_piecewise_constant():
    g = build_grid(Domain.interval(), [4])
    u = GridFunction(g, [1.0, 2.0, 3.0, 4.0])
    v = u.prolong(g.refine(2))
    assert v.values[:, 0].tolist() == [1, 1, 2, 2, 3, 3, 4, 4]


def test_parse_domain():
    d = parse_domain("0,1;-2,3")
    assert d.box == ((0.0, 1.0), (-2.0, 3.0))


# -- compensated summation ------------------------------------------------


def test_row_sums_exact_on_cancellation():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(4, 1001)) * 1e10
    a[:, 0] += 1e20
    a[:, 1] -= 1e20
    s, c = compensated_row_sums(a)
    for i in range(4):
        assert s[i] + c[i] == math.fsum(a[i])


def test_blocked_sum_independent_of_partition():
    rng = np.random.default_rng(1)
    M = rng.normal(size=(300, 77)) * 10.0 ** rng.integers(-8, 8, size=(300, 77))
    ref = merge([compensated_row_sums(M)])
    for block in (1, 7, 64, 300):
        for threads in (1, 3):
            assert blocked_sum(lambda a, b: M[a:b], 300, block, threads) == ref

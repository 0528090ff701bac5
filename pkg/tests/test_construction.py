"""Automorphism matrix B, shift matrix S, and the Y endomorphisms."""

import pytest

from fsz_forge.construction import (
    binomial_entry_closed,
    build_b,
    build_shift,
    build_y,
    shift_power_closed,
    verify_construction,
)
from fsz_forge.mixedmod import (
    GroupParams,
    identity_matrix,
    mat_mul,
    mat_pow,
    mat_scale,
)

GRID = [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1)]

EXPECTED_CHECKS = {
    "b_last_power_corner",
    "b_order_exact",
    "binomial_closed_agrees",
    "power_divisibility_invariant",
    "shift_power_closed_agrees",
    "y1_b_fixed_point",
    "y1_block_form",
    "yp_scaled_block_forms",
}


@pytest.mark.parametrize("p,j", GRID)
def test_verify_construction_grid(p, j):
    report = verify_construction(GroupParams(p, j))
    assert report.all_passed
    names = [c.name for c in report.checks]
    assert set(names) == EXPECTED_CHECKS
    assert len(names) == len(set(names))
    assert names == sorted(names)


def test_small_case_matrix_literals():
    p = GroupParams(3, 1)
    B = build_b(p)
    S = build_shift(p)
    assert B.rows == ((1, 6), (2, 1))
    assert mat_pow(B, 2).rows == ((4, 3), (1, 1))
    assert mat_pow(B, 3).rows == ((1, 0), (0, 1))
    assert S.rows == ((0, 6), (2, 0))
    assert mat_pow(S, 2).rows == ((3, 0), (0, 0))
    assert mat_pow(S, 3).rows == ((0, 0), (0, 0))
    assert build_y(p, 0).rows == ((6, 0), (0, 0))


@pytest.mark.parametrize("p,j", GRID)
def test_b_order_is_exactly_p_to_j(p, j):
    params = GroupParams(p, j)
    B = build_b(params)
    I = identity_matrix(params).rows
    assert mat_pow(B, params.b_order).rows == I
    for k in range(1, params.b_order):
        assert mat_pow(B, k).rows != I


@pytest.mark.parametrize("p,j", GRID)
def test_b_penultimate_power_corner_entry(p, j):
    params = GroupParams(p, j)
    top = mat_pow(build_b(params), params.b_order - 1)
    assert top.rows[0][0] == params.n + 1


@pytest.mark.parametrize("p,j", GRID)
def test_y_block_forms(p, j):
    params = GroupParams(p, j)
    y1 = build_y(params, 0)
    assert y1.rows[0][0] == 2 * params.n
    assert all(
        y1.rows[r][c] == 0 for r in range(params.dim) for c in range(params.dim)
        if (r, c) != (0, 0)
    )
    for t in range(1, j):
        scaled = mat_scale(p**t, build_y(params, t))
        assert scaled.rows[0][0] == params.n
        assert all(
            scaled.rows[r][c] == 0
            for r in range(params.dim)
            for c in range(params.dim)
            if (r, c) != (0, 0)
        )


@pytest.mark.parametrize("p,j", GRID)
def test_closed_forms_match_mat_pow(p, j):
    params = GroupParams(p, j)
    B = build_b(params)
    S = build_shift(params)
    for k in range(1, params.b_order + 1):
        assert shift_power_closed(params, k).rows == mat_pow(S, k).rows
    for k in range(1, params.b_order - 1):
        assert binomial_entry_closed(params, k).rows == mat_pow(B, k).rows


def test_y1_absorbs_b():
    params = GroupParams(5, 1)
    B = build_b(params)
    y1 = build_y(params, 0)
    assert mat_mul(B, y1).rows == y1.rows
    assert mat_mul(y1, B).rows == y1.rows

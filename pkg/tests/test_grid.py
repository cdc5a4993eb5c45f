from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from genfield.grid import build_grid, completeness_sum, lattice_delta, pair, sigma_inner


def test_single_mode_grid():
    g = build_grid(1, 1, 2 * math.pi, 1.0)
    assert g.n_modes == 1
    assert g.points[0, 0] == 0.0
    assert g.omega[0] == 1.0


def test_three_mode_grid_points_and_dispersion():
    g = build_grid(1, 3, 2 * math.pi, 1.0)
    assert np.allclose(g.points[:, 0], [-1.0, 0.0, 1.0], atol=1e-15)
    assert np.allclose(g.omega, [math.sqrt(2), 1.0, math.sqrt(2)], atol=1e-15)


def test_three_dimensional_grid():
    g = build_grid(3, 3, 2 * math.pi, 2.0)
    assert g.n_modes == 27
    i = int(np.nonzero(np.all(np.isclose(g.points, 1.0), axis=1))[0][0])
    assert g.omega[i] == pytest.approx(math.sqrt(7.0), abs=1e-14)


@pytest.mark.parametrize("args", [(1, 2, 1.0, 1.0), (1, 3, 0.0, 1.0), (1, 3, 1.0, 0.0),
                                  (1, 3, -1.0, 1.0), (2, 3, 1.0, 1.0), (1, 0, 1.0, 1.0)])
def test_build_grid_rejects_bad_arguments(args):
    with pytest.raises(ValueError):
        build_grid(*args)


@pytest.mark.parametrize("d,K,L,m", [(1, 1, 2 * math.pi, 1.0), (1, 5, 3.0, 0.5), (3, 3, 4.0, 1.5)])
def test_grid_invariants(d, K, L, m):
    g = build_grid(d, K, L, m)
    assert np.all(g.omega >= m)
    at_zero = np.all(g.points == 0, axis=1)
    assert np.all(np.isclose(g.omega, m) == at_zero)
    assert np.array_equal(g.points[g.parity], -g.points)
    assert np.array_equal(g.omega[g.parity], g.omega)
    assert math.isclose(np.sum(g.measure_weights), (2 * math.pi * K / L) ** d, rel_tol=1e-13)
    lat = g.positions
    assert math.isclose(lat.cell_weight * len(lat), L**d, rel_tol=1e-13)


def test_sigma_inner_examples(grid1, grid3):
    e = np.array([1.0])
    # w = (2 pi / L)^d = 1 at L = 2 pi, omega = m = 1
    assert sigma_inner(e, e, grid1) == pytest.approx(grid1.measure_weights[0] / grid1.omega[0])
    assert sigma_inner(e, e, grid1) == pytest.approx(1.0, abs=1e-15)
    assert sigma_inner(np.ones(3), np.zeros(3), grid3) == 0
    # three-term sum by hand: w = 1, omega = (sqrt2, 1, sqrt2)
    by_hand = 1 / math.sqrt(2) + 1 + 1 / math.sqrt(2)
    assert sigma_inner(np.ones(3), np.ones(3), grid3) == pytest.approx(by_hand, rel=1e-14)


def test_sigma_inner_rejects_shape_mismatch(grid3):
    with pytest.raises(ValueError):
        sigma_inner(np.ones(2), np.ones(3), grid3)


def test_sigma_inner_by_hand_with_weights():
    g = build_grid(1, 3, 4.0, 1.0)
    w = 2 * math.pi / 4.0
    p = w
    expected = w * (2 / math.sqrt(p * p + 1) + 1)
    assert sigma_inner(np.ones(3), np.ones(3), g) == pytest.approx(expected, rel=1e-14)


complex_vec = st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                       min_size=3, max_size=3).map(np.array)


@given(complex_vec, complex_vec)
def test_conjugate_symmetry(f, g):
    grid = build_grid(1, 3, 2 * math.pi, 1.0)
    assert sigma_inner(f, g, grid) == pytest.approx(np.conj(sigma_inner(g, f, grid)), abs=1e-9)


@given(complex_vec, complex_vec)
def test_parity_invariance(f, g):
    grid = build_grid(1, 3, 2 * math.pi, 1.0)
    P = grid.parity
    assert sigma_inner(f[P], g[P], grid) == pytest.approx(sigma_inner(f, g, grid), abs=1e-9)


@given(complex_vec)
def test_positivity(f):
    grid = build_grid(1, 3, 2 * math.pi, 1.0)
    v = sigma_inner(f, f, grid)
    assert abs(v.imag) < 1e-12 and v.real >= 0
    if np.any(f != 0):
        assert v.real > 0


@pytest.mark.parametrize("d,K", [(1, 1), (1, 3), (1, 5), (3, 3)])
def test_completeness_sum(d, K):
    g = build_grid(d, K, 2 * math.pi, 1.0)
    n = len(g.positions)
    for j in range(n):
        for k in range(n):
            s = completeness_sum(g, j, k)
            if j == k:
                assert s == pytest.approx(K**d, abs=1e-12)
            else:
                assert abs(s) < 1e-9


def test_lattice_delta_reproduces_point_value(grid3, rng):
    f = rng.standard_normal(3)
    for i in range(3):
        assert pair(lattice_delta(i, grid3), f, grid3) == pytest.approx(f[i], abs=1e-14)


def test_grid_is_immutable(grid3):
    with pytest.raises(ValueError):
        grid3.omega[0] = 5.0

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from genfield.fock import (FockBasis, FockSpace, FockVector, apply_annihilation, apply_creation,
                           commutator, point_ladder, restrict, smeared_ccr_error, vacuum)
from genfield.grid import build_grid, sigma_inner


def cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def test_basis_dimension_matches_stars_and_bars():
    for M, N in [(1, 4), (3, 4), (2, 6), (5, 3)]:
        assert FockBasis(M, N).dim == math.comb(M + N, N)


def test_basis_enumeration_order():
    b = FockBasis(2, 2)
    assert [tuple(s) for s in b.states] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    for k, s in enumerate(b.states):
        assert b.index(s) == k


def test_basis_rejects_outside_states():
    b = FockBasis(2, 2)
    with pytest.raises(KeyError):
        b.index((2, 1))
    with pytest.raises(ValueError):
        FockBasis(0, 2)


def test_vacuum_single_mode(grid1):
    v = vacuum(grid1, 2)
    assert v.as_dict() == {(0,): 1 + 0j}
    assert v.norm() == 1.0


def test_annihilation_kills_vacuum(grid3, rng):
    space = FockSpace(grid3, 4)
    out = apply_annihilation(cvec(rng, 3), space.vacuum(), space)
    assert np.all(out.amplitudes == 0)


def test_one_particle_amplitudes(grid3, rng):
    space = FockSpace(grid3, 3)
    f = cvec(rng, 3)
    one = space.one_particle(f)
    w, om = grid3.measure_weights, grid3.omega
    for i in range(3):
        occ = np.zeros(3, dtype=int)
        occ[i] = 1
        assert one.amplitudes[space.basis.index(occ)] == pytest.approx(np.sqrt(w[i] / om[i]) * f[i], abs=1e-15)
    g = cvec(rng, 3)
    assert one.inner(space.one_particle(g)) == pytest.approx(sigma_inner(f, g, grid3), abs=1e-13)


def test_two_particle_sqrt2_weights(grid3, rng):
    space = FockSpace(grid3, 3)
    f, g = cvec(rng, 3), cvec(rng, 3)
    two = apply_creation(f, space.one_particle(g), space)
    c_f = space.mode_weights * f
    c_g = space.mode_weights * g
    for i in range(3):
        occ = np.zeros(3, dtype=int)
        occ[i] = 2
        assert two.amplitudes[space.basis.index(occ)] == pytest.approx(math.sqrt(2) * c_f[i] * c_g[i], abs=1e-14)
    occ = np.array([1, 1, 0])
    assert two.amplitudes[space.basis.index(occ)] == pytest.approx(c_f[0] * c_g[1] + c_f[1] * c_g[0], abs=1e-14)


def test_creation_of_zero_function(grid3):
    space = FockSpace(grid3, 3)
    assert np.all(apply_creation(np.zeros(3), space.vacuum(), space).amplitudes == 0)


def test_creation_rejects_shape(grid3):
    with pytest.raises(ValueError):
        FockSpace(grid3, 2).creation_matrix(np.ones(2))


def test_top_sector_is_discarded(grid1):
    space = FockSpace(grid1, 2)
    top = FockVector(space.basis, [0, 0, 1])
    assert np.all(apply_creation(np.ones(1), top, space).amplitudes == 0)


def test_vacuum_commutator_example(grid3, rng):
    space = FockSpace(grid3, 4)
    f, g = cvec(rng, 3), cvec(rng, 3)
    A, Ad = space.annihilation_matrix(f), space.creation_matrix(g)
    omega = space.vacuum().amplitudes
    lhs = A @ (Ad @ omega) - Ad @ (A @ omega)
    assert np.allclose(lhs, sigma_inner(f, g, grid3) * omega, atol=1e-14)


def test_normalized_particle_is_removed(grid3, rng):
    space = FockSpace(grid3, 3)
    f = cvec(rng, 3)
    f = f / np.sqrt(sigma_inner(f, f, grid3).real)
    back = apply_annihilation(f, space.one_particle(f), space)
    assert np.allclose(back.amplitudes, space.vacuum().amplitudes, atol=1e-14)


def test_annihilation_is_adjoint_of_creation(grid3, rng):
    space = FockSpace(grid3, 4)
    for _ in range(5):
        f = cvec(rng, 3)
        assert np.array_equal(space.annihilation_matrix(f), space.creation_matrix(f).conj().T)


def test_smeared_ccr_twenty_pairs(grid3, rng):
    space = FockSpace(grid3, 4)
    for _ in range(20):
        assert smeared_ccr_error(space, cvec(rng, 3), cvec(rng, 3)) < 1e-12


def test_like_ladders_commute(grid3, rng):
    space = FockSpace(grid3, 4)
    mask = space.basis.exact_mask(2)
    for _ in range(5):
        f, g = cvec(rng, 3), cvec(rng, 3)
        aa = commutator(space.annihilation_matrix(f), space.annihilation_matrix(g))
        cc = commutator(space.creation_matrix(f), space.creation_matrix(g))
        assert np.max(np.abs(restrict(aa, mask))) < 1e-13
        assert np.max(np.abs(restrict(cc, mask))) < 1e-13


def _product_state(c, n, basis):
    """Occupation amplitudes of the unnormalized tensor power f x ... x f (n factors)."""
    amps = np.zeros(basis.dim, dtype=complex)
    for k, occ in enumerate(basis.states):
        if occ.sum() == n:
            multinom = math.factorial(n) / np.prod([math.factorial(int(v)) for v in occ])
            amps[k] = math.sqrt(multinom) * np.prod(c ** occ)
    return amps


@pytest.mark.parametrize("n", [1, 2, 3])
def test_product_state_rule(grid3, rng, n):
    space = FockSpace(grid3, 4)
    f, g = cvec(rng, 3), cvec(rng, 3)
    c = space.mode_weights * f
    Fn = _product_state(c, n, space.basis)
    Fn1 = _product_state(c, n - 1, space.basis)
    lhs = space.annihilation_matrix(g) @ Fn
    assert np.allclose(lhs, math.sqrt(n) * sigma_inner(g, f, grid3) * Fn1, atol=1e-12)


def test_point_ladder_ccr_constant(grid3):
    space = FockSpace(grid3, 4)
    mask = space.basis.exact_mask(1)
    for i in range(3):
        for j in range(3):
            comm = commutator(space.point_ladder(i), space.point_ladder(j, dagger=True))
            c = space.point_ccr_constant(i, j)
            assert np.allclose(restrict(comm, mask), c * np.eye(mask.sum()), atol=1e-13)
    # delta_p has value 1/w at mode i, so (delta, delta)_H = 1/(w omega)
    delta = np.array([0, 1 / grid3.measure_weights[1], 0])
    assert space.point_ccr_constant(1, 1) == pytest.approx(sigma_inner(delta, delta, grid3).real)


def test_point_ladder_module_function_and_range(grid3):
    m = point_ladder(0, False, grid3, 2)
    assert m.shape == (10, 10)
    with pytest.raises(IndexError):
        point_ladder(3, False, grid3, 2)


def test_canonical_mode_ladders(grid3):
    b = FockBasis(3, 4)
    mask = b.exact_mask(1)
    for i in range(3):
        comm = commutator(b.annihilator(i), b.creator(i))
        assert np.allclose(restrict(comm, mask), np.eye(mask.sum()), atol=1e-14, rtol=0)
        assert np.allclose(np.diag(b.creator(i) @ b.annihilator(i)), b.states[:, i])
        for j in range(3):
            assert np.all(commutator(b.annihilator(i), b.annihilator(j)) == 0)


@given(st.integers(1, 4), st.integers(0, 5))
def test_ladder_matrix_entries(n_modes, n_max):
    b = FockBasis(n_modes, n_max)
    for mode in range(n_modes):
        a = b.annihilator(mode)
        for col, occ in enumerate(b.states):
            nz = np.nonzero(a[:, col])[0]
            if occ[mode] == 0:
                assert nz.size == 0
            else:
                lowered = occ.copy()
                lowered[mode] -= 1
                assert list(nz) == [b.index(lowered)]
                assert a[nz[0], col] == math.sqrt(occ[mode])


def test_sparse_and_dense_ladders_agree():
    b = FockBasis(3, 4)
    for i in range(3):
        assert np.array_equal(b.sparse_annihilator(i).toarray(), b.annihilator(i))


def test_vector_algebra(grid3):
    space = FockSpace(grid3, 2)
    v = space.vacuum()
    w = 2.0 * v + v - v
    assert w.norm() == pytest.approx(2.0)
    assert np.all(v.sector(1) == 0)
    with pytest.raises(ValueError):
        FockVector(space.basis, np.ones(3))

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from genfield import chaos, fields
from genfield.fields import (assemble_field, ccr_check, ccr_predicted, chaos_field, commutator,
                             directions, hermiticity_error, kg_residual, lattice_delta_value, profile)
from genfield.fock import FockSpace, restrict
from genfield.grid import build_grid


def test_single_mode_phi_matrix(grid1):
    phi = assemble_field("phi", 0.0, [0.0], grid1, "standard", 1).matrix
    nu = 1 / math.sqrt(2 * 1.0 * 2 * math.pi)
    assert np.allclose(phi, nu * np.array([[0, 1], [1, 0]]), atol=1e-16)


def test_single_mode_pi_matrix_is_time_derivative(grid1):
    pi = assemble_field("pi", 0.0, [0.0], grid1, "standard", 1).matrix
    nu = 1 / math.sqrt(4 * math.pi)
    # Pi = d/dt Phi = -i omega nu a + i omega nu a^dag
    assert np.allclose(pi, nu * 1.0 * np.array([[0, -1j], [1j, 0]]), atol=1e-16)
    h = 1e-6
    up = assemble_field("phi", h, [0.0], grid1, "standard", 1).matrix
    dn = assemble_field("phi", -h, [0.0], grid1, "standard", 1).matrix
    assert np.allclose((up - dn) / (2 * h), pi, atol=1e-9)


def test_pi_is_time_derivative_on_grid(grid3):
    space = FockSpace(grid3, 3)
    x = grid3.positions.site(1)
    for t in (0.0, 0.8):
        h = 1e-5
        up = assemble_field("phi", t + h, x, grid3, "standard", 3, space=space).matrix
        dn = assemble_field("phi", t - h, x, grid3, "standard", 3, space=space).matrix
        pi = assemble_field("pi", t, x, grid3, "standard", 3, space=space).matrix
        assert np.max(np.abs((up - dn) / (2 * h) - pi)) < 1e-9


def test_annihilation_half_kills_vacuum(grid3):
    space = FockSpace(grid3, 3)
    vac = space.vacuum().amplitudes
    for t, j in itertools.product((0.0, 1.7), range(3)):
        m = assemble_field("phi_minus", t, grid3.positions.site(j), grid3, "standard", 3, space=space).matrix
        assert np.all(m @ vac == 0)


def test_unknown_kind_and_off_lattice(grid3):
    with pytest.raises(ValueError):
        assemble_field("psi", 0.0, [0.0], grid3, "standard", 2)
    with pytest.raises(ValueError):
        assemble_field("phi", 0.0, [0.3], grid3, "standard", 2)
    m = assemble_field("phi", 0.0, [0.3], grid3, "standard", 2, allow_off_lattice=True)
    assert m.matrix.shape == (10, 10)
    with pytest.raises(ValueError):
        profile("weird")


def test_hermiticity_and_half_adjoints(grid3):
    space = FockSpace(grid3, 4)
    mask = space.basis.exact_mask(1)
    for prof in fields.PROFILES:
        for j in range(3):
            x = grid3.positions.site(j)
            for k in ("phi", "pi", "grad_phi"):
                m = assemble_field(k, 0.4, x, grid3, prof, 4, space=space).matrix
                assert hermiticity_error(m, mask) < 1e-12
            mm = assemble_field("phi_minus", 0.4, x, grid3, prof, 4, space=space).matrix
            mp = assemble_field("phi_plus", 0.4, x, grid3, prof, 4, space=space).matrix
            assert np.max(np.abs(restrict(mp - mm.conj().T, mask))) < 1e-15


def test_equal_time_locality_all_pairs(grid3):
    space = FockSpace(grid3, 4)
    for prof in fields.PROFILES:
        for kind in ("phi", "pi"):
            ops = [assemble_field(kind, 0.3, grid3.positions.site(j), grid3, prof, 4, space=space) for j in range(3)]
            for A, B in itertools.product(ops, repeat=2):
                assert np.max(np.abs(commutator(A, B))) < 1e-13


def test_single_mode_phi_pi_commutator_is_imaginary_identity(grid1):
    space = FockSpace(grid1, 4)
    phi = assemble_field("phi", 0.0, [0.0], grid1, "standard", 4, space=space)
    pi = assemble_field("pi", 0.0, [0.0], grid1, "standard", 4, space=space)
    c = commutator(phi, pi)
    val = c[0, 0]
    assert abs(val.real) < 1e-15 and abs(val.imag) > 0.1
    assert np.allclose(c, val * np.eye(c.shape[0]), atol=1e-15)


def test_commutator_rejects_mismatch(grid3):
    a = assemble_field("phi", 0.0, [0.0], grid3, "standard", 3)
    b = assemble_field("phi", 0.0, [0.0], grid3, "standard", 4)
    c = assemble_field("phi", 0.0, [0.0], grid3, "paper-literal", 3)
    with pytest.raises(ValueError):
        commutator(a, b)
    with pytest.raises(ValueError):
        commutator(a, c)


def test_ccr_standard_profile_constants(grid3):
    space = FockSpace(grid3, 4)
    delta = 3 / (2 * math.pi)
    for j, k in itertools.product(range(3), repeat=2):
        r = ccr_check(0.0, grid3.positions.site(j), grid3.positions.site(k), grid3, "standard", 4, space=space)
        assert r.is_identity_multiple and r.off_identity < 1e-12
        assert abs(r.c_measured - r.c_predicted) < 1e-10
        if j == k:
            # Pi = d/dt Phi forces [Pi, Phi] = -i delta
            assert abs(r.c_measured - (-1j * delta)) < 1e-10
            assert "opposite sign" in r.note
        else:
            assert abs(r.c_measured) < 1e-10


def test_ccr_paper_literal_profile_reports_factor(grid3):
    space = FockSpace(grid3, 4)
    x = grid3.positions.site(0)
    r = ccr_check(0.0, x, x, grid3, "paper-literal", 4, space=space)
    assert r.is_identity_multiple and r.off_identity < 1e-12
    assert r.c_expected is None
    # -2i sum_p (dp / omega) omega = -2i (2 pi K / L) = -6i on this grid
    assert abs(r.c_measured - (-6j)) < 1e-10
    assert "factor -12.5664" in r.note


def test_ccr_oracle_is_independent_mode_sum():
    """c_predicted from an explicit cosine sum rather than the shared helper."""
    g = build_grid(1, 5, 3.0, 0.7)
    kappa2 = 1 / (2 * g.omega * g.volume)
    for j, k in itertools.product(range(5), repeat=2):
        dx = g.positions.site(j) - g.positions.site(k)
        by_hand = -2j * sum(kappa2[i] * g.omega[i] * math.cos(g.points[i, 0] * dx[0]) for i in range(5))
        assert ccr_predicted(g, "standard", g.positions.site(j), g.positions.site(k)) == pytest.approx(by_hand, abs=1e-14)


def test_ccr_verdict_is_profile_invariant():
    g = build_grid(1, 5, 3.0, 0.7)
    space = FockSpace(g, 3)
    for j, k in itertools.product(range(5), repeat=2):
        a = ccr_check(0.2, g.positions.site(j), g.positions.site(k), g, "standard", 3, space=space)
        b = ccr_check(0.2, g.positions.site(j), g.positions.site(k), g, "paper-literal", 3, space=space)
        assert a.is_identity_multiple == b.is_identity_multiple is True


def test_profile_covariance_rescales_modewise(grid3):
    std, lit = profile("standard"), profile("paper-literal")
    x = grid3.positions.site(2)
    a_std, b_std = fields.mode_terms("phi", 0.5, x, grid3, std)
    a_lit, b_lit = fields.mode_terms("phi", 0.5, x, grid3, lit)
    ratio = lit.ladder_coefficient(grid3) / std.ladder_coefficient(grid3)
    assert np.allclose(a_lit, ratio * a_std, atol=1e-15)
    assert np.allclose(b_lit, ratio * b_std, atol=1e-15)
    assert np.all(std.ladder_coefficient(grid3) > 0)
    assert np.array_equal(std.ladder_coefficient(grid3)[grid3.parity], std.ladder_coefficient(grid3))


@pytest.mark.parametrize("d,K,m", list(itertools.product((1, 3), (1, 3), (0.5, 1.0, 2.0))))
def test_klein_gordon_residual(d, K, m):
    g = build_grid(d, K, 2 * math.pi, m)
    n_max = 2 if d == 3 else 3
    space = FockSpace(g, n_max)
    x = g.positions.site(len(g.positions) - 1)
    assert kg_residual(g, "standard", 0.7, x, n_max, space=space) < 1e-12


def test_klein_gordon_negative_control(grid3):
    bad = grid3.omega.copy()
    bad[0] += 0.1
    assert kg_residual(grid3, "standard", 0.7, [0.0], 3, omega=bad) > 0.01


def test_klein_gordon_zero_mode(grid1):
    assert kg_residual(grid1, "paper-literal", 2.0, [0.0], 3) == 0.0


def test_lattice_delta_value():
    assert lattice_delta_value(build_grid(1, 3, 2 * math.pi, 1.0)) == pytest.approx(3 / (2 * math.pi))
    assert lattice_delta_value(build_grid(3, 3, 2.0, 1.0)) == pytest.approx(27 / 8)


def test_matrix_product_matches_chaos_composition(grid3):
    """Phi * Pi as matrices equals D/D* applied sequentially on chaos expansions."""
    n = 4
    space = FockSpace(grid3, n)
    mask = space.basis.exact_mask(2)
    for prof in fields.PROFILES:
        for t, j in ((0.0, 0), (0.9, 2)):
            x = grid3.positions.site(j)
            phi = assemble_field("phi", t, x, grid3, prof, n, space=space).matrix
            pi = assemble_field("pi", t, x, grid3, prof, n, space=space).matrix
            ops = [chaos_field("phi", t, x, grid3, prof), chaos_field("pi", t, x, grid3, prof)]
            composed = chaos.operator_matrix(lambda F: fields.apply_sequence(ops, F), grid3, n)
            assert np.max(np.abs(restrict(phi @ pi - composed, mask))) < 1e-10


def test_directions_are_conjugate_pairs(grid3):
    z = directions(0.4, [0.0], grid3, "standard")
    assert np.allclose(z["z3"], np.conj(z["z1"]))
    assert np.allclose(z["z2"], grid3.omega * z["z1"])
    with pytest.raises(ValueError):
        chaos_field("grad_phi", 0.0, [0.0], grid3, "standard")

"""Free Hamiltonian from ordinary field products, its mode form, the Wick-ordered
comparison, the phi^4 term, the momentum operator and translations.

A product of k field operators is only trusted on occupations n <= n_max - k;
every comparison in this module is restricted to that exact sub-basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import wick
from .colombeau import GrowthFit, fit_growth
from .fields import assemble_field, mode_terms, profile
from .fock import FockSpace, restrict
from .grid import MomentumGrid, build_grid


@dataclass(frozen=True)
class HamiltonianBundle:
    H_product: np.ndarray
    H_mode: np.ndarray
    H_wick: np.ndarray
    E0: float
    E0_predicted: float
    space: FockSpace

    @property
    def exact_mask(self) -> np.ndarray:
        return self.space.basis.exact_mask(2)

    def product_minus_mode(self) -> float:
        return float(np.max(np.abs(restrict(self.H_product - self.H_mode, self.exact_mask))))

    def product_minus_wick(self) -> float:
        """max |H_product - H_wick - E0 I| on the exact sub-basis."""
        diff = self.H_product - self.H_wick - self.E0 * np.eye(self.space.dim)
        return float(np.max(np.abs(restrict(diff, self.exact_mask))))


def _density_terms(t, x, grid, prof):
    terms = [mode_terms("pi", t, x, grid, prof)]
    terms += [mode_terms("grad_phi", t, x, grid, prof, axis=k) for k in range(grid.dimension)]
    return terms, mode_terms("phi", t, x, grid, prof)


def product_hamiltonian(grid: MomentumGrid, prof, n_max: int, t: float = 0.0,
                        space: FockSpace | None = None) -> np.ndarray:
    """1/2 sum_x dx [Pi^2 + (grad Phi)^2 + m^2 Phi^2] with plain matrix products."""
    prof = profile(prof)
    space = space or FockSpace(grid, n_max)
    dx = grid.positions.cell_weight
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for x in grid.positions.sites:
        pi = assemble_field("pi", t, x, grid, prof, n_max, space=space).sparse
        phi = assemble_field("phi", t, x, grid, prof, n_max, space=space).sparse
        dens = pi @ pi + grid.mass**2 * (phi @ phi)
        for k in range(grid.dimension):
            g = assemble_field("grad_phi", t, x, grid, prof, n_max, space=space, axis=k).sparse
            dens = dens + g @ g
        out += 0.5 * dx * dens.toarray()
    return out


def mode_hamiltonian(grid: MomentumGrid, n_max: int, space: FockSpace | None = None) -> np.ndarray:
    """1/2 sum_p omega_p (a a^dag + a^dag a), canonical ladders."""
    space = space or FockSpace(grid, n_max)
    out = np.zeros((space.dim, space.dim))
    for i, w in enumerate(grid.omega):
        a = space.basis.annihilator(i)
        out += 0.5 * w * (a @ a.T + a.T @ a)
    return out


def field_expression(kind: str, t: float, x, grid: MomentumGrid, prof, axis: int = 0):
    alpha, beta = mode_terms(kind, t, x, grid, prof, axis=axis)
    terms = [(((i, False),), alpha[i]) for i in range(grid.n_modes)]
    terms += [(((i, True),), beta[i]) for i in range(grid.n_modes)]
    return wick.LadderExpression(terms)


def hamiltonian_expression(grid: MomentumGrid, prof, t: float = 0.0) -> wick.LadderExpression:
    """Symbolic 1/2 sum_x dx [Pi^2 + (grad Phi)^2 + m^2 Phi^2]."""
    prof = profile(prof)
    dx = grid.positions.cell_weight
    total = wick.LadderExpression()
    for x in grid.positions.sites:
        pi = field_expression("pi", t, x, grid, prof)
        phi = field_expression("phi", t, x, grid, prof)
        dens = pi * pi + (grid.mass**2) * (phi * phi)
        for k in range(grid.dimension):
            g = field_expression("grad_phi", t, x, grid, prof, axis=k)
            dens = dens + g * g
        total = total + (0.5 * dx) * dens
    return total


def zero_point_energy(grid: MomentumGrid, prof) -> float:
    """L^d sum_p kappa_p^2 omega_p^2; equals 1/2 sum_p omega_p for the standard profile."""
    kappa = profile(prof).ladder_coefficient(grid)
    return float(grid.volume * np.sum(kappa**2 * grid.omega**2))


def zero_point_growth(Ks=(5, 9, 17, 33, 65), L: float = 2 * np.pi, m: float = 1.0,
                      prof="standard", d: int = 1) -> GrowthFit:
    """E0 over a mode-count schedule read as a net in eps = 1/K at fixed box size.

    The zero-point constant diverges like K^(d+1) in the continuum limit; the
    fitted slope is the growth order of that moderate net.
    """
    Ks = [int(k) for k in Ks]
    values = [zero_point_energy(build_grid(d, k, L, m), prof) for k in Ks]
    return fit_growth([1.0 / k for k in Ks], values)


def build_free_hamiltonian(grid: MomentumGrid, prof="standard", n_max: int = 4,
                           t: float = 0.0) -> HamiltonianBundle:
    if n_max < 2:
        raise ValueError("n_max must be >= 2 so that quadratic terms have an exact sub-basis")
    prof = profile(prof)
    space = FockSpace(grid, n_max)
    H_product = product_hamiltonian(grid, prof, n_max, t, space)
    H_mode = mode_hamiltonian(grid, n_max, space)
    ordered = wick.normal_order(hamiltonian_expression(grid, prof, t))
    E0 = ordered.constant()
    H_wick = wick.to_matrix(ordered.without_constant(), grid.n_modes, n_max)
    return HamiltonianBundle(H_product, H_mode, H_wick, float(E0.real),
                             zero_point_energy(grid, prof), space)


def exact_spectrum(H: np.ndarray, space: FockSpace, k: int = 2) -> np.ndarray:
    """Eigenvalues of H restricted to n <= n_max - k."""
    return np.linalg.eigvalsh(restrict(H, space.basis.exact_mask(k)))


def oscillator_levels(grid: MomentumGrid, space: FockSpace, k: int = 2) -> np.ndarray:
    """sum_i n_i omega_i + 1/2 sum omega over the occupations with n <= n_max - k."""
    mask = space.basis.exact_mask(k)
    occ = space.basis.states[mask]
    return np.sort(occ @ grid.omega + 0.5 * np.sum(grid.omega))


def build_phi4(grid: MomentumGrid, prof="standard", n_max: int = 4, lam: float = 1.0,
               t: float = 0.0, space: FockSpace | None = None) -> np.ndarray:
    """lam * sum_x dx Phi(t, x)^4 as an ordinary matrix product."""
    prof = profile(prof)
    space = space or FockSpace(grid, n_max)
    out = np.zeros((space.dim, space.dim), dtype=complex)
    if lam == 0:
        return out
    dx = grid.positions.cell_weight
    for x in grid.positions.sites:
        phi = assemble_field("phi", t, x, grid, prof, n_max, space=space).sparse
        phi2 = phi @ phi
        out += dx * (phi2 @ phi2).toarray()
    return lam * out


def phi4_expression(grid: MomentumGrid, prof="standard", lam: float = 1.0,
                    t: float = 0.0) -> wick.LadderExpression:
    prof = profile(prof)
    dx = grid.positions.cell_weight
    total = wick.LadderExpression()
    for x in grid.positions.sites:
        total = total + (lam * dx) * field_expression("phi", t, x, grid, prof) ** 4
    return total


def momentum_operator(grid: MomentumGrid, prof=None, n_max: int = 4,
                      space: FockSpace | None = None) -> list[np.ndarray]:
    """P_k = sum_p p_k a_p^dag a_p per axis, diagonal in the occupation basis.

    ``prof`` is accepted for signature symmetry; P does not depend on it.
    """
    space = space or FockSpace(grid, n_max)
    eig = space.basis.states @ grid.points
    return [np.diag(eig[:, k]) for k in range(grid.dimension)]


def translation_check(a, t: float, x, grid: MomentumGrid, prof="standard", n_max: int = 4,
                      space: FockSpace | None = None) -> float:
    """max |U Phi(t, x) U^dag - Phi(t, x - a)| with U = exp(+i P.a).

    The displacement a is purely spatial, so the Minkowski product in
    exp(-i P.y) becomes exp(+i P.a) with P the three-momentum.
    """
    prof = profile(prof)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if not grid.positions.is_on_lattice(a):
        raise ValueError(f"displacement {a} is not a multiple of the lattice spacing")
    space = space or FockSpace(grid, n_max)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phase = np.exp(1j * (space.basis.states @ grid.points) @ a)
    phi = assemble_field("phi", t, x, grid, prof, n_max, space=space).matrix
    shifted = assemble_field("phi", t, x - a, grid, prof, n_max, space=space).matrix
    conj = phase[:, None] * phi * np.conj(phase)[None, :]
    return float(np.max(np.abs(conj - shifted)))

"""Field operators Phi, Pi and their halves as matrices on the truncated Fock space.

Every field is a mode sum

    F(t, x) = sum_i  alpha_i(t, x) a_i + beta_i(t, x) a_i^dag

over canonical ladder matrices.  The annihilation half carries the phase
e^{-i(omega t - p.x)} and the creation half its conjugate; Pi is the time
derivative of Phi taken analytically, and spatial gradients are spectral.

Two convention profiles fix the coefficient kappa(p) in front of the
canonical ladders:

* ``standard``      kappa = 1 / sqrt(2 omega L^d), the usual box normalization
  for which [Phi(x), Pi(y)] = i delta_lattice(x - y);
* ``paper-literal`` kappa = sqrt(dp / omega), i.e. the measure dp/sqrt(omega)
  with the lattice Hida derivative d_p = a_i / sqrt(dp).

The matching chaos-space directions are z_k = kappa * phase / sqrt(w), for
which D_{z_k} acts as kappa * phase * a_i.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import sparse

from .chaos import ChaosExpansion, hida_derivative, hida_dual
from .fock import FockSpace, restrict
from .grid import MomentumGrid

KINDS = ("phi_minus", "phi_plus", "phi", "pi_minus", "pi_plus", "pi", "grad_phi")


@dataclass(frozen=True)
class ConventionProfile:
    name: str

    def __post_init__(self):
        if self.name not in PROFILES:
            raise ValueError(f"unknown profile {self.name!r}; choose from {sorted(PROFILES)}")

    def ladder_coefficient(self, grid: MomentumGrid) -> np.ndarray:
        if self.name == "standard":
            return 1.0 / np.sqrt(2.0 * grid.omega * grid.volume)
        return np.sqrt(grid.measure_weights / grid.omega)

    def direction_amplitude(self, grid: MomentumGrid) -> np.ndarray:
        """Amplitude nu(p) of z_1 and z_3 as grid functions."""
        return self.ladder_coefficient(grid) / np.sqrt(grid.measure_weights)

    def expected_ccr(self, grid: MomentumGrid, coincident: bool) -> complex | None:
        """Constant c in [Pi(x1), Phi(x2)] = c I that the profile is built to give."""
        if self.name != "standard":
            return None
        return -1j * lattice_delta_value(grid) if coincident else 0j


PROFILES = ("standard", "paper-literal")


def profile(name: str | ConventionProfile) -> ConventionProfile:
    return name if isinstance(name, ConventionProfile) else ConventionProfile(name)


def lattice_delta_value(grid: MomentumGrid) -> float:
    """delta_lattice(0) = K^d / L^d."""
    return grid.modes_per_axis**grid.dimension / grid.volume


def _position(x, grid: MomentumGrid, allow_off_lattice: bool) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (grid.dimension,):
        raise ValueError(f"position must have {grid.dimension} components")
    if not allow_off_lattice and not grid.positions.is_on_lattice(x):
        raise ValueError(f"x={x} is not a lattice site; pass allow_off_lattice=True")
    return x


def mode_terms(kind: str, t: float, x, grid: MomentumGrid, prof, *, axis: int = 0,
               omega=None, allow_off_lattice: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """(alpha, beta): coefficients of a_i and a_i^dag in the requested field.

    ``omega`` overrides the dispersion used in the phases and time
    derivatives (only meant for negative controls).
    """
    if kind not in KINDS:
        raise ValueError(f"unknown field kind {kind!r}")
    prof = profile(prof)
    x = _position(x, grid, allow_off_lattice)
    w = grid.omega if omega is None else np.asarray(omega, dtype=float)
    kappa = prof.ladder_coefficient(grid)
    em = kappa * np.exp(-1j * (w * t - grid.points @ x))
    ep = np.conj(em)
    zero = np.zeros(grid.n_modes, dtype=complex)
    if kind == "phi_minus":
        return em, zero
    if kind == "phi_plus":
        return zero, ep
    if kind == "phi":
        return em, ep
    if kind == "pi_minus":
        return -1j * w * em, zero
    if kind == "pi_plus":
        return zero, 1j * w * ep
    if kind == "pi":
        return -1j * w * em, 1j * w * ep
    if not 0 <= axis < grid.dimension:
        raise ValueError(f"gradient axis {axis} out of range")
    pk = grid.points[:, axis]
    return 1j * pk * em, -1j * pk * ep


def ladder_sum(space: FockSpace, alpha, beta) -> np.ndarray:
    out = sparse.csr_matrix((space.dim, space.dim), dtype=complex)
    for i in range(space.grid.n_modes):
        a = space.basis.sparse_annihilator(i)
        if alpha[i] != 0:
            out = out + alpha[i] * a
        if beta[i] != 0:
            out = out + beta[i] * a.T
    return out.toarray()


@dataclass(frozen=True)
class FieldOperator:
    kind: str
    t: float
    x: tuple
    matrix: np.ndarray
    profile: ConventionProfile
    n_max: int
    axis: int = 0
    space: FockSpace | None = field(default=None, repr=False, compare=False)

    def __matmul__(self, other: "FieldOperator") -> np.ndarray:
        return self.matrix @ other.matrix

    @cached_property
    def sparse(self) -> sparse.csr_matrix:
        return sparse.csr_matrix(self.matrix)


def assemble_field(kind: str, t: float, x, grid: MomentumGrid, prof, n_max: int, *,
                   space: FockSpace | None = None, axis: int = 0, omega=None,
                   allow_off_lattice: bool = False) -> FieldOperator:
    prof = profile(prof)
    space = space or FockSpace(grid, n_max)
    alpha, beta = mode_terms(kind, t, x, grid, prof, axis=axis, omega=omega,
                             allow_off_lattice=allow_off_lattice)
    mat = ladder_sum(space, alpha, beta)
    mat.setflags(write=False)
    xt = tuple(float(v) for v in np.atleast_1d(x))
    return FieldOperator(kind, float(t), xt, mat, prof, n_max, axis, space)


def commutator(A: FieldOperator, B: FieldOperator) -> np.ndarray:
    """AB - BA on the sub-basis n <= n_max - 2 where both products are exact."""
    if A.matrix.shape != B.matrix.shape or A.n_max != B.n_max:
        raise ValueError("field operators live on different truncated spaces")
    if A.profile != B.profile:
        raise ValueError("field operators use different convention profiles")
    mask = A.space.basis.exact_mask(2)
    full = (A.sparse @ B.sparse - B.sparse @ A.sparse)[mask][:, mask]
    return full.toarray()


def hermiticity_error(mat: np.ndarray, mask: np.ndarray | None = None) -> float:
    d = mat - mat.conj().T
    if mask is not None:
        d = restrict(d, mask)
    return float(np.max(np.abs(d), initial=0.0))


@dataclass(frozen=True)
class CCRResult:
    is_identity_multiple: bool
    c_measured: complex
    c_predicted: complex
    c_expected: complex | None
    c_claimed: complex
    off_identity: float
    note: str


def ccr_predicted(grid: MomentumGrid, prof, x1, x2) -> complex:
    """Mode-sum oracle: -i sum_p 2 kappa_p^2 omega_p cos(p.(x1 - x2))."""
    prof = profile(prof)
    kappa = prof.ladder_coefficient(grid)
    dx = np.atleast_1d(np.asarray(x1, float)) - np.atleast_1d(np.asarray(x2, float))
    return complex(-2j * np.sum(kappa**2 * grid.omega * np.cos(grid.points @ dx)))


def ccr_check(t: float, x1, x2, grid: MomentumGrid, prof, n_max: int, *,
              space: FockSpace | None = None, tol: float = 1e-12) -> CCRResult:
    """[Pi(t,x1), Phi(t,x2)] against c I, with c measured, predicted and claimed."""
    prof = profile(prof)
    space = space or FockSpace(grid, n_max)
    pi1 = assemble_field("pi", t, x1, grid, prof, n_max, space=space)
    phi2 = assemble_field("phi", t, x2, grid, prof, n_max, space=space)
    comm = commutator(pi1, phi2)
    c = complex(np.mean(np.diag(comm))) if comm.size else 0j
    off = float(np.max(np.abs(comm - c * np.eye(comm.shape[0])), initial=0.0))
    coincident = bool(np.allclose(x1, x2))
    claimed = 1j * lattice_delta_value(grid) if coincident else 0j
    expected = prof.expected_ccr(grid, coincident)
    pred = ccr_predicted(grid, prof, x1, x2)
    if abs(c - claimed) <= 1e-10 * max(1.0, abs(claimed)):
        note = "matches i*delta_lattice"
    elif abs(c + claimed) <= 1e-10 * max(1.0, abs(claimed)):
        note = "equals -i*delta_lattice: opposite sign to the claimed i*delta"
    else:
        ratio = c / claimed if claimed else None
        note = ("nonzero constant where i*delta vanishes" if ratio is None
                else f"differs from i*delta_lattice by factor {ratio.real:.6g}{ratio.imag:+.6g}j")
    return CCRResult(off < tol, c, pred, expected, claimed, off, note)


def kg_residual(grid: MomentumGrid, prof, t: float, x, n_max: int, *, omega=None,
                space: FockSpace | None = None) -> float:
    """max entry of (d_t^2 - laplacian + m^2) Phi(t, x), all derivatives analytic."""
    prof = profile(prof)
    space = space or FockSpace(grid, n_max)
    w = grid.omega if omega is None else np.asarray(omega, dtype=float)
    alpha, beta = mode_terms("phi", t, x, grid, prof, omega=w)
    factor = -(w**2) + np.sum(grid.points**2, axis=1) + grid.mass**2
    mat = ladder_sum(space, factor * alpha, factor * beta)
    return float(np.max(np.abs(mat)))


# ---------------------------------------------------------------------------
# chaos-space realization of the same fields
# ---------------------------------------------------------------------------

def directions(t: float, x, grid: MomentumGrid, prof) -> dict[str, np.ndarray]:
    """z_1..z_4 such that Phi_- = D_{z1}, Phi_+ = D*_{z3}, Pi_- = -i D_{z2}, Pi_+ = i D*_{z4}."""
    prof = profile(prof)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nu = prof.direction_amplitude(grid)
    em = np.exp(-1j * (grid.omega * t - grid.points @ x))
    return {
        "z1": nu * em,
        "z2": nu * grid.omega * em,
        "z3": nu * np.conj(em),
        "z4": nu * grid.omega * np.conj(em),
    }


def chaos_field(kind: str, t: float, x, grid: MomentumGrid, prof):
    """Phi or Pi as a map on chaos expansions, built from D_z and D*_z."""
    z = directions(t, x, grid, prof)
    if kind == "phi":
        return lambda F: hida_derivative(z["z1"], F) + hida_dual(z["z3"], F)
    if kind == "pi":
        return lambda F: (-1j) * hida_derivative(z["z2"], F) + 1j * hida_dual(z["z4"], F)
    raise ValueError(f"chaos realization only covers 'phi' and 'pi', not {kind!r}")


def apply_sequence(ops, F: ChaosExpansion) -> ChaosExpansion:
    """Apply ops right to left, the way a written product acts."""
    for op in reversed(ops):
        F = op(F)
    return F

"""Truncated bosonic Fock space over the grid modes.

Basis states are occupation vectors with total particle number <= n_max,
enumerated sector by sector (n = 0, 1, ..., n_max) and, inside a sector, in
``itertools.combinations_with_replacement`` order of the occupied modes.
The occupation basis is orthonormal, so operator adjoints are plain
conjugate transposes.

Smeared operators carry the weight sqrt(w_i / omega_i) per mode, which is
what makes [A(f), A^dag(g)] = (f, g)_H hold exactly.  Creation out of the
top sector is discarded; identities are only trusted on the "exact
sub-basis" n <= n_max - k for a product of k ladder operators.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from . import _kernels
from .grid import MomentumGrid, sigma_inner

_MAX_CODE = 2**62


class FockBasis:
    """Occupation-number basis of the truncated Fock space."""

    def __init__(self, n_modes: int, n_max: int):
        if n_modes < 1:
            raise ValueError("need at least one mode")
        if n_max < 0:
            raise ValueError("n_max must be >= 0")
        if (n_max + 1) ** n_modes >= _MAX_CODE:
            raise ValueError(
                f"basis with {n_modes} modes and n_max={n_max} is too large to index"
            )
        self.n_modes = n_modes
        self.n_max = n_max
        rows = []
        for n in range(n_max + 1):
            for occupied in itertools.combinations_with_replacement(range(n_modes), n):
                occ = np.zeros(n_modes, dtype=np.int64)
                for i in occupied:
                    occ[i] += 1
                rows.append(occ)
        self.states = np.array(rows, dtype=np.int64).reshape(len(rows), n_modes)
        self.states.setflags(write=False)
        self.totals = self.states.sum(axis=1)
        self.totals.setflags(write=False)
        self._powers = (n_max + 1) ** np.arange(n_modes, dtype=np.int64)
        codes = self.states @ self._powers
        self._order = np.argsort(codes).astype(np.int64)
        self._codes_sorted = codes[self._order]
        self._ladder_cache: dict[int, np.ndarray] = {}
        self._sparse_cache: dict[int, sparse.csr_matrix] = {}

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def __len__(self) -> int:
        return self.dim

    def index(self, occupation) -> int:
        occ = np.asarray(occupation, dtype=np.int64)
        if occ.shape != (self.n_modes,) or occ.min() < 0 or occ.sum() > self.n_max:
            raise KeyError(f"occupation {tuple(occupation)} not in basis")
        code = int(occ @ self._powers)
        pos = int(np.searchsorted(self._codes_sorted, code))
        return int(self._order[pos])

    def exact_mask(self, k: int) -> np.ndarray:
        """Boolean mask of states with n <= n_max - k."""
        return self.totals <= self.n_max - k

    def annihilator(self, mode: int) -> np.ndarray:
        """Canonical a_mode as a dense real matrix ([a_i, a_i^dag] = 1 below the top)."""
        if not 0 <= mode < self.n_modes:
            raise IndexError(f"mode index {mode} out of range")
        mat = self._ladder_cache.get(mode)
        if mat is None:
            rows, cols, vals = _kernels.ladder_entries(
                self.states, self._codes_sorted, self._order, self._powers, mode
            )
            mat = np.zeros((self.dim, self.dim))
            mat[rows, cols] = vals
            mat.setflags(write=False)
            self._ladder_cache[mode] = mat
        return mat

    def sparse_annihilator(self, mode: int) -> sparse.csr_matrix:
        if not 0 <= mode < self.n_modes:
            raise IndexError(f"mode index {mode} out of range")
        mat = self._sparse_cache.get(mode)
        if mat is None:
            rows, cols, vals = _kernels.ladder_entries(
                self.states, self._codes_sorted, self._order, self._powers, mode
            )
            mat = sparse.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))
            self._sparse_cache[mode] = mat
        return mat

    def creator(self, mode: int) -> np.ndarray:
        return self.annihilator(mode).T

    def number(self, mode: int) -> np.ndarray:
        return np.diag(self.states[:, mode].astype(float))

    def identity(self) -> np.ndarray:
        return np.eye(self.dim)


@dataclass
class FockVector:
    """Amplitudes over a :class:`FockBasis`."""

    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.basis.dim,):
            raise ValueError("amplitude vector does not match basis dimension")

    @property
    def n_max(self) -> int:
        return self.basis.n_max

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "FockVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def sector(self, n: int) -> np.ndarray:
        return np.where(self.basis.totals == n, self.amplitudes, 0)

    def as_dict(self, atol: float = 0.0) -> dict[tuple[int, ...], complex]:
        return {
            tuple(int(v) for v in occ): complex(a)
            for occ, a in zip(self.basis.states, self.amplitudes)
            if abs(a) > atol
        }

    def __add__(self, other):
        return FockVector(self.basis, self.amplitudes + other.amplitudes)

    def __sub__(self, other):
        return FockVector(self.basis, self.amplitudes - other.amplitudes)

    def __rmul__(self, c):
        return FockVector(self.basis, c * self.amplitudes)


class FockSpace:
    """Truncated Fock space attached to a momentum grid."""

    def __init__(self, grid: MomentumGrid, n_max: int):
        self.grid = grid
        self.basis = FockBasis(grid.n_modes, n_max)

    @property
    def n_max(self) -> int:
        return self.basis.n_max

    @property
    def dim(self) -> int:
        return self.basis.dim

    @cached_property
    def mode_weights(self) -> np.ndarray:
        return np.sqrt(self.grid.measure_weights / self.grid.omega)

    def _check(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=complex)
        if f.shape != (self.grid.n_modes,):
            raise ValueError(f"grid function must have shape ({self.grid.n_modes},)")
        return f

    def creation_matrix(self, f) -> np.ndarray:
        """Matrix of A^dag(f) = sum_i sqrt(w_i/omega_i) f_i a_i^dag."""
        c = self.mode_weights * self._check(f)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i in np.nonzero(c)[0]:
            out += c[i] * self.basis.creator(i)
        return out

    def annihilation_matrix(self, f) -> np.ndarray:
        """Matrix of A(f), the adjoint of A^dag(f) (conjugate-linear in f)."""
        c = self.mode_weights * np.conj(self._check(f))
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i in np.nonzero(c)[0]:
            out += c[i] * self.basis.annihilator(i)
        return out

    def vacuum(self) -> FockVector:
        amps = np.zeros(self.dim, dtype=complex)
        amps[0] = 1.0
        return FockVector(self.basis, amps)

    def one_particle(self, f) -> FockVector:
        """A^dag(f) applied to the vacuum."""
        return apply_creation(f, self.vacuum(), self)

    def point_ladder(self, i: int, dagger: bool = False) -> np.ndarray:
        """a_p = A(delta_p) with delta_p the lattice delta 1/w_i at mode i."""
        if not 0 <= i < self.grid.n_modes:
            raise IndexError(f"mode index {i} out of range")
        scale = self.mode_weights[i] / self.grid.measure_weights[i]
        op = self.basis.creator(i) if dagger else self.basis.annihilator(i)
        return scale * op

    def point_ccr_constant(self, i: int, j: int) -> float:
        """c_ij in [a_{p_i}, a_{p_j}^dag] = c_ij I, i.e. (delta_i, delta_j)_H."""
        if i != j:
            return 0.0
        return float(1.0 / (self.grid.measure_weights[i] * self.grid.omega[i]))


def vacuum(grid: MomentumGrid, n_max: int) -> FockVector:
    return FockSpace(grid, n_max).vacuum()


def apply_creation(f, F: FockVector, space: FockSpace) -> FockVector:
    return FockVector(F.basis, space.creation_matrix(f) @ F.amplitudes)


def apply_annihilation(f, F: FockVector, space: FockSpace) -> FockVector:
    return FockVector(F.basis, space.annihilation_matrix(f) @ F.amplitudes)


def point_ladder(i: int, dagger: bool, grid: MomentumGrid, n_max: int) -> np.ndarray:
    return FockSpace(grid, n_max).point_ladder(i, dagger)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def restrict(mat: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Sub-block on the states selected by ``mask`` (rows and columns)."""
    return mat[np.ix_(mask, mask)]


def smeared_ccr_error(space: FockSpace, f, g) -> float:
    """max |[A(f), A^dag(g)] - (f,g)_H I| on sectors n <= n_max - 1."""
    comm = commutator(space.annihilation_matrix(f), space.creation_matrix(g))
    target = sigma_inner(f, g, space.grid) * space.basis.identity()
    mask = space.basis.exact_mask(1)
    return float(np.max(np.abs(restrict(comm - target, mask))))

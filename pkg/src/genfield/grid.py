"""Periodic-box momentum lattice and its dual position lattice."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PositionLattice:
    """Sites x_j = j L / K per axis, j in [0, K)."""

    dimension: int
    modes_per_axis: int
    box_length: float
    sites: np.ndarray = field(repr=False)

    @property
    def cell_weight(self) -> float:
        return (self.box_length / self.modes_per_axis) ** self.dimension

    def __len__(self) -> int:
        return self.sites.shape[0]

    def site(self, index) -> np.ndarray:
        """Site from a flat index or a per-axis integer tuple."""
        if np.ndim(index) == 0:
            return self.sites[int(index)]
        j = np.asarray(index, dtype=float)
        return j * self.box_length / self.modes_per_axis

    def is_on_lattice(self, x, atol: float = 1e-9) -> bool:
        h = self.box_length / self.modes_per_axis
        u = np.atleast_1d(np.asarray(x, dtype=float)) / h
        return bool(np.all(np.abs(u - np.round(u)) < atol))


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform momentum modes p = (2 pi / L) n, |n_k| <= (K-1)/2.

    Mode order is the lexicographic order of the integer labels n, so the
    zero mode sits in the middle and ``parity[i]`` is the index of -p_i.
    """

    dimension: int
    modes_per_axis: int
    box_length: float
    mass: float
    labels: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    measure_weights: np.ndarray = field(repr=False)
    parity: np.ndarray = field(repr=False)
    positions: PositionLattice = field(repr=False)

    @property
    def n_modes(self) -> int:
        return self.points.shape[0]

    @property
    def dp(self) -> float:
        return (2.0 * np.pi / self.box_length) ** self.dimension

    @property
    def volume(self) -> float:
        return self.box_length ** self.dimension

    @property
    def zero_mode(self) -> int:
        return self.n_modes // 2

    def plane_waves(self, x) -> np.ndarray:
        """e^{i p_i . x} for every mode i."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.exp(1j * (self.points @ x))


def build_grid(d: int = 1, K: int = 3, L: float = 2 * np.pi, m: float = 1.0) -> MomentumGrid:
    if d not in (1, 3):
        raise ValueError(f"dimension must be 1 or 3, got {d}")
    if int(K) != K or K < 1 or K % 2 == 0:
        raise ValueError(f"modes_per_axis must be an odd integer >= 1, got {K}")
    if not L > 0:
        raise ValueError(f"box_length must be positive, got {L}")
    if not m > 0:
        raise ValueError(f"mass must be positive, got {m}")
    K = int(K)
    half = (K - 1) // 2
    axis = range(-half, half + 1)
    labels = np.array(list(itertools.product(axis, repeat=d)), dtype=np.int64)
    points = (2.0 * np.pi / L) * labels
    omega = np.sqrt(np.sum(points**2, axis=1) + m * m)
    weights = np.full(len(labels), (2.0 * np.pi / L) ** d)
    # lexicographic labels: -n sits at the mirrored index
    parity = np.arange(len(labels))[::-1].copy()
    site_labels = np.array(list(itertools.product(range(K), repeat=d)), dtype=float)
    positions = PositionLattice(d, K, float(L), site_labels * L / K)
    for arr in (labels, points, omega, weights, parity, positions.sites):
        arr.setflags(write=False)
    return MomentumGrid(d, K, float(L), float(m), labels, points, omega, weights, parity, positions)


def sigma_inner(f, g, grid: MomentumGrid) -> complex:
    """(f, g)_H = sum_i w_i conj(f_i) g_i / omega_i."""
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape != (grid.n_modes,) or g.shape != (grid.n_modes,):
        raise ValueError(f"grid functions must have shape ({grid.n_modes},)")
    return complex(np.sum(grid.measure_weights * np.conj(f) * g / grid.omega))


def pair(u, v, grid: MomentumGrid) -> complex:
    """Bilinear dual pairing <u, v> = sum_i w_i u_i v_i (no conjugation)."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != (grid.n_modes,) or v.shape != (grid.n_modes,):
        raise ValueError(f"grid functions must have shape ({grid.n_modes},)")
    return complex(np.sum(grid.measure_weights * u * v))


def lattice_delta(i: int, grid: MomentumGrid) -> np.ndarray:
    """Grid function with <lattice_delta(i), F> = F_i under the dual pairing."""
    if not 0 <= i < grid.n_modes:
        raise IndexError(f"mode index {i} out of range for {grid.n_modes} modes")
    z = np.zeros(grid.n_modes, dtype=complex)
    z[i] = 1.0 / grid.measure_weights[i]
    return z


def completeness_sum(grid: MomentumGrid, j: int, k: int) -> complex:
    """sum_i e^{i p_i . (x_j - x_k)}, equal to K^d when j == k and 0 otherwise."""
    xs = grid.positions.sites
    return complex(np.sum(grid.plane_waves(xs[j] - xs[k])))

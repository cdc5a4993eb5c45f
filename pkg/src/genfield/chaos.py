"""Chaos expansions, Wick tensors and the Hida derivative on a momentum grid.

A chaos expansion is the sequence of symmetric coefficient tensors
(f_0, f_1, ..., f_N), f_n of rank n over the grid modes, representing

    f(zeta) = sum_n < :zeta^{(x)n}: , f_n >.

All pairings are the bilinear dual pairing <u, v> = sum_i w_i u_i v_i (and
its tensor powers); nothing here conjugates.  The Wick tensors come from the
trace-subtraction recursion with trace kernel tau_ij = delta_ij / w_i, which
is the kernel compatible with that pairing: <tau, xi (x) eta> = <xi, eta>.

Conversion to the occupation basis uses the pairing-orthonormal modes
e_i = lattice_delta(i) * sqrt(w_i); under it D_{e_i} is the canonical a_i,
D*_{e_i} is a_i^dag, and

    dual_pairing(F, f) = sum_occ to_fock(F)[occ] * to_fock(f)[occ].
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fock import FockBasis
from .grid import MomentumGrid, pair


def symmetrize(t: np.ndarray) -> np.ndarray:
    """Average of ``t`` over all axis permutations."""
    n = t.ndim
    if n < 2:
        return np.array(t, dtype=complex)
    acc = np.zeros(t.shape, dtype=complex)
    perms = list(itertools.permutations(range(n)))
    for p in perms:
        acc += np.transpose(t, p)
    return acc / len(perms)


def is_symmetric(t: np.ndarray, atol: float = 0.0) -> bool:
    for a, b in itertools.combinations(range(t.ndim), 2):
        if np.max(np.abs(t - np.swapaxes(t, a, b)), initial=0.0) > atol:
            return False
    return True


def tensor_power_weights(grid: MomentumGrid, n: int) -> np.ndarray:
    """w^{(x)n} as a rank-n array."""
    out = np.ones(())
    for _ in range(n):
        out = np.multiply.outer(out, grid.measure_weights)
    return out


def tensor_pair(a: np.ndarray, b: np.ndarray, grid: MomentumGrid) -> complex:
    """Bilinear <a, b> of two rank-n tensors under the weights w^{(x)n}."""
    if a.shape != b.shape:
        raise ValueError(f"rank mismatch {a.shape} vs {b.shape}")
    return complex(np.sum(tensor_power_weights(grid, a.ndim) * a * b))


@dataclass
class ChaosExpansion:
    grid: MomentumGrid
    tensors: list

    def __post_init__(self):
        m = self.grid.n_modes
        ts = []
        for n, t in enumerate(self.tensors):
            t = np.asarray(t, dtype=complex)
            if t.shape != (m,) * n:
                raise ValueError(f"sector {n} must have shape {(m,) * n}, got {t.shape}")
            ts.append(t)
        self.tensors = ts

    @property
    def n_max(self) -> int:
        return len(self.tensors) - 1

    def __getitem__(self, n: int) -> np.ndarray:
        return self.tensors[n]

    @classmethod
    def zeros(cls, grid: MomentumGrid, n_max: int) -> "ChaosExpansion":
        m = grid.n_modes
        return cls(grid, [np.zeros((m,) * n, dtype=complex) for n in range(n_max + 1)])

    @classmethod
    def constant(cls, grid: MomentumGrid, n_max: int, c: complex) -> "ChaosExpansion":
        out = cls.zeros(grid, n_max)
        out.tensors[0] = np.asarray(c, dtype=complex)
        return out

    @classmethod
    def from_sector(cls, grid: MomentumGrid, n_max: int, n: int, t) -> "ChaosExpansion":
        out = cls.zeros(grid, n_max)
        out.tensors[n] = np.asarray(t, dtype=complex)
        return out

    def _same(self, other: "ChaosExpansion"):
        if other.grid is not self.grid and other.grid.n_modes != self.grid.n_modes:
            raise ValueError("chaos expansions live on different grids")
        if other.n_max != self.n_max:
            raise ValueError("chaos expansions have different truncation")

    def __add__(self, other):
        self._same(other)
        return ChaosExpansion(self.grid, [a + b for a, b in zip(self.tensors, other.tensors)])

    def __sub__(self, other):
        self._same(other)
        return ChaosExpansion(self.grid, [a - b for a, b in zip(self.tensors, other.tensors)])

    def __mul__(self, c):
        return ChaosExpansion(self.grid, [c * t for t in self.tensors])

    __rmul__ = __mul__

    def is_symmetric(self, atol: float = 0.0) -> bool:
        return all(is_symmetric(t, atol) for t in self.tensors)

    def max_abs_diff(self, other: "ChaosExpansion", upto: int | None = None) -> float:
        self._same(other)
        top = self.n_max if upto is None else upto
        return max(
            float(np.max(np.abs(a - b), initial=0.0))
            for a, b in zip(self.tensors[: top + 1], other.tensors[: top + 1])
        )


def random_chaos(grid: MomentumGrid, n_max: int, rng: np.random.Generator,
                 degree: int | None = None, complex_valued: bool = True) -> ChaosExpansion:
    """Random symmetric coefficients in sectors 0..degree (default n_max)."""
    m = grid.n_modes
    top = n_max if degree is None else degree
    ts = []
    for n in range(n_max + 1):
        if n > top:
            ts.append(np.zeros((m,) * n, dtype=complex))
            continue
        t = rng.standard_normal((m,) * n)
        if complex_valued:
            t = t + 1j * rng.standard_normal((m,) * n)
        ts.append(symmetrize(np.asarray(t)))
    return ChaosExpansion(grid, ts)


def random_grid_function(grid: MomentumGrid, rng: np.random.Generator,
                         complex_valued: bool = True) -> np.ndarray:
    z = rng.standard_normal(grid.n_modes)
    if complex_valued:
        z = z + 1j * rng.standard_normal(grid.n_modes)
    return z.astype(complex)


class WickEvaluator:
    """Evaluates chaos expansions through the Wick-tensor recursion

        :zeta^{(x)n}: = zeta (x)^ :zeta^{(x)(n-1)}: - (n-1) tau (x)^ :zeta^{(x)(n-2)}:.
    """

    def __init__(self, grid: MomentumGrid):
        self.grid = grid
        self.tau = np.diag(1.0 / grid.measure_weights)
        self._cache_key = None
        self._cache: list = []

    def wick_tensors(self, zeta, n_max: int) -> list:
        zeta = np.asarray(zeta, dtype=complex)
        key = (zeta.tobytes(), n_max)
        if key == self._cache_key:
            return self._cache
        ts = [np.asarray(1.0 + 0j)]
        if n_max >= 1:
            ts.append(zeta.copy())
        for n in range(2, n_max + 1):
            t = symmetrize(np.multiply.outer(zeta, ts[n - 1]))
            t -= (n - 1) * symmetrize(np.multiply.outer(self.tau, ts[n - 2]))
            ts.append(t)
        self._cache_key, self._cache = key, ts
        return ts

    def evaluate(self, f: ChaosExpansion, zeta) -> complex:
        ws = self.wick_tensors(zeta, f.n_max)
        return complex(sum(tensor_pair(w, t, self.grid) for w, t in zip(ws, f.tensors)))


def evaluate(f: ChaosExpansion, zeta) -> complex:
    return WickEvaluator(f.grid).evaluate(f, zeta)


def contract1(z, t: np.ndarray, grid: MomentumGrid) -> np.ndarray:
    """Symmetric contraction z (x)^_1 t of a grid function against one slot.

    For symmetric ``t`` this is sum_i w_i z_i t[i, ...]; for a general tensor
    the slot contractions are averaged and the result is symmetrized.
    """
    t = np.asarray(t, dtype=complex)
    n = t.ndim
    if n == 0:
        raise ValueError("cannot contract a rank-0 tensor")
    wz = grid.measure_weights * np.asarray(z, dtype=complex)
    acc = np.zeros((grid.n_modes,) * (n - 1), dtype=complex)
    for slot in range(n):
        acc += np.tensordot(wz, t, axes=([0], [slot]))
    return symmetrize(acc / n)


def hida_derivative(z, f: ChaosExpansion) -> ChaosExpansion:
    """(D_z f)_{n-1} = n z (x)^_1 f_n; the top sector becomes zero."""
    out = ChaosExpansion.zeros(f.grid, f.n_max)
    for n in range(1, f.n_max + 1):
        out.tensors[n - 1] = n * contract1(z, f.tensors[n], f.grid)
    return out


def hida_dual(z, F: ChaosExpansion) -> ChaosExpansion:
    """(D*_z F)_{n+1} = sym(z (x) F_n); the image of the top sector is dropped."""
    z = np.asarray(z, dtype=complex)
    out = ChaosExpansion.zeros(F.grid, F.n_max)
    for n in range(F.n_max):
        out.tensors[n + 1] = symmetrize(np.multiply.outer(z, F.tensors[n]))
    return out


def compose_dual_then_deriv(eta, xi, F: ChaosExpansion) -> ChaosExpansion:
    """D_eta D*_xi F evaluated sector-wise as (n+1) eta (x)^_1 (xi (x)^ F_n).

    Unlike the sequential composition this keeps the top sector, because the
    intermediate rank n_max + 1 tensor is formed explicitly.
    """
    xi = np.asarray(xi, dtype=complex)
    out = ChaosExpansion.zeros(F.grid, F.n_max)
    for n in range(F.n_max + 1):
        up = symmetrize(np.multiply.outer(xi, F.tensors[n]))
        out.tensors[n] = (n + 1) * contract1(eta, up, F.grid)
    return out


def dual_pairing(F: ChaosExpansion, f: ChaosExpansion) -> complex:
    """<<F, f>> = sum_n n! <F_n, f_n>."""
    F._same(f)
    return complex(sum(math.factorial(n) * tensor_pair(a, b, F.grid)
                       for n, (a, b) in enumerate(zip(F.tensors, f.tensors))))


# ---------------------------------------------------------------------------
# occupation-basis conversion
# ---------------------------------------------------------------------------

def _representative(occ) -> tuple[int, ...]:
    return tuple(int(i) for i in np.repeat(np.arange(len(occ)), occ))


def _occupation_factor(occ, grid: MomentumGrid) -> float:
    n = int(np.sum(occ))
    rep = _representative(occ)
    fact = math.factorial(n) / math.sqrt(math.prod(math.factorial(int(k)) for k in occ))
    return fact * math.prod(math.sqrt(grid.measure_weights[i]) for i in rep)


def to_fock(f: ChaosExpansion, basis: FockBasis | None = None) -> np.ndarray:
    """Occupation amplitudes n!/sqrt(prod n_i!) * prod sqrt(w) * f_n[rep]."""
    basis = basis or FockBasis(f.grid.n_modes, f.n_max)
    amps = np.zeros(basis.dim, dtype=complex)
    for k, occ in enumerate(basis.states):
        rep = _representative(occ)
        amps[k] = _occupation_factor(occ, f.grid) * f.tensors[len(rep)][rep]
    return amps


def from_fock(amps, grid: MomentumGrid, n_max: int, basis: FockBasis | None = None) -> ChaosExpansion:
    basis = basis or FockBasis(grid.n_modes, n_max)
    amps = np.asarray(amps, dtype=complex)
    out = ChaosExpansion.zeros(grid, n_max)
    for k, occ in enumerate(basis.states):
        rep = _representative(occ)
        value = amps[k] / _occupation_factor(occ, grid)
        t = out.tensors[len(rep)]
        if len(rep) == 0:
            out.tensors[0] = np.asarray(value)
            continue
        for perm in set(itertools.permutations(rep)):
            t[perm] = value
    return out


def operator_matrix(op: Callable[[ChaosExpansion], ChaosExpansion], grid: MomentumGrid,
                    n_max: int) -> np.ndarray:
    """Matrix of a linear chaos-space map in the occupation basis."""
    basis = FockBasis(grid.n_modes, n_max)
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    for j in range(basis.dim):
        e = np.zeros(basis.dim, dtype=complex)
        e[j] = 1.0
        mat[:, j] = to_fock(op(from_fock(e, grid, n_max, basis)), basis)
    return mat


# ---------------------------------------------------------------------------
# numerical checks
# ---------------------------------------------------------------------------

def gateaux_errors(f: ChaosExpansion, zeta, z, eps: Sequence[float]) -> np.ndarray:
    """|forward difference - D_z f(zeta)| for each step size."""
    ev = WickEvaluator(f.grid)
    zeta = np.asarray(zeta, dtype=complex)
    z = np.asarray(z, dtype=complex)
    base = ev.evaluate(f, zeta)
    exact = ev.evaluate(hida_derivative(z, f), zeta)
    errs = []
    for e in eps:
        fd = (ev.evaluate(f, zeta + e * z) - base) / e
        errs.append(abs(fd - exact))
    return np.array(errs)


def gateaux_slope(f: ChaosExpansion, zeta, z,
                  eps: Sequence[float] = (1e-2, 1e-3, 1e-4, 1e-5)) -> float:
    """Log-log slope of the forward-difference error against the step size."""
    errs = gateaux_errors(f, zeta, z, eps)
    return float(np.polyfit(np.log(eps), np.log(errs), 1)[0])


def leibniz_check(z, f1: ChaosExpansion, f2: ChaosExpansion, zeta, eps_fd: float = 1e-4) -> float:
    """|D_z(f1 f2)(zeta) - (D_z f1) f2 - f1 (D_z f2)| with the product side differenced.

    The left side uses a central difference of the pointwise product,
    Richardson-extrapolated over steps eps_fd and eps_fd / 2.
    """
    ev1 = WickEvaluator(f1.grid)
    ev2 = WickEvaluator(f2.grid)
    zeta = np.asarray(zeta, dtype=complex)
    z = np.asarray(z, dtype=complex)

    def prod(s):
        return ev1.evaluate(f1, zeta + s * z) * ev2.evaluate(f2, zeta + s * z)

    def central(h):
        return (prod(h) - prod(-h)) / (2 * h)

    lhs = (4 * central(eps_fd / 2) - central(eps_fd)) / 3
    rhs = (ev1.evaluate(hida_derivative(z, f1), zeta) * ev2.evaluate(f2, zeta)
           + ev1.evaluate(f1, zeta) * ev2.evaluate(hida_derivative(z, f2), zeta))
    return float(abs(lhs - rhs))


def adjoint_residual(z, F: ChaosExpansion, f: ChaosExpansion) -> float:
    """|<<D*_z F, f>> - <<F, D_z f>>| with F's top sector cleared (no truncation loss)."""
    F = ChaosExpansion(F.grid, F.tensors[:-1] + [np.zeros_like(F.tensors[-1])])
    return float(abs(dual_pairing(hida_dual(z, F), f) - dual_pairing(F, hida_derivative(z, f))))


def ccr_matrix_error(eta, xi, grid: MomentumGrid, n_max: int) -> float:
    """max |[D_eta, D*_xi] - <eta, xi> I| on sectors n <= n_max - 1."""
    basis = FockBasis(grid.n_modes, n_max)
    a = operator_matrix(lambda F: compose_dual_then_deriv(eta, xi, F), grid, n_max)
    b = operator_matrix(lambda F: hida_dual(xi, hida_derivative(eta, F)), grid, n_max)
    diff = a - b - pair(eta, xi, grid) * np.eye(basis.dim)
    mask = basis.exact_mask(1)
    return float(np.max(np.abs(diff[np.ix_(mask, mask)])))

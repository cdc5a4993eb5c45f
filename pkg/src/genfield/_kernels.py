"""Hot inner loops, compiled with numba when available.

Set ``GENFIELD_NO_NUMBA=1`` to force the pure-numpy path (useful for
debugging and for checking that both paths agree).  The public names in
this module always point at the selected implementation; the ``*_numpy``
and ``*_numba`` variants are kept importable so tests and the benchmark can
compare them directly.
"""
from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("GENFIELD_NO_NUMBA", "0") in ("", "0")


# ---------------------------------------------------------------------------
# ladder matrix assembly
# ---------------------------------------------------------------------------

def ladder_entries_numpy(states, codes_sorted, order, powers, mode):
    """(rows, cols, vals) of the canonical annihilator a_mode.

    ``states`` is the (D, M) occupation table, ``codes_sorted``/``order`` the
    argsorted integer encodings of its rows, ``powers`` the per-mode place
    values of the encoding.
    """
    occ = states[:, mode]
    cols = np.nonzero(occ > 0)[0]
    target = states[cols] @ powers - powers[mode]
    pos = np.searchsorted(codes_sorted, target)
    rows = order[pos]
    vals = np.sqrt(occ[cols].astype(np.float64))
    return rows.astype(np.int64), cols.astype(np.int64), vals


def _ladder_entries_loop(states, codes_sorted, order, powers, mode):
    dim = states.shape[0]
    n_modes = states.shape[1]
    count = 0
    for j in range(dim):
        if states[j, mode] > 0:
            count += 1
    rows = np.empty(count, dtype=np.int64)
    cols = np.empty(count, dtype=np.int64)
    vals = np.empty(count, dtype=np.float64)
    k = 0
    for j in range(dim):
        n = states[j, mode]
        if n > 0:
            code = 0
            for i in range(n_modes):
                code += states[j, i] * powers[i]
            code -= powers[mode]
            pos = np.searchsorted(codes_sorted, code)
            rows[k] = order[pos]
            cols[k] = j
            vals[k] = np.sqrt(np.float64(n))
            k += 1
    return rows, cols, vals


# ---------------------------------------------------------------------------
# weighted sup used by Colombeau seminorms
# ---------------------------------------------------------------------------

def weighted_sup_numpy(x, derivs, q, l):
    """sup_x (1+|x|)^q max_{k<=l} |derivs[k, x]| over the sample points."""
    weight = (1.0 + np.abs(x)) ** q
    return float(np.max(weight * np.max(np.abs(derivs[: l + 1]), axis=0)))


def _weighted_sup_loop(x, derivs, q, l):
    # q is an integer weight exponent; repeated multiplication avoids pow()
    best = 0.0
    for j in range(x.shape[0]):
        m = 0.0
        for k in range(l + 1):
            v = abs(derivs[k, j])
            if v > m or v != v:
                m = v
                if v != v:
                    break
        base = 1.0 + abs(x[j])
        w = 1.0
        for _ in range(abs(q)):
            w *= base
        val = m * w if q >= 0 else m / w
        if val > best or val != val:
            best = val
            if val != val:
                break
    return best


if HAVE_NUMBA:
    ladder_entries_numba = njit(cache=True)(_ladder_entries_loop)
    weighted_sup_numba = njit(cache=True)(_weighted_sup_loop)
else:  # pragma: no cover
    ladder_entries_numba = _ladder_entries_loop
    weighted_sup_numba = _weighted_sup_loop


if USE_NUMBA:
    ladder_entries = ladder_entries_numba

    def weighted_sup(x, derivs, q, l):
        return float(weighted_sup_numba(np.ascontiguousarray(x, dtype=np.float64),
                                        np.ascontiguousarray(derivs, dtype=np.float64),
                                        int(q), int(l)))
else:
    ladder_entries = ladder_entries_numpy
    weighted_sup = weighted_sup_numpy


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"

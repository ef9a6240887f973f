"""Spectral-norm kernel core with backend selection.

Two interchangeable backends implement the hot inner loops: a compiled
Cython extension (``_cy``) and a numpy fallback (``_py``). Set
ROE_KERNELS=py or ROE_KERNELS=cy to force one; by default both are used
with a size crossover, since the fused compiled loops win on the small
working sets the residual sweeps hammer while BLAS-backed numpy wins on
large matrices (see ``benchmarks/bench_kernels.py``).

The certified entry points below add the safety net around the raw power
iteration: a cheap lower-bound guard (the norm dominates every row and
column 2-norm) and a dense Hermitian eigendecomposition fallback on
non-convergence or guard failure.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import NumericalFailure
from . import _py

_FORCED = os.environ.get("ROE_KERNELS", "").strip().lower()

if _FORCED == "py":
    _cy = None
elif _FORCED == "cy":
    from . import _cy  # ImportError here is intentional: cy was demanded
else:
    try:
        from . import _cy
    except ImportError:
        _cy = None

BACKEND = "py" if _cy is None else ("cy" if _FORCED == "cy" else "auto")

# Working sets below this many entries run the compiled loops; above it,
# BLAS-backed numpy is faster (measured crossover is around n = 128).
_CROSSOVER = 128 * 128

# Guard slack: power iteration is asked for 1e-9 relative accuracy, so a
# result more than ~1e-6 below a known lower bound means a bad start vector.
_GUARD = 1e-6


def _backend_for(work_entries: int):
    if _cy is None:
        return _py
    if _FORCED == "cy" or work_entries < _CROSSOVER:
        return _cy
    return _py


def _as_c128(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.complex128)


def _eig_norm(matrix: np.ndarray) -> float:
    """Certified fallback: largest singular value via the Gram spectrum."""
    nr, nc = matrix.shape
    if nr == 0 or nc == 0:
        return 0.0
    gram = matrix.conj().T @ matrix if nc <= nr else matrix @ matrix.conj().T
    try:
        top = float(np.linalg.eigvalsh(gram)[-1])
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    return float(np.sqrt(max(top, 0.0)))


def _lower_bound(matrix: np.ndarray) -> float:
    if matrix.size == 0:
        return 0.0
    sq = np.abs(matrix) ** 2
    return float(np.sqrt(max(sq.sum(axis=0).max(), sq.sum(axis=1).max())))


def _certify(matrix: np.ndarray, value: float, converged: bool) -> float:
    if converged and value >= _lower_bound(matrix) * (1.0 - _GUARD):
        return value
    return _eig_norm(matrix)


def spectral_norm(a) -> float:
    """Largest singular value, relative accuracy 1e-9."""
    m = _as_c128(a)
    value, ok = _backend_for(m.size).power_norm(m)
    return _certify(m, value, ok)


def masked_spectral_norm(a, rows, cols) -> float:
    """Spectral norm of the compression a[rows][:, cols]."""
    m = _as_c128(a)
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    impl = _backend_for(len(rows) * len(cols))
    value, ok = impl.power_norm_sub(m, rows, cols)
    if ok:
        sub = m[np.ix_(rows, cols)]
        if value >= _lower_bound(sub) * (1.0 - _GUARD):
            return value
        return _eig_norm(sub)
    return _eig_norm(m[np.ix_(rows, cols)])


def band_residual_norm(a, dist, rmin) -> float:
    """Spectral norm of a with all entries at distance < rmin zeroed."""
    m = _as_c128(a)
    d = np.ascontiguousarray(dist, dtype=np.float64)
    value, ok = _backend_for(m.size).power_norm_band(m, d, float(rmin))
    if rmin <= 0:
        far = m
    else:
        far = np.where(d >= rmin, m, 0.0)
    if ok and value >= _lower_bound(far) * (1.0 - _GUARD):
        return value
    return _eig_norm(far)

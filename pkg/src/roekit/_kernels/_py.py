"""numpy implementations of the spectral-norm kernels.

Fallback backend, used when the compiled extension is unavailable or when
ROE_KERNELS=py. Semantics are kept bit-for-bit compatible with the Cython
backend: same start vector, same update, same stopping rule.
"""

from __future__ import annotations

import numpy as np

TOL = 1e-9
MAX_ITER = 10000


def power_norm(a: np.ndarray) -> tuple[float, bool]:
    """Largest singular value by power iteration on the Gram operator.

    Deterministic all-ones start. Returns (value, converged); the caller
    is responsible for a certified fallback when converged is False.

    The Rayleigh-quotient estimate is nondecreasing, and its increments
    decay geometrically with the squared singular-value gap, so the
    remaining error is extrapolated as diff * q / (1 - q) from the
    observed increment ratio q. Near-degenerate top singular values give
    q ~ 1 and exhaust the iteration budget instead of stopping early.
    """
    nr, nc = a.shape
    if nr == 0 or nc == 0:
        return 0.0, True
    ah = np.ascontiguousarray(a.conj().T)
    x = np.full(nc, 1.0 / np.sqrt(nc), dtype=np.complex128)
    sigma_prev = -1.0
    diff_1 = -1.0  # most recent increment
    diff_2 = -1.0  # the one before it
    hits = 0
    for _ in range(MAX_ITER):
        y = a @ x
        sigma = float(np.linalg.norm(y))
        if sigma == 0.0:
            return 0.0, True
        if sigma_prev >= 0.0:
            diff = sigma - sigma_prev
            if diff <= 0.0:
                return sigma, True
            if diff_1 > 0.0:
                # conservative decay ratio: the raw increment ratio can
                # temporarily dip below the asymptotic rate
                q = diff / diff_1
                if diff_2 > 0.0:
                    q = max(q, diff_1 / diff_2)
                if q < 1.0 and diff * q / (1.0 - q) <= TOL * sigma:
                    hits += 1
                    if hits >= 2:
                        return sigma, True
                else:
                    hits = 0
            diff_2 = diff_1
            diff_1 = diff
        sigma_prev = sigma
        z = ah @ y
        x = z / np.linalg.norm(z)
    return sigma_prev, False


def power_norm_sub(a, rows, cols) -> tuple[float, bool]:
    """power_norm of the submatrix a[rows][:, cols] (compression norm)."""
    if len(rows) == 0 or len(cols) == 0:
        return 0.0, True
    sub = np.ascontiguousarray(a[np.ix_(rows, cols)])
    return power_norm(sub)


def power_norm_band(a, dist, rmin) -> tuple[float, bool]:
    """power_norm of a with every entry at distance < rmin zeroed."""
    if rmin <= 0:
        return power_norm(np.ascontiguousarray(a))
    far = np.where(dist >= rmin, a, 0.0)
    return power_norm(np.ascontiguousarray(far))

"""Kernel backends: correctness against dense SVD and cross-backend parity."""

import numpy as np
import pytest

from roekit import _kernels
from roekit._kernels import _py

try:
    from roekit._kernels import _cy
except ImportError:
    _cy = None

needs_cy = pytest.mark.skipif(_cy is None, reason="compiled backend not built")


def random_matrix(rng, nr, nc):
    return np.ascontiguousarray(
        rng.standard_normal((nr, nc)) + 1j * rng.standard_normal((nr, nc)))


class TestCertifiedNorm:
    def test_matches_svd(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            nr, nc = rng.integers(1, 25, size=2)
            m = random_matrix(rng, nr, nc)
            oracle = float(np.linalg.svd(m, compute_uv=False)[0])
            assert abs(_kernels.spectral_norm(m) - oracle) <= 1e-8 * max(1, oracle)

    def test_empty_and_zero(self):
        assert _kernels.spectral_norm(np.zeros((0, 3), dtype=complex)) == 0.0
        assert _kernels.spectral_norm(np.zeros((4, 4), dtype=complex)) == 0.0

    def test_degenerate_spectrum(self):
        # repeated top singular value: permutation matrix
        perm = np.eye(6)[[3, 0, 5, 1, 2, 4]]
        assert abs(_kernels.spectral_norm(perm) - 1.0) <= 1e-9

    def test_masked_equals_submatrix(self):
        rng = np.random.default_rng(1)
        m = random_matrix(rng, 12, 12)
        rows = [0, 3, 5, 11]
        cols = [1, 2, 8]
        oracle = float(np.linalg.svd(m[np.ix_(rows, cols)],
                                     compute_uv=False)[0])
        assert abs(_kernels.masked_spectral_norm(m, rows, cols) - oracle) <= 1e-8

    def test_masked_empty(self):
        rng = np.random.default_rng(2)
        m = random_matrix(rng, 5, 5)
        assert _kernels.masked_spectral_norm(m, [], [0, 1]) == 0.0
        assert _kernels.masked_spectral_norm(m, [0, 1], []) == 0.0

    def test_band_equals_zeroed_copy(self):
        rng = np.random.default_rng(3)
        m = random_matrix(rng, 10, 10)
        dist = np.abs(np.subtract.outer(np.arange(10.0), np.arange(10.0)))
        for rmin in (0.0, 1.0, 3.0, 20.0):
            far = np.where(dist >= rmin, m, 0) if rmin > 0 else m
            oracle = float(np.linalg.svd(far, compute_uv=False)[0])
            assert abs(_kernels.band_residual_norm(m, dist, rmin) - oracle) <= 1e-8


class TestBackendParity:
    @needs_cy
    def test_power_norm_identical(self):
        rng = np.random.default_rng(4)
        for _ in range(60):
            nr, nc = rng.integers(1, 30, size=2)
            m = random_matrix(rng, nr, nc)
            v_py, ok_py = _py.power_norm(m)
            v_cy, ok_cy = _cy.power_norm(m)
            assert ok_py == ok_cy
            assert abs(v_py - v_cy) <= 1e-12 * max(1.0, v_py)

    @needs_cy
    def test_masked_identical(self):
        rng = np.random.default_rng(5)
        m = random_matrix(rng, 15, 15)
        rows = np.array([1, 4, 9, 14], dtype=np.intp)
        cols = np.array([0, 2, 3], dtype=np.intp)
        v_py, _ = _py.power_norm_sub(m, rows, cols)
        v_cy, _ = _cy.power_norm_sub(m, rows, cols)
        assert abs(v_py - v_cy) <= 1e-12 * max(1.0, v_py)

    @needs_cy
    def test_band_identical(self):
        rng = np.random.default_rng(6)
        m = random_matrix(rng, 12, 12)
        dist = np.abs(np.subtract.outer(np.arange(12.0), np.arange(12.0)))
        for rmin in (0.0, 2.0, 5.0):
            v_py, _ = _py.power_norm_band(m, dist, rmin)
            v_cy, _ = _cy.power_norm_band(m, dist, rmin)
            assert abs(v_py - v_cy) <= 1e-12 * max(1.0, v_py)

    @needs_cy
    def test_readonly_input_accepted(self):
        rng = np.random.default_rng(7)
        m = random_matrix(rng, 6, 6)
        m.setflags(write=False)
        v, ok = _cy.power_norm(m)
        assert ok and v > 0

"""Dense complex operators on the ℓ₂ space of a finite metric space.

Entry (y, x) of a :class:`LinearOperator` is the matrix coefficient from
domain point x to codomain point y. Locality of an operator is measured
against the distance tables of its spaces: propagation is the largest
distance carrying a nonzero entry, and the quasi-locality profile is the
norm of what survives outside a band.

Storage is dense only; at the intended window sizes (n up to ~2,000) a
dense complex matrix is both feasible and simpler than banded formats.
"""

from __future__ import annotations

import json
import struct
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import FormatError, NumericalFailure, SpaceMismatch, UnknownPoint
from .space import FiniteMetricSpace, PointId

#: Entries with modulus at or below this count as zero in locality scans.
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class LinearOperator:
    """A |codomain| x |domain| complex matrix tied to its two spaces."""

    domain: FiniteMetricSpace
    codomain: FiniteMetricSpace
    entries: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(self.entries, dtype=np.complex128)
        if m.shape != (len(self.codomain), len(self.domain)):
            raise SpaceMismatch(
                f"matrix shape {m.shape} does not match spaces "
                f"({len(self.codomain)}, {len(self.domain)})"
            )
        if not np.isfinite(m.view(np.float64)).all():
            raise SpaceMismatch("matrix has non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def is_endomorphism(self) -> bool:
        return self.domain == self.codomain

    def require_endo(self, what: str):
        if not self.is_endomorphism:
            raise SpaceMismatch(f"{what} requires domain == codomain")

    def adjoint(self) -> "LinearOperator":
        return LinearOperator(self.codomain, self.domain, self.entries.conj().T)

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        if other.codomain != self.domain:
            raise SpaceMismatch("composition spaces do not match")
        return LinearOperator(other.domain, self.codomain,
                              self.entries @ other.entries)

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        if other.domain != self.domain or other.codomain != self.codomain:
            raise SpaceMismatch("sum requires equal spaces")
        return LinearOperator(self.domain, self.codomain,
                              self.entries + other.entries)

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        if other.domain != self.domain or other.codomain != self.codomain:
            raise SpaceMismatch("difference requires equal spaces")
        return LinearOperator(self.domain, self.codomain,
                              self.entries - other.entries)


def zero_operator(space: FiniteMetricSpace) -> LinearOperator:
    n = len(space)
    return LinearOperator(space, space, np.zeros((n, n), dtype=np.complex128))


def identity_operator(space: FiniteMetricSpace) -> LinearOperator:
    return LinearOperator(space, space, np.eye(len(space), dtype=np.complex128))


def indicator(space: FiniteMetricSpace, subset: Iterable[PointId]) -> LinearOperator:
    """Diagonal 0/1 projection onto a subset of points."""
    diag = np.zeros(len(space), dtype=np.complex128)
    for p in subset:
        diag[space.index(p)] = 1.0
    return LinearOperator(space, space, np.diag(diag))


def diagonal_operator(space: FiniteMetricSpace, values: Sequence[float] | np.ndarray) -> LinearOperator:
    values = np.asarray(values, dtype=np.complex128)
    if values.shape != (len(space),):
        raise SpaceMismatch(f"diagonal length {values.shape} for {len(space)} points")
    return LinearOperator(space, space, np.diag(values))


def propagation(a: LinearOperator, zero_tol: float = ZERO_TOL) -> float:
    """Largest distance carrying an entry of modulus above ``zero_tol``.

    Zero and diagonal matrices have propagation 0. Operators produced by
    unitary conjugation carry round-off, so callers measuring those should
    pass a tolerance matching their noise floor rather than the default.
    """
    a.require_endo("propagation")
    if zero_tol < 0:
        raise NumericalFailure("zero_tol must be >= 0")
    alive = np.abs(a.entries) > zero_tol
    if not alive.any():
        return 0.0
    return float(a.domain.dist[alive].max())


@dataclass(frozen=True)
class QuasiLocalProfile:
    """Certified off-band bounds: r -> bound on sup ||chi_A a chi_B||
    over sets with d(A, B) >= r.

    Every block between r-separated sets is a compression of the far-band
    truncation at any radius <= r, so the reported value is the smallest
    truncation norm seen up to r (the raw truncation norm alone is not
    monotone: deleting entries can raise a spectral norm). The true
    two-set supremum lies between the largest single-entry modulus in the
    band and this bound. Nonincreasing in r; the value at r = 0 is the
    full norm; finer radius grids can only tighten later values.
    """

    samples: dict[float, float]


def quasi_local_profile(
    a: LinearOperator,
    radii: Sequence[float],
    zero_tol: float = ZERO_TOL,
) -> QuasiLocalProfile:
    a.require_endo("quasi-locality")
    dist = a.domain.dist
    # zero_tol trims noise entries so they cannot dominate a far band
    entries = np.where(np.abs(a.entries) > zero_tol, a.entries, 0.0)
    bound = _kernels.spectral_norm(entries)
    samples = {}
    for r in sorted(float(r) for r in radii):
        if r > 0:
            raw = _kernels.band_residual_norm(entries, dist, r)
            bound = min(bound, raw)
        samples[r] = bound
    return QuasiLocalProfile(samples)


def block_norm(a: LinearOperator, row_set: Iterable[PointId], col_set: Iterable[PointId]) -> float:
    """Operator norm of the compression to rows in A and columns in B."""
    rows = [a.codomain.index(p) for p in row_set]
    cols = [a.domain.index(p) for p in col_set]
    return _kernels.masked_spectral_norm(a.entries, rows, cols)


def conditional_expectation(a: LinearOperator) -> LinearOperator:
    """Project onto the diagonal subalgebra: keep exactly the diagonal."""
    a.require_endo("conditional expectation")
    return LinearOperator(a.domain, a.codomain, np.diag(np.diag(a.entries)))


def op_norm(a: LinearOperator | np.ndarray) -> float:
    """Largest singular value to relative accuracy 1e-9.

    Power iteration on the Gram operator with a deterministic start, with
    a certified dense eigendecomposition fallback on non-convergence.
    """
    entries = a.entries if isinstance(a, LinearOperator) else np.asarray(a)
    return _kernels.spectral_norm(entries)


def numerical_rank(a: LinearOperator | np.ndarray, tol: float) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if tol <= 0:
        raise NumericalFailure("rank tolerance must be > 0")
    entries = a.entries if isinstance(a, LinearOperator) else np.asarray(a)
    if entries.size == 0:
        return 0
    try:
        svals = np.linalg.svd(entries, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD failed: {exc}") from exc
    top = svals[0] if len(svals) else 0.0
    if top == 0.0:
        return 0
    return int((svals > tol * top).sum())


# --- on-disk format ---------------------------------------------------------
#
# Header: 8 bytes ASCII "ROEOP\0\0\0", then the format version byte repeated
# 8 times (16 bytes total), then little-endian u64 row and column counts,
# then rows*cols complex entries as interleaved float64 (re, im), row-major.
# A JSON sidecar names the domain and codomain space files.

MAGIC = b"ROEOP\x00\x00\x00"
FORMAT_VERSION = 1


def write_matrix(path, matrix: np.ndarray):
    m = np.ascontiguousarray(matrix, dtype=np.complex128)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(bytes([FORMAT_VERSION]) * 8)
        fh.write(struct.pack("<QQ", m.shape[0], m.shape[1]))
        fh.write(m.tobytes(order="C"))


def read_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 32:
        raise FormatError(f"{path}: truncated header")
    if blob[:8] != MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:8]!r}")
    version = blob[8]
    if blob[8:16] != bytes([version]) * 8 or version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version bytes {blob[8:16]!r}")
    rows, cols = struct.unpack("<QQ", blob[16:32])
    need = 32 + rows * cols * 16
    if len(blob) != need:
        raise FormatError(f"{path}: expected {need} bytes, found {len(blob)}")
    flat = np.frombuffer(blob, dtype=np.complex128, offset=32)
    return flat.reshape(rows, cols).copy()


def save_operator(a: LinearOperator, matrix_path, sidecar_path,
                  domain_space_path: str, codomain_space_path: str):
    import os

    from .serialize import write_canonical

    write_matrix(matrix_path, a.entries)
    base = os.path.dirname(os.path.abspath(sidecar_path))
    write_canonical(sidecar_path, {
        "schema": "roe-operator/1",
        "matrix": os.path.basename(str(matrix_path)),
        "domain_space": os.path.relpath(os.path.abspath(domain_space_path), base),
        "codomain_space": os.path.relpath(os.path.abspath(codomain_space_path), base),
    })


def load_operator(sidecar_path) -> LinearOperator:
    """Rebuild an operator from its sidecar; paths resolve relative to it."""
    import os

    from .space import load_space

    with open(sidecar_path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema") != "roe-operator/1":
        raise FormatError(f"{sidecar_path}: unexpected schema {doc.get('schema')!r}")
    base = os.path.dirname(os.path.abspath(sidecar_path))
    domain = load_space(os.path.join(base, doc["domain_space"]))
    codomain = load_space(os.path.join(base, doc["codomain_space"]))
    entries = read_matrix(os.path.join(base, doc["matrix"]))
    return LinearOperator(domain, codomain, entries)

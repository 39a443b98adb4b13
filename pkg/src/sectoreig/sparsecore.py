"""Complex sparse-matrix primitives shared by the whole package.

Everything is represented as scipy CSR matrices with complex128 entries.
The helpers here enforce the package-wide storage conventions: canonical
index structure (sorted, duplicate-free), finite entries only, and
pruning of stored values whose magnitude falls below the cancellation
tolerance.  Higher-level modules never touch scipy internals directly.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.sparse.linalg import splu

# Entries smaller than this are treated as exact cancellations and removed
# from the stored pattern.  Deliberately at the underflow edge: correctness
# of the reduction must not depend on a magnitude heuristic.
CANCELLATION_TOL = 1e-300

# Pivots below this fraction of max|A| flag the factorization as singular.
PIVOT_TOL = 1e-14


class DimensionMismatchError(ValueError):
    """Operands have incompatible shapes."""


class SingularMatrixError(ValueError):
    """Factorization hit a structural or numerical singularity.

    When raised during a shift-invert solve, the shift is an exact
    eigenvalue candidate; it is carried in ``shift`` when known.
    """

    def __init__(self, message: str, shift: complex | None = None):
        super().__init__(message)
        self.shift = shift


class BudgetExceededError(ValueError):
    """A dense-oracle or full-assembly request exceeded its size budget."""

    def __init__(self, message: str, required: int):
        super().__init__(message)
        self.required = required


def root_of_unity(m: int, M: int) -> complex:
    """Return exp(2j*pi*m/M), the m-th of the M complex roots of 1.

    Computed from the angle directly (never by repeated multiplication),
    and folded so that root_of_unity(M - m, M) is the exact complex
    conjugate of root_of_unity(m, M).
    """
    if M < 1:
        raise ValueError(f"sector count must be >= 1, got {M}")
    if not 0 <= m < M:
        raise ValueError(f"harmonic index {m} out of range [0, {M})")
    if 2 * m > M:
        return root_of_unity(M - m, M).conjugate()
    # exact values at the axis crossings
    if m == 0:
        return 1.0 + 0.0j
    if 2 * m == M:
        return -1.0 + 0.0j
    if 4 * m == M:
        return 1.0j
    angle = 2.0 * math.pi * m / M
    return complex(math.cos(angle), math.sin(angle))


def unity_power(m: int, k: int, M: int) -> complex:
    """rho_m**k with the exponent reduced mod M, so large powers stay exact."""
    return root_of_unity((m * k) % M, M)


def canonical_csr(A) -> sp.csr_matrix:
    """Coerce ``A`` to a canonical complex CSR matrix.

    Canonical means: sorted column indices, no duplicates, no stored
    entries below the cancellation tolerance, and all values finite.
    """
    mat = sp.csr_matrix(A, dtype=np.complex128, copy=True)
    mat.sum_duplicates()
    mat.sort_indices()
    if mat.nnz:
        tiny = np.abs(mat.data) < CANCELLATION_TOL
        if tiny.any():
            mat.data[tiny] = 0.0
            mat.eliminate_zeros()
    if mat.nnz and not np.all(np.isfinite(mat.data)):
        raise ValueError("matrix contains non-finite entries")
    return mat


def zeros_csr(nrows: int, ncols: int | None = None) -> sp.csr_matrix:
    """Structurally empty CSR matrix."""
    if ncols is None:
        ncols = nrows
    return sp.csr_matrix((nrows, ncols), dtype=np.complex128)


def spmv(A: sp.csr_matrix, x) -> np.ndarray:
    """Sparse matrix-vector product A @ x."""
    x = np.asarray(x, dtype=np.complex128)
    if A.shape[1] != x.shape[0]:
        raise DimensionMismatchError(
            f"cannot multiply {A.shape[0]}x{A.shape[1]} matrix by length-{x.shape[0]} vector"
        )
    return A @ x


def linear_combination(blocks, coeffs) -> sp.csr_matrix:
    """Return sum_k coeffs[k] * blocks[k] over square same-sized sparse blocks.

    The result carries the merged sparsity pattern; entries that cancel to
    below the cancellation tolerance are removed.
    """
    blocks = list(blocks)
    coeffs = [complex(c) for c in coeffs]
    if not blocks or len(blocks) != len(coeffs):
        raise DimensionMismatchError(
            f"need equally many blocks and coefficients (>= 1), got {len(blocks)} and {len(coeffs)}"
        )
    dim = blocks[0].shape
    if dim[0] != dim[1]:
        raise DimensionMismatchError(f"blocks must be square, got {dim}")
    acc = None
    for blk, c in zip(blocks, coeffs):
        if blk.shape != dim:
            raise DimensionMismatchError(f"block shape {blk.shape} != {dim}")
        term = sp.csr_matrix(blk, dtype=np.complex128) * c
        acc = term if acc is None else acc + term
    return canonical_csr(acc)


class SparseLU:
    """LU factorization handle for a square complex sparse matrix.

    Read-only after construction and safe to share across threads.
    Raises :class:`SingularMatrixError` when the factorization detects a
    structural singularity or a pivot below PIVOT_TOL * max|A|.
    """

    def __init__(self, A, shift: complex | None = None):
        A = canonical_csr(A)
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatchError(f"matrix must be square, got {A.shape}")
        max_mag = float(np.abs(A.data).max()) if A.nnz else 0.0
        if max_mag == 0.0:
            raise SingularMatrixError("matrix is identically zero", shift=shift)
        try:
            self._lu = splu(A.tocsc())
        except RuntimeError as exc:
            raise SingularMatrixError(f"LU factorization failed: {exc}", shift=shift) from exc
        pivots = np.abs(self._lu.U.diagonal())
        if pivots.size and float(pivots.min()) < PIVOT_TOL * max_mag:
            raise SingularMatrixError(
                f"numerically singular: pivot {pivots.min():.3e} below "
                f"{PIVOT_TOL:.0e} * max|A| = {PIVOT_TOL * max_mag:.3e}",
                shift=shift,
            )
        self.shape = A.shape

    @property
    def factor_nnz(self) -> int:
        """Stored nonzeros in the L and U factors combined."""
        return int(self._lu.L.nnz + self._lu.U.nnz)

    def solve(self, y) -> np.ndarray:
        """Solve A x = y."""
        y = np.asarray(y, dtype=np.complex128)
        if y.shape[0] != self.shape[0]:
            raise DimensionMismatchError(
                f"right-hand side length {y.shape[0]} != {self.shape[0]}"
            )
        return self._lu.solve(y)


def write_matrix_market(path, A) -> None:
    """Write ``A`` as 'coordinate complex general' Matrix Market, 1-based.

    Values are written with shortest round-trip formatting so a
    write/read cycle reproduces them bit-exactly.
    """
    A = canonical_csr(A)
    coo = A.tocoo()
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate complex general\n")
        fh.write(f"{A.shape[0]} {A.shape[1]} {coo.nnz}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i + 1} {j + 1} {float(v.real)!r} {float(v.imag)!r}\n")


def read_matrix_market(path) -> sp.csr_matrix:
    """Read a Matrix Market file into canonical complex CSR form."""
    return canonical_csr(scipy.io.mmread(path))

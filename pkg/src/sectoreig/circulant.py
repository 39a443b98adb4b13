"""Scalar and block circulant operators and their analytic eigenstructure.

A circulant matrix is diagonalized by the DFT vectors [1, rho_m, rho_m^2,
...]; at block granularity the same structure reduces an MN x MN operator
to M independent N x N problems, one per harmonic index m.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .sparsecore import (
    BudgetExceededError,
    canonical_csr,
    linear_combination,
    unity_power,
)

# Largest full dimension M*N for which materializing the whole operator
# (the dense-oracle side) is allowed by default.
DENSE_ORACLE_BUDGET = 20_000


def check_harmonic(m: int, M: int) -> int:
    """Validate a harmonic index against the sector count."""
    m = int(m)
    if M < 1:
        raise ValueError(f"sector count must be >= 1, got {M}")
    if not 0 <= m < M:
        raise ValueError(f"harmonic index {m} out of range [0, {M})")
    return m


@dataclass(frozen=True)
class ScalarCirculant:
    """Circulant matrix given by its first row (entries b_0 .. b_{M-1})."""

    first_row: tuple

    def __post_init__(self):
        row = tuple(complex(v) for v in self.first_row)
        if not row:
            raise ValueError("first_row must have at least one entry")
        object.__setattr__(self, "first_row", row)

    @property
    def M(self) -> int:
        return len(self.first_row)

    def dense(self) -> np.ndarray:
        """Materialized matrix: row i is the i-fold cyclic right-shift of row 0."""
        M = self.M
        out = np.empty((M, M), dtype=np.complex128)
        for i in range(M):
            for j in range(M):
                out[i, j] = self.first_row[(j - i) % M]
        return out


def scalar_circulant_eigenpair(circ: ScalarCirculant, m: int):
    """Analytic eigenpair of a scalar circulant for harmonic m.

    Returns (sum_k b_k rho_m^k, [1, rho_m, ..., rho_m^{M-1}]).
    """
    M = circ.M
    check_harmonic(m, M)
    powers = np.array([unity_power(m, k, M) for k in range(M)])
    value = complex(np.dot(np.asarray(circ.first_row), powers))
    return value, powers


def scalar_circulant_spectrum(circ: ScalarCirculant) -> np.ndarray:
    """All M analytic eigenvalues, ordered by harmonic index."""
    return np.array(
        [scalar_circulant_eigenpair(circ, m)[0] for m in range(circ.M)]
    )


@dataclass(frozen=True)
class BlockCirculantOperator:
    """M ordered square sparse blocks b_0 .. b_{M-1} of common dimension N."""

    blocks: tuple = field(repr=False)

    def __post_init__(self):
        blocks = tuple(canonical_csr(b) for b in self.blocks)
        if not blocks:
            raise ValueError("need at least one block")
        dim = blocks[0].shape
        if dim[0] != dim[1]:
            raise ValueError(f"blocks must be square, got {dim}")
        for b in blocks:
            if b.shape != dim:
                raise ValueError(f"inconsistent block shapes: {b.shape} vs {dim}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def M(self) -> int:
        return len(self.blocks)

    @property
    def N(self) -> int:
        return self.blocks[0].shape[0]


def reduced_block(op: BlockCirculantOperator, m: int) -> sp.csr_matrix:
    """Per-harmonic N x N reduction: sum_k rho_m^k * b_k."""
    check_harmonic(m, op.M)
    coeffs = [unity_power(m, k, op.M) for k in range(op.M)]
    return linear_combination(op.blocks, coeffs)


def lift_block_eigenvector(v, m: int, M: int) -> np.ndarray:
    """Expand a length-N reduced eigenvector to length M*N.

    Segment s of the output is rho_m^s * v, so a reduced eigenpair of the
    harmonic-m block becomes an eigenpair of the full operator.
    """
    check_harmonic(m, M)
    v = np.asarray(v, dtype=np.complex128)
    return np.concatenate([unity_power(m, s, M) * v for s in range(M)])


def materialize(op: BlockCirculantOperator, budget: int = DENSE_ORACLE_BUDGET) -> sp.csr_matrix:
    """Assemble the full MN x MN operator; block (i, j) is b_{(j-i) mod M}.

    Intended for oracle-side verification only, hence the size budget.
    """
    M, N = op.M, op.N
    full = M * N
    if full > budget:
        raise BudgetExceededError(
            f"materializing a {full}x{full} operator exceeds budget {budget}",
            required=full,
        )
    grid = [[op.blocks[(j - i) % M] for j in range(M)] for i in range(M)]
    return canonical_csr(sp.bmat(grid, format="csr"))


def block_shift_permutation(M: int, N: int) -> sp.csr_matrix:
    """Cyclic block-shift permutation: segment s of P @ x is segment (s+1) mod M of x."""
    eye = sp.identity(N, dtype=np.complex128, format="csr")
    grid = [[eye if (j - i) % M == 1 else None for j in range(M)] for i in range(M)]
    if M == 1:
        return eye
    return canonical_csr(sp.bmat(grid, format="csr"))

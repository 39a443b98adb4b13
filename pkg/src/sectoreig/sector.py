"""Cyclic-symmetric Jacobians stored as one sector plus a rotation.

A rotationally periodic operator is fully described by the three nonzero
sector blocks (self, next-neighbor, previous-neighbor coupling, all in
rotated per-sector variables) and the per-sector frame rotation.  The full
operator A is similar to a block circulant B via the block-diagonal
rotation stack, so its spectrum splits into M per-harmonic problems and
eigenvectors lift back to the full annulus segment by segment.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .circulant import (
    DENSE_ORACLE_BUDGET,
    BlockCirculantOperator,
    BudgetExceededError,
    check_harmonic,
    lift_block_eigenvector,
    materialize,
)
from .sparsecore import (
    canonical_csr,
    read_matrix_market,
    unity_power,
    write_matrix_market,
    zeros_csr,
)

BLOCK_FILES = ("d_self.mtx", "d_next.mtx", "d_prev.mtx")
LAYOUT_FILE = "layout.txt"


@dataclass(frozen=True)
class DofLayout:
    """Per-sector degree-of-freedom layout.

    ``rotating_pairs`` lists index pairs (into the per-point variable
    vector) that transform as in-plane vector components under frame
    rotation; all other variables are rotation-invariant scalars.
    """

    points_per_sector: int
    vars_per_point: int
    rotating_pairs: tuple = ()

    def __post_init__(self):
        if self.points_per_sector < 1 or self.vars_per_point < 1:
            raise ValueError("layout sizes must be positive")
        pairs = tuple((int(a), int(b)) for a, b in self.rotating_pairs)
        seen = set()
        for a, b in pairs:
            if a == b or not (0 <= a < self.vars_per_point) or not (0 <= b < self.vars_per_point):
                raise ValueError(f"invalid rotating pair ({a}, {b})")
            if a in seen or b in seen:
                raise ValueError("rotating pair indices must be distinct")
            seen.update((a, b))
        object.__setattr__(self, "rotating_pairs", pairs)

    @property
    def N(self) -> int:
        return self.points_per_sector * self.vars_per_point


@dataclass(frozen=True)
class RotationSpec:
    """Sector count plus layout; the pitch angle is 2*pi/M by construction."""

    M: int
    layout: DofLayout

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"sector count must be >= 1, got {self.M}")

    @property
    def theta(self) -> float:
        return 2.0 * math.pi / self.M


def rotation_matrix(spec: RotationSpec, power: int) -> sp.csr_matrix:
    """Per-sector frame rotation T**power as an N x N sparse matrix.

    Block diagonal per grid point: identity on non-rotating variables, a
    2x2 plane rotation by power * theta on each rotating pair.  The angle
    is formed directly from ``power`` (negative means inverse), so large
    powers do not accumulate roundoff.
    """
    lay = spec.layout
    point = np.eye(lay.vars_per_point, dtype=np.complex128)
    angle = power * spec.theta
    c, s = math.cos(angle), math.sin(angle)
    for a, b in lay.rotating_pairs:
        point[a, a] = c
        point[a, b] = -s
        point[b, a] = s
        point[b, b] = c
    return canonical_csr(sp.block_diag([point] * lay.points_per_sector, format="csr"))


@dataclass(frozen=True)
class SectorJacobian:
    """One sector's Jacobian blocks in rotated variables, plus the rotation.

    ``d_self`` couples the sector to itself, ``d_next`` to the sector one
    pitch ahead (positive theta), ``d_prev`` to the sector one pitch
    behind.  All farther couplings are structurally zero.
    """

    d_self: sp.csr_matrix = field(repr=False)
    d_next: sp.csr_matrix = field(repr=False)
    d_prev: sp.csr_matrix = field(repr=False)
    rotation: RotationSpec

    def __post_init__(self):
        N = self.rotation.layout.N
        for name in ("d_self", "d_next", "d_prev"):
            blk = canonical_csr(getattr(self, name))
            if blk.shape != (N, N):
                raise ValueError(f"{name} must be {N}x{N}, got {blk.shape}")
            object.__setattr__(self, name, blk)
        if self.rotation.M < 3 and (self.d_next.nnz or self.d_prev.nnz):
            raise ValueError(
                "neighbor blocks address distinct sectors only for M >= 3; "
                f"got M = {self.rotation.M} with nonzero neighbor coupling"
            )

    @property
    def M(self) -> int:
        return self.rotation.M

    @property
    def N(self) -> int:
        return self.rotation.layout.N

    @classmethod
    def from_unrotated(cls, d_self, d_next, d_prev, rotation: RotationSpec) -> "SectorJacobian":
        """Build from neighbor blocks taken with respect to unrotated variables.

        Applies the change of variables internally: the stored next/prev
        blocks are the unrotated ones right-multiplied by T / T^{-1}.
        """
        t_fwd = rotation_matrix(rotation, 1)
        t_bwd = rotation_matrix(rotation, -1)
        return cls(
            d_self=canonical_csr(d_self),
            d_next=canonical_csr(canonical_csr(d_next) @ t_fwd),
            d_prev=canonical_csr(canonical_csr(d_prev) @ t_bwd),
            rotation=rotation,
        )


def to_block_circulant(J: SectorJacobian) -> BlockCirculantOperator:
    """Blocks of the similar block circulant: [d_self, d_next, 0, ..., 0, d_prev]."""
    M, N = J.M, J.N
    blocks = [zeros_csr(N) for _ in range(M)]
    blocks[0] = J.d_self
    if M >= 3:
        blocks[1] = J.d_next
        blocks[M - 1] = J.d_prev
    return BlockCirculantOperator(tuple(blocks))


def annulus_rotation_stack(J: SectorJacobian, inverse: bool = False) -> sp.csr_matrix:
    """Block-diagonal stack diag(T^0, T^1, ..., T^{M-1}) (or its inverse)."""
    sign = -1 if inverse else 1
    parts = [rotation_matrix(J.rotation, sign * s) for s in range(J.M)]
    return canonical_csr(sp.block_diag(parts, format="csr"))


def materialize_full(J: SectorJacobian, budget: int = DENSE_ORACLE_BUDGET) -> sp.csr_matrix:
    """Full MN x MN operator in original (unrotated) variables.

    Block (m1, m2) equals T^{m1} b_{(m2-m1) mod M} T^{-m2}; assembled as
    the similarity product of the rotation stack with the materialized
    block circulant.  Refuses instances above the size budget.
    """
    full = J.M * J.N
    if full > budget:
        raise BudgetExceededError(
            f"materializing a {full}x{full} operator exceeds budget {budget}",
            required=full,
        )
    B = materialize(to_block_circulant(J), budget=budget)
    if not J.rotation.layout.rotating_pairs:
        return B
    stack = annulus_rotation_stack(J)
    stack_inv = annulus_rotation_stack(J, inverse=True)
    return canonical_csr(stack @ B @ stack_inv)


def lift_to_annulus(v, m: int, J: SectorJacobian) -> np.ndarray:
    """Lift a reduced eigenvector to the annulus: segment s is rho_m^s T^s v."""
    check_harmonic(m, J.M)
    v = np.asarray(v, dtype=np.complex128)
    if v.shape[0] != J.N:
        raise ValueError(f"vector length {v.shape[0]} != block dimension {J.N}")
    if not J.rotation.layout.rotating_pairs:
        return lift_block_eigenvector(v, m, J.M)
    segments = [
        unity_power(m, s, J.M) * (rotation_matrix(J.rotation, s) @ v)
        for s in range(J.M)
    ]
    return np.concatenate(segments)


def nodal_diameter(m: int, M: int) -> int:
    """Count of circumferential sign-change diameters of harmonic m: min(m, M - m)."""
    check_harmonic(m, M)
    return min(m, M - m)


def without_rotation(J: SectorJacobian) -> SectorJacobian:
    """Variant with the frame rotation forced to identity (negative control).

    De-rotates the stored neighbor blocks back to original variables and
    empties the rotating pairs, i.e. skips the change of variables that
    makes the operator block circulant.  For genuinely rotating layouts
    the reduced spectra of the result disagree with the true operator.
    """
    lay = J.rotation.layout
    if not lay.rotating_pairs:
        return J
    stripped = DofLayout(lay.points_per_sector, lay.vars_per_point, ())
    spec = RotationSpec(J.M, stripped)
    t_fwd = rotation_matrix(J.rotation, 1)
    t_bwd = rotation_matrix(J.rotation, -1)
    return SectorJacobian(
        d_self=J.d_self,
        d_next=canonical_csr(J.d_next @ t_bwd),
        d_prev=canonical_csr(J.d_prev @ t_fwd),
        rotation=spec,
    )


def _format_pairs(pairs) -> str:
    return ",".join(f"{a}:{b}" for a, b in pairs)


def _parse_pairs(text: str):
    text = text.strip()
    if not text:
        return ()
    pairs = []
    for chunk in text.split(","):
        a, b = chunk.strip().split(":")
        pairs.append((int(a), int(b)))
    return tuple(pairs)


def save_sector_jacobian(J: SectorJacobian, out_dir) -> None:
    """Write the on-disk form: three Matrix Market blocks plus layout.txt."""
    os.makedirs(out_dir, exist_ok=True)
    lay = J.rotation.layout
    with open(os.path.join(out_dir, LAYOUT_FILE), "w", encoding="ascii") as fh:
        fh.write(f"M = {J.M}\n")
        fh.write(f"points_per_sector = {lay.points_per_sector}\n")
        fh.write(f"vars_per_point = {lay.vars_per_point}\n")
        fh.write(f"rotating_pairs = {_format_pairs(lay.rotating_pairs)}\n")
    for name, blk in zip(BLOCK_FILES, (J.d_self, J.d_next, J.d_prev)):
        write_matrix_market(os.path.join(out_dir, name), blk)


def load_sector_jacobian(in_dir) -> SectorJacobian:
    """Read a SectorJacobian directory written by :func:`save_sector_jacobian`."""
    layout_path = os.path.join(in_dir, LAYOUT_FILE)
    entries = {}
    with open(layout_path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()
    layout = DofLayout(
        points_per_sector=int(entries["points_per_sector"]),
        vars_per_point=int(entries["vars_per_point"]),
        rotating_pairs=_parse_pairs(entries.get("rotating_pairs", "")),
    )
    spec = RotationSpec(int(entries["M"]), layout)
    blocks = [read_matrix_market(os.path.join(in_dir, name)) for name in BLOCK_FILES]
    return SectorJacobian(blocks[0], blocks[1], blocks[2], spec)

"""Surrogate sector Jacobians with known or oracle-checkable spectra.

These generators stand in for a flow-solver Jacobian: same nearest-neighbor
sector coupling pattern, desk-scale sizes, and spectra that can be checked
either analytically (the ring model is a scalar circulant) or against the
dense oracle.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .circulant import ScalarCirculant
from .sector import DofLayout, RotationSpec, SectorJacobian
from .sparsecore import canonical_csr

# Fixed stencils for the rotating-vector model.  The local dynamics are
# stable with eigenvalues -2 +/- 1j; the neighbor couplings are deliberately
# anisotropic so they do not commute with a frame rotation, which makes the
# rotation-disabled negative control discriminating.
_LOCAL_BLOCK = np.array([[-2.0, -1.0], [1.0, -2.0]])
_FORWARD_COUPLING = np.array([[0.7, 0.2], [-0.1, 0.4]])
_BACKWARD_COUPLING = np.array([[0.3, -0.2], [0.25, 0.5]])


def _ring_coefficients(M: int, n: int, peclet: float, rotation_rate: float,
                       diffusion: float, scheme: str):
    """Stencil coefficients (c_prev, c_self, c_next) for the periodic ring."""
    if M < 3:
        raise ValueError(f"ring model needs M >= 3, got {M}")
    if n < 1:
        raise ValueError(f"points per sector must be >= 1, got {n}")
    if peclet < 0:
        raise ValueError(f"peclet must be >= 0, got {peclet}")
    if diffusion < 0:
        raise ValueError(f"diffusion must be >= 0, got {diffusion}")
    if scheme not in ("upwind", "central"):
        raise ValueError(f"unknown advection scheme {scheme!r}")
    h = 2.0 * math.pi / (M * n)
    speed = peclet + rotation_rate
    d = diffusion / h**2
    if scheme == "upwind":
        c_prev = d + speed / h
        c_self = -2.0 * d - speed / h
        c_next = d
    else:
        c_prev = d + speed / (2.0 * h)
        c_self = -2.0 * d
        c_next = d - speed / (2.0 * h)
    return c_prev, c_self, c_next


def ring_first_row(M: int, n: int, peclet: float, rotation_rate: float = 0.0,
                   diffusion: float = 1.0, scheme: str = "upwind") -> ScalarCirculant:
    """The full ring operator as a scalar circulant (the analytic oracle)."""
    c_prev, c_self, c_next = _ring_coefficients(M, n, peclet, rotation_rate, diffusion, scheme)
    K = M * n
    row = np.zeros(K, dtype=np.complex128)
    row[0] = c_self
    row[1 % K] += c_next
    row[(K - 1) % K] += c_prev
    return ScalarCirculant(tuple(row))


def make_ring_advection_diffusion(M: int, n: int, peclet: float,
                                  rotation_rate: float = 0.0,
                                  diffusion: float = 1.0,
                                  scheme: str = "upwind") -> SectorJacobian:
    """Scalar advection-diffusion on a periodic ring of M*n nodes.

    Central-difference diffusion plus advection (first-order upwind by
    default, central when requested) with mesh spacing h = 2*pi/(M*n).
    The advection speed is peclet + rotation_rate.  The full operator is a
    scalar circulant, so the exact spectrum comes from the circulant
    formula on the M*n-point first row (see :func:`ring_first_row`).
    """
    c_prev, c_self, c_next = _ring_coefficients(M, n, peclet, rotation_rate, diffusion, scheme)
    d_self = sp.lil_matrix((n, n), dtype=np.complex128)
    for i in range(n):
        d_self[i, i] = c_self
        if i + 1 < n:
            d_self[i, i + 1] = c_next
            d_self[i + 1, i] = c_prev
    d_next = sp.lil_matrix((n, n), dtype=np.complex128)
    d_next[n - 1, 0] = c_next
    d_prev = sp.lil_matrix((n, n), dtype=np.complex128)
    d_prev[0, n - 1] = c_prev
    layout = DofLayout(points_per_sector=n, vars_per_point=1)
    spec = RotationSpec(M, layout)
    return SectorJacobian(canonical_csr(d_self), canonical_csr(d_next),
                          canonical_csr(d_prev), spec)


def make_rotating_vector_model(M: int, n: int, coupling: float) -> SectorJacobian:
    """Two rotating variables per point with anisotropic neighbor coupling.

    Each point carries one rotating pair with identical stable local
    dynamics; points are chained within the sector and across the sector
    interfaces with fixed anisotropic stencils scaled by ``coupling``.
    The couplings are stated in the sector's own frame, so the neighbor
    blocks are passed through the change of variables (T applied
    internally); dropping that rotation produces a provably different
    spectrum, which is the discriminating test for the transform.
    """
    if M < 3:
        raise ValueError(f"rotating-vector model needs M >= 3, got {M}")
    if n < 1:
        raise ValueError(f"points per sector must be >= 1, got {n}")
    c = float(coupling)
    N = 2 * n
    d_self = np.zeros((N, N))
    for p in range(n):
        d_self[2 * p:2 * p + 2, 2 * p:2 * p + 2] = _LOCAL_BLOCK
    for p in range(n - 1):
        d_self[2 * p:2 * p + 2, 2 * p + 2:2 * p + 4] = c * _FORWARD_COUPLING
        d_self[2 * p + 2:2 * p + 4, 2 * p:2 * p + 2] = c * _BACKWARD_COUPLING
    next_unrot = np.zeros((N, N))
    next_unrot[N - 2:N, 0:2] = c * _FORWARD_COUPLING
    prev_unrot = np.zeros((N, N))
    prev_unrot[0:2, N - 2:N] = c * _BACKWARD_COUPLING
    layout = DofLayout(points_per_sector=n, vars_per_point=2, rotating_pairs=((0, 1),))
    spec = RotationSpec(M, layout)
    return SectorJacobian.from_unrotated(
        canonical_csr(d_self), canonical_csr(next_unrot), canonical_csr(prev_unrot), spec
    )


def make_random_sector_jacobian(M: int, N: int, density: float, seed: int,
                                vars_per_point: int = 1,
                                rotating_pairs: tuple = ()) -> SectorJacobian:
    """Seeded random sector blocks with the nearest-neighbor coupling pattern.

    Entries are uniform on [-1, 1] at seeded positions; the diagonal of the
    self block is shifted by -2 * (row degree) so spectra lean left, which
    mimics a stable operator.  Degenerate M in {1, 2} is allowed and forces
    empty neighbor blocks (no inter-sector coupling to speak of).
    """
    if M < 1:
        raise ValueError(f"sector count must be >= 1, got {M}")
    if N < 1:
        raise ValueError(f"block dimension must be >= 1, got {N}")
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must be in (0, 1], got {density}")
    if vars_per_point < 1 or N % vars_per_point:
        raise ValueError(f"vars_per_point {vars_per_point} must divide N = {N}")
    rng = np.random.default_rng(seed)

    def block() -> np.ndarray:
        mask = rng.random((N, N)) < density
        vals = rng.uniform(-1.0, 1.0, (N, N))
        return np.where(mask, vals, 0.0)

    d_self = block()
    if M >= 3:
        d_next = block()
        d_prev = block()
    else:
        d_next = np.zeros((N, N))
        d_prev = np.zeros((N, N))
    degree = (d_self != 0).sum(axis=1) + (d_next != 0).sum(axis=1) + (d_prev != 0).sum(axis=1)
    d_self[np.diag_indices(N)] -= 2.0 * degree
    layout = DofLayout(points_per_sector=N // vars_per_point,
                       vars_per_point=vars_per_point,
                       rotating_pairs=rotating_pairs)
    spec = RotationSpec(M, layout)
    return SectorJacobian(canonical_csr(d_self), canonical_csr(d_next),
                          canonical_csr(d_prev), spec)

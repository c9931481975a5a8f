"""Dense symmetric linear algebra kernel.

Thin, contract-checked wrappers over LAPACK (via numpy) plus a
Kronecker-vectorization Lyapunov solver.  All numeric tolerances used
anywhere in the package live in the ``Tolerances`` record below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionCapError,
    EigenFailureError,
    NotPositiveDefiniteError,
    NotSymmetricError,
    SingularUpdateError,
    UnstableMatrixError,
)


@dataclass(frozen=True)
class Tolerances:
    """Central tolerance/cap configuration (all tests run at these defaults)."""

    symmetry_rtol: float = 1e-10          # relative symmetry check for eigensolves
    inverse_residual_per_n: float = 1e-10  # ||M M^-1 - I||_F <= this * n
    rank_one_rtol: float = 1e-8           # rank-one update vs direct inverse
    rank_one_denominator_min: float = 1e-12
    lyapunov_residual_rtol: float = 1e-8
    lyapunov_dim_cap: int = 60            # max state dimension for the oracle
    stability_slack: float = 1e-12        # strictness of stability inequalities
    coherence_margin: float = 1e-9        # below this slack, refuse closed forms
    path_agreement_rtol: float = 1e-8     # eigenvalue path vs matrix-inverse path
    oracle_agreement_rtol: float = 1e-6   # closed form vs Lyapunov oracle
    spectral_margin: float = 1e-9         # oracle: stable iff max Re < -margin
    greedy_improvement: float = 1e-12
    subset_cap: int = 10**6               # exhaustive-search subset budget
    submodular_slack: float = 1e-9
    step_norm_guard: float = 0.1          # require dt * ||A||_2 below this


DEFAULT_TOLS = Tolerances()


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors of a symmetric matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def smallest(self) -> float:
        return float(self.eigenvalues[0])


def _require_symmetric(m: np.ndarray, tols: Tolerances) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {m.shape}")
    scale = np.linalg.norm(m)
    if np.linalg.norm(m - m.T) > tols.symmetry_rtol * max(scale, 1.0):
        raise NotSymmetricError("matrix is not symmetric within tolerance")
    return m


def sym_eigenvalues(m: np.ndarray, tols: Tolerances = DEFAULT_TOLS) -> SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""
    m = _require_symmetric(m, tols)
    try:
        values, vectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigenFailureError(str(exc)) from exc
    return SpectralDecomposition(eigenvalues=values, eigenvectors=vectors)


def spd_solve(m: np.ndarray, rhs: np.ndarray, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Solve M x = rhs for symmetric positive definite M."""
    m = _require_symmetric(m, tols)
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("Cholesky factorization failed") from exc
    return np.linalg.solve(m, rhs)


def spd_inverse(m: np.ndarray, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix, symmetrized."""
    inv = spd_solve(m, np.eye(m.shape[0] if hasattr(m, "shape") else len(m)), tols)
    return (inv + inv.T) / 2.0


def sherman_morrison_update(
    inv: np.ndarray,
    index: int,
    scale: float,
    tols: Tolerances = DEFAULT_TOLS,
) -> np.ndarray:
    """Inverse of M + scale * e_i e_i^T given inv = M^-1.

    The update costs O(n^2); the denominator 1 + scale * inv[i, i] must
    stay above tolerance or SingularUpdateError is raised.
    """
    inv = np.asarray(inv, dtype=float)
    denom = 1.0 + scale * inv[index, index]
    if denom <= tols.rank_one_denominator_min:
        raise SingularUpdateError(f"update denominator {denom} at or below tolerance")
    col = inv[:, index]
    return inv - (scale / denom) * np.outer(col, col)


def lyapunov_solve(
    a: np.ndarray,
    rhs: np.ndarray,
    tols: Tolerances = DEFAULT_TOLS,
) -> np.ndarray:
    """Solve A P + P A^T + RHS = 0 by Kronecker vectorization.

    Intended as a small-scale oracle: the caller guarantees A is stable,
    and the state dimension is capped.  The returned P is symmetrized and
    the residual is verified against the configured bound.
    """
    a = np.asarray(a, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or rhs.shape != (n, n):
        raise UnstableMatrixError(f"shape mismatch: A {a.shape}, RHS {rhs.shape}")
    if n > tols.lyapunov_dim_cap:
        raise DimensionCapError(f"dimension {n} exceeds cap {tols.lyapunov_dim_cap}")
    eye = np.eye(n)
    system = np.kron(eye, a) + np.kron(a, eye)
    try:
        vec_p = np.linalg.solve(system, -rhs.reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise UnstableMatrixError("Lyapunov system is singular") from exc
    p = vec_p.reshape(n, n)
    p = (p + p.T) / 2.0
    residual = np.linalg.norm(a @ p + p @ a.T + rhs)
    bound = tols.lyapunov_residual_rtol * max(np.linalg.norm(rhs), 1e-300)
    if residual > bound:
        raise UnstableMatrixError(
            f"Lyapunov residual {residual:.3e} exceeds bound {bound:.3e}"
        )
    return p

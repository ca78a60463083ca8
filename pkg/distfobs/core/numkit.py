"""
numkit — tolerance-aware linear algebra
=======================================
Rank, pseudo-inverse, null space, spectra and row-space tests that every
other module builds on. All rank decisions go through the SVD with a cutoff
relative to the largest singular value; the cutoff scale comes from a
ToleranceConfig so the CLI can tighten or loosen it.

Model data is real. Complex numbers only appear in eigenvalue output and
in pencils evaluated at those eigenvalues (PBH tests).
"""

import logging
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np
import scipy.linalg

from ..exception import DimensionMismatch, NonFiniteEntry, SquareRequired

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)

# Entries below this fraction of a row's largest entry never decide its sign.
SIGN_TOL = 1e-8

RealMatrix = np.ndarray


@dataclass(frozen=True)
class ToleranceConfig:
    """
    Numerical slack used across the pipeline.

    rank_tol=None reproduces numpy's matrix_rank convention
    (eps * max dimension, relative to the largest singular value).
    """
    rank_tol: Optional[float] = None   # relative singular-value cutoff
    stability_margin: float = 1e-9     # Schur test slack
    residual_tol: float = 1e-8         # identity-check slack (scaled)
    pbh_tol: float = 1e-8              # cutoff at computed eigenvalues / Krylov stacks

    def __post_init__(self):
        for name in ("stability_margin", "residual_tol", "pbh_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value}")
        if self.rank_tol is not None and not (np.isfinite(self.rank_tol) and self.rank_tol > 0):
            raise ValueError(f"rank_tol must be strictly positive, got {self.rank_tol}")

    def rank_cutoff(self, shape: Tuple[int, ...]) -> float:
        if self.rank_tol is not None:
            return self.rank_tol
        return EPS * max(max(shape), 1)

    def with_overrides(self, **overrides) -> "ToleranceConfig":
        changes = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **changes) if changes else self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


DEFAULT_TOLERANCES = ToleranceConfig()


def real_matrix(data, rows: Optional[int] = None, cols: Optional[int] = None,
                name: str = "matrix") -> RealMatrix:
    """
    Build a read-only float matrix. A flat list is one row; an empty list is
    a 0-row matrix with `cols` columns.
    """
    try:
        M = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatch(f"{name}: not a rectangular numeric array ({exc})") from exc

    if M.size == 0:
        width = cols if cols is not None else (M.shape[-1] if M.ndim == 2 else 0)
        M = np.zeros((0, width))
    elif M.ndim == 1:
        M = M.reshape(1, -1)
    if M.ndim != 2:
        raise DimensionMismatch(f"{name}: expected a 2-D array, got {M.ndim}-D")
    if rows is not None and M.shape[0] != rows:
        raise DimensionMismatch(f"{name}: expected {rows} rows, got {M.shape[0]}")
    if cols is not None and M.shape[1] != cols:
        raise DimensionMismatch(f"{name}: expected {cols} columns, got {M.shape[1]}")
    if not np.all(np.isfinite(M)):
        raise NonFiniteEntry(f"{name}: NaN or Inf entries")

    M.setflags(write=False)
    return M


def _as_2d(M) -> np.ndarray:
    return np.atleast_2d(np.asarray(M))


def _require_square(M: np.ndarray, what: str = "matrix"):
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SquareRequired(f"{what} must be square, got shape {M.shape}")


def numerical_rank(M, tol: ToleranceConfig = DEFAULT_TOLERANCES,
                   rtol: Optional[float] = None) -> int:
    """Count singular values above rtol (default: tol.rank_cutoff) times the largest one."""
    M = _as_2d(M)
    if M.size == 0:
        return 0
    s = scipy.linalg.svdvals(M)
    if s[0] == 0.0:
        return 0
    cutoff = (rtol if rtol is not None else tol.rank_cutoff(M.shape)) * s[0]
    return int(np.count_nonzero(s > cutoff))


def pseudo_inverse(M, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    M = _as_2d(M)
    if M.size == 0:
        return np.zeros((M.shape[1], M.shape[0]))
    return scipy.linalg.pinv(M, atol=0.0, rtol=tol.rank_cutoff(M.shape))


def canonical_signs(B: np.ndarray) -> np.ndarray:
    """Flip rows so that the first significant entry of each row is positive."""
    B = np.array(B, dtype=float)
    for k, row in enumerate(B):
        peak = np.max(np.abs(row)) if row.size else 0.0
        if peak == 0.0:
            continue
        lead = np.flatnonzero(np.abs(row) > SIGN_TOL * peak)[0]
        if row[lead] < 0:
            B[k] = -row
    return B


def orthonormal_nullspace_basis(M, tol: ToleranceConfig = DEFAULT_TOLERANCES,
                                rtol: Optional[float] = None) -> np.ndarray:
    """Rows form an orthonormal basis of {v : M v = 0}."""
    M = _as_2d(M)
    cols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(cols)
    if cols == 0:
        return np.zeros((0, 0))
    cutoff = rtol if rtol is not None else tol.rank_cutoff(M.shape)
    basis = scipy.linalg.null_space(M, rcond=cutoff).T
    return canonical_signs(basis)


def orthonormal_row_basis(M, tol: ToleranceConfig = DEFAULT_TOLERANCES,
                          rtol: Optional[float] = None) -> np.ndarray:
    """Rows form an orthonormal basis of the row space of M."""
    M = _as_2d(M)
    cols = M.shape[1]
    if M.size == 0:
        return np.zeros((0, cols))
    rank = numerical_rank(M, tol, rtol)
    _, _, vh = scipy.linalg.svd(M, full_matrices=False)
    return canonical_signs(vh[:rank].real)


def eigenvalues(M) -> np.ndarray:
    M = np.asarray(M)
    _require_square(M)
    if M.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    return scipy.linalg.eigvals(M).astype(complex)


def spectral_radius(M) -> float:
    eigs = eigenvalues(M)
    return float(np.max(np.abs(eigs))) if eigs.size else 0.0


def is_schur_stable(M, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    return spectral_radius(M) < 1.0 - tol.stability_margin


def unstable_eigenvalues(M, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """Eigenvalues with |s| >= 1 - stability_margin (the boundary counts as unstable)."""
    eigs = eigenvalues(M)
    return eigs[np.abs(eigs) >= 1.0 - tol.stability_margin]


def row_space_contains(M, rows, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    M, rows = _as_2d(M), _as_2d(rows)
    if rows.size == 0:
        return True
    if M.shape[1] != rows.shape[1]:
        raise DimensionMismatch(
            f"row_space_contains: {M.shape[1]} columns vs {rows.shape[1]} columns")
    return numerical_rank(np.vstack([M, rows]), tol) == numerical_rank(M, tol)


def observability_matrix(A, C) -> np.ndarray:
    """Stack C, CA, ..., CA^(n-1)."""
    A, C = np.asarray(A, dtype=float), _as_2d(np.asarray(C, dtype=float))
    _require_square(A, "A")
    n = A.shape[0]
    if C.shape[0] == 0 or n == 0:
        return np.zeros((0, n))
    blocks = [C]
    for _ in range(n - 1):
        blocks.append(blocks[-1] @ A)
    return np.vstack(blocks)


def observable_row_space(A, C, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """
    Orthonormal rows spanning the row space of the observability matrix.

    Grown one block at a time (C, then new directions of V·A orthogonal to
    the current basis) instead of stacking raw powers of A, which keeps the
    rank decisions well conditioned when eigenvalues cluster.
    """
    A, C = np.asarray(A, dtype=float), _as_2d(np.asarray(C, dtype=float))
    _require_square(A, "A")
    n = A.shape[0]
    if C.shape[0] == 0 or n == 0:
        return np.zeros((0, n))
    if C.shape[1] != n:
        raise DimensionMismatch(f"C has {C.shape[1]} columns, A is {n}x{n}")

    basis = orthonormal_row_basis(C, tol, rtol=tol.pbh_tol)
    frontier = basis
    floor = tol.pbh_tol * max(1.0, float(scipy.linalg.norm(A, 2)))
    while frontier.shape[0] and basis.shape[0] < n:
        cand = frontier @ A
        for _ in range(2):
            cand = cand - (cand @ basis.T) @ basis
        _, s, vh = scipy.linalg.svd(cand, full_matrices=False)
        frontier = vh[: int(np.count_nonzero(s > floor))]
        basis = np.vstack([basis, frontier])
    return basis


def invert_with_condition(T) -> Tuple[np.ndarray, float]:
    """Inverse by direct solve, plus the 2-norm condition number."""
    T = np.asarray(T, dtype=float)
    _require_square(T, "T")
    if T.shape[0] == 0:
        return np.zeros((0, 0)), 1.0
    T_inv = scipy.linalg.solve(T, np.eye(T.shape[0]))
    cond = float(np.linalg.cond(T))
    logger.debug("inverted %dx%d matrix, condition %.3g", *T.shape, cond)
    return T_inv, cond


def max_abs(R) -> float:
    R = np.asarray(R)
    return float(np.max(np.abs(R))) if R.size else 0.0


def residual_ok(R, scale: float, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    """max |R| <= residual_tol * max(1, scale)."""
    return max_abs(R) <= tol.residual_tol * max(1.0, float(scale))

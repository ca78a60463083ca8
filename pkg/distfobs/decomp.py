"""
decomp — functional and multi-sensor staircase decompositions
=============================================================
Two coordinate changes turn the plant into the form the observer network
runs on.

FunctionalDecomposition
    T = [Σ; V] with V an orthonormal basis of ker Σ. Because R(Σᵀ) is
    Aᵀ-invariant, φ[k] = Σx[k] evolves on its own:
        φ[k+1] = A_D φ[k],   ȳ[k] = C* x[k] = C_D φ[k]
    with A_D = ΣAΣ† and C_D = C*Σ†. The first r entries of φ are ψ = Lx.

StaircaseDecomposition
    φ = T_D z. Leaders are processed in ascending node order; pass i splits
    the still-unobserved subspace into the part leader i observes and the
    rest. The transformed A_D is block lower triangular

        [A_11                 ]        C̄_i = [C_i1 ... C_ii 0 ... 0]
        [A_21  A_22           ]
        [ ...        ...      ]
        [A_1   A_2  ...  A_U  ]

    with every (A_ii, C_ii) observable and A_U the jointly unobservable part.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core.numkit import (
    DEFAULT_TOLERANCES,
    ToleranceConfig,
    canonical_signs,
    invert_with_condition,
    max_abs,
    observable_row_space,
    orthonormal_nullspace_basis,
    pseudo_inverse,
    residual_ok,
)
from .exception import DecompositionFailed, DimensionMismatch, ResidualTooLarge
from .leaderselect import LeaderSelection, pbh_detectable
from .sysmodel import SystemModel

logger = logging.getLogger(__name__)

# Above this condition number T is reported as poorly conditioned.
COND_WARN = 1e8


@dataclass(frozen=True)
class FunctionalDecomposition:
    Sigma: np.ndarray
    Sigma_pinv: np.ndarray
    V: np.ndarray
    T: np.ndarray
    T_inv: np.ndarray
    condition_number: float
    A_D: np.ndarray
    C_D: np.ndarray
    A_E: np.ndarray
    A_F: np.ndarray
    r: int
    leader_rows: Tuple[Tuple[int, int, int], ...]
    detectable: bool

    @property
    def r_star(self) -> int:
        return self.Sigma.shape[0]

    def C_D_blocks(self) -> List[np.ndarray]:
        return [self.C_D[start:stop] for _, start, stop in self.leader_rows]

    @property
    def leaders(self) -> Tuple[int, ...]:
        return tuple(node for node, _, _ in self.leader_rows)

    def to_dict(self) -> Dict:
        return {
            "A_D": self.A_D.tolist(),
            "C_D": self.C_D.tolist(),
            "A_E": self.A_E.tolist(),
            "A_F": self.A_F.tolist(),
            "V": self.V.tolist(),
            "condition_number": self.condition_number,
            "detectable": self.detectable,
        }


def _check(R, scale: float, tol: ToleranceConfig, what: str):
    if not residual_ok(R, scale, tol):
        raise ResidualTooLarge(f"{what}: residual {max_abs(R):.3e} exceeds tolerance")


def build_functional_decomposition(m: SystemModel, ls: LeaderSelection,
                                   tol: ToleranceConfig = DEFAULT_TOLERANCES
                                   ) -> FunctionalDecomposition:
    A, Sigma, C_star = m.A, ls.Sigma, ls.C_star
    n, r_star = m.n, Sigma.shape[0]

    Sigma_pinv = pseudo_inverse(Sigma, tol)
    A_D = Sigma @ A @ Sigma_pinv
    C_D = C_star @ Sigma_pinv
    scale = max_abs(Sigma) * max(1.0, max_abs(A))
    _check(Sigma @ A - A_D @ Sigma, scale, tol, "ΣA = A_DΣ")
    _check(C_star - C_D @ Sigma, max_abs(C_star), tol, "C* = C_DΣ")

    V = orthonormal_nullspace_basis(Sigma, tol)
    if V.shape[0] != n - r_star:
        raise DecompositionFailed(f"ker Σ has dimension {V.shape[0]}, expected {n - r_star}")
    _check(Sigma @ V.T, max_abs(Sigma), tol, "ΣVᵀ = 0")

    T = np.vstack([Sigma, V])
    T_inv, cond = invert_with_condition(T)
    _check(T @ T_inv - np.eye(n), 1.0, tol, "T·T⁻¹ = I")
    if cond > COND_WARN:
        logger.warning("transformation T poorly conditioned (cond=%.3e)", cond)

    blocks = T @ A @ T_inv
    _check(blocks[:r_star, r_star:], max(1.0, max_abs(A)) * cond, tol, "upper-right block of TAT⁻¹")
    A_E = blocks[r_star:, :r_star]
    A_F = blocks[r_star:, r_star:]

    detectable = pbh_detectable(A_D, C_D, tol)
    if not detectable:
        logger.warning("(A_D, C_D) is not detectable; the design will not converge")
    logger.info("functional decomposition: r*=%d, cond(T)=%.3e", r_star, cond)

    return FunctionalDecomposition(
        Sigma=Sigma, Sigma_pinv=Sigma_pinv, V=V, T=T, T_inv=T_inv, condition_number=cond,
        A_D=A_D, C_D=C_D, A_E=A_E, A_F=A_F, r=m.r,
        leader_rows=tuple(ls.row_blocks()), detectable=detectable)


@dataclass(frozen=True)
class StaircaseDecomposition:
    T_D: np.ndarray
    T_D_inv: np.ndarray
    A_bar: np.ndarray
    C_bar: Tuple[np.ndarray, ...]
    dims: Tuple[int, ...]
    u: int
    leaders: Tuple[int, ...]

    @property
    def M(self) -> int:
        return len(self.dims)

    @property
    def r_star(self) -> int:
        return self.A_bar.shape[0]

    @property
    def offsets(self) -> Tuple[int, ...]:
        """Start of each sub-state block in z, then the start of z_U."""
        return tuple(int(v) for v in np.concatenate([[0], np.cumsum(self.dims)]))

    def _span(self, j) -> slice:
        # j in 1..M, or "U"
        off = self.offsets
        if j == "U":
            return slice(off[-1], self.r_star)
        return slice(off[j - 1], off[j])

    def A_block(self, i, j) -> np.ndarray:
        return self.A_bar[self._span(i), self._span(j)]

    def C_block(self, i: int, j) -> np.ndarray:
        return self.C_bar[i - 1][:, self._span(j)]

    @property
    def diag_blocks(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        return [(self.A_block(i, i), self.C_block(i, i)) for i in range(1, self.M + 1)]

    @property
    def sub_diag(self) -> Dict[Tuple[int, int], np.ndarray]:
        return {(i, j): self.A_block(i, j) for i in range(1, self.M + 1) for j in range(1, i)}

    @property
    def meas_coupling(self) -> Dict[Tuple[int, int], np.ndarray]:
        return {(i, j): self.C_block(i, j) for i in range(1, self.M + 1) for j in range(1, i)}

    @property
    def A_U(self) -> np.ndarray:
        return self.A_block("U", "U")

    @property
    def bottom_coupling(self) -> List[np.ndarray]:
        return [self.A_block("U", j) for j in range(1, self.M + 1)]

    def sub_state_of(self, leader: int) -> int:
        return self.leaders.index(leader) + 1

    def to_dict(self) -> Dict:
        return {"leaders": list(self.leaders), "dims": list(self.dims), "u": self.u,
                "T_D": self.T_D.tolist(), "A_bar": self.A_bar.tolist()}


def build_staircase(A_D, C_D_blocks: Sequence[np.ndarray],
                    tol: ToleranceConfig = DEFAULT_TOLERANCES,
                    leaders: Optional[Sequence[int]] = None) -> StaircaseDecomposition:
    """
    C_D_blocks[i] holds the rows of C_D measured by the (i+1)-th leader.
    Bases are orthonormal, so T_D⁻¹ = T_Dᵀ.
    """
    A_D = np.asarray(A_D, dtype=float)
    r_star = A_D.shape[0]
    blocks = [np.asarray(C, dtype=float).reshape(-1, r_star) for C in C_D_blocks]
    leaders = tuple(leaders) if leaders is not None else tuple(range(1, len(blocks) + 1))
    if len(leaders) != len(blocks):
        raise DimensionMismatch(f"{len(leaders)} leaders for {len(blocks)} measurement blocks")

    U = np.eye(r_star)
    parts, dims = [], []
    for leader, C_i in zip(leaders, blocks):
        A_r = U @ A_D @ U.T
        C_r = C_i @ U.T
        Q = observable_row_space(A_r, C_r, tol) if U.shape[0] else np.zeros((0, 0))
        parts.append(canonical_signs(Q @ U) if Q.shape[0] else np.zeros((0, r_star)))
        dims.append(Q.shape[0])
        if Q.shape[0]:
            U = canonical_signs(orthonormal_nullspace_basis(Q, tol) @ U)
        logger.debug("staircase pass for leader %d: o=%d, residual %d", leader, dims[-1], U.shape[0])

    T_D_inv = np.vstack([*parts, U]) if parts else U
    T_D = T_D_inv.T
    _check(T_D_inv @ T_D - np.eye(r_star), 1.0, tol, "T_D orthonormality")

    A_bar = T_D_inv @ A_D @ T_D
    C_bar = [C_i @ T_D for C_i in blocks]
    off = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    scale = max(1.0, max_abs(A_D))
    for i in range(len(dims)):
        _check(A_bar[off[i]:off[i + 1], off[i + 1]:], scale, tol, f"block row {i + 1} above diagonal")
        A_bar[off[i]:off[i + 1], off[i + 1]:] = 0.0
        _check(C_bar[i][:, off[i + 1]:], max(1.0, max_abs(blocks[i])), tol,
               f"C̄_{i + 1} beyond its own block")
        C_bar[i][:, off[i + 1]:] = 0.0

    for i in range(len(dims)):
        A_ii = A_bar[off[i]:off[i + 1], off[i]:off[i + 1]]
        C_ii = C_bar[i][:, off[i]:off[i + 1]]
        if dims[i] and observable_row_space(A_ii, C_ii, tol).shape[0] != dims[i]:
            raise DecompositionFailed(f"sub-state {i + 1}: (A_ii, C_ii) not observable")

    sc = StaircaseDecomposition(T_D=T_D, T_D_inv=T_D_inv, A_bar=A_bar, C_bar=tuple(C_bar),
                                dims=tuple(dims), u=U.shape[0], leaders=leaders)
    logger.info("staircase dims o=%s, u=%d", sc.dims, sc.u)
    return sc


def staircase_for(fd: FunctionalDecomposition,
                  tol: ToleranceConfig = DEFAULT_TOLERANCES) -> StaircaseDecomposition:
    return build_staircase(fd.A_D, fd.C_D_blocks(), tol, leaders=fd.leaders)


def reduced_measurements(m: SystemModel, ls: LeaderSelection, x) -> Dict[int, np.ndarray]:
    """ȳ = C* x, split by owning leader."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != m.n:
        raise DimensionMismatch(f"state has length {x.shape[0]}, expected {m.n}")
    y = ls.C_star @ x
    return {node: y[start:stop] for node, start, stop in ls.row_blocks()}


@dataclass(frozen=True)
class ReducedState:
    phi: np.ndarray
    z: np.ndarray
    offsets: Tuple[int, ...]

    def substate(self, j: int) -> np.ndarray:
        return self.z[self.offsets[j - 1]:self.offsets[j]]

    @property
    def unobservable(self) -> np.ndarray:
        return self.z[self.offsets[-1]:]

    def psi(self, r: int) -> np.ndarray:
        return self.phi[:r]


def reduced_state(fd: FunctionalDecomposition, sc: StaircaseDecomposition, x) -> ReducedState:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != fd.Sigma.shape[1]:
        raise DimensionMismatch(f"state has length {x.shape[0]}, expected {fd.Sigma.shape[1]}")
    phi = fd.Sigma @ x
    return ReducedState(phi=phi, z=sc.T_D_inv @ phi, offsets=sc.offsets)

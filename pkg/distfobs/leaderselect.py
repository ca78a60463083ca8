"""
leaderselect — feasible, minimal and functional leader sets
===========================================================
A node set S is a feasible leader set when some row sub-matrix C̄_S of its
stacked measurements satisfies

    invariance:     rank [LA; C̄_S A; L; C̄_S] = rank [L; C̄_S]
    detectability:  rank [s[L; C̄_S] - [L; C̄_S]A; C̄_S] = rank [L; C̄_S]
                    for every |s| >= 1

A feasible set with no feasible proper subset is minimal. Among the minimal
sets, the functional leader set is one whose best row selection gives the
lowest rank of [L; C̄_S]; that rank is the observer order r*.

The "for every |s| >= 1" quantifier is decided at finitely many points.
When the invariance condition holds it is equivalent to PBH detectability
of the reduced pair (A_D, C_D) = (ΣAΣ†, C̄_S Σ†), tested at the eigenvalues
of A_D. Otherwise the pencil is evaluated at the unstable eigenvalues of A
plus a few generic points.

Usage:
    ls = select_functional_leader_set(model)
    ls.S_star, ls.r_star, ls.Sigma
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .core.numkit import (
    DEFAULT_TOLERANCES,
    ToleranceConfig,
    max_abs,
    numerical_rank,
    observable_row_space,
    orthonormal_nullspace_basis,
    pseudo_inverse,
    residual_ok,
    unstable_eigenvalues,
)
from .exception import EmptySelection, NoFeasibleLeaderSet
from .sysmodel import RowSelection, SystemModel, stacked_C

logger = logging.getLogger(__name__)

# Off-spectrum points where a rank deficiency can only be structural.
GENERIC_POINTS = (1.3179 + 0.4123j, -1.7071 + 0.2357j, 2.4817 - 0.9173j)


@dataclass(frozen=True)
class SearchCaps:
    """Bounds on the brute-force search: node-set size and selected rows."""
    max_set_size: Optional[int] = None
    max_rows: int = 12

    def __post_init__(self):
        if self.max_set_size is not None and self.max_set_size < 1:
            raise ValueError(f"max_set_size must be >= 1, got {self.max_set_size}")
        if self.max_rows < 1:
            raise ValueError(f"max_rows must be >= 1, got {self.max_rows}")

    def to_dict(self) -> Dict:
        return {"max_set_size": self.max_set_size, "max_rows": self.max_rows}


DEFAULT_CAPS = SearchCaps()


@dataclass(frozen=True)
class FeasibilityCertificate:
    node_set: Tuple[int, ...]
    selection: RowSelection
    sigma_rank: int
    cond_rank_holds: bool
    cond_detect_holds: bool

    @property
    def feasible(self) -> bool:
        return self.cond_rank_holds and self.cond_detect_holds

    def to_dict(self) -> Dict:
        return {
            "node_set": list(self.node_set),
            "selection": self.selection.to_dict(),
            "sigma_rank": self.sigma_rank,
            "cond_rank_holds": self.cond_rank_holds,
            "cond_detect_holds": self.cond_detect_holds,
            "feasible": self.feasible,
        }


class MinimalLeaderSet(NamedTuple):
    nodes: Tuple[int, ...]
    selection: RowSelection
    rank: int
    certificate: FeasibilityCertificate

    def to_dict(self) -> Dict:
        return {"nodes": list(self.nodes), "selection": self.selection.to_dict(),
                "rank": self.rank}


@dataclass(frozen=True)
class LeaderSelection:
    S_star: Tuple[int, ...]
    selection: RowSelection
    C_star: np.ndarray
    r_star: int
    Sigma: np.ndarray
    certificate: Optional[FeasibilityCertificate] = None

    @property
    def leaders(self) -> Tuple[int, ...]:
        """Nodes contributing rows to C*, ascending."""
        return self.selection.nodes

    def row_blocks(self) -> List[Tuple[int, int, int]]:
        """(node, start, stop) slices of C* per leader."""
        blocks, start = [], 0
        for node, rows in self.selection.picks:
            blocks.append((node, start, start + len(rows)))
            start += len(rows)
        return blocks

    def to_dict(self) -> Dict:
        return {
            "S_star": list(self.S_star),
            "selection": self.selection.to_dict(),
            "C_star": self.C_star.tolist(),
            "r_star": self.r_star,
            "Sigma": self.Sigma.tolist(),
        }


class DarouachCheck(NamedTuple):
    rank_cond: bool
    detect_cond: bool


@dataclass(frozen=True)
class CentralizedCoupling:
    """A solution of LA = M1·L + M2·C + M3·CA for the full stacked C."""
    M1: np.ndarray
    M2: np.ndarray
    M3: np.ndarray
    coupled_nodes: Tuple[int, ...]

    def to_dict(self) -> Dict:
        return {"M1": self.M1.tolist(), "M2": self.M2.tolist(), "M3": self.M3.tolist(),
                "coupled_nodes": list(self.coupled_nodes)}


# ─────────────────────────────────────────────────────────────
# Rank tests
# ─────────────────────────────────────────────────────────────

def _candidates(A, tol: ToleranceConfig) -> List[complex]:
    return [complex(s) for s in unstable_eigenvalues(A, tol)] + list(GENERIC_POINTS)


def pbh_detectable(A, C, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    """rank [sI - A; C] = n at every eigenvalue of A with |s| >= 1 - stability_margin."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    C = np.asarray(C, dtype=float).reshape(-1, n)
    for s in unstable_eigenvalues(A, tol):
        pencil = np.vstack([s * np.eye(n) - A, C.astype(complex)])
        if numerical_rank(pencil, tol, rtol=tol.pbh_tol) < n:
            logger.debug("PBH rank drop at s=%s", s)
            return False
    return True


def check_darouach(m: SystemModel, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> DarouachCheck:
    """Centralized existence conditions for an order-r functional observer, full stacked C."""
    A, L, C = m.A, m.L, m.C_full
    rhs_stack = np.vstack([C @ A, C, L])
    rhs = numerical_rank(rhs_stack, tol)
    rank_cond = numerical_rank(np.vstack([L @ A, rhs_stack]), tol) == rhs

    detect_cond = True
    for s in _candidates(A, tol):
        pencil = np.vstack([s * L - L @ A, C @ A, C]).astype(complex)
        if numerical_rank(pencil, tol, rtol=tol.pbh_tol) != rhs:
            detect_cond = False
            logger.debug("Darouach detectability fails at s=%s", s)
            break
    return DarouachCheck(rank_cond, detect_cond)


def centralized_coupling(m: SystemModel,
                         tol: ToleranceConfig = DEFAULT_TOLERANCES) -> Optional[CentralizedCoupling]:
    """
    Minimum-norm M1, M2, M3 with LA = M1 L + M2 C + M3 CA, or None when the
    invariance condition fails. `coupled_nodes` lists the nodes whose
    measurements carry nonzero weight: every one of them must be available
    to a centralized estimator.
    """
    A, L, C = m.A, m.L, m.C_full
    basis = np.vstack([L, C, C @ A])
    coeffs = (L @ A) @ pseudo_inverse(basis, tol)
    if not residual_ok(coeffs @ basis - L @ A, max_abs(L @ A), tol):
        return None

    r, p = L.shape[0], C.shape[0]
    M1, M2, M3 = coeffs[:, :r], coeffs[:, r:r + p], coeffs[:, r + p:]
    floor = tol.residual_tol * max(1.0, max_abs(coeffs))
    owners = [i for i, k in enumerate(m.row_counts, start=1) for _ in range(k)]
    coupled = sorted({owners[c] for c in range(p)
                      if max(max_abs(M2[:, c]), max_abs(M3[:, c])) > floor})
    return CentralizedCoupling(M1, M2, M3, tuple(coupled))


def build_sigma(L, C_star, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """Σ = [L; C̃*], keeping rows of C* (in order) that raise the rank."""
    rows = [np.asarray(L, dtype=float)]
    rank = numerical_rank(rows[0], tol)
    for c in np.asarray(C_star, dtype=float):
        trial = np.vstack([*rows, c])
        trial_rank = numerical_rank(trial, tol)
        if trial_rank > rank:
            rows.append(c.reshape(1, -1))
            rank = trial_rank
    return np.vstack(rows)


def check_feasible(m: SystemModel, S: Iterable[int], sel: RowSelection,
                   tol: ToleranceConfig = DEFAULT_TOLERANCES) -> FeasibilityCertificate:
    S = tuple(sorted(set(S)))
    if not S:
        raise EmptySelection("node set is empty")
    if sel.total_rows == 0:
        raise EmptySelection("row selection picks no rows")
    Cbar = stacked_C(m, S, sel)
    A, L = m.A, m.L

    stack = np.vstack([L, Cbar])
    sigma_rank = numerical_rank(stack, tol)
    cond_rank = numerical_rank(np.vstack([L @ A, Cbar @ A, stack]), tol) == sigma_rank

    if cond_rank:
        Sigma = build_sigma(L, Cbar, tol)
        pinv = pseudo_inverse(Sigma, tol)
        cond_detect = pbh_detectable(Sigma @ A @ pinv, Cbar @ pinv, tol)
    else:
        cond_detect = True
        for s in _candidates(A, tol):
            pencil = np.vstack([s * stack - stack @ A, Cbar]).astype(complex)
            if numerical_rank(pencil, tol, rtol=tol.pbh_tol) != sigma_rank:
                cond_detect = False
                break

    cert = FeasibilityCertificate(S, sel, sigma_rank, cond_rank, cond_detect)
    logger.debug("S=%s rows=%s rank=%d invariance=%s detect=%s",
                 S, sel.to_dict(), sigma_rank, cond_rank, cond_detect)
    return cert


# ─────────────────────────────────────────────────────────────
# Search
# ─────────────────────────────────────────────────────────────

def _best_selection(m: SystemModel, S: Tuple[int, ...], tol: ToleranceConfig,
                    caps: SearchCaps) -> Optional[FeasibilityCertificate]:
    """Feasible selection covering every node of S minimizing (rank, rows, pairs)."""
    pairs = [(i, row) for i in S for row in range(m.sensor(i).shape[0])]
    A, L = m.A, m.L
    rows_of = {i: m.sensor(i) for i in S}
    best, best_key = None, None
    for k in range(len(S), min(caps.max_rows, len(pairs)) + 1):
        if best_key is not None and best_key[0] == m.r:
            break
        for chosen in combinations(pairs, k):
            if {i for i, _ in chosen} != set(S):
                continue
            # Rank and invariance first, detectability only for survivors.
            Cbar = np.vstack([rows_of[i][row] for i, row in chosen])
            stack = np.vstack([L, Cbar])
            rank = numerical_rank(stack, tol)
            if best_key is not None and rank >= best_key[0]:
                continue
            if numerical_rank(np.vstack([L @ A, Cbar @ A, stack]), tol) != rank:
                continue
            cert = check_feasible(m, S, RowSelection.from_pairs(chosen), tol)
            if not cert.feasible:
                continue
            key = (cert.sigma_rank, k, chosen)
            if best_key is None or key < best_key:
                best, best_key = cert, key
    return best


def enumerate_minimal_leader_sets(m: SystemModel, tol: ToleranceConfig = DEFAULT_TOLERANCES,
                                  caps: SearchCaps = DEFAULT_CAPS) -> List[MinimalLeaderSet]:
    """
    All minimal leader sets within caps, by increasing size then
    lexicographically, each with its lowest-rank feasible row selection.
    """
    top = m.N if caps.max_set_size is None else min(caps.max_set_size, m.N)
    feasible: Dict[FrozenSet[int], bool] = {}
    found: List[MinimalLeaderSet] = []

    for size in range(1, top + 1):
        for S in combinations(range(1, m.N + 1), size):
            key = frozenset(S)
            # Feasibility is inherited from any feasible subset, which also rules out minimality.
            if size > 1 and any(feasible.get(key - {i}, False) for i in S):
                feasible[key] = True
                continue
            cert = _best_selection(m, S, tol, caps)
            feasible[key] = cert is not None
            if cert is not None:
                found.append(MinimalLeaderSet(S, cert.selection, cert.sigma_rank, cert))
                logger.debug("minimal leader set %s rank %d", S, cert.sigma_rank)

    logger.info("%d minimal leader set(s) found", len(found))
    return found


def select_functional_leader_set(m: SystemModel, tol: ToleranceConfig = DEFAULT_TOLERANCES,
                                 caps: SearchCaps = DEFAULT_CAPS,
                                 minimal: Optional[Sequence[MinimalLeaderSet]] = None
                                 ) -> LeaderSelection:
    if minimal is None:
        minimal = enumerate_minimal_leader_sets(m, tol, caps)
    if not minimal:
        raise NoFeasibleLeaderSet("no feasible leader set within the search caps")
    best = min(minimal, key=lambda ms: (ms.rank, ms.nodes))
    C_star = stacked_C(m, best.nodes, best.selection)
    Sigma = build_sigma(m.L, C_star, tol)
    ls = LeaderSelection(S_star=best.nodes, selection=best.selection, C_star=C_star,
                         r_star=Sigma.shape[0], Sigma=Sigma, certificate=best.certificate)
    logger.info("functional leader set S*=%s, r*=%d", ls.S_star, ls.r_star)
    return ls


# ─────────────────────────────────────────────────────────────
# Subspace dimensions
# ─────────────────────────────────────────────────────────────

def observable_subspace_dim(A, C, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> int:
    return observable_row_space(A, C, tol).shape[0]


def detectable_subspace_dim(A, C, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> int:
    """n minus the number of modes of A on the unobservable subspace with |s| >= 1."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    C = np.asarray(C, dtype=float).reshape(-1, n)
    obs = observable_row_space(A, C, tol)
    if obs.shape[0] == n:
        return n
    unobs = orthonormal_nullspace_basis(obs, tol) if obs.shape[0] else np.eye(n)
    restricted = unobs @ A @ unobs.T
    return n - len(unstable_eigenvalues(restricted, tol))


def reduces_to_state_estimation(m: SystemModel, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    """L square and nonsingular: invariance holds trivially and S* needs a detectable (A, C_S)."""
    return m.L.shape[0] == m.L.shape[1] and numerical_rank(m.L, tol) == m.n


def certificate_for(m: SystemModel, S: Iterable[int], rows: Optional[RowSelection] = None,
                    tol: ToleranceConfig = DEFAULT_TOLERANCES) -> FeasibilityCertificate:
    """check_feasible with every row of S selected when no selection is given."""
    S = tuple(sorted(set(S)))
    return check_feasible(m, S, rows if rows is not None else RowSelection.all_rows(m, S), tol)


__all__ = [
    "SearchCaps", "FeasibilityCertificate", "MinimalLeaderSet", "LeaderSelection",
    "DarouachCheck", "CentralizedCoupling", "check_darouach", "centralized_coupling",
    "check_feasible", "certificate_for", "enumerate_minimal_leader_sets",
    "select_functional_leader_set", "build_sigma", "pbh_detectable",
    "observable_subspace_dim", "detectable_subspace_dim", "reduces_to_state_estimation",
]

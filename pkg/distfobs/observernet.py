"""
observernet — gains, consensus weights and node update laws
===========================================================
Every node i keeps an estimate ẑ^(j)_i of each sub-state j = 1..M and an
estimate ẑ_iU of the unobservable part. One synchronous round:

    leader of j:  ẑ^(j)_i+ = A_jj ẑ^(j)_i + Σ_{l<j} A_jl ẑ^(l)_i
                             + G_j (ȳ_i - C_jj ẑ^(j)_i - Σ_{l<j} C_jl ẑ^(l)_i)
    others:       ẑ^(j)_i+ = A_jj Σ_{l∈N_i} w^j_il ẑ^(j)_l + Σ_{l<j} A_jl ẑ^(l)_i
    everyone:     ẑ_iU+    = A_U ẑ_iU + Σ_j A_j ẑ^(j)_i

Consensus weights live on a BFS spanning tree rooted at the leader: a node
listens only to its parent. In the tree's topological order the follower
error blocks are strictly lower triangular, so they contribute only zero
eigenvalues to the closed loop.

The module also carries the naive single-function observer
    x̂_i+ = α_i Σ_{j∈N_i} w_ij x̂_j + β_i Σ_{j∈N_i} y_j
and its error system e+ = M e + B1 ψ + B2 y.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.signal

from .core.graphkit import DiGraph, SpanningTree, is_strongly_connected, neighborhood, spanning_tree_rooted_at
from .core.numkit import (
    DEFAULT_TOLERANCES,
    ToleranceConfig,
    eigenvalues,
    max_abs,
    numerical_rank,
    observability_matrix,
    observable_row_space,
    real_matrix,
    residual_ok,
    spectral_radius,
)
from .decomp import StaircaseDecomposition
from .exception import (
    DecompositionFailed,
    DimensionMismatch,
    NotStronglyConnected,
    ScenarioError,
    SynthesisFailed,
)
from .sysmodel import SystemModel

logger = logging.getLogger(__name__)

DEFAULT_RHO = 0.2

# Closed-loop poles for blocks of dimension > 1 are spread over
# rho * [-POLE_SPREAD, POLE_SPREAD].
POLE_SPREAD = 0.9

# Random restarts for deadbeat design on blocks that are not cyclic.
DEADBEAT_ATTEMPTS = 20
DEADBEAT_SEED = 0


# ─────────────────────────────────────────────────────────────
# Gains
# ─────────────────────────────────────────────────────────────

def target_poles(order: int, rho: float) -> np.ndarray:
    if order == 1:
        return np.array([rho])
    return rho * np.linspace(POLE_SPREAD, -POLE_SPREAD, order)


def _ackermann_deadbeat(F: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Column g with F - g c nilpotent, for observable (F, c) and a single row c."""
    o = F.shape[0]
    e_last = np.zeros(o)
    e_last[-1] = 1.0
    return (np.linalg.matrix_power(F, o) @ scipy.linalg.solve(observability_matrix(F, c), e_last)
            ).reshape(o, 1)


def _is_nilpotent(F: np.ndarray, tol: ToleranceConfig) -> bool:
    o = F.shape[0]
    scale = max(1.0, float(scipy.linalg.norm(F, 2))) ** o
    return residual_ok(np.linalg.matrix_power(F, o), scale, tol)


def _deadbeat_gain(A: np.ndarray, C: np.ndarray, tol: ToleranceConfig) -> np.ndarray:
    """
    Deadbeat gain when C has fewer independent rows than A has states.

    A preliminary gain G0 makes A - G0 C cyclic, a single combination w C
    observes it, and Ackermann's formula puts every pole at zero:
    A - (G0 + g w) C = (A - G0 C) - g (w C). The first attempt uses G0 = 0.
    """
    o, k = A.shape[0], C.shape[0]
    rng = np.random.default_rng(DEADBEAT_SEED)
    size = max(1.0, max_abs(A))
    for attempt in range(DEADBEAT_ATTEMPTS):
        if attempt == 0:
            G0, w = np.zeros((o, k)), np.ones(k)
        else:
            G0, w = size * rng.standard_normal((o, k)), rng.standard_normal(k)
        F = A - G0 @ C
        c = (w @ C).reshape(1, o)
        if observable_row_space(F, c, tol).shape[0] < o:
            continue
        try:
            G = G0 + _ackermann_deadbeat(F, c) @ w.reshape(1, k)
        except np.linalg.LinAlgError:
            continue
        if _is_nilpotent(A - G @ C, tol):
            logger.debug("deadbeat gain for order-%d block after %d attempt(s)", o, attempt + 1)
            return G
    raise SynthesisFailed(f"no deadbeat gain found for the order-{o} block; "
                          f"(A, C) is not observable")


def design_gain(A, C, rho: float = DEFAULT_RHO,
                tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """
    G with spectral radius of A - G C at most rho, by dual pole placement.
    A rank-deficient C is first compressed to an orthonormal row basis.
    rho = 0 asks for a deadbeat gain: A - G C nilpotent.
    """
    A = np.asarray(A, dtype=float)
    o = A.shape[0]
    C = np.asarray(C, dtype=float)
    C = C.reshape(-1, o) if C.size else np.zeros((len(C) if C.ndim == 2 else 0, o))
    t = C.shape[0]
    if rho < 0:
        raise SynthesisFailed(f"rho must be >= 0, got {rho}")
    if o == 0:
        return np.zeros((0, t))
    if spectral_radius(A) <= rho:
        return np.zeros((o, t))

    k = numerical_rank(C, tol, rtol=tol.pbh_tol)
    if k == 0:
        raise SynthesisFailed("C has no usable rows and A is not already within rho")
    U_k = scipy.linalg.svd(C, full_matrices=False)[0][:, :k]
    C_red = U_k.T @ C
    if rho == 0.0 and o > k:
        return _deadbeat_gain(A, C_red, tol) @ U_k.T

    try:
        placed = scipy.signal.place_poles(A.T, C_red.T, target_poles(o, rho))
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SynthesisFailed(f"pole placement failed: {exc}") from exc
    G = placed.gain_matrix.T @ U_k.T

    achieved = spectral_radius(A - G @ C)
    if achieved > rho + tol.stability_margin:
        raise SynthesisFailed(f"closed-loop spectral radius {achieved:.6g} exceeds rho={rho}")
    logger.debug("gain for order-%d block: radius %.3g", o, achieved)
    return G


# ─────────────────────────────────────────────────────────────
# Consensus weights
# ─────────────────────────────────────────────────────────────

def design_consensus_weights(g: DiGraph, leaders: Sequence[int]
                             ) -> Tuple[Tuple[SpanningTree, ...], Tuple[np.ndarray, ...]]:
    """
    One BFS tree per sub-state, rooted at its leader, and the N x N weight
    matrix W^j with W^j[i-1, l-1] = w^j_il.
    """
    if not is_strongly_connected(g):
        raise NotStronglyConnected("communication graph is not strongly connected")
    trees, weights = [], []
    for leader in leaders:
        tree = spanning_tree_rooted_at(g, leader)
        W = np.zeros((g.node_count, g.node_count))
        W[leader - 1, leader - 1] = 1.0
        for child, parent in tree.parent.items():
            W[child - 1, parent - 1] = 1.0
        W.setflags(write=False)
        trees.append(tree)
        weights.append(W)
    return tuple(trees), tuple(weights)


@dataclass(frozen=True)
class ObserverDesign:
    graph: DiGraph
    leaders: Tuple[int, ...]
    gains: Tuple[np.ndarray, ...]
    trees: Tuple[SpanningTree, ...]
    weights: Tuple[np.ndarray, ...]
    rho: Tuple[float, ...]

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    def gain(self, leader: int) -> np.ndarray:
        return self.gains[self.leaders.index(leader)]

    def parent(self, j: int, i: int) -> Optional[int]:
        return self.trees[j - 1].parent.get(i)

    def to_dict(self) -> Dict:
        return {
            "leaders": list(self.leaders),
            "rho": list(self.rho),
            "gains": {str(l): G.tolist() for l, G in zip(self.leaders, self.gains)},
            "trees": [t.to_dict() for t in self.trees],
        }


def design_observer(graph: DiGraph, staircase: StaircaseDecomposition,
                    leaders: Optional[Sequence[int]] = None,
                    rho: Union[float, Mapping[int, float]] = DEFAULT_RHO,
                    tol: ToleranceConfig = DEFAULT_TOLERANCES) -> ObserverDesign:
    """
    leaders[j-1] owns sub-state j and must match the staircase's ordering
    (None takes it from the staircase). rho is one radius for every leader
    or a mapping leader -> radius.
    """
    if leaders is None:
        leaders = staircase.leaders
    leaders = tuple(int(l) for l in leaders)
    if leaders != staircase.leaders:
        raise DimensionMismatch(f"leaders {leaders} do not match the staircase's {staircase.leaders}")
    radii = tuple(float(rho.get(l, DEFAULT_RHO)) if isinstance(rho, Mapping) else float(rho)
                  for l in leaders)
    gains = tuple(design_gain(A_ii, C_ii, radius, tol)
                  for (A_ii, C_ii), radius in zip(staircase.diag_blocks, radii))
    trees, weights = design_consensus_weights(graph, leaders)
    logger.info("observer designed for leaders %s", leaders)
    return ObserverDesign(graph=graph, leaders=leaders, gains=gains, trees=trees,
                          weights=weights, rho=radii)


# ─────────────────────────────────────────────────────────────
# Update laws
# ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class NodeEstimate:
    substates: Tuple[np.ndarray, ...]
    unobservable: np.ndarray

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([*self.substates, self.unobservable])

    @classmethod
    def from_z(cls, z, staircase: StaircaseDecomposition) -> "NodeEstimate":
        z = np.asarray(z, dtype=float).reshape(-1)
        if z.shape[0] != staircase.r_star:
            raise DimensionMismatch(f"estimate has length {z.shape[0]}, expected {staircase.r_star}")
        off = staircase.offsets
        parts = tuple(z[off[j]:off[j + 1]].copy() for j in range(staircase.M))
        return cls(parts, z[off[-1]:].copy())

    @classmethod
    def zeros(cls, staircase: StaircaseDecomposition) -> "NodeEstimate":
        return cls.from_z(np.zeros(staircase.r_star), staircase)


def psi_hat(estimate: NodeEstimate, staircase: StaircaseDecomposition, r: int) -> np.ndarray:
    """ψ̂ = [I_r 0] T_D ẑ."""
    return (staircase.T_D @ estimate.z)[:r]


def _check_estimate(est: NodeEstimate, sc: StaircaseDecomposition, i: int):
    dims = tuple(v.shape[0] for v in est.substates)
    if dims != sc.dims or est.unobservable.shape[0] != sc.u:
        raise DimensionMismatch(f"node {i}: estimate dims {dims}+{est.unobservable.shape[0]} "
                                f"do not match {sc.dims}+{sc.u}")


def node_update(i: int, estimates: Mapping[int, NodeEstimate], measurement: Optional[np.ndarray],
                design: ObserverDesign, staircase: StaircaseDecomposition) -> NodeEstimate:
    """
    Round-(k+1) estimate of node i from round-k estimates of i and its
    in-neighbors. `measurement` is ȳ_i[k] and is required when i leads a
    sub-state.
    """
    sc = staircase
    own = estimates[i]
    _check_estimate(own, sc, i)
    hood = sorted(neighborhood(design.graph, i))

    nxt: List[np.ndarray] = []
    for j in range(1, sc.M + 1):
        A_jj = sc.A_block(j, j)
        coupling = sum((sc.A_block(j, l) @ own.substates[l - 1] for l in range(1, j)),
                       np.zeros(sc.dims[j - 1]))
        if design.leaders[j - 1] == i:
            if measurement is None:
                raise DimensionMismatch(f"leader {i} needs its measurement")
            y = np.asarray(measurement, dtype=float).reshape(-1)
            C_i = sc.C_bar[j - 1]
            if y.shape[0] != C_i.shape[0]:
                raise DimensionMismatch(f"leader {i}: measurement length {y.shape[0]}, "
                                        f"expected {C_i.shape[0]}")
            predicted = C_i[:, :sc.offsets[j]] @ np.concatenate(own.substates[:j]) \
                if sc.offsets[j] else np.zeros(C_i.shape[0])
            innovation = y - predicted
            nxt.append(A_jj @ own.substates[j - 1] + coupling
                       + design.gains[j - 1] @ innovation)
        else:
            W = design.weights[j - 1]
            mixed = sum((W[i - 1, l - 1] * estimates[l].substates[j - 1]
                         for l in hood if W[i - 1, l - 1] != 0.0),
                        np.zeros(sc.dims[j - 1]))
            nxt.append(A_jj @ mixed + coupling)

    unobs = sc.A_U @ own.unobservable
    for j in range(1, sc.M + 1):
        unobs = unobs + sc.A_block("U", j) @ own.substates[j - 1]
    return NodeEstimate(tuple(nxt), unobs)


def network_step(estimates: Mapping[int, NodeEstimate], measurements: Mapping[int, np.ndarray],
                 design: ObserverDesign, staircase: StaircaseDecomposition) -> Dict[int, NodeEstimate]:
    """One synchronous round: every node reads round-k values only."""
    return {i: node_update(i, estimates, measurements.get(i), design, staircase)
            for i in design.graph.nodes}


def zero_measurements(staircase: StaircaseDecomposition) -> Dict[int, np.ndarray]:
    return {leader: np.zeros(C.shape[0]) for leader, C in zip(staircase.leaders, staircase.C_bar)}


# ─────────────────────────────────────────────────────────────
# Closed-loop error dynamics
# ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ErrorDynamics:
    """
    Error transition matrix over all nodes. Layout: for each sub-state j,
    the nodes of tree j in topological order; then the unobservable block of
    every node in ascending order.
    """
    matrix: np.ndarray
    layout: Tuple[Tuple[object, int, int, int], ...]   # (j or "U", node, start, stop)
    diag_spectra: Tuple[np.ndarray, ...]

    @property
    def spectral_radius(self) -> float:
        radii = [float(np.max(np.abs(s))) for s in self.diag_spectra if s.size]
        return max(radii, default=0.0)

    @property
    def block_spectrum(self) -> np.ndarray:
        return np.concatenate([*self.diag_spectra, np.zeros(0, dtype=complex)])

    def index(self) -> Dict[Tuple[object, int], slice]:
        return {(j, node): slice(start, stop) for j, node, start, stop in self.layout}


def _layout(design: ObserverDesign, sc: StaircaseDecomposition):
    layout, pos = [], 0
    for j in range(1, sc.M + 1):
        for node in design.trees[j - 1].order:
            layout.append((j, node, pos, pos + sc.dims[j - 1]))
            pos += sc.dims[j - 1]
    for node in design.graph.nodes:
        layout.append(("U", node, pos, pos + sc.u))
        pos += sc.u
    return tuple(layout), pos


def assemble_error_dynamics(design: ObserverDesign,
                            staircase: StaircaseDecomposition) -> ErrorDynamics:
    sc = staircase
    layout, size = _layout(design, sc)
    at = {(j, node): slice(start, stop) for j, node, start, stop in layout}
    E = np.zeros((size, size))
    spectra = []

    for j in range(1, sc.M + 1):
        A_jj = sc.A_block(j, j)
        leader = design.leaders[j - 1]
        G = design.gains[j - 1]
        W = design.weights[j - 1]
        for node in design.trees[j - 1].order:
            row = at[(j, node)]
            if node == leader:
                closed = A_jj - G @ sc.C_block(j, j)
                E[row, row] = closed
                for l in range(1, j):
                    E[row, at[(l, node)]] += sc.A_block(j, l) - G @ sc.C_block(j, l)
                spectra.append(eigenvalues(closed))
            else:
                for l in sorted(neighborhood(design.graph, node)):
                    if W[node - 1, l - 1] != 0.0:
                        E[row, at[(j, l)]] += W[node - 1, l - 1] * A_jj
                for l in range(1, j):
                    E[row, at[(l, node)]] += sc.A_block(j, l)
                spectra.append(np.zeros(sc.dims[j - 1], dtype=complex))

    for node in design.graph.nodes:
        row = at[("U", node)]
        E[row, row] = sc.A_U
        for j in range(1, sc.M + 1):
            E[row, at[(j, node)]] = sc.A_block("U", j)
        spectra.append(eigenvalues(sc.A_U))

    dyn = ErrorDynamics(matrix=E, layout=layout, diag_spectra=tuple(spectra))
    radius = dyn.spectral_radius
    if radius >= 1.0:
        logger.warning("error dynamics not Schur stable (spectral radius %.6g)", radius)
    else:
        logger.info("error dynamics spectral radius %.6g", radius)
    return dyn


def stack_errors(errors: Mapping[int, NodeEstimate], design: ObserverDesign,
                 staircase: StaircaseDecomposition) -> np.ndarray:
    layout, size = _layout(design, staircase)
    v = np.zeros(size)
    for j, node, start, stop in layout:
        est = errors[node]
        v[start:stop] = est.unobservable if j == "U" else est.substates[j - 1]
    return v


def unstack_errors(v, design: ObserverDesign,
                   staircase: StaircaseDecomposition) -> Dict[int, NodeEstimate]:
    layout, size = _layout(design, staircase)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != size:
        raise DimensionMismatch(f"stacked error has length {v.shape[0]}, expected {size}")
    parts: Dict[int, Dict[object, np.ndarray]] = {node: {} for node in design.graph.nodes}
    for j, node, start, stop in layout:
        parts[node][j] = v[start:stop].copy()
    return {node: NodeEstimate(tuple(p[j] for j in range(1, staircase.M + 1)), p["U"])
            for node, p in parts.items()}


# ─────────────────────────────────────────────────────────────
# Naive observer
# ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class NaiveCoupling:
    """LA = alpha·L + beta·c, with c the single measurement row of `node`."""
    alpha: float
    beta: float
    node: int
    row: np.ndarray


def naive_coupling(m: SystemModel, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> NaiveCoupling:
    if m.r != 1:
        raise DecompositionFailed(f"naive observer needs a single function, L has {m.r} rows")
    measuring = [i for i, k in enumerate(m.row_counts, start=1) if k > 0]
    if len(measuring) != 1 or m.row_counts[measuring[0] - 1] != 1:
        raise DecompositionFailed("naive observer needs exactly one node with one measurement row")
    node = measuring[0]
    c = m.sensor(node)[0]
    basis = np.vstack([m.L[0], c])
    target = (m.L @ m.A)[0]
    coeffs = scipy.linalg.lstsq(basis.T, target)[0]
    if not residual_ok(coeffs @ basis - target, max_abs(target), tol):
        raise DecompositionFailed("LA is not a combination of L and the measured row")
    return NaiveCoupling(alpha=float(coeffs[0]), beta=float(coeffs[1]), node=node, row=c)


@dataclass(frozen=True)
class NaiveParams:
    alpha: np.ndarray
    beta: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_lists(cls, alpha, beta, weights) -> "NaiveParams":
        return cls(np.asarray(alpha, dtype=float).reshape(-1),
                   np.asarray(beta, dtype=float).reshape(-1),
                   real_matrix(weights, name="naive weights"))

    @classmethod
    def default(cls, coupling: NaiveCoupling, graph: DiGraph) -> "NaiveParams":
        """alpha_i = alpha, beta_i = beta, uniform weights over each neighborhood."""
        N = graph.node_count
        W = np.zeros((N, N))
        for i in graph.nodes:
            hood = sorted(neighborhood(graph, i))
            W[i - 1, [l - 1 for l in hood]] = 1.0 / len(hood)
        return cls(np.full(N, coupling.alpha), np.full(N, coupling.beta), W)

    def check(self, graph: DiGraph, tol: ToleranceConfig = DEFAULT_TOLERANCES):
        N = graph.node_count
        issues = []
        if self.alpha.shape != (N,) or self.beta.shape != (N,):
            issues.append(f"alpha and beta need {N} entries")
        if self.weights.shape != (N, N):
            issues.append(f"weights must be {N}x{N}")
        else:
            if np.any(self.weights < 0):
                issues.append("weights must be nonnegative")
            for i in graph.nodes:
                row = self.weights[i - 1]
                outside = [l for l in graph.nodes
                           if row[l - 1] != 0.0 and l not in neighborhood(graph, i)]
                if outside:
                    issues.append(f"node {i} weights nodes {outside} outside its neighborhood")
                if abs(row.sum() - 1.0) > tol.residual_tol:
                    issues.append(f"node {i} weights sum to {row.sum():.12g}, not 1")
        if issues:
            raise ScenarioError(issues)

    def to_dict(self) -> Dict:
        return {"alpha": self.alpha.tolist(), "beta": self.beta.tolist(),
                "weights": self.weights.tolist()}


@dataclass(frozen=True)
class NaiveErrorSystem:
    """
    e[k+1] = M e[k] + B1 ψ[k] + B2 y[k]; the estimates themselves follow
    x̂[k+1] = M x̂[k] + drive y[k].
    """
    M: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    drive: np.ndarray
    coupling: NaiveCoupling

    def to_dict(self) -> Dict:
        return {"M": self.M.tolist(), "B1": self.B1.ravel().tolist(),
                "B2": self.B2.ravel().tolist(), "alpha": self.coupling.alpha,
                "beta": self.coupling.beta, "measuring_node": self.coupling.node}


def assemble_naive_error_dynamics(params: NaiveParams, m: SystemModel,
                                  tol: ToleranceConfig = DEFAULT_TOLERANCES) -> NaiveErrorSystem:
    coupling = naive_coupling(m, tol)
    params.check(m.graph, tol)
    N = m.N
    M = params.alpha[:, None] * params.weights
    hears = np.array([1.0 if coupling.node in neighborhood(m.graph, i) else 0.0
                      for i in m.graph.nodes])
    drive = params.beta * hears
    B1 = (params.alpha - coupling.alpha).reshape(N, 1)
    B2 = (drive - coupling.beta).reshape(N, 1)
    return NaiveErrorSystem(M=M, B1=B1, B2=B2, drive=drive, coupling=coupling)


def naive_step(xhat, y: float, system: NaiveErrorSystem) -> np.ndarray:
    """One round of the naive observer for all nodes; y is the single measurement."""
    xhat = np.asarray(xhat, dtype=float).reshape(-1)
    if xhat.shape[0] != system.M.shape[0]:
        raise DimensionMismatch(f"{xhat.shape[0]} estimates for {system.M.shape[0]} nodes")
    return system.M @ xhat + system.drive * float(y)


def naive_error_step(e, psi: float, y: float, system: NaiveErrorSystem) -> np.ndarray:
    e = np.asarray(e, dtype=float).reshape(-1)
    return system.M @ e + system.B1.ravel() * float(psi) + system.B2.ravel() * float(y)

"""
Random problem instances for the acceptance pools.

A = Q J Qᵀ with Q orthogonal and J lower triangular with distinct diagonal
entries, so row i of QᵀA only involves rows j <= i of Qᵀ that J links to.
L and the sensor rows are columns of Q: sensors drawn from the dependency
closure of L tend to give invariant, well-conditioned stacks.
"""

from collections import deque
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.stats import ortho_group

from distfobs.core.numkit import ToleranceConfig, numerical_rank, unstable_eigenvalues
from distfobs.exception import NoFeasibleLeaderSet
from distfobs.observernet import psi_hat, unstack_errors
from distfobs.simcli import Pipeline, Scenario, build_pipeline
from distfobs.sysmodel import SystemModel, stacked_C

# Random products of orthogonal matrices leave ~1e-15 noise in structural zeros.
TEST_TOL = ToleranceConfig(rank_tol=1e-9)

UNSTABLE = (1.1, -1.1, 1.25, -1.25, 1.4, -1.4, 1.6, -1.6)
STABLE = (-0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5)


@dataclass(frozen=True)
class Instance:
    model: SystemModel
    x0: np.ndarray
    label: str

    def scenario(self, horizon: int = 500, rho: float = 0.2) -> Scenario:
        return Scenario(model=self.model, x0=self.x0, horizon=horizon, rho=rho,
                        tolerances=TEST_TOL, name=self.label)


def _closure(J: np.ndarray, start) -> List[int]:
    seen = set(start)
    queue = deque(start)
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(J[i, :i]):
            if j not in seen:
                seen.add(int(j))
                queue.append(int(j))
    return sorted(seen)


def random_digraph_edges(rng: np.random.Generator, N: int) -> List[Tuple[int, int]]:
    """Random permutation cycle (strongly connected) plus extra edges."""
    if N == 1:
        return []
    perm = rng.permutation(N) + 1
    edges = {(int(perm[k]), int(perm[(k + 1) % N])) for k in range(N)}
    for j in range(1, N + 1):
        for i in range(1, N + 1):
            if i != j and rng.random() < 0.3:
                edges.add((j, i))
    return sorted(edges)


def random_instance(rng: np.random.Generator, max_n: int = 8, max_nodes: int = 5,
                    label: str = "random") -> Instance:
    n = int(rng.integers(2, max_n + 1))
    N = int(rng.integers(1, max_nodes + 1))

    unstable_count = int(rng.integers(1, min(n, 3) + 1))
    diag = np.concatenate([rng.choice(UNSTABLE, unstable_count, replace=False),
                           rng.choice(STABLE, n - unstable_count, replace=False)])
    rng.shuffle(diag)
    J = np.diag(diag)
    for i in range(n):
        for j in range(i):
            if rng.random() < 0.3:
                J[i, j] = rng.uniform(0.5, 1.5) * rng.choice((-1.0, 1.0))

    Q = ortho_group.rvs(n, random_state=rng)
    A = Q @ J @ Q.T

    r = 1 if n == 2 else int(rng.integers(1, 3))
    K = sorted(int(k) for k in rng.choice(n, r, replace=False))
    L = Q[:, K].T
    closure = _closure(J, K)

    sensors = []
    for _ in range(N):
        rows = []
        for _ in range(int(rng.integers(0, 3))):
            coord = int(rng.choice(closure)) if rng.random() < 0.7 else int(rng.integers(0, n))
            rows.append(Q[:, coord].tolist())
        sensors.append(rows)

    model = SystemModel.from_lists(A.tolist(), sensors, L.tolist(),
                                   random_digraph_edges(rng, N), node_count=N)
    return Instance(model=model, x0=rng.standard_normal(n), label=label)


def random_instances(count: int, seed: int, max_n: int = 8) -> List[Instance]:
    rng = np.random.default_rng(seed)
    return [random_instance(rng, max_n=max_n, label=f"random-{seed}-{k}") for k in range(count)]


def feasible_pool(size: int = 100, seed: int = 20240611, max_n: int = 8,
                  max_tries: int = 5000) -> List[Tuple[Instance, Pipeline]]:
    """First `size` random instances whose leader selection succeeds, with their designs."""
    rng = np.random.default_rng(seed)
    pool = []
    for k in range(max_tries):
        inst = random_instance(rng, max_n=max_n, label=f"pool-{seed}-{k}")
        try:
            pipeline = build_pipeline(inst.scenario())
        except NoFeasibleLeaderSet:
            continue
        pool.append((inst, pipeline))
        if len(pool) == size:
            break
    return pool


def darouach_grid_oracle(model: SystemModel, tol: ToleranceConfig,
                         rng: np.random.Generator, samples: int = 50) -> bool:
    """Rank test of the centralized detectability pencil at A's unstable modes and random |s| in [1, 2]."""
    A, L, C = model.A, model.L, model.C_full
    rhs = numerical_rank(np.vstack([C @ A, C, L]), tol)
    radii = rng.uniform(1.0, 2.0, samples)
    angles = rng.uniform(0.0, 2.0 * np.pi, samples)
    points = list(unstable_eigenvalues(A, tol)) + list(radii * np.exp(1j * angles))
    for s in points:
        pencil = np.vstack([s * L - L @ A, C @ A, C]).astype(complex)
        if numerical_rank(pencil, tol, rtol=tol.pbh_tol) != rhs:
            return False
    return True


def feasibility_grid_oracle(model: SystemModel, S, selection, tol: ToleranceConfig,
                            rng: np.random.Generator, samples: int = 50) -> bool:
    """Rank test of the node-set detectability pencil at A's unstable modes and random |s| in [1, 2]."""
    C_S = stacked_C(model, S, selection)
    stack = np.vstack([model.L, C_S])
    rank = numerical_rank(stack, tol)
    radii = rng.uniform(1.0, 2.0, samples)
    angles = rng.uniform(0.0, 2.0 * np.pi, samples)
    points = list(unstable_eigenvalues(model.A, tol)) + list(radii * np.exp(1j * angles))
    for s in points:
        pencil = np.vstack([s * stack - stack @ model.A, C_S]).astype(complex)
        if numerical_rank(pencil, tol, rtol=tol.pbh_tol) != rank:
            return False
    return True


def psi_errors(pipeline: Pipeline, stacked: np.ndarray, r: Optional[int] = None) -> np.ndarray:
    """Per-node ‖[I_r 0] T_D e_i‖ for a stacked error vector."""
    r = pipeline.model.r if r is None else r
    errors = unstack_errors(stacked, pipeline.design, pipeline.staircase)
    return np.array([np.linalg.norm(psi_hat(errors[i], pipeline.staircase, r))
                     for i in sorted(errors)])

"""
sysmodel — problem instances
============================
The tuple (A, {C_i}, L, G): plant x[k+1] = A x[k], node measurements
y_i[k] = C_i x[k], functions of interest psi[k] = L x[k], and the directed
communication graph over the N sensor nodes.

A node that measures nothing carries a 0-row C_i (shape 0 x n), never a
row of zeros.

Usage:
    m = SystemModel.from_lists(
        A=[[0.5, 2], [0, 3]], sensors=[[[0, 1]], [], []], L=[[1, 0]],
        edges=[[1, 2], [2, 3], [3, 1]])
    ensure_valid(m)
    C_S = stacked_C(m, {1, 2})
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .core.graphkit import DiGraph
from .core.numkit import DEFAULT_TOLERANCES, ToleranceConfig, numerical_rank, real_matrix
from .exception import DimensionMismatch, EmptySelection, InvalidNode, ScenarioError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemModel:
    A: np.ndarray
    sensors: Tuple[np.ndarray, ...]
    L: np.ndarray
    graph: DiGraph

    @classmethod
    def from_lists(cls, A, sensors: Sequence, L, edges: Iterable = (),
                   node_count: Optional[int] = None) -> "SystemModel":
        """
        Build from nested lists. Shapes are not cross-checked here; run
        validate() for that. Edges naming nodes beyond the sensor count
        enlarge the graph so validate() can report the mismatch.
        """
        A = real_matrix(A, name="A")
        n = A.shape[1]
        mats = tuple(real_matrix(C, cols=n if _is_empty(C) else None, name=f"C_{i}")
                     for i, C in enumerate(sensors, start=1))
        L = real_matrix(L, name="L")
        edges = [tuple(_node_index(v) for v in e) for e in edges]
        if any(len(e) != 2 for e in edges):
            raise InvalidNode("edges must be [from, to] pairs")
        top = max([len(mats), *(max(e) for e in edges)]) if edges else len(mats)
        graph = DiGraph.from_edges(node_count if node_count is not None else top, edges)
        return cls(A=A, sensors=mats, L=L, graph=graph)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def N(self) -> int:
        return len(self.sensors)

    @property
    def r(self) -> int:
        return self.L.shape[0]

    @property
    def row_counts(self) -> Tuple[int, ...]:
        return tuple(C.shape[0] for C in self.sensors)

    @property
    def C_full(self) -> np.ndarray:
        return np.vstack([np.zeros((0, self.n)), *self.sensors])

    def sensor(self, i: int) -> np.ndarray:
        if not 1 <= i <= self.N:
            raise InvalidNode(f"node {i} outside 1..{self.N}")
        return self.sensors[i - 1]

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "A": self.A.tolist(),
            "sensors": [C.tolist() for C in self.sensors],
            "L": self.L.tolist(),
            "edges": self.graph.to_dict()["edges"],
        }


def _is_empty(C) -> bool:
    return np.size(np.asarray(C, dtype=object)) == 0


def _node_index(value) -> int:
    """Integral node index: 2 and 2.0 pass, 1.7 and "a" do not."""
    integral = (not isinstance(value, (bool, np.bool_))
                and isinstance(value, (int, float, np.integer, np.floating))
                and float(value).is_integer())
    if not integral:
        raise InvalidNode(f"node index must be an integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class RowSelection:
    """
    Selected row indices (0-based, strictly increasing) per node. Nodes
    without selected rows are not stored.
    """
    picks: Tuple[Tuple[int, Tuple[int, ...]], ...] = ()

    def __post_init__(self):
        clean = []
        for node, rows in sorted((int(k), tuple(int(r) for r in v)) for k, v in self.picks):
            if any(b <= a for a, b in zip(rows, rows[1:])):
                raise DimensionMismatch(f"node {node}: row indices must be strictly increasing")
            if rows:
                clean.append((node, rows))
        if len({node for node, _ in clean}) != len(clean):
            raise DimensionMismatch("node listed twice in row selection")
        object.__setattr__(self, "picks", tuple(clean))

    @classmethod
    def from_mapping(cls, rows: Mapping[int, Iterable[int]]) -> "RowSelection":
        return cls(tuple((node, tuple(sorted(v))) for node, v in rows.items()))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, int]]) -> "RowSelection":
        grouped: Dict[int, List[int]] = {}
        for node, row in pairs:
            grouped.setdefault(node, []).append(row)
        return cls.from_mapping(grouped)

    @classmethod
    def all_rows(cls, m: SystemModel, S: Iterable[int]) -> "RowSelection":
        return cls.from_mapping({i: range(m.sensor(i).shape[0]) for i in S})

    @property
    def nodes(self) -> Tuple[int, ...]:
        return tuple(node for node, _ in self.picks)

    @property
    def total_rows(self) -> int:
        return sum(len(rows) for _, rows in self.picks)

    def rows_of(self, node: int) -> Tuple[int, ...]:
        return dict(self.picks).get(node, ())

    def pairs(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((node, row) for node, rows in self.picks for row in rows)

    def check(self, m: SystemModel, S: Optional[Iterable[int]] = None):
        allowed = set(S) if S is not None else set(range(1, m.N + 1))
        for node, rows in self.picks:
            if node not in allowed:
                raise InvalidNode(f"row selection uses node {node} outside {sorted(allowed)}")
            count = m.sensor(node).shape[0]
            if rows[-1] >= count or rows[0] < 0:
                raise DimensionMismatch(f"node {node}: row index outside 0..{count - 1}")

    def to_dict(self) -> Dict[str, List[int]]:
        return {str(node): list(rows) for node, rows in self.picks}


@dataclass
class ValidationReport:
    issues: List[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.issues

    def to_dict(self) -> Dict:
        return {"valid": self.valid, "issues": list(self.issues)}


def validate(m: SystemModel, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> ValidationReport:
    report = ValidationReport()
    issues = report.issues

    rows, cols = m.A.shape
    if rows != cols:
        issues.append(f"A must be square, got {rows}x{cols}")
    n = cols
    if n == 0:
        issues.append("A is empty")

    for i, C in enumerate(m.sensors, start=1):
        if C.shape[1] != n:
            issues.append(f"dimension mismatch: C_{i} has {C.shape[1]} columns, expected {n}")

    if m.L.shape[0] == 0:
        issues.append("L has no rows")
    elif m.L.shape[1] != n:
        issues.append(f"dimension mismatch: L has {m.L.shape[1]} columns, expected {n}")
    elif numerical_rank(m.L, tol) < m.L.shape[0]:
        issues.append(f"L rank-deficient: rank {numerical_rank(m.L, tol)} < {m.L.shape[0]} rows")

    if m.N == 0:
        issues.append("no sensor nodes")
    if m.graph.node_count != m.N:
        issues.append(f"graph has {m.graph.node_count} nodes but there are {m.N} sensors")
    for j, i in sorted(m.graph.edges):
        if not (1 <= j <= m.N and 1 <= i <= m.N):
            issues.append(f"edge ({j}, {i}) names a node outside 1..{m.N}")

    for issue in issues:
        logger.debug("validation: %s", issue)
    return report


def ensure_valid(m: SystemModel, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> SystemModel:
    report = validate(m, tol)
    if not report.valid:
        raise ScenarioError(report.issues)
    return m


def stacked_C(m: SystemModel, S: Iterable[int],
              sel: Optional[RowSelection] = None) -> np.ndarray:
    """C_S: selected rows of C_i for i in S, stacked in ascending node order."""
    S = sorted(set(S))
    if not S:
        raise EmptySelection("node set is empty")
    for i in S:
        m.sensor(i)
    if sel is None:
        sel = RowSelection.all_rows(m, S)
    else:
        sel.check(m, S)
    blocks = [m.sensor(i)[list(sel.rows_of(i))] for i in S if sel.rows_of(i)]
    return np.vstack(blocks) if blocks else np.zeros((0, m.n))

"""
graphkit — directed communication graphs
========================================
Nodes are numbered 1..N. An edge (j, i) means node j transmits to node i,
so the neighborhood of i is {i} plus its in-neighbors. Self-loops are never
stored; self-inclusion is implicit.

Breadth-first search explores neighbors in ascending node index, which
makes every tree (and therefore every observer design) reproducible.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Tuple

import numpy as np

from ..exception import InvalidNode, NotStronglyConnected

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiGraph:
    node_count: int
    edges: FrozenSet[Tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.node_count < 0:
            raise InvalidNode(f"node_count must be >= 0, got {self.node_count}")
        clean = set()
        for j, i in self.edges:
            self._check(j)
            self._check(i)
            if j != i:
                clean.add((int(j), int(i)))
        object.__setattr__(self, "edges", frozenset(clean))

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[Iterable[int]]) -> "DiGraph":
        return cls(int(node_count), frozenset(tuple(int(v) for v in e) for e in edges))

    def _check(self, node: int):
        if not 1 <= node <= self.node_count:
            raise InvalidNode(f"node {node} outside 1..{self.node_count}")

    @property
    def nodes(self) -> range:
        return range(1, self.node_count + 1)

    def in_neighbors(self, i: int) -> List[int]:
        self._check(i)
        return sorted(j for j, k in self.edges if k == i)

    def out_neighbors(self, j: int) -> List[int]:
        self._check(j)
        return sorted(i for k, i in self.edges if k == j)

    def reversed(self) -> "DiGraph":
        return DiGraph(self.node_count, frozenset((i, j) for j, i in self.edges))

    def to_dict(self) -> Dict:
        return {"node_count": self.node_count, "edges": sorted(list(e) for e in self.edges)}


@dataclass(frozen=True)
class SpanningTree:
    """
    Rooted tree with edges pointing away from the root. `order` is the BFS
    discovery order, a topological order in which every parent precedes
    its children.
    """
    root: int
    parent: Dict[int, int]
    order: Tuple[int, ...]

    def depth(self, node: int) -> int:
        d = 0
        while node != self.root:
            node = self.parent[node]
            d += 1
        return d

    def to_dict(self) -> Dict:
        return {"root": self.root,
                "parent": {str(k): v for k, v in sorted(self.parent.items())},
                "order": list(self.order)}


def cycle_graph(node_count: int) -> DiGraph:
    """Directed ring 1 -> 2 -> ... -> N -> 1."""
    edges = [(i, i % node_count + 1) for i in range(1, node_count + 1)] if node_count > 1 else []
    return DiGraph.from_edges(node_count, edges)


def complete_graph(node_count: int) -> DiGraph:
    edges = [(j, i) for j in range(1, node_count + 1)
             for i in range(1, node_count + 1) if i != j]
    return DiGraph.from_edges(node_count, edges)


def neighborhood(g: DiGraph, i: int) -> FrozenSet[int]:
    """N_i = {i} U {j | (j, i) in E}."""
    return frozenset([i, *g.in_neighbors(i)])


def _bfs(g: DiGraph, root: int) -> Tuple[List[int], Dict[int, int]]:
    g._check(root)
    successors: Dict[int, List[int]] = {v: [] for v in g.nodes}
    for j, i in sorted(g.edges):
        successors[j].append(i)

    order, parent = [root], {}
    seen = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in successors[u]:
            if v not in seen:
                seen.add(v)
                parent[v] = u
                order.append(v)
                queue.append(v)
    return order, parent


def reachable_from(g: DiGraph, root: int) -> List[int]:
    """Nodes reachable from root, in BFS discovery order."""
    return _bfs(g, root)[0]


def is_strongly_connected(g: DiGraph) -> bool:
    if g.node_count <= 1:
        return True
    return (len(reachable_from(g, 1)) == g.node_count
            and len(reachable_from(g.reversed(), 1)) == g.node_count)


def spanning_tree_rooted_at(g: DiGraph, root: int) -> SpanningTree:
    order, parent = _bfs(g, root)
    if len(order) != g.node_count:
        missing = sorted(set(g.nodes) - set(order))
        raise NotStronglyConnected(f"root {root} cannot reach nodes {missing}")
    logger.debug("spanning tree rooted at %d: order %s", root, order)
    return SpanningTree(root=root, parent=parent, order=tuple(order))


def tree_adjacency(tree: SpanningTree, node_count: int) -> np.ndarray:
    """0/1 matrix with entry [i-1, parent(i)-1] = 1 (child listens to parent)."""
    W = np.zeros((node_count, node_count))
    for child, par in tree.parent.items():
        W[child - 1, par - 1] = 1.0
    return W

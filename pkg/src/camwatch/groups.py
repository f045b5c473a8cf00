"""Group-size bounds from the violation graph.

People are nodes, violating pairs are edges.  The largest group in a frame
is bounded below by the biggest hub (a node plus its adjacency list) and
above by the largest connected component.
"""

from collections import deque
from dataclasses import dataclass

from .distancing import ViolationReport
from .errors import InvalidInput


@dataclass(frozen=True)
class ViolationGraph:
    node_count: int
    edges: frozenset  # unordered index pairs, stored as sorted tuples

    def __post_init__(self):
        for a, b in self.edges:
            if a == b:
                raise InvalidInput(f"self-loop on node {a}")
            if not (0 <= a < self.node_count and 0 <= b < self.node_count):
                raise InvalidInput(f"edge ({a},{b}) outside 0..{self.node_count - 1}")

    @classmethod
    def from_edges(cls, node_count: int, edges) -> "ViolationGraph":
        return cls(node_count=node_count,
                   edges=frozenset(tuple(sorted(e)) for e in edges))

    def adjacency(self) -> list:
        neighbors = [set() for _ in range(self.node_count)]
        for a, b in self.edges:
            neighbors[a].add(b)
            neighbors[b].add(a)
        return neighbors


@dataclass(frozen=True)
class GroupBounds:
    lower: int
    upper: int

    def __post_init__(self):
        if self.lower > self.upper:
            raise InvalidInput(f"lower bound {self.lower} exceeds upper {self.upper}")


def build_violation_graph(report: ViolationReport) -> ViolationGraph:
    edges = ((p.index_a, p.index_b) for p in report.pairs if p.violation)
    return ViolationGraph.from_edges(report.person_count, edges)


def group_lower_bound(graph: ViolationGraph) -> int:
    """Largest adjacency list including its hub: 1 + max degree (a lone person is a group of 1)."""
    if graph.node_count == 0:
        return 0
    degrees = [len(n) for n in graph.adjacency()]
    return 1 + max(degrees)


def group_upper_bound(graph: ViolationGraph) -> int:
    """Size of the largest connected component."""
    if graph.node_count == 0:
        return 0
    neighbors = graph.adjacency()
    seen = [False] * graph.node_count
    largest = 0
    for start in range(graph.node_count):
        if seen[start]:
            continue
        size = 0
        queue = deque([start])
        seen[start] = True
        while queue:
            node = queue.popleft()
            size += 1
            for nxt in neighbors[node]:
                if not seen[nxt]:
                    seen[nxt] = True
                    queue.append(nxt)
        largest = max(largest, size)
    return largest


def group_bounds(report: ViolationReport) -> GroupBounds:
    graph = build_violation_graph(report)
    return GroupBounds(lower=group_lower_bound(graph), upper=group_upper_bound(graph))

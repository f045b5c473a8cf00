import itertools
import random
from datetime import datetime, timezone

import networkx as nx
import pytest

from camwatch.distancing import PairScore, ViolationReport
from camwatch.errors import InvalidInput
from camwatch.groups import (
    GroupBounds,
    ViolationGraph,
    build_violation_graph,
    group_bounds,
    group_lower_bound,
    group_upper_bound,
)

AT = datetime(2020, 4, 1, tzinfo=timezone.utc)


def report_from_edges(n, edges):
    pairs = []
    edge_set = {tuple(sorted(e)) for e in edges}
    for i, j in itertools.combinations(range(n), 2):
        violating = (i, j) in edge_set
        pairs.append(PairScore(index_a=i, index_b=j, depth_similarity=1.0,
                               pixel_distance=1.0, inverse_relative_distance=1.0,
                               score=2.0 if violating else 0.1, violation=violating))
    people = {v for e in edge_set for v in e}
    return ViolationReport(camera_id="camA", captured_at=AT, person_count=n,
                           pairs=tuple(pairs), violating_pairs=len(edge_set),
                           violating_people=len(people))


def oracle_bounds(n, edges):
    """Independent bounds via networkx degree and component enumeration."""
    if n == 0:
        return 0, 0
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    lower = 1 + max(dict(g.degree).values())
    upper = max(len(c) for c in nx.connected_components(g))
    return lower, upper


class TestBuildGraph:
    def test_path_plus_isolated(self):
        graph = build_violation_graph(report_from_edges(4, [(0, 1), (1, 2)]))
        assert graph.node_count == 4
        assert graph.edges == frozenset({(0, 1), (1, 2)})

    def test_no_violations(self):
        graph = build_violation_graph(report_from_edges(3, []))
        assert graph.edges == frozenset()

    def test_triangle(self):
        graph = build_violation_graph(report_from_edges(3, [(0, 1), (0, 2), (1, 2)]))
        assert len(graph.edges) == 3

    def test_invalid_edges_rejected(self):
        with pytest.raises(InvalidInput):
            ViolationGraph.from_edges(3, [(0, 3)])
        with pytest.raises(InvalidInput):
            ViolationGraph.from_edges(3, [(1, 1)])


class TestLowerBound:
    def test_edgeless(self):
        assert group_lower_bound(ViolationGraph.from_edges(5, [])) == 1

    def test_path_of_three(self):
        assert group_lower_bound(ViolationGraph.from_edges(3, [(0, 1), (1, 2)])) == 3

    def test_star(self):
        star = [(0, i) for i in range(1, 5)]
        assert group_lower_bound(ViolationGraph.from_edges(5, star)) == 5

    def test_empty_graph(self):
        assert group_lower_bound(ViolationGraph.from_edges(0, [])) == 0


class TestUpperBound:
    def test_path_of_four(self):
        graph = ViolationGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        assert group_upper_bound(graph) == 4
        assert group_lower_bound(graph) == 3

    def test_two_disjoint_edges(self):
        assert group_upper_bound(ViolationGraph.from_edges(4, [(0, 1), (2, 3)])) == 2

    def test_edgeless_singletons(self):
        assert group_upper_bound(ViolationGraph.from_edges(5, [])) == 1

    def test_empty_graph(self):
        assert group_upper_bound(ViolationGraph.from_edges(0, [])) == 0


class TestGroupBounds:
    def test_triangle(self):
        assert group_bounds(report_from_edges(3, [(0, 1), (0, 2), (1, 2)])) == GroupBounds(3, 3)

    def test_path_of_four(self):
        assert group_bounds(report_from_edges(4, [(0, 1), (1, 2), (2, 3)])) == GroupBounds(3, 4)

    def test_no_people(self):
        assert group_bounds(report_from_edges(0, [])) == GroupBounds(0, 0)

    def test_pair_is_group_of_two(self):
        assert group_bounds(report_from_edges(2, [(0, 1)])) == GroupBounds(2, 2)


class TestAgainstOracle:
    def test_random_graphs_match_enumeration(self):
        rng = random.Random(99)
        for _ in range(300):
            n = rng.randrange(1, 11)
            possible = list(itertools.combinations(range(n), 2))
            edges = [e for e in possible if rng.random() < 0.3]
            graph = ViolationGraph.from_edges(n, edges)
            lower, upper = group_lower_bound(graph), group_upper_bound(graph)
            expect_lower, expect_upper = oracle_bounds(n, edges)
            assert lower == expect_lower
            assert upper == expect_upper
            assert lower <= upper <= n

    def test_adding_edge_never_decreases_bounds(self):
        rng = random.Random(100)
        for _ in range(100):
            n = rng.randrange(2, 9)
            possible = list(itertools.combinations(range(n), 2))
            edges = [e for e in possible if rng.random() < 0.25]
            remaining = [e for e in possible if e not in edges]
            if not remaining:
                continue
            extra = rng.choice(remaining)
            before = ViolationGraph.from_edges(n, edges)
            after = ViolationGraph.from_edges(n, edges + [extra])
            assert group_lower_bound(after) >= group_lower_bound(before)
            assert group_upper_bound(after) >= group_upper_bound(before)

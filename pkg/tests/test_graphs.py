from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plantedlab.errors import TooLarge
from plantedlab.graphs import (
    LabeledGraph, connected_components, cycle_graph, dump_edge_lists,
    enumerate_edge_subsets, graph_stats, path_graph, subset_count,
)


def test_counts_small():
    assert len(list(enumerate_edge_subsets(2, 1))) == 2
    assert len(list(enumerate_edge_subsets(3, 3))) == 8
    for n in (3, 4, 6):
        one_edge = [g for g in enumerate_edge_subsets(n, 1) if g.num_edges == 1]
        assert len(one_edge) == comb(n, 2)


def test_enumeration_complete_up_to_n5():
    for n in (2, 3, 4, 5):
        m = comb(n, 2)
        graphs = list(enumerate_edge_subsets(n, m))
        assert len(graphs) == 2 ** m
        assert len({g.edges for g in graphs}) == 2 ** m  # each exactly once


def test_enumeration_guard():
    with pytest.raises(TooLarge):
        list(enumerate_edge_subsets(20, 10))
    assert subset_count(20, 2) == 1 + comb(190, 1) + comb(190, 2)


def test_stats_examples():
    tri = graph_stats(cycle_graph(3))
    assert (tri.excess, tri.leaves, tri.indep_cycles) == (0, (), 1)
    edge = graph_stats(LabeledGraph(((0, 1),)))
    assert (edge.excess, edge.leaves, edge.indep_cycles) == (-1, (0, 1), 0)
    path = graph_stats(path_graph(2))
    assert (path.excess, path.leaves, path.indep_cycles) == (-1, (0, 2), 0)


def test_cycle_plus_pendant_not_independent():
    # triangle with an extra pendant edge: the cycle touches another edge
    g = LabeledGraph(((0, 1), (1, 2), (0, 2), (2, 3)))
    st_ = graph_stats(g)
    assert st_.indep_cycles == 0
    assert st_.leaves == (3,)
    # disjoint triangle and 4-cycle are both independent
    g2 = LabeledGraph(cycle_graph(3).edges + cycle_graph(4, offset=3).edges)
    assert graph_stats(g2).indep_cycles == 2


def test_forest_excess_equals_minus_components():
    for g in enumerate_edge_subsets(5, 4):
        stats = graph_stats(g)
        comps = connected_components(g)
        is_forest = all(
            graph_stats(c).num_edges == graph_stats(c).num_vertices - 1
            for c in comps
        )
        if is_forest and g.edges:
            assert stats.excess == -len(comps)


def test_independent_cycles_have_degree_two():
    for g in enumerate_edge_subsets(5, 6):
        stats = graph_stats(g)
        if stats.indep_cycles:
            comps = connected_components(g)
            cyclic = [c for c in comps
                      if graph_stats(c).num_edges == graph_stats(c).num_vertices]
            assert len([c for c in cyclic if not graph_stats(c).leaves]) \
                >= stats.indep_cycles


@given(st.sets(
    st.tuples(st.integers(0, 6), st.integers(0, 6)).filter(lambda e: e[0] < e[1]),
    max_size=10,
))
@settings(max_examples=150, deadline=None)
def test_stats_invariants(edges):
    g = LabeledGraph(tuple(edges))
    stats = graph_stats(g)
    assert stats.num_edges == len(edges)
    assert stats.excess == stats.num_edges - stats.num_vertices
    assert stats.indep_cycles <= max(stats.num_edges // 3, 0)
    assert all(v in g.vertices for v in stats.leaves)


def test_duplicate_and_bad_edges_rejected():
    with pytest.raises(ValueError):
        LabeledGraph(((1, 0),))
    with pytest.raises(ValueError):
        LabeledGraph(((0, 1), (0, 1)))


def test_edge_text_dump(tmp_path):
    graphs = [LabeledGraph(()), cycle_graph(3), path_graph(2)]
    out = tmp_path / "graphs.txt"
    dump_edge_lists(graphs, out)
    lines = out.read_text().splitlines()
    assert lines == ["{}", "0-1 0-2 1-2", "0-1 1-2"]

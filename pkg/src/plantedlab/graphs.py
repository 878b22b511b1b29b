"""Labeled subgraph enumeration and the graph statistics the advantage sums use.

Graphs here are edge subsets of the complete graph on [n]: the vertex set is
implicit (the union of edge endpoints), so there are never isolated vertices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterator

from .errors import TooLarge

# Hard cap on how many edge subsets a single enumeration may stream.
MAX_SUBSETS = 5_000_000


@dataclass(frozen=True)
class LabeledGraph:
    """An edge subset of K_n: sorted tuple of (i, j) pairs with i < j."""

    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for i, j in self.edges:
            if not (0 <= i < j):
                raise ValueError(f"edge ({i},{j}) must have 0 <= i < j")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i},{j})")
            seen.add((i, j))
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted({v for e in self.edges for v in e}))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_text(self) -> str:
        """One-line debug dump, e.g. '0-1 1-2 2-3'; '{}' for the empty graph."""
        if not self.edges:
            return "{}"
        return " ".join(f"{i}-{j}" for i, j in self.edges)


@dataclass(frozen=True)
class GraphStats:
    num_vertices: int
    num_edges: int
    excess: int            # |E| - |V|
    leaves: tuple[int, ...]
    indep_cycles: int      # number of cycles touching no other edge of H


def subset_count(n: int, dmax: int) -> int:
    """Number of edge subsets of K_n with at most dmax edges."""
    m = comb(n, 2)
    return sum(comb(m, k) for k in range(min(dmax, m) + 1))


def enumerate_edge_subsets(n: int, dmax: int) -> Iterator[LabeledGraph]:
    """Stream every edge subset of K_n with at most dmax edges, each exactly once.

    Includes the empty graph.  Subsets are streamed by size then
    lexicographically, so memory stays bounded.  Raises TooLarge when the
    guard (C(n,2) <= 40 or dmax <= 3, and a hard subset-count cap) trips.
    """
    m = comb(n, 2)
    if m > 40 and dmax > 3:
        raise TooLarge(f"enumeration guard: C({n},2)={m} > 40 and dmax={dmax} > 3")
    if subset_count(n, dmax) > MAX_SUBSETS:
        raise TooLarge(f"enumeration of {subset_count(n, dmax)} subsets exceeds cap")
    all_edges = list(itertools.combinations(range(n), 2))
    for k in range(min(dmax, m) + 1):
        for combo in itertools.combinations(all_edges, k):
            yield LabeledGraph(combo)


def degrees(h: LabeledGraph) -> dict[int, int]:
    deg: dict[int, int] = {}
    for i, j in h.edges:
        deg[i] = deg.get(i, 0) + 1
        deg[j] = deg.get(j, 0) + 1
    return deg


def connected_components(h: LabeledGraph) -> list[LabeledGraph]:
    """Split H into its connected components (as LabeledGraphs)."""
    adj: dict[int, set[int]] = {}
    for i, j in h.edges:
        adj.setdefault(i, set()).add(j)
        adj.setdefault(j, set()).add(i)
    comps = []
    unseen = set(adj)
    while unseen:
        root = min(unseen)
        stack, comp = [root], {root}
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        unseen -= comp
        comps.append(
            LabeledGraph(tuple(e for e in h.edges if e[0] in comp))
        )
    return comps


def graph_stats(h: LabeledGraph) -> GraphStats:
    """Vertex/edge counts, excess, leaves and independent-cycle count of H.

    A leaf is a degree-1 vertex.  An independent cycle is a cycle whose
    vertices meet no other edge of H; equivalently, a connected component
    in which every vertex has degree exactly 2.
    """
    deg = degrees(h)
    leaves = tuple(sorted(v for v, d in deg.items() if d == 1))
    indep = 0
    for comp in connected_components(h):
        cdeg = degrees(comp)
        if cdeg and all(d == 2 for d in cdeg.values()):
            indep += 1
    return GraphStats(
        num_vertices=len(deg),
        num_edges=h.num_edges,
        excess=h.num_edges - len(deg),
        leaves=leaves,
        indep_cycles=indep,
    )


def cycle_graph(m: int, offset: int = 0) -> LabeledGraph:
    """The m-cycle on vertices offset..offset+m-1."""
    if m < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    verts = [offset + i for i in range(m)]
    edges = [tuple(sorted((verts[i], verts[(i + 1) % m]))) for i in range(m)]
    return LabeledGraph(tuple(edges))


def path_graph(m_edges: int, offset: int = 0) -> LabeledGraph:
    """The path with m_edges edges on vertices offset..offset+m_edges."""
    return LabeledGraph(tuple((offset + i, offset + i + 1) for i in range(m_edges)))


def dump_edge_lists(graphs, path) -> None:
    """Write one graph per line in 'i-j' pair format (debug helper)."""
    with open(path, "w", encoding="utf-8") as fh:
        for g in graphs:
            fh.write(g.edge_text() + "\n")

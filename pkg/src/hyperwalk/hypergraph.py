"""Core hypergraph structure: incidence lookups, dual construction, connectivity.

Member sets are stored as sorted id arrays so that iteration order (and hence
any seeded sampling over them) is reproducible.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger("hyperwalk.hypergraph")


@dataclass(frozen=True)
class Hypergraph:
    """Immutable hypergraph over dense 0-based vertex and hyperedge ids.

    ``hyperedges[e]`` is the sorted array of member vertex ids of hyperedge e;
    ``vertex_incidence[v]`` is the sorted array of hyperedge ids containing v
    (the exact transpose of the membership relation).
    """

    n_vertices: int
    hyperedges: tuple = field(repr=False)
    vertex_incidence: tuple = field(repr=False)

    @property
    def n_hyperedges(self) -> int:
        return len(self.hyperedges)

    def cardinality(self, e: int) -> int:
        return len(self.hyperedges[e])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (
            self.n_vertices == other.n_vertices
            and len(self.hyperedges) == len(other.hyperedges)
            and all(np.array_equal(a, b) for a, b in zip(self.hyperedges, other.hyperedges))
        )


def build(hyperedges, n_vertices: int) -> Hypergraph:
    """Build a validated hypergraph from an iterable of member-id collections.

    Duplicate ids within one hyperedge are collapsed (set semantics). Raises
    ValueError for an empty hyperedge, an out-of-range member id, or
    ``n_vertices == 0``.
    """
    if n_vertices <= 0:
        raise ValueError("n_vertices must be positive")
    edges = []
    for j, members in enumerate(hyperedges):
        arr = np.unique(np.asarray(list(members), dtype=np.int64))
        if arr.size == 0:
            raise ValueError(f"hyperedge {j} is empty")
        if arr[0] < 0 or arr[-1] >= n_vertices:
            bad = arr[0] if arr[0] < 0 else arr[-1]
            raise ValueError(f"hyperedge {j} has member id {bad} outside 0..{n_vertices - 1}")
        edge = arr.astype(np.int32)
        edge.setflags(write=False)
        edges.append(edge)

    incidence = [[] for _ in range(n_vertices)]
    for j, edge in enumerate(edges):
        for v in edge:
            incidence[int(v)].append(j)
    inc_arrays = []
    for lst in incidence:
        arr = np.asarray(lst, dtype=np.int32)
        arr.setflags(write=False)
        inc_arrays.append(arr)

    return Hypergraph(n_vertices=n_vertices, hyperedges=tuple(edges), vertex_incidence=tuple(inc_arrays))


def dual(h: Hypergraph) -> Hypergraph:
    """Dual hypergraph: one vertex per input hyperedge, one hyperedge per input vertex.

    Vertex k of the dual corresponds to input hyperedge k and dual hyperedge k
    to input vertex k, so applying `dual` twice yields a structurally equal
    hypergraph. An input vertex with no incident hyperedge would produce an
    empty dual hyperedge and is rejected.
    """
    for v, inc in enumerate(h.vertex_incidence):
        if inc.size == 0:
            raise ValueError(f"vertex {v} belongs to no hyperedge; dual undefined")
    return build(h.vertex_incidence, n_vertices=h.n_hyperedges)


def is_connected(h: Hypergraph) -> bool:
    """True iff the bipartite incidence graph (vertices + hyperedges) is connected."""
    total = h.n_vertices + h.n_hyperedges
    if total <= 1:
        return True
    seen_v = np.zeros(h.n_vertices, dtype=bool)
    seen_e = np.zeros(h.n_hyperedges, dtype=bool)
    queue = deque([("v", 0)])
    seen_v[0] = True
    reached = 1
    while queue:
        kind, i = queue.popleft()
        if kind == "v":
            for e in h.vertex_incidence[i]:
                if not seen_e[e]:
                    seen_e[e] = True
                    reached += 1
                    queue.append(("e", int(e)))
        else:
            for v in h.hyperedges[i]:
                if not seen_v[v]:
                    seen_v[v] = True
                    reached += 1
                    queue.append(("v", int(v)))
    return reached == total


def check_for_learning(h: Hypergraph) -> None:
    """Pre-learning validation: warns (does not fail) on degenerate structure."""
    if h.n_vertices < 2:
        log.warning("hypergraph has fewer than 2 vertices; learning results are degenerate")
    if not is_connected(h):
        log.warning("hypergraph is not connected; walks cannot cross components")


def write_hypergraph(h: Hypergraph, path) -> None:
    """Canonical file: one hyperedge per line, space-separated vertex ids."""
    with open(path, "w") as f:
        for edge in h.hyperedges:
            f.write(" ".join(str(int(v)) for v in edge))
            f.write("\n")


def read_hypergraph(path, n_vertices: int | None = None) -> Hypergraph:
    """Read the canonical hyperedge-per-line format.

    Line number is the hyperedge id. When ``n_vertices`` is not given it is
    inferred as ``max id + 1`` (trailing isolated vertices are not
    representable in this format).
    """
    edges = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                edges.append([int(tok) for tok in line.split()])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed hyperedge line") from exc
    if not edges:
        raise ValueError(f"{path}: no hyperedges")
    if n_vertices is None:
        n_vertices = max(max(e) for e in edges) + 1
    return build(edges, n_vertices)

"""Chimera lattice construction and its bipartition.

A Chimera lattice is a rows x cols grid of complete-bipartite K(shore, shore)
tiles. Within a tile the two shores are wired all-to-all; between tiles,
corresponding spins of vertically adjacent tiles are chained through one
shore and horizontally adjacent tiles through the other. Which shore carries
the vertical chains alternates in a checkerboard over the tiles, so that the
two shores of every tile double as a proper 2-coloring of the whole lattice
(color A = first shore, color B = second shore).

Node numbering is deterministic: tiles in row-major order, side-A spins
before side-B spins within a tile, so node ids are stable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

COLOR_A = 0
COLOR_B = 1


@dataclass(frozen=True)
class ChimeraGraph:
    """Immutable Chimera lattice with adjacency and bipartition."""

    rows: int
    cols: int
    shore: int
    num_nodes: int
    edges: tuple[tuple[int, int], ...]
    partition: np.ndarray  # uint8 per node, COLOR_A or COLOR_B
    _adjacency: tuple[tuple[int, ...], ...] = field(repr=False)

    def neighbors(self, i: int) -> tuple[int, ...]:
        """Sorted neighbor ids of node i."""
        if not 0 <= i < self.num_nodes:
            raise IndexError(f"node {i} out of range [0, {self.num_nodes})")
        return self._adjacency[i]

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def node_id(self, r: int, c: int, side: int, k: int) -> int:
        """Node id of spin k on the given side (0=A, 1=B) of tile (r, c)."""
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError(f"tile ({r}, {c}) out of range")
        if side not in (0, 1) or not 0 <= k < self.shore:
            raise IndexError(f"invalid (side, k) = ({side}, {k})")
        tile = r * self.cols + c
        return tile * 2 * self.shore + side * self.shore + k

    def to_spec(self) -> dict:
        """Constructor arguments; the graph rebuilds identically from these."""
        return {"rows": self.rows, "cols": self.cols, "shore": self.shore}


def _vertical_side(r: int, c: int) -> int:
    # Shore that carries the vertical inter-tile chains of tile (r, c).
    # Alternating it in a checkerboard keeps every inter-tile edge bichromatic.
    return (r + c) % 2


def build_chimera(rows: int, cols: int, shore: int = 4) -> ChimeraGraph:
    """Construct a rows x cols Chimera lattice with `shore` spins per side.

    Nodes are numbered row-major by tile, side A before side B. The edge
    list is deduplicated, each pair stored once as (i, j) with i < j, sorted.
    """
    if rows < 1 or cols < 1 or shore < 1:
        raise ValueError(f"dimensions must be positive, got ({rows}, {cols}, {shore})")

    n = rows * cols * 2 * shore

    def nid(r: int, c: int, side: int, k: int) -> int:
        return (r * cols + c) * 2 * shore + side * shore + k

    edges: list[tuple[int, int]] = []
    for r in range(rows):
        for c in range(cols):
            for ka in range(shore):
                for kb in range(shore):
                    edges.append((nid(r, c, 0, ka), nid(r, c, 1, kb)))
            vs = _vertical_side(r, c)
            if r + 1 < rows:
                for k in range(shore):
                    edges.append((nid(r, c, vs, k), nid(r + 1, c, _vertical_side(r + 1, c), k)))
            if c + 1 < cols:
                hs = 1 - vs
                for k in range(shore):
                    edges.append((nid(r, c, hs, k), nid(r, c + 1, 1 - _vertical_side(r, c + 1), k)))

    canonical = sorted({(min(i, j), max(i, j)) for i, j in edges})

    partition = np.zeros(n, dtype=np.uint8)
    for r in range(rows):
        for c in range(cols):
            for k in range(shore):
                partition[nid(r, c, 1, k)] = COLOR_B

    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in canonical:
        adj[i].append(j)
        adj[j].append(i)
    adjacency = tuple(tuple(sorted(nb)) for nb in adj)

    partition.setflags(write=False)
    return ChimeraGraph(
        rows=rows,
        cols=cols,
        shore=shore,
        num_nodes=n,
        edges=tuple(canonical),
        partition=partition,
        _adjacency=adjacency,
    )


def neighbors(g: ChimeraGraph, i: int) -> tuple[int, ...]:
    """Sorted neighbors of node i in g."""
    return g.neighbors(i)


def two_coloring(g: ChimeraGraph) -> np.ndarray:
    """Proper 2-coloring of g (identical to its side partition).

    Every edge is checked to be bichromatic before returning.
    """
    colors = g.partition
    for i, j in g.edges:
        if colors[i] == colors[j]:
            raise ValueError(f"edge ({i}, {j}) is monochromatic; graph is not bipartite by side")
    return colors


def expected_edge_count(rows: int, cols: int, shore: int = 4) -> int:
    """Closed-form edge count of the Chimera lattice."""
    return rows * cols * shore * shore + shore * (rows * (cols - 1) + cols * (rows - 1))

"""Occurrence digraphs and their linear extensions."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Hashable, Sequence

from .errors import CycleFound


@dataclass(frozen=True)
class OccurrenceDigraph:
    """Vertices in a fixed order (their index is the tie-break) and directed edges.

    For term synthesis the vertices are pairs ``(variable, occurrence)``.
    """

    vertices: tuple[Hashable, ...]
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", frozenset(self.edges))
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise ValueError("duplicate vertex")
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            if u not in vs or v not in vs:
                raise ValueError(f"edge {(u, v)!r} leaves the vertex set")

    @classmethod
    def for_exponents(cls, exponents: Sequence[int], edges=()) -> "OccurrenceDigraph":
        """Vertices (i, alpha) for 1 <= alpha <= exponents[i-1]."""
        vertices = [(i, a) for i, e in enumerate(exponents, start=1) for a in range(1, e + 1)]
        return cls(tuple(vertices), frozenset(edges))


def linear_extension(G: OccurrenceDigraph) -> list:
    """Topological order that always emits the least-indexed available source.

    Raises CycleFound with a vertex cycle when no linear extension exists.
    """
    pos = {v: i for i, v in enumerate(G.vertices)}
    succ: dict[int, list[int]] = {i: [] for i in range(len(G.vertices))}
    indeg = [0] * len(G.vertices)
    for u, v in G.edges:
        succ[pos[u]].append(pos[v])
        indeg[pos[v]] += 1
    heap = [i for i, d in enumerate(indeg) if d == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        i = heapq.heappop(heap)
        out.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, j)
    if len(out) < len(G.vertices):
        raise CycleFound(_find_cycle(G, set(range(len(G.vertices))) - set(out), pos))
    return [G.vertices[i] for i in out]


def _find_cycle(G, remaining, pos):
    # every remaining vertex has a remaining predecessor; walk back until a repeat
    pred: dict[int, int] = {}
    for u, v in sorted(G.edges, key=lambda e: (pos[e[0]], pos[e[1]])):
        pu, pv = pos[u], pos[v]
        if pu in remaining and pv in remaining and pv not in pred:
            pred[pv] = pu
    x = min(remaining)
    path = []
    seen = {}
    while x not in seen:
        seen[x] = len(path)
        path.append(x)
        x = pred[x]
    cycle = path[seen[x]:][::-1]
    return [G.vertices[i] for i in cycle]


def respects(order: Sequence, G: OccurrenceDigraph) -> bool:
    pos = {v: i for i, v in enumerate(order)}
    return (
        len(order) == len(G.vertices)
        and set(order) == set(G.vertices)
        and all(pos[u] < pos[v] for u, v in G.edges)
    )

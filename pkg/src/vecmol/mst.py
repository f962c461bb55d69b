"""Weighted primitive graph and its minimum spanning tree."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import fmean, pstdev
from typing import Sequence

from .geometry import closest_distance, endpoint_distance
from .ingest import CHAR, LINE, SOLID_WEDGE, Primitive
from .params import DEFAULT_PARAMS, ParserParams

INF = math.inf


class GraphError(ValueError):
    pass


def is_line_like(p: Primitive) -> bool:
    return p.kind in (LINE, SOLID_WEDGE)


def distance(p: Primitive, q: Primitive) -> float:
    """Endpoint distance between line-like primitives (a solid wedge counts
    through its axis), closest-point distance otherwise."""
    if is_line_like(p) and is_line_like(q):
        return endpoint_distance(p.axis, q.axis)
    return closest_distance(p.geometry, q.geometry)


@dataclass
class WeightedAdjacency:
    weights: list[list[float]]

    @property
    def n(self) -> int:
        return len(self.weights)


@dataclass
class PrimitiveGraph:
    """Undirected graph over primitives; edges map ``(i, j)`` with ``i < j`` to weight."""

    nodes: list[Primitive]
    edges: dict[tuple[int, int], float] = field(default_factory=dict)

    def neighbors(self, i: int) -> list[int]:
        return sorted(b if a == i else a for a, b in self.edges if i in (a, b))

    def degree(self, i: int) -> int:
        return sum(1 for e in self.edges if i in e)

    def add(self, i: int, j: int, w: float):
        self.edges[(min(i, j), max(i, j))] = w

    def remove(self, i: int, j: int):
        self.edges.pop((min(i, j), max(i, j)), None)

    def copy(self) -> "PrimitiveGraph":
        return PrimitiveGraph(list(self.nodes), dict(self.edges))


def build_weights(prims: Sequence[Primitive], params: ParserParams = DEFAULT_PARAMS) -> WeightedAdjacency:
    n = len(prims)
    if n == 0:
        raise GraphError("no primitives")
    w = [[INF] * n for _ in range(n)]
    char_line: list[tuple[int, int]] = []
    for i in range(n):
        for j in range(i + 1, n):
            d = distance(prims[i], prims[j])
            w[i][j] = w[j][i] = d
            ki, kj = prims[i].kind, prims[j].kind
            if ki == CHAR and kj == CHAR:
                if params.abs_cos_char_prune is not None and _diagonal(prims[i], prims[j], params.abs_cos_char_prune):
                    w[i][j] = w[j][i] = INF
            elif (ki == CHAR and is_line_like(prims[j])) or (kj == CHAR and is_line_like(prims[i])):
                char_line.append((i, j))
    z = params.char_line_z_tolerance
    if z is not None and len(char_line) >= 2:
        ds = [w[i][j] for i, j in char_line]
        mu, sigma = fmean(ds), pstdev(ds)
        if sigma > 0:
            for (i, j), d in zip(char_line, ds):
                if (d - mu) / sigma > z:
                    w[i][j] = w[j][i] = INF
    return WeightedAdjacency(w)


def _diagonal(p: Primitive, q: Primitive, band: float) -> bool:
    (x1, y1), (x2, y2) = p.center, q.center
    r = math.hypot(x2 - x1, y2 - y1)
    if r == 0:
        return False
    c = abs(x2 - x1) / r
    return band < c < 1.0 - band


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra > rb:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def kruskal_mst(w: WeightedAdjacency, nodes: Sequence[Primitive] | None = None) -> PrimitiveGraph:
    """Minimum spanning forest over finite weights; ties by (weight, i, j)."""
    n = w.n
    if n == 0:
        raise GraphError("no primitives")
    cand = sorted((w.weights[i][j], i, j) for i in range(n) for j in range(i + 1, n)
                  if w.weights[i][j] < INF)
    uf = UnionFind(n)
    g = PrimitiveGraph(list(nodes) if nodes is not None else [])
    for d, i, j in cand:
        if uf.union(i, j):
            g.edges[(i, j)] = d
            if len(g.edges) == n - 1:
                break
    return g


def build_mst(prims: Sequence[Primitive], params: ParserParams = DEFAULT_PARAMS) -> PrimitiveGraph:
    return kruskal_mst(build_weights(prims, params), prims)


def to_dot(g: PrimitiveGraph, name: str = "primitives") -> str:
    lines = [f"graph {name} {{"]
    for p in g.nodes:
        label = p.kind if p.label is None else f"{p.kind} {p.label}"
        label = label.replace('"', '\\"')
        lines.append(f'  n{p.id} [label="{p.id}: {label}"];')
    for (i, j), d in sorted(g.edges.items()):
        lines.append(f'  n{i} -- n{j} [label="{d:.3f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

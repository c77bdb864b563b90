"""Undirected multigraphs with exact rational edge costs, plus the tree
primitives (paths, LCA, Euler-tour order) used by the certificate machinery.

All arithmetic is `fractions.Fraction`; nothing here ever touches floats.
Vertex identifiers may be any hashable, mutually orderable values (strings
and ints in practice).
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Optional, Sequence

from .errors import ConnectivityError, InputError

Vertex = Hashable

ZERO = Fraction(0)


def as_cost(value) -> Fraction:
    """Coerce an int/str/Fraction into a nonnegative exact cost."""
    cost = Fraction(value)
    if cost < 0:
        raise InputError(f"edge costs must be nonnegative, got {cost}")
    return cost


@dataclass(frozen=True, order=True)
class Edge:
    """One undirected edge. Endpoints are stored in sorted order so that
    Edge(b, a, c) == Edge(a, b, c); `key` disambiguates parallel edges."""

    u: Vertex
    v: Vertex
    cost: Fraction
    key: int = 0

    def __post_init__(self):
        if self.u == self.v:
            raise InputError(f"self-loop at {self.u!r} not allowed")
        object.__setattr__(self, "cost", as_cost(self.cost))
        if self.v < self.u:
            u, v = self.u, self.v
            object.__setattr__(self, "u", v)
            object.__setattr__(self, "v", u)

    def other(self, w: Vertex) -> Vertex:
        if w == self.u:
            return self.v
        if w == self.v:
            return self.u
        raise InputError(f"{w!r} is not an endpoint of {self}")

    def touches(self, w: Vertex) -> bool:
        return w == self.u or w == self.v

    def __str__(self):
        tag = f"#{self.key}" if self.key else ""
        return f"{self.u}-{self.v}{tag}:{self.cost}"


@dataclass(frozen=True)
class Path:
    """A simple path as a vertex sequence plus the edges joining it.

    The empty path is a single vertex with no edges (players whose source
    equals their sink use it).
    """

    vertices: tuple
    edges: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        if len(self.vertices) != len(self.edges) + 1:
            raise InputError("path needs exactly one more vertex than edges")
        if len(set(self.vertices)) != len(self.vertices):
            raise InputError(f"path revisits a vertex: {self.vertices}")
        for a, b, e in zip(self.vertices, self.vertices[1:], self.edges):
            if {a, b} != {e.u, e.v}:
                raise InputError(f"edge {e} does not join {a!r} and {b!r}")

    @classmethod
    def trivial(cls, v: Vertex) -> "Path":
        return cls((v,), ())

    @classmethod
    def from_edges(cls, start: Vertex, edges: Sequence[Edge]) -> "Path":
        vertices = [start]
        for e in edges:
            vertices.append(e.other(vertices[-1]))
        return cls(tuple(vertices), tuple(edges))

    @property
    def source(self) -> Vertex:
        return self.vertices[0]

    @property
    def target(self) -> Vertex:
        return self.vertices[-1]

    @property
    def is_empty(self) -> bool:
        return not self.edges

    @property
    def cost(self) -> Fraction:
        return sum((e.cost for e in self.edges), ZERO)

    def reversed(self) -> "Path":
        return Path(tuple(reversed(self.vertices)), tuple(reversed(self.edges)))

    def __len__(self):
        return len(self.edges)

    def __str__(self):
        return "->".join(str(v) for v in self.vertices)


class Graph:
    """Immutable undirected multigraph. Parallel edges are permitted and are
    told apart by their `key`; self-loops are rejected."""

    def __init__(self, vertices: Iterable[Vertex] = (), edges: Iterable = ()):
        vset = set(vertices)
        built: list[Edge] = []
        next_key: dict[tuple, int] = {}
        seen: set[tuple] = set()
        for item in edges:
            if isinstance(item, Edge):
                e = item
            else:
                u, v, cost = item
                e = Edge(u, v, as_cost(cost), next_key.get((u, v) if u <= v else (v, u), 0))
            ident = (e.u, e.v, e.key)
            if ident in seen:
                raise InputError(f"duplicate edge identity {ident}")
            seen.add(ident)
            next_key[(e.u, e.v)] = max(next_key.get((e.u, e.v), 0), e.key + 1)
            built.append(e)
            vset.add(e.u)
            vset.add(e.v)
        self._vertices = tuple(sorted(vset))
        self._edges = tuple(sorted(built))
        self._vertex_set = frozenset(self._vertices)
        self._edge_set = frozenset(self._edges)
        adj: dict[Vertex, list[Edge]] = {v: [] for v in self._vertices}
        for e in self._edges:
            adj[e.u].append(e)
            adj[e.v].append(e)
        self._adj = {
            v: tuple(sorted(es, key=lambda e, v=v: (e.other(v), e.cost, e.key)))
            for v, es in adj.items()
        }

    @property
    def vertices(self) -> tuple:
        return self._vertices

    @property
    def edges(self) -> tuple:
        return self._edges

    def has_vertex(self, v: Vertex) -> bool:
        return v in self._vertex_set

    def has_edge(self, e: Edge) -> bool:
        return e in self._edge_set

    def require_vertex(self, v: Vertex) -> None:
        if v not in self._vertex_set:
            raise InputError(f"unknown vertex {v!r}")

    def adjacent(self, v: Vertex) -> tuple:
        self.require_vertex(v)
        return self._adj[v]

    def degree(self, v: Vertex) -> int:
        return len(self.adjacent(v))

    @property
    def total_cost(self) -> Fraction:
        return sum((e.cost for e in self._edges), ZERO)

    def is_connected(self) -> bool:
        if not self._vertices:
            return True
        seen = {self._vertices[0]}
        stack = [self._vertices[0]]
        while stack:
            v = stack.pop()
            for e in self._adj[v]:
                w = e.other(v)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self._vertices)

    def path_from_vertices(self, vertices: Sequence[Vertex]) -> Path:
        """Build a Path along a vertex sequence, picking the cheapest parallel
        edge at each hop."""
        if len(vertices) == 1:
            self.require_vertex(vertices[0])
            return Path.trivial(vertices[0])
        edges = []
        for a, b in zip(vertices, vertices[1:]):
            self.require_vertex(a)
            self.require_vertex(b)
            candidates = [e for e in self._adj[a] if e.other(a) == b]
            if not candidates:
                raise InputError(f"no edge between {a!r} and {b!r}")
            edges.append(min(candidates, key=lambda e: (e.cost, e.key)))
        return Path(tuple(vertices), tuple(edges))

    def __repr__(self):
        return f"Graph({len(self._vertices)} vertices, {len(self._edges)} edges)"


def shortest_path_lengths(g: Graph, source: Vertex) -> dict:
    """Exact single-source Dijkstra distances; unreachable vertices omitted."""
    g.require_vertex(source)
    dist: dict[Vertex, Fraction] = {source: ZERO}
    done: set[Vertex] = set()
    heap: list[tuple] = [(ZERO, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for e in g.adjacent(v):
            w = e.other(v)
            nd = d + e.cost
            if w not in dist or nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def shortest_path(g: Graph, u: Vertex, v: Vertex) -> tuple[Fraction, list[Edge]]:
    """Exact minimum-cost u-v path. Deterministic: among equal-cost paths the
    result depends only on the graph, not on edge insertion order."""
    g.require_vertex(u)
    g.require_vertex(v)
    if u == v:
        return ZERO, []
    dist: dict[Vertex, Fraction] = {u: ZERO}
    pred: dict[Vertex, tuple[Vertex, Edge]] = {}
    done: set[Vertex] = set()
    heap: list[tuple] = [(ZERO, u)]
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        if x == v:
            break
        for e in g.adjacent(x):
            w = e.other(x)
            nd = d + e.cost
            if w not in dist or nd < dist[w]:
                dist[w] = nd
                pred[w] = (x, e)
                heapq.heappush(heap, (nd, w))
    if v not in dist:
        raise ConnectivityError(f"{u!r} and {v!r} are not connected")
    edges: list[Edge] = []
    x = v
    while x != u:
        px, e = pred[x]
        edges.append(e)
        x = px
    edges.reverse()
    return dist[v], edges


def shortest_path_tree(g: Graph, root: Vertex) -> dict:
    """Parent edge toward `root` for every reachable vertex (root maps to
    None). Deterministic for a fixed graph."""
    g.require_vertex(root)
    dist: dict[Vertex, Fraction] = {root: ZERO}
    parent: dict[Vertex, Optional[Edge]] = {root: None}
    done: set[Vertex] = set()
    heap: list[tuple] = [(ZERO, root)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for e in g.adjacent(v):
            w = e.other(v)
            nd = d + e.cost
            if w not in dist or nd < dist[w]:
                dist[w] = nd
                parent[w] = e
                heapq.heappush(heap, (nd, w))
    return parent


def is_tree(g: Graph) -> bool:
    """True iff the graph is connected and acyclic."""
    n = len(g.vertices)
    return n > 0 and len(g.edges) == n - 1 and g.is_connected()


def minimum_spanning_tree(g: Graph) -> tuple[Fraction, list[Edge]]:
    """Kruskal MST; requires a connected graph. Deterministic via the global
    edge ordering."""
    if not g.is_connected():
        raise ConnectivityError("minimum_spanning_tree needs a connected graph")
    parent = {v: v for v in g.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    chosen: list[Edge] = []
    total = ZERO
    for e in sorted(g.edges, key=lambda e: (e.cost, e.u, e.v, e.key)):
        ru, rv = find(e.u), find(e.v)
        if ru != rv:
            parent[ru] = rv
            chosen.append(e)
            total += e.cost
    return total, chosen


class Tree:
    """A rooted tree view over a connected acyclic Graph.

    Children are ordered by ascending vertex identifier, which pins down the
    Euler traversal and every derived permutation.
    """

    def __init__(self, graph: Graph, root: Vertex):
        graph.require_vertex(root)
        if not is_tree(graph):
            raise InputError("Tree requires a connected acyclic graph")
        self.graph = graph
        self.root = root
        self.parent_edge: dict[Vertex, Optional[Edge]] = {root: None}
        self.parent: dict[Vertex, Optional[Vertex]] = {root: None}
        self.depth: dict[Vertex, int] = {root: 0}
        self.children: dict[Vertex, tuple] = {}
        stack = [root]
        while stack:
            v = stack.pop()
            kids = []
            for e in graph.adjacent(v):
                w = e.other(v)
                if w not in self.depth:
                    self.depth[w] = self.depth[v] + 1
                    self.parent[w] = v
                    self.parent_edge[w] = e
                    kids.append(w)
            self.children[v] = tuple(sorted(kids))
            stack.extend(reversed(self.children[v]))

    @property
    def vertices(self) -> tuple:
        return self.graph.vertices

    @property
    def edges(self) -> tuple:
        return self.graph.edges

    @property
    def total_cost(self) -> Fraction:
        return self.graph.total_cost

    def path_to_root(self, v: Vertex) -> list[Edge]:
        self.graph.require_vertex(v)
        out = []
        while self.parent[v] is not None:
            out.append(self.parent_edge[v])
            v = self.parent[v]
        return out


def lca(t: Tree, u: Vertex, v: Vertex) -> Vertex:
    """Deepest common ancestor of u and v in the rooted tree."""
    t.graph.require_vertex(u)
    t.graph.require_vertex(v)
    while t.depth[u] > t.depth[v]:
        u = t.parent[u]
    while t.depth[v] > t.depth[u]:
        v = t.parent[v]
    while u != v:
        u = t.parent[u]
        v = t.parent[v]
    return u


def tree_path(t: Tree, u: Vertex, v: Vertex) -> list[Edge]:
    """The unique simple u-v path in the tree, as an edge list from u to v."""
    a = lca(t, u, v)
    up = []
    x = u
    while x != a:
        up.append(t.parent_edge[x])
        x = t.parent[x]
    down = []
    x = v
    while x != a:
        down.append(t.parent_edge[x])
        x = t.parent[x]
    return up + list(reversed(down))


def tree_path_vertices(t: Tree, u: Vertex, v: Vertex) -> list:
    """Vertex sequence of the unique u-v tree path."""
    a = lca(t, u, v)
    up = []
    x = u
    while x != a:
        up.append(x)
        x = t.parent[x]
    down = []
    x = v
    while x != a:
        down.append(x)
        x = t.parent[x]
    return up + [a] + list(reversed(down))


def euler_first_appearance_order(t: Tree, root: Vertex, marked: Sequence[Vertex]) -> list:
    """Order `marked` vertices by first appearance in the depth-first doubled
    traversal of the tree starting at `root` (children ascending).

    `root` must be the tree's root and the first marked vertex.
    """
    if root != t.root:
        raise InputError("traversal root must be the tree root")
    if not marked or marked[0] != root:
        raise InputError("the root must be the first marked vertex")
    if len(set(marked)) != len(marked):
        raise InputError("marked vertices must be distinct")
    for v in marked:
        t.graph.require_vertex(v)
    marked_set = set(marked)
    order = []
    stack = [root]
    while stack:
        v = stack.pop()
        if v in marked_set:
            order.append(v)
            marked_set.remove(v)
            if not marked_set:
                break
        stack.extend(reversed(t.children[v]))
    return order

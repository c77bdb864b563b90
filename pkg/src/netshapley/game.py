"""The Shapley network design game: instances, strategy profiles, fair cost
shares, the harmonic potential, and exact Nash verification.

Every quantity is an exact Fraction; Nash checks compare with `<`/`<=` on
rationals, so ties are decided exactly and never depend on rounding.
"""
from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from .errors import ConnectivityError, InputError
from .graphs import ZERO, Edge, Graph, Path, Vertex


@dataclass(frozen=True)
class GameInstance:
    """A connected graph plus n (source, sink) pairs.

    `single_sink` marks instances where every player shares one destination;
    the certificate machinery only accepts those.
    """

    graph: Graph
    players: tuple
    single_sink: Optional[Vertex] = None

    def __post_init__(self):
        object.__setattr__(self, "players", tuple((s, t) for s, t in self.players))
        if not self.players:
            raise InputError("a game needs at least one player")
        for s, t in self.players:
            self.graph.require_vertex(s)
            self.graph.require_vertex(t)
        if self.single_sink is not None:
            self.graph.require_vertex(self.single_sink)
            bad = [t for _, t in self.players if t != self.single_sink]
            if bad:
                raise InputError(f"single_sink={self.single_sink!r} but players sink at {bad}")
        if not self.graph.is_connected():
            raise ConnectivityError("game arena must be connected")

    @classmethod
    def with_single_sink(cls, graph: Graph, sources: Sequence[Vertex], sink: Vertex) -> "GameInstance":
        return cls(graph, tuple((s, sink) for s in sources), single_sink=sink)

    @property
    def n(self) -> int:
        return len(self.players)

    def source(self, i: int) -> Vertex:
        return self.players[i][0]

    def sink(self, i: int) -> Vertex:
        return self.players[i][1]


@dataclass(frozen=True)
class StrategyProfile:
    """One simple path per player."""

    paths: tuple

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))

    def replace(self, i: int, path: Path) -> "StrategyProfile":
        paths = list(self.paths)
        paths[i] = path
        return StrategyProfile(tuple(paths))

    def __len__(self):
        return len(self.paths)


def validate_profile(inst: GameInstance, prof: StrategyProfile) -> None:
    """Raise InputError unless every path matches its player's pair and lives
    inside the instance graph. Path simplicity is enforced by Path itself."""
    if len(prof.paths) != inst.n:
        raise InputError(f"expected {inst.n} paths, got {len(prof.paths)}")
    for i, path in enumerate(prof.paths):
        s, t = inst.players[i]
        if path.source != s or path.target != t:
            raise InputError(f"player {i} path runs {path.source!r}->{path.target!r}, wants {s!r}->{t!r}")
        for e in path.edges:
            if not inst.graph.has_edge(e):
                raise InputError(f"player {i} uses edge {e} not present in the graph")


def profile_from_vertex_lists(inst: GameInstance, vertex_lists: Sequence[Sequence[Vertex]]) -> StrategyProfile:
    """Convenience constructor used heavily in tests."""
    prof = StrategyProfile(tuple(inst.graph.path_from_vertices(v) for v in vertex_lists))
    validate_profile(inst, prof)
    return prof


def edge_loads(inst: GameInstance, prof: StrategyProfile) -> dict:
    """Multiplicity f_e of each edge over the profile; zero-load edges absent."""
    loads: Counter = Counter()
    for path in prof.paths:
        loads.update(path.edges)
    return dict(loads)


@lru_cache(maxsize=None)
def harmonic(n: int) -> Fraction:
    """Exact n-th harmonic number; harmonic(0) == 0."""
    if n < 0:
        raise InputError("harmonic() needs n >= 0")
    if n == 0:
        return ZERO
    return harmonic(n - 1) + Fraction(1, n)


def player_cost(inst: GameInstance, prof: StrategyProfile, i: int, loads: Optional[dict] = None) -> Fraction:
    """Fair share of player i: sum of c_e / f_e over its path."""
    if not 0 <= i < inst.n:
        raise InputError(f"player index {i} out of range")
    if loads is None:
        loads = edge_loads(inst, prof)
    return sum((e.cost / loads[e] for e in prof.paths[i].edges), ZERO)


def social_cost(inst: GameInstance, prof: StrategyProfile) -> Fraction:
    """Total cost of edges used by at least one player."""
    used = set()
    for path in prof.paths:
        used.update(path.edges)
    return sum((e.cost for e in used), ZERO)


def potential(inst: GameInstance, prof: StrategyProfile, loads: Optional[dict] = None) -> Fraction:
    """Harmonic potential: sum of c_e * H(f_e) over loaded edges."""
    if loads is None:
        loads = edge_loads(inst, prof)
    return sum((e.cost * harmonic(k) for e, k in loads.items()), ZERO)


def _residual_loads(inst: GameInstance, prof: StrategyProfile, i: int) -> dict:
    """Loads as seen by a deviating player i (its own path removed)."""
    loads = edge_loads(inst, prof)
    for e in prof.paths[i].edges:
        loads[e] -= 1
        if loads[e] == 0:
            del loads[e]
    return loads


def deviation_cost(inst: GameInstance, prof: StrategyProfile, i: int, alt: Path) -> Fraction:
    """Cost player i would pay after unilaterally switching to `alt`."""
    s, t = inst.players[i]
    if alt.source != s or alt.target != t:
        raise InputError(f"alternative path runs {alt.source!r}->{alt.target!r}, wants {s!r}->{t!r}")
    for e in alt.edges:
        if not inst.graph.has_edge(e):
            raise InputError(f"alternative path uses unknown edge {e}")
    residual = _residual_loads(inst, prof, i)
    return sum((e.cost / (residual.get(e, 0) + 1) for e in alt.edges), ZERO)


# ---------------------------------------------------------------------------
# Best response: exact argmin over deviations, with the documented tie-breaks.
# ---------------------------------------------------------------------------

def _deviation_labels(graph: Graph, residual: dict, source: Vertex) -> dict:
    """Dijkstra labels (deviation cost, -shared cost) from `source`.

    Both components are edge-additive and every increment is lexicographically
    >= (0, 0) (a zero-cost edge contributes (0, 0)), so label setting is exact.
    Minimizing the pair means: cheapest deviation first, then the one sharing
    the most edge cost with other players.
    """
    start = (ZERO, ZERO)
    labels = {source: start}
    done = set()
    heap = [(start, source)]
    while heap:
        lab, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for e in graph.adjacent(v):
            w = e.other(v)
            k = residual.get(e, 0)
            nl = (lab[0] + e.cost / (k + 1), lab[1] - (e.cost if k else ZERO))
            if w not in labels or nl < labels[w]:
                labels[w] = nl
                heapq.heappush(heap, (nl, w))
    return labels


def _lex_min_tight_path(graph: Graph, residual: dict, labels: dict, s: Vertex, t: Vertex) -> Path:
    """Among all label-optimal s-t paths, return the one with the smallest
    vertex sequence. DFS over label-tight arcs in ascending-vertex order; the
    first complete simple path found is the lexicographic minimum."""

    def tight_neighbors(v):
        best: dict[Vertex, Edge] = {}
        lv = labels[v]
        for e in graph.adjacent(v):
            w = e.other(v)
            if w not in labels:
                continue
            k = residual.get(e, 0)
            nl = (lv[0] + e.cost / (k + 1), lv[1] - (e.cost if k else ZERO))
            if nl == labels[w] and (w not in best or (e.cost, e.key) < (best[w].cost, best[w].key)):
                best[w] = e
        return sorted(best.items())

    visited = {s}
    edges: list[Edge] = []

    def dfs(v) -> bool:
        if v == t:
            return True
        for w, e in tight_neighbors(v):
            if w in visited:
                continue
            visited.add(w)
            edges.append(e)
            if dfs(w):
                return True
            visited.remove(w)
            edges.pop()
        return False

    if not dfs(s):
        raise ConnectivityError(f"no path from {s!r} to {t!r}")
    return Path.from_edges(s, edges)


def best_response(inst: GameInstance, prof: StrategyProfile, i: int) -> tuple[Path, Fraction]:
    """Minimum deviation-cost path for player i against the rest of `prof`.

    Ties are broken by (a) maximal total cost of edges shared with the other
    players' current paths, then (b) lexicographically smallest vertex
    sequence (and cheapest/lowest-key among parallel edges).
    """
    s, t = inst.players[i]
    if s == t:
        return Path.trivial(s), ZERO
    residual = _residual_loads(inst, prof, i)
    labels = _deviation_labels(inst.graph, residual, s)
    if t not in labels:
        raise ConnectivityError(f"no path from {s!r} to {t!r}")
    path = _lex_min_tight_path(inst.graph, residual, labels, s, t)
    return path, labels[t][0]


@dataclass(frozen=True)
class NashWitness:
    player: int
    path: Path
    improvement: Fraction


@dataclass(frozen=True)
class NashCheck:
    ok: bool
    witness: Optional[NashWitness] = None

    def __bool__(self):
        return self.ok


def is_nash(inst: GameInstance, prof: StrategyProfile) -> NashCheck:
    """Exact Nash test: no player may have a strictly cheaper deviation.

    When the profile is not an equilibrium the witness carries the player with
    the largest improvement (ties: lowest index) and its best-response path.
    """
    loads = edge_loads(inst, prof)
    best: Optional[NashWitness] = None
    for i in range(inst.n):
        current = player_cost(inst, prof, i, loads)
        path, cost = best_response(inst, prof, i)
        gain = current - cost
        if gain > 0 and (best is None or gain > best.improvement):
            best = NashWitness(i, path, gain)
    return NashCheck(best is None, best)

"""Exact optimum and exhaustive-equilibrium solvers for desk-scale instances.

These are the oracles the rest of the package is tested against: an exact
Steiner tree via terminal-subset dynamic programming, a subset+MST brute
force, full simple-path and Nash-profile enumeration, and the exact price of
stability. Heavy inner loops run on integer-rescaled costs; every public
result is an exact Fraction.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm, prod
from typing import Iterable, Optional, Sequence

from .errors import CapacityError, ConnectivityError, InputError, InternalError
from .game import GameInstance, StrategyProfile, edge_loads, harmonic, is_nash, validate_profile
from .graphs import (
    ZERO,
    Edge,
    Graph,
    Path,
    Tree,
    Vertex,
    minimum_spanning_tree,
    tree_path,
)

STEINER_MAX_TERMINALS = 12
STEINER_MAX_VERTICES = 50
BRUTE_FORCE_MAX_VERTICES = 16


def _cost_scale(edges: Sequence[Edge]) -> int:
    return lcm(1, *(e.cost.denominator for e in edges))


def _prune_to_terminals(edges: Iterable[Edge], keep: set) -> list[Edge]:
    """Repeatedly drop degree-1 vertices outside `keep`, with their edges."""
    edges = list(edges)
    while True:
        degree: dict[Vertex, int] = {}
        for e in edges:
            degree[e.u] = degree.get(e.u, 0) + 1
            degree[e.v] = degree.get(e.v, 0) + 1
        prunable = {v for v, d in degree.items() if d == 1 and v not in keep}
        if not prunable:
            return edges
        edges = [e for e in edges if e.u not in prunable and e.v not in prunable]


def _tree_from_edges(edges: Sequence[Edge], root: Vertex) -> Tree:
    vertices = {root}
    for e in edges:
        vertices.add(e.u)
        vertices.add(e.v)
    return Tree(Graph(sorted(vertices), edges), root)


def steiner_tree_exact(g: Graph, terminals: Iterable[Vertex]) -> tuple[Tree, Fraction]:
    """Minimum-cost tree spanning `terminals` (Steiner vertices allowed).

    Terminal-subset dynamic programming over integer-rescaled costs; exact for
    up to 12 distinct terminals and 50 vertices.
    """
    terms = sorted(set(terminals))
    if not terms:
        raise InputError("steiner_tree_exact needs at least one terminal")
    for v in terms:
        g.require_vertex(v)
    if len(terms) > STEINER_MAX_TERMINALS:
        raise CapacityError(
            f"{len(terms)} terminals exceeds the exact-solver limit of {STEINER_MAX_TERMINALS}")
    if len(g.vertices) > STEINER_MAX_VERTICES:
        raise CapacityError(
            f"{len(g.vertices)} vertices exceeds the exact-solver limit of {STEINER_MAX_VERTICES}")
    if not g.is_connected():
        raise ConnectivityError("steiner_tree_exact needs a connected graph")
    if len(terms) == 1:
        return Tree(Graph([terms[0]], []), terms[0]), ZERO

    verts = g.vertices
    vidx = {v: i for i, v in enumerate(verts)}
    nv = len(verts)
    edges = g.edges
    scale = _cost_scale(edges)
    # Secondary objective: among equal-cost trees prefer the smallest sum of
    # canonical edge ranks, so the chosen optimum is deterministic and does
    # not depend on edge insertion order.
    tie = len(edges) * len(edges) + 1
    weight = [int(e.cost * scale) * tie + rank for rank, e in enumerate(edges)]
    adj: list[list[tuple[int, int, int]]] = [[] for _ in range(nv)]
    for ei, e in enumerate(edges):
        ui, vi = vidx[e.u], vidx[e.v]
        adj[ui].append((weight[ei], vi, ei))
        adj[vi].append((weight[ei], ui, ei))

    k = len(terms)
    full = (1 << k) - 1
    inf = sum(weight) + 1
    dp: dict[int, list[int]] = {}
    par: dict[int, list] = {}

    for mask in range(1, full + 1):
        cur = [inf] * nv
        rec: list = [None] * nv
        if mask & (mask - 1) == 0:
            cur[vidx[terms[mask.bit_length() - 1]]] = 0
        else:
            low = mask & -mask
            sub = (mask - 1) & mask
            while sub:
                if sub & low:
                    rest = mask ^ sub
                    dsub, drest = dp[sub], dp[rest]
                    for v in range(nv):
                        c = dsub[v] + drest[v]
                        if c < cur[v]:
                            cur[v] = c
                            rec[v] = ("split", sub)
                sub = (sub - 1) & mask
        heap = [(c, v) for v, c in enumerate(cur) if c < inf]
        heapq.heapify(heap)
        while heap:
            c, v = heapq.heappop(heap)
            if c > cur[v]:
                continue
            for wt, u, ei in adj[v]:
                nc = c + wt
                if nc < cur[u]:
                    cur[u] = nc
                    rec[u] = ("edge", v, ei)
                    heapq.heappush(heap, (nc, u))
        dp[mask] = cur
        par[mask] = rec

    root_i = vidx[terms[0]]
    best = dp[full][root_i]
    if best >= inf:
        raise ConnectivityError("terminals are not mutually connected")

    chosen: set[int] = set()
    stack = [(full, root_i)]
    while stack:
        mask, v = stack.pop()
        r = par[mask][v]
        if r is None:
            continue
        if r[0] == "edge":
            chosen.add(r[2])
            stack.append((mask, r[1]))
        else:
            stack.append((r[1], v))
            stack.append((mask ^ r[1], v))

    union = Graph(terms, [edges[i] for i in chosen])
    _, mst_edges = minimum_spanning_tree(union)
    kept = _prune_to_terminals(mst_edges, set(terms))
    tree = _tree_from_edges(kept, terms[0])
    cost = tree.total_cost
    if cost != Fraction(best // tie, scale):
        raise InternalError(
            f"steiner reconstruction cost {cost} != dp optimum {Fraction(best // tie, scale)}")
    return tree, cost


def steiner_tree_brute_force(g: Graph, terminals: Iterable[Vertex]) -> tuple[Tree, Fraction]:
    """Independent oracle: minimize MST cost over all subsets of candidate
    Steiner vertices. Exponential in |V| - |terminals|; small graphs only."""
    terms = sorted(set(terminals))
    if not terms:
        raise InputError("steiner_tree_brute_force needs at least one terminal")
    for v in terms:
        g.require_vertex(v)
    if len(g.vertices) > BRUTE_FORCE_MAX_VERTICES:
        raise CapacityError(
            f"{len(g.vertices)} vertices exceeds the brute-force limit of {BRUTE_FORCE_MAX_VERTICES}")
    if not g.is_connected():
        raise ConnectivityError("steiner_tree_brute_force needs a connected graph")
    if len(terms) == 1:
        return Tree(Graph([terms[0]], []), terms[0]), ZERO

    extra = [v for v in g.vertices if v not in terms]
    best: Optional[tuple[Fraction, list[Edge]]] = None
    for mask in range(1 << len(extra)):
        inside = set(terms)
        inside.update(v for i, v in enumerate(extra) if mask >> i & 1)
        sub_edges = [e for e in g.edges if e.u in inside and e.v in inside]
        sub = Graph(sorted(inside), sub_edges)
        if not sub.is_connected():
            continue
        cost, mst_edges = minimum_spanning_tree(sub)
        if best is None or cost < best[0]:
            best = (cost, mst_edges)
    if best is None:
        raise ConnectivityError("terminals are not mutually connected")
    kept = _prune_to_terminals(best[1], set(terms))
    tree = _tree_from_edges(kept, terms[0])
    if tree.total_cost != best[0]:
        raise InternalError("pruning changed the brute-force optimum")
    return tree, best[0]


def opt_profile_from_tree(inst: GameInstance, tree: Tree) -> StrategyProfile:
    """Route every player to the sink along the tree, after pruning leaf
    branches that carry no source; the used union then equals the pruned tree."""
    if inst.single_sink is None:
        raise InputError("opt_profile_from_tree needs a single-sink instance")
    sink = inst.single_sink
    needed = {s for s, _ in inst.players} | {sink}
    for v in needed:
        if not tree.graph.has_vertex(v):
            raise InputError(f"tree does not span required vertex {v!r}")
    kept = _prune_to_terminals(tree.graph.edges, needed)
    routed = _tree_from_edges(kept, sink) if kept else Tree(Graph([sink], []), sink)
    paths = []
    for s, _ in inst.players:
        if s == sink:
            paths.append(Path.trivial(s))
        else:
            paths.append(Path.from_edges(s, tree_path(routed, s, sink)))
    prof = StrategyProfile(tuple(paths))
    validate_profile(inst, prof)
    return prof


def enumerate_simple_paths(g: Graph, s: Vertex, t: Vertex, cap: int = 10_000) -> list[Path]:
    """All simple s-t paths in lexicographic vertex-sequence order (parallel
    edges ordered by cost then key). CapacityError if more than `cap` exist."""
    g.require_vertex(s)
    g.require_vertex(t)
    if s == t:
        return [Path.trivial(s)]
    out: list[Path] = []
    visited = {s}
    trail: list[Edge] = []

    def dfs(v):
        for e in g.adjacent(v):
            w = e.other(v)
            if w in visited:
                continue
            trail.append(e)
            if w == t:
                out.append(Path.from_edges(s, tuple(trail)))
                if len(out) > cap:
                    raise CapacityError(f"more than {cap} simple {s!r}-{t!r} paths")
            else:
                visited.add(w)
                dfs(w)
                visited.remove(w)
            trail.pop()

    dfs(s)
    return out


@dataclass(frozen=True)
class EnumerationCaps:
    """Hard limits for exhaustive enumeration; exceeding them raises
    CapacityError rather than silently truncating."""

    max_paths_per_player: int = 10_000
    max_profiles: int = 1_000_000


def strategy_spaces(inst: GameInstance, caps: EnumerationCaps = EnumerationCaps()) -> list[list[Path]]:
    """Every player's full simple-path strategy set, caps enforced."""
    spaces = [
        enumerate_simple_paths(inst.graph, s, t, caps.max_paths_per_player)
        for s, t in inst.players
    ]
    total = prod(len(sp) for sp in spaces)
    if total > caps.max_profiles:
        raise CapacityError(f"{total} profiles exceed the cap of {caps.max_profiles}")
    return spaces


class _ScaledTables:
    """Integer-exact share / social / potential tables for hot loops.

    With L = lcm of cost denominators and M = lcm(1..n), c_e*L*M/k and
    c_e*L*M*H(k) are integers for all loads k <= n, so profile comparisons
    reduce to Python int arithmetic.
    """

    def __init__(self, inst: GameInstance):
        edges = inst.graph.edges
        self.edge_index = {e: i for i, e in enumerate(edges)}
        n = inst.n
        L = _cost_scale(edges)
        M = lcm(1, *range(1, n + 1))
        self.scale = L * M
        cint = [int(e.cost * L * M) for e in edges]
        self.share = [[0] + [c // k for k in range(1, n + 1)] for c in cint]
        hint = [int(harmonic(k) * M) for k in range(n + 1)]
        self.potential = [[c // M * h for h in hint] for c in cint]
        self.social = cint

    def as_fraction(self, value: int) -> Fraction:
        return Fraction(value, self.scale)


def _indexed_spaces(inst: GameInstance, spaces: list[list[Path]], tables: _ScaledTables):
    tuples = []
    sets = []
    for sp in spaces:
        ts = [tuple(tables.edge_index[e] for e in p.edges) for p in sp]
        tuples.append(ts)
        sets.append([frozenset(t) for t in ts])
    return tuples, sets


def _profile_is_nash_scaled(n, choice, loads, share, ptuples, psets) -> bool:
    for i in range(n):
        ci = choice[i]
        own = psets[i][ci]
        current = sum(share[e][loads[e]] for e in ptuples[i][ci])
        for alt, alt_edges in enumerate(ptuples[i]):
            if alt == ci:
                continue
            dev = 0
            for e in alt_edges:
                dev += share[e][loads[e] + (0 if e in own else 1)]
                if dev >= current:
                    break
            if dev < current:
                return False
    return True


def enumerate_nash(inst: GameInstance, caps: EnumerationCaps = EnumerationCaps()) -> list[StrategyProfile]:
    """Every pure Nash equilibrium, in deterministic product order."""
    spaces = strategy_spaces(inst, caps)
    tables = _ScaledTables(inst)
    ptuples, psets = _indexed_spaces(inst, spaces, tables)
    m = len(inst.graph.edges)
    n = inst.n
    share = tables.share
    found = []
    for choice in itertools.product(*(range(len(sp)) for sp in spaces)):
        loads = [0] * m
        for i, ci in enumerate(choice):
            for e in ptuples[i][ci]:
                loads[e] += 1
        if _profile_is_nash_scaled(n, choice, loads, share, ptuples, psets):
            found.append(StrategyProfile(tuple(spaces[i][ci] for i, ci in enumerate(choice))))
    return found


def price_of_stability_exact(
    inst: GameInstance, caps: EnumerationCaps = EnumerationCaps()
) -> tuple[Fraction, StrategyProfile, Fraction]:
    """Exact PoS = best Nash social cost / optimal social cost, by full
    enumeration. Also returns the best Nash profile and the optimum cost."""
    spaces = strategy_spaces(inst, caps)
    tables = _ScaledTables(inst)
    ptuples, psets = _indexed_spaces(inst, spaces, tables)
    m = len(inst.graph.edges)
    n = inst.n
    share, social = tables.share, tables.social
    opt_cost: Optional[int] = None
    best_nash: Optional[tuple[int, tuple]] = None
    for choice in itertools.product(*(range(len(sp)) for sp in spaces)):
        loads = [0] * m
        for i, ci in enumerate(choice):
            for e in ptuples[i][ci]:
                loads[e] += 1
        cost = sum(social[e] for e, k in enumerate(loads) if k)
        if opt_cost is None or cost < opt_cost:
            opt_cost = cost
        if (best_nash is None or cost < best_nash[0]) and _profile_is_nash_scaled(
            n, choice, loads, share, ptuples, psets
        ):
            best_nash = (cost, choice)
    if best_nash is None:
        raise InternalError("no pure Nash equilibrium found; this game always has one")
    assert opt_cost is not None
    # social table carries the extra factor M; it cancels inside the ratio
    # but not in the returned absolute costs.
    opt = tables.as_fraction(opt_cost)
    nash_cost = tables.as_fraction(best_nash[0])
    profile = StrategyProfile(tuple(spaces[i][ci] for i, ci in enumerate(best_nash[1])))
    pos = Fraction(1) if opt == 0 else nash_cost / opt
    return pos, profile, opt


def min_potential_profile(
    inst: GameInstance, caps: EnumerationCaps = EnumerationCaps()
) -> StrategyProfile:
    """The exact global potential minimizer over all profiles (first in
    product order on ties)."""
    spaces = strategy_spaces(inst, caps)
    tables = _ScaledTables(inst)
    ptuples, _ = _indexed_spaces(inst, spaces, tables)
    m = len(inst.graph.edges)
    pot = tables.potential
    best: Optional[tuple[int, tuple]] = None
    for choice in itertools.product(*(range(len(sp)) for sp in spaces)):
        loads = [0] * m
        for i, ci in enumerate(choice):
            for e in ptuples[i][ci]:
                loads[e] += 1
        value = sum(pot[e][k] for e, k in enumerate(loads) if k)
        if best is None or value < best[0]:
            best = (value, choice)
    assert best is not None
    return StrategyProfile(tuple(spaces[i][ci] for i, ci in enumerate(best[1])))

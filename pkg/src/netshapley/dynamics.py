"""Better-response and best-response dynamics, the start-from-optimum run the
certificate relies on, and tree canonicalization of equilibrium outcomes.

The potential strictly decreases at every step, so every run either reaches a
Nash equilibrium or hits the iteration cap; the trace records which.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import InputError
from .game import (
    GameInstance,
    StrategyProfile,
    best_response,
    edge_loads,
    is_nash,
    player_cost,
    potential,
    validate_profile,
)
from .graphs import Graph, Path, Tree, is_tree, shortest_path_tree
from .solvers import opt_profile_from_tree, steiner_tree_exact

BEST_IMPROVEMENT = "best"
FIRST_IMPROVEMENT = "first"
POLICIES = (BEST_IMPROVEMENT, FIRST_IMPROVEMENT)

DEFAULT_CAP = 1_000_000

__all__ = [
    "BEST_IMPROVEMENT",
    "FIRST_IMPROVEMENT",
    "POLICIES",
    "DEFAULT_CAP",
    "DynamicsStep",
    "DynamicsTrace",
    "TreeifyResult",
    "best_response",
    "better_response_step",
    "run_dynamics",
    "dynamics_from_opt",
    "treeify",
]


@dataclass(frozen=True)
class DynamicsStep:
    player: int
    old_path: Path
    new_path: Path
    potential_after: Fraction


@dataclass(frozen=True)
class DynamicsTrace:
    steps: tuple
    terminated: bool

    @property
    def iterations(self) -> int:
        return len(self.steps)


def _select_move(inst: GameInstance, prof: StrategyProfile, policy: str):
    """The strictly improving move the policy picks, or None at equilibrium.

    Both policies move the chosen player to its full best response; they only
    differ in who moves (largest improvement vs lowest index)."""
    if policy not in POLICIES:
        raise InputError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    loads = edge_loads(inst, prof)
    chosen = None
    for i in range(inst.n):
        current = player_cost(inst, prof, i, loads)
        path, cost = best_response(inst, prof, i)
        gain = current - cost
        if gain > 0:
            if policy == FIRST_IMPROVEMENT:
                return i, path
            if chosen is None or gain > chosen[0]:
                chosen = (gain, i, path)
    if chosen is None:
        return None
    return chosen[1], chosen[2]


def better_response_step(inst: GameInstance, prof: StrategyProfile, policy: str = BEST_IMPROVEMENT) -> Optional[StrategyProfile]:
    """One dynamics step; None means the profile is already a Nash equilibrium."""
    move = _select_move(inst, prof, policy)
    if move is None:
        return None
    i, path = move
    return prof.replace(i, path)


def run_dynamics(
    inst: GameInstance,
    start: StrategyProfile,
    policy: str = BEST_IMPROVEMENT,
    cap: int = DEFAULT_CAP,
) -> tuple[StrategyProfile, DynamicsTrace]:
    """Iterate better-response steps until equilibrium or `cap` moves.

    `terminated` is accurate: when the cap is exhausted the final profile is
    still given one exact Nash check.
    """
    if cap <= 0:
        raise InputError("iteration cap must be positive")
    validate_profile(inst, start)
    prof = start
    steps = []
    terminated = False
    for _ in range(cap):
        move = _select_move(inst, prof, BEST_IMPROVEMENT if policy == BEST_IMPROVEMENT else FIRST_IMPROVEMENT)
        if move is None:
            terminated = True
            break
        i, path = move
        old = prof.paths[i]
        prof = prof.replace(i, path)
        steps.append(DynamicsStep(i, old, path, potential(inst, prof)))
    else:
        terminated = bool(is_nash(inst, prof))
    return prof, DynamicsTrace(tuple(steps), terminated)


def dynamics_from_opt(
    inst: GameInstance,
    cap: int = DEFAULT_CAP,
    policy: str = BEST_IMPROVEMENT,
) -> tuple[StrategyProfile, StrategyProfile, DynamicsTrace]:
    """Exact optimum profile, then better-response dynamics from it.

    The trace's monotone potential guarantees potential(nash) <= potential(opt)
    whenever it terminates.
    """
    if inst.single_sink is None:
        raise InputError("dynamics_from_opt needs a single-sink instance")
    terminals = {s for s, _ in inst.players} | {inst.single_sink}
    tree, _ = steiner_tree_exact(inst.graph, terminals)
    opt = opt_profile_from_tree(inst, tree)
    nash, trace = run_dynamics(inst, opt, policy=policy, cap=cap)
    return opt, nash, trace


@dataclass(frozen=True)
class TreeifyResult:
    profile: StrategyProfile
    changed: bool
    is_tree: bool


def _profile_union(prof: StrategyProfile, sink) -> Graph:
    used = set()
    vertices = {sink}
    for path in prof.paths:
        used.update(path.edges)
        vertices.update(path.vertices)
    return Graph(sorted(vertices), sorted(used))


def treeify(inst: GameInstance, prof: StrategyProfile) -> TreeifyResult:
    """Try to turn a Nash outcome whose path union has cycles into a tree
    outcome by rerouting everyone onto a shortest-path tree of the union
    (full edge costs, toward the sink).

    The reroute is kept only if it leaves every player's cost share and the
    potential no worse and the result is still a Nash equilibrium; otherwise
    the original profile is returned and tree-dependent certificate checks
    get skipped downstream.
    """
    if inst.single_sink is None:
        raise InputError("treeify needs a single-sink instance")
    sink = inst.single_sink
    validate_profile(inst, prof)
    union = _profile_union(prof, sink)
    if is_tree(union):
        return TreeifyResult(prof, False, True)

    parent = shortest_path_tree(union, sink)
    paths = []
    for s, _ in inst.players:
        if s == sink:
            paths.append(Path.trivial(s))
            continue
        edges = []
        v = s
        while v != sink:
            e = parent[v]
            edges.append(e)
            v = e.other(v)
        paths.append(Path.from_edges(s, edges))
    candidate = StrategyProfile(tuple(paths))

    old_loads = edge_loads(inst, prof)
    new_loads = edge_loads(inst, candidate)
    for i in range(inst.n):
        if player_cost(inst, candidate, i, new_loads) > player_cost(inst, prof, i, old_loads):
            return TreeifyResult(prof, False, False)
    if potential(inst, candidate, new_loads) > potential(inst, prof, old_loads):
        return TreeifyResult(prof, False, False)
    if not is_nash(inst, candidate):
        return TreeifyResult(prof, False, False)
    return TreeifyResult(candidate, True, is_tree(_profile_union(candidate, sink)))

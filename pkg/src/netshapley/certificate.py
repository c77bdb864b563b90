"""Per-instance certificates for the single-sink price-of-stability bound.

Given an exact optimum profile and a Nash profile reached from it, every
inequality of the bounding chain is evaluated in exact arithmetic: the
Euler-tour distance bound on the optimum tree, the pairwise deviation
inequalities at equilibrium, the cycle-cover lower bound on the Nash tree,
the potential sandwich, and the two resulting ratio caps whose minimum is the
instance-specific bound. Checks that need the Nash union to be a tree are
skipped (never failed) when it is not.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .dynamics import (
    DEFAULT_CAP,
    BEST_IMPROVEMENT,
    DynamicsTrace,
    run_dynamics,
    treeify,
)
from .errors import PremiseError
from .game import (
    GameInstance,
    StrategyProfile,
    edge_loads,
    harmonic,
    is_nash,
    potential,
    social_cost,
    validate_profile,
)
from .graphs import (
    ZERO,
    Graph,
    Tree,
    Vertex,
    euler_first_appearance_order,
    is_tree,
    lca,
    minimum_spanning_tree,
    shortest_path_lengths,
    tree_path,
)
from .solvers import opt_profile_from_tree, steiner_tree_exact

PASS = "pass"
FAIL = "fail"
SKIP = "skip"

OVERALL_PASS = "pass"
OVERALL_CONDITIONAL = "conditional-pass"
OVERALL_FAIL = "fail"


@dataclass(frozen=True)
class CheckRecord:
    """One verified inequality: exact left/right values and the outcome."""

    name: str
    lhs: Optional[Fraction]
    relation: str
    rhs: Optional[Fraction]
    status: str
    note: str = ""


def _check(name: str, lhs: Fraction, relation: str, rhs: Fraction, note: str = "") -> CheckRecord:
    if relation == "<=":
        ok = lhs <= rhs
    elif relation == ">=":
        ok = lhs >= rhs
    else:
        raise ValueError(f"unsupported relation {relation!r}")
    return CheckRecord(name, lhs, relation, rhs, PASS if ok else FAIL, note)


def _skipped(name: str, relation: str, note: str) -> CheckRecord:
    return CheckRecord(name, None, relation, None, SKIP, note)


@dataclass(frozen=True)
class FrequencyProfile:
    """Cost-mass histogram of Nash edge loads.

    by_load[i] is the total cost of edges carried by exactly i players,
    tail[j] the total over loads >= j, and n_half the largest load level
    whose tail still holds at least half the Nash cost.
    """

    by_load: dict
    tail: dict
    n_half: int
    nash_cost: Fraction

    def tail_at(self, j: int) -> Fraction:
        return self.tail.get(j, ZERO)


def frequency_profile(inst: GameInstance, nash: StrategyProfile) -> FrequencyProfile:
    loads = edge_loads(inst, nash)
    by_load: dict[int, Fraction] = {}
    for e, k in loads.items():
        by_load[k] = by_load.get(k, ZERO) + e.cost
    max_load = max(by_load, default=0)
    tail: dict[int, Fraction] = {}
    acc = ZERO
    for j in range(max_load, 0, -1):
        acc += by_load.get(j, ZERO)
        tail[j] = acc
    nash_cost = tail.get(1, ZERO)
    half = nash_cost / 2
    levels = [j for j in range(1, max_load + 1) if tail[j] >= half]
    return FrequencyProfile(by_load, tail, max(levels, default=1), nash_cost)


def augmented_sources(inst: GameInstance) -> list:
    """Source list with the dummy player (index 0) sitting at the sink."""
    if inst.single_sink is None:
        raise PremiseError("certificates require a single-sink instance")
    return [inst.single_sink] + [s for s, _ in inst.players]


def euler_player_order(inst: GameInstance, opt_tree: Tree) -> list[int]:
    """Permutation of augmented player indices 0..n by first appearance of
    their sources in the doubled traversal of the optimum tree."""
    sink = inst.single_sink
    aug = augmented_sources(inst)
    marked = [sink] + sorted({s for s in aug[1:] if s != sink})
    vertex_order = euler_first_appearance_order(opt_tree, sink, marked)
    rank = {v: r for r, v in enumerate(vertex_order)}
    return sorted(range(len(aug)), key=lambda i: (rank[aug[i]], i))


def _source_distances(inst: GameInstance) -> dict:
    return {s: shortest_path_lengths(inst.graph, s) for s in set(augmented_sources(inst))}


def euler_order_bound_check(
    inst: GameInstance, opt_tree: Tree, opt_cost: Optional[Fraction] = None, dist: Optional[dict] = None
) -> tuple[list[int], CheckRecord]:
    """The cyclic tour through all sources in Euler order costs at most twice
    the optimum tree."""
    aug = augmented_sources(inst)
    phi = euler_player_order(inst, opt_tree)
    if dist is None:
        dist = _source_distances(inst)
    if opt_cost is None:
        opt_cost = opt_tree.total_cost
    total = ZERO
    for r, i in enumerate(phi):
        j = phi[(r + 1) % len(phi)]
        total += dist[aug[i]][aug[j]]
    return phi, _check("tour_distance_bound", total, "<=", 2 * opt_cost)


def pair_sharing_gain(tree: Tree, loads: dict, u: Vertex, v: Vertex) -> Fraction:
    """Sum of c_e / (f_e (f_e+1)) over both halves of the u-v tree path, split
    at their lowest common ancestor: the marginal sharing gain each endpoint
    would hand the other by joining its route."""
    a = lca(tree, u, v)
    total = ZERO
    for x in (u, v):
        for e in tree_path(tree, x, a):
            f = loads[e]
            total += e.cost / (f * (f + 1))
    return total


def deviation_inequality_check(
    inst: GameInstance,
    nash_tree: Tree,
    loads: dict,
    i: int,
    j: int,
    dist: Optional[dict] = None,
) -> list[CheckRecord]:
    """At equilibrium, each player's share above the pair's meeting point is
    bounded by detouring to the other's source and riding its path; the two
    bounds sum to: sharing gain <= 2 d(s_i, s_j).

    Indices are augmented (0 is the dummy at the sink).
    """
    aug = augmented_sources(inst)
    si, sj = aug[i], aug[j]
    if dist is None:
        dist = _source_distances(inst)
    d = dist[si][sj]
    a = lca(nash_tree, si, sj)
    own_i = tree_path(nash_tree, si, a)
    own_j = tree_path(nash_tree, sj, a)

    def share(edges):
        return sum((e.cost / loads[e] for e in edges), ZERO)

    def joined(edges):
        return sum((e.cost / (loads[e] + 1) for e in edges), ZERO)

    gain = pair_sharing_gain(nash_tree, loads, si, sj)
    return [
        _check(f"detour[{i}->{j}]", share(own_i), "<=", d + joined(own_j)),
        _check(f"detour[{j}->{i}]", share(own_j), "<=", d + joined(own_i)),
        _check(f"sharing_gain[{i},{j}]", gain, "<=", 2 * d),
    ]


def coverage_lower_bound_check(
    inst: GameInstance, nash_tree: Tree, loads: dict, phi: Sequence[int]
) -> list[CheckRecord]:
    """The cyclic sharing-gain sum covers every Nash tree edge at least twice,
    hence dominates 2 * sum of c_e / (f_e (f_e+1))."""
    aug = augmented_sources(inst)
    lhs = ZERO
    crossings = {e: 0 for e in nash_tree.edges}
    for r, i in enumerate(phi):
        j = phi[(r + 1) % len(phi)]
        si, sj = aug[i], aug[j]
        lhs += pair_sharing_gain(nash_tree, loads, si, sj)
        for e in tree_path(nash_tree, si, sj):
            crossings[e] += 1
    rhs = 2 * sum((e.cost / (loads[e] * (loads[e] + 1)) for e in nash_tree.edges), ZERO)
    cover = _check("cycle_cover", lhs, ">=", rhs)
    if crossings:
        ok = all(c >= 2 and c % 2 == 0 for c in crossings.values())
        worst = min(crossings.values())
        crossing_rec = CheckRecord(
            "edge_crossings", Fraction(worst), ">=", Fraction(2),
            PASS if ok else FAIL, "every Nash tree edge crossed an even number >= 2 of times",
        )
    else:
        crossing_rec = CheckRecord(
            "edge_crossings", ZERO, ">=", ZERO, PASS, "Nash union carries no edges")
    return [cover, crossing_rec]


def potential_sandwich_check(
    inst: GameInstance,
    opt: StrategyProfile,
    nash: StrategyProfile,
    freq: FrequencyProfile,
    dynamics_verified: bool = True,
) -> list[CheckRecord]:
    """Potential chain: Phi(NASH) <= Phi(OPT) (better-response descent),
    Phi(NASH) >= H(n_half) * tail(n_half) >= H(n_half)/2 * |NASH|, and
    Phi(OPT) <= H(n) * |OPT|."""
    pn = potential(inst, nash)
    po = potential(inst, opt)
    h = freq.n_half
    hh = harmonic(h)
    note = "" if dynamics_verified else "premise unverified: nash not obtained from opt by recorded dynamics"
    return [
        _check("potential_descent", pn, "<=", po, note),
        _check("potential_tail_floor", pn, ">=", hh * freq.tail_at(h)),
        _check("tail_half_floor", hh * freq.tail_at(h), ">=", hh * freq.nash_cost / 2),
        _check("potential_harmonic_cap", po, "<=", harmonic(inst.n) * social_cost(inst, opt)),
    ]


@dataclass(frozen=True)
class CertificateReport:
    """All check records plus the instance-specific bound and the realized
    cost ratio; `overall` is pass / conditional-pass / fail."""

    n: int
    n_half: int
    opt_cost: Fraction
    nash_cost: Fraction
    ratio: Optional[Fraction]
    bound_value: Fraction
    phi: tuple
    checks: tuple
    premises: dict
    overall: str

    @property
    def passed(self) -> bool:
        return self.overall != OVERALL_FAIL


def _profile_union(prof: StrategyProfile, sink: Vertex) -> Graph:
    used = set()
    vertices = {sink}
    for path in prof.paths:
        used.update(path.edges)
        vertices.update(path.vertices)
    return Graph(sorted(vertices), sorted(used))


def _opt_tree(inst: GameInstance, opt: StrategyProfile, opt_cost: Fraction) -> Tree:
    union = _profile_union(opt, inst.single_sink)
    if is_tree(union):
        return Tree(union, inst.single_sink)
    # A cyclic optimum union can only happen through zero-cost edges; any
    # spanning tree of it is then equally optimal.
    mst_cost, mst_edges = minimum_spanning_tree(union)
    if mst_cost != opt_cost:
        raise PremiseError("optimum profile union contains a cycle of positive cost")
    return Tree(Graph(union.vertices, mst_edges), inst.single_sink)


def bound_report(
    inst: GameInstance,
    opt: StrategyProfile,
    nash: StrategyProfile,
    dynamics_verified: bool = True,
    opt_cost_certified: Optional[Fraction] = None,
) -> CertificateReport:
    """Assemble the full certificate for one instance.

    Premise errors (not single-sink, opt not optimal, nash not Nash) raise;
    check failures are reported, and tree-dependent checks are skipped when
    the Nash union is not a tree.
    """
    if inst.single_sink is None:
        raise PremiseError("certificates require a single-sink instance")
    sink = inst.single_sink
    validate_profile(inst, opt)
    validate_profile(inst, nash)
    if not is_nash(inst, nash):
        raise PremiseError("nash profile fails the exact equilibrium check")
    opt_cost = social_cost(inst, opt)
    if opt_cost_certified is None:
        _, opt_cost_certified = steiner_tree_exact(
            inst.graph, {s for s, _ in inst.players} | {sink})
    if opt_cost != opt_cost_certified:
        raise PremiseError(
            f"opt profile costs {opt_cost}, exact optimum is {opt_cost_certified}")

    nash_cost = social_cost(inst, nash)
    loads = edge_loads(inst, nash)
    freq = frequency_profile(inst, nash)
    h = freq.n_half
    dist = _source_distances(inst)

    opt_tree = _opt_tree(inst, opt, opt_cost)
    phi, tour_rec = euler_order_bound_check(inst, opt_tree, opt_cost, dist)
    checks = [tour_rec]

    nash_union = _profile_union(nash, sink)
    nash_is_tree = is_tree(nash_union)
    aug = augmented_sources(inst)
    if nash_is_tree:
        nash_tree = Tree(nash_union, sink)
        gain_sum = ZERO
        tour_sum = ZERO
        for r, i in enumerate(phi):
            j = phi[(r + 1) % len(phi)]
            checks.extend(deviation_inequality_check(inst, nash_tree, loads, i, j, dist))
            gain_sum += pair_sharing_gain(nash_tree, loads, aug[i], aug[j])
            tour_sum += dist[aug[i]][aug[j]]
        checks.append(_check("gain_cycle_sum", gain_sum, "<=", 2 * tour_sum))
        checks.append(_check("gain_cycle_cap", gain_sum, "<=", 4 * opt_cost))
        checks.extend(coverage_lower_bound_check(inst, nash_tree, loads, phi))
        checks.append(_check(
            "low_load_ratio_cap", nash_cost, "<=", 4 * h * (h + 1) * opt_cost))
    else:
        why = "nash union is not a tree"
        checks.append(_skipped("sharing_gain_pairs", "<=", why))
        checks.append(_skipped("gain_cycle_sum", "<=", why))
        checks.append(_skipped("gain_cycle_cap", "<=", why))
        checks.append(_skipped("cycle_cover", ">=", why))
        checks.append(_skipped("edge_crossings", ">=", why))
        checks.append(_skipped("low_load_ratio_cap", "<=", why))

    checks.extend(potential_sandwich_check(inst, opt, nash, freq, dynamics_verified))
    low_mass = sum((freq.by_load.get(i, ZERO) for i in range(1, h + 1)), ZERO)
    checks.append(_check("low_load_mass", low_mass, ">=", freq.nash_cost / 2))
    checks.append(_check(
        "harmonic_ratio_cap", nash_cost, "<=", 2 * harmonic(inst.n) / harmonic(h) * opt_cost))

    bound_value = min(2 * harmonic(inst.n) / harmonic(h), Fraction(4 * h * (h + 1)))
    if opt_cost > 0:
        ratio = nash_cost / opt_cost
        checks.append(_check("ratio_le_bound", ratio, "<=", bound_value))
    elif nash_cost == 0:
        ratio = Fraction(1)
        checks.append(_check("ratio_le_bound", ratio, "<=", bound_value,
                             "zero-cost optimum and equilibrium"))
    else:
        ratio = None
        checks.append(CheckRecord(
            "ratio_le_bound", None, "<=", bound_value, FAIL,
            "optimum costs zero but the equilibrium does not"))

    if any(c.status == FAIL for c in checks):
        overall = OVERALL_FAIL
    elif any(c.status == SKIP for c in checks):
        overall = OVERALL_CONDITIONAL
    else:
        overall = OVERALL_PASS

    premises = {
        "single_sink": True,
        "opt_is_optimal": True,
        "nash_is_nash": True,
        "nash_union_is_tree": nash_is_tree,
        "dynamics_from_opt": dynamics_verified,
    }
    return CertificateReport(
        n=inst.n,
        n_half=h,
        opt_cost=opt_cost,
        nash_cost=nash_cost,
        ratio=ratio,
        bound_value=bound_value,
        phi=tuple(phi),
        checks=tuple(checks),
        premises=premises,
        overall=overall,
    )


@dataclass(frozen=True)
class PipelineResult:
    report: CertificateReport
    opt: StrategyProfile
    nash: StrategyProfile
    trace: Optional[DynamicsTrace]
    treeify_changed: bool


def run_certificate_pipeline(
    inst: GameInstance,
    policy: str = BEST_IMPROVEMENT,
    cap: int = DEFAULT_CAP,
    nash_profile: Optional[StrategyProfile] = None,
) -> PipelineResult:
    """Solve, run dynamics from the optimum (or adopt a supplied equilibrium),
    canonicalize toward a tree, and certify."""
    if inst.single_sink is None:
        raise PremiseError("certificates require a single-sink instance")
    terminals = {s for s, _ in inst.players} | {inst.single_sink}
    tree, steiner_cost = steiner_tree_exact(inst.graph, terminals)
    opt = opt_profile_from_tree(inst, tree)

    trace: Optional[DynamicsTrace] = None
    if nash_profile is None:
        nash, trace = run_dynamics(inst, opt, policy=policy, cap=cap)
        if not trace.terminated:
            raise PremiseError(
                f"better-response dynamics did not reach an equilibrium within {cap} steps")
        dynamics_verified = True
    else:
        validate_profile(inst, nash_profile)
        nash = nash_profile
        dynamics_verified = False

    result = treeify(inst, nash)
    report = bound_report(
        inst, opt, result.profile,
        dynamics_verified=dynamics_verified,
        opt_cost_certified=steiner_cost,
    )
    return PipelineResult(report, opt, result.profile, trace, result.changed)

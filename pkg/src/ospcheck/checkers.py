"""Deciders for the auction properties, each with replayable witnesses.

Four verdicts (individual rationality, no-negative-transfers, obvious
dominance, dominant strategies), the exact welfare-approximation ratio over
a finite domain, and two proof-machinery scans: the bad-leaf/good-leaf
consistency scan and the first-divergence locator.

Every checker walks the supplied domain in deterministic product order, so
the first witness found is independent of how callers partition the work.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .model import (
    AuctionSetting,
    Behavior,
    InternalNode,
    Leaf,
    MechanismTree,
    bundle_contains,
    bundle_is_empty,
    run,
)
from .valuations import Domain, SingleMindedMU, evaluate


def utility(valuation, bundle, payment) -> Fraction:
    return evaluate(valuation, bundle) - payment


@dataclass(frozen=True)
class Witness:
    """Concrete violating data; every field optional, absent ones are None."""

    player: Optional[int] = None
    vertex: Optional[str] = None
    valuation: object = None
    profile: Optional[tuple] = None
    alt_profile: Optional[tuple] = None
    behaviors: Optional[tuple] = None
    alt_behaviors: Optional[tuple] = None
    leaf: Optional[str] = None
    alt_leaf: Optional[str] = None
    utility: Optional[Fraction] = None
    alt_utility: Optional[Fraction] = None
    note: str = ""


@dataclass(frozen=True)
class Verdict:
    prop: str
    passed: bool
    witness: Optional[Witness] = None

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True)
class RatioReport:
    """Worst-case OPT / realized-welfare over a finite domain.

    ``ratio`` is None when some profile realizes zero welfare while the
    optimum is positive (unbounded).  A profile with zero welfare on both
    sides counts as ratio 1.
    """

    ratio: Optional[Fraction]
    worst_profile: Optional[tuple]
    mechanism_welfare: Optional[Fraction]
    optimum: Optional[Fraction]

    @property
    def unbounded(self) -> bool:
        return self.ratio is None


def _players(domain) -> tuple:
    return getattr(domain, "players", domain)


def _realized(tree: MechanismTree, strategies: Sequence, domain):
    """Yield (profile, behaviors, leaf_id, path) in deterministic order."""
    for profile in itertools.product(*_players(domain)):
        behaviors = tuple(strategies[i][profile[i]] for i in range(tree.setting.n))
        leaf_id, path = run(tree, behaviors)
        yield profile, behaviors, leaf_id, path


def check_ir(tree: MechanismTree, strategies: Sequence, domain) -> Verdict:
    """Individual rationality: realized utility is never negative."""
    for profile, behaviors, leaf_id, _ in _realized(tree, strategies, domain):
        leaf = tree.nodes[leaf_id]
        for i, v in enumerate(profile):
            u = utility(v, leaf.allocation[i], leaf.payments[i])
            if u < 0:
                return Verdict(
                    "ir",
                    False,
                    Witness(player=i, valuation=v, profile=profile,
                            behaviors=behaviors, leaf=leaf_id, utility=u),
                )
    return Verdict("ir", True)


def check_nnt(tree: MechanismTree, strategies: Sequence, domain) -> Verdict:
    """No negative transfers: realized payments are never negative."""
    for profile, behaviors, leaf_id, _ in _realized(tree, strategies, domain):
        leaf = tree.nodes[leaf_id]
        for i, p in enumerate(leaf.payments):
            if p < 0:
                return Verdict(
                    "nnt",
                    False,
                    Witness(player=i, profile=profile, behaviors=behaviors,
                            leaf=leaf_id, utility=-p,
                            note="player is paid by the mechanism"),
                )
    return Verdict("nnt", True)


def _consistent_reach(tree: MechanismTree, player: int, behavior: Behavior):
    """Nodes reachable when ``player`` follows ``behavior`` and others roam.

    Exactly the vertices attainable given the behavior, plus the leaves the
    player can realize with it.
    """
    visited = []
    stack = [tree.root]
    while stack:
        nid = stack.pop()
        visited.append(nid)
        node = tree.nodes[nid]
        if isinstance(node, Leaf):
            continue
        if node.speaker == player:
            child = node.edges.get(behavior.choices[nid])
            stack.append(child)
        else:
            stack.extend(reversed(list(node.edges.values())))
    return visited


def _follow_stats(tree: MechanismTree, player: int, valuation, behavior: Behavior):
    """Per-node (min, argmin-leaf) of the player's utility over leaves she can
    still reach from that node while following ``behavior`` at her own nodes."""
    fmin: dict = {}
    for nid in reversed(tree.preorder):
        node = tree.nodes[nid]
        if isinstance(node, Leaf):
            fmin[nid] = (utility(valuation, node.allocation[player], node.payments[player]), nid)
        elif node.speaker == player:
            fmin[nid] = fmin[node.edges[behavior.choices[nid]]]
        else:
            fmin[nid] = min((fmin[c] for c in node.edges.values()), key=lambda t: t[0])
    return fmin


def _anymax_stats(tree: MechanismTree, player: int, valuation):
    """Per-node (max, argmax-leaf) of the player's utility over all leaves below."""
    amax: dict = {}
    for nid in reversed(tree.preorder):
        node = tree.nodes[nid]
        if isinstance(node, Leaf):
            amax[nid] = (utility(valuation, node.allocation[player], node.payments[player]), nid)
        else:
            amax[nid] = max((amax[c] for c in node.edges.values()), key=lambda t: t[0])
    return amax


def _path_edge(tree: MechanismTree, path: list, nid: str) -> str:
    node = tree.nodes[nid]
    nxt = path[path.index(nid) + 1]
    return next(lbl for lbl, child in node.edges.items() if child == nxt)


def _first_label(node: InternalNode) -> str:
    return next(iter(node.edges))


def _profile_through(tree: MechanismTree, paths, fixed=None) -> tuple:
    """A full behavior profile routing along every path in ``paths``.

    Paths must be pairwise consistent (tree paths from the root are, once
    they diverge they never remeet).  ``fixed`` optionally pins one player's
    entire behavior.  Off-path nodes take their first edge label.
    """
    n = tree.setting.n
    choices: list = [dict() for _ in range(n)]
    for path in paths:
        for nid in path[:-1]:
            node = tree.nodes[nid]
            choices[node.speaker][nid] = _path_edge(tree, path, nid)
    profile = []
    for i in range(n):
        if fixed is not None and fixed.owner == i:
            profile.append(fixed)
            continue
        full = dict(choices[i])
        for nid in tree.nodes_of(i):
            full.setdefault(nid, _first_label(tree.nodes[nid]))
        profile.append(Behavior(owner=i, choices=full))
    return tuple(profile)


def check_osp(tree: MechanismTree, strategies: Sequence, domain) -> Verdict:
    """Obvious dominance of the given strategies over the domain.

    At every attainable decision vertex with at least two messages, the
    worst leaf still reachable while the owner keeps following her plan must
    be at least as good as the best leaf anywhere under any other message.
    Vertices with a single message impose no constraint.
    """
    for i in range(tree.setting.n):
        for v in _players(domain)[i]:
            behavior = strategies[i][v]
            reach = set(_consistent_reach(tree, i, behavior))
            fmin = _follow_stats(tree, i, v, behavior)
            amax = _anymax_stats(tree, i, v)
            for nid in tree.nodes_of(i):
                node = tree.nodes[nid]
                if nid not in reach or len(node.edges) < 2:
                    continue
                own_label = behavior.choices[nid]
                worst, worst_leaf = fmin[node.edges[own_label]]
                best, best_leaf, best_label = None, None, None
                for lbl, child in node.edges.items():
                    if lbl == own_label:
                        continue
                    m, ml = amax[child]
                    if best is None or m > best:
                        best, best_leaf, best_label = m, ml, lbl
                if best is not None and worst < best:
                    bad = _profile_through(tree, [tree.path_to(worst_leaf)], fixed=behavior)
                    good = _profile_through(
                        tree, [tree.path_to(nid), tree.path_to(best_leaf)]
                    )
                    return Verdict(
                        "osp",
                        False,
                        Witness(
                            player=i, vertex=nid, valuation=v,
                            behaviors=bad, alt_behaviors=good,
                            leaf=worst_leaf, alt_leaf=best_leaf,
                            utility=worst, alt_utility=best,
                            note=f"following sends {own_label!r}, deviating to "
                                 f"{best_label!r} can end strictly better",
                        ),
                    )
    return Verdict("osp", True)


def check_dsic(tree: MechanismTree, strategies: Sequence, domain) -> Verdict:
    """Dominant-strategy incentive compatibility over the domain.

    Quantifies over every opponent behavior profile and every alternative
    behavior of the player.  A pair of leaves (realized one following the
    plan, better one after a unilateral deviation) certifies a violation
    exactly when the paths to them split at a vertex the player owns; the
    scan below enumerates those pairs directly.
    """
    for i in range(tree.setting.n):
        for v in _players(domain)[i]:
            behavior = strategies[i][v]
            reach = _consistent_reach(tree, i, behavior)
            own_leaves = [nid for nid in reach if isinstance(tree.nodes[nid], Leaf)]
            for leaf_id in own_leaves:
                path = tree.path_to(leaf_id)
                leaf = tree.nodes[leaf_id]
                u_real = utility(v, leaf.allocation[i], leaf.payments[i])
                for other_id in tree.leaf_ids:
                    if other_id == leaf_id:
                        continue
                    other_path = tree.path_to(other_id)
                    split = 0
                    while other_path[split] == path[split]:
                        split += 1
                    w = path[split - 1]
                    if tree.nodes[w].speaker != i:
                        continue
                    other = tree.nodes[other_id]
                    u_dev = utility(v, other.allocation[i], other.payments[i])
                    if u_dev > u_real:
                        opponents = _profile_through(
                            tree, [path, other_path], fixed=behavior
                        )
                        alt = _profile_through(tree, [other_path])
                        return Verdict(
                            "dsic",
                            False,
                            Witness(
                                player=i, vertex=w, valuation=v,
                                behaviors=opponents, alt_behaviors=alt,
                                leaf=leaf_id, alt_leaf=other_id,
                                utility=u_real, alt_utility=u_dev,
                                note="a unilateral deviation beats the plan "
                                     "against fixed opponent behaviors",
                            ),
                        )
    return Verdict("dsic", True)


def enumerate_allocations(setting: AuctionSetting):
    """All valid allocations, in a fixed lexicographic order."""
    if setting.is_combinatorial:
        owners = (-1,) + tuple(range(setting.n))
        for assignment in itertools.product(owners, repeat=setting.m):
            yield tuple(
                frozenset(j for j, who in enumerate(assignment) if who == i)
                for i in range(setting.n)
            )
    else:
        for quantities in itertools.product(range(setting.m + 1), repeat=setting.n):
            if sum(quantities) <= setting.m:
                yield quantities


def opt_welfare(profile: Sequence, setting: AuctionSetting):
    """Maximum social welfare over all valid allocations, by brute force.

    Returns ``(welfare, allocation)``; ties keep the first allocation in
    enumeration order.
    """
    best, best_alloc = None, None
    for alloc in enumerate_allocations(setting):
        w = sum((evaluate(v, alloc[i]) for i, v in enumerate(profile)), Fraction(0))
        if best is None or w > best:
            best, best_alloc = w, alloc
    return best, best_alloc


def social_welfare(profile: Sequence, allocation) -> Fraction:
    return sum((evaluate(v, allocation[i]) for i, v in enumerate(profile)), Fraction(0))


def welfare_ratio(tree: MechanismTree, strategies: Sequence, domain) -> RatioReport:
    """Exact worst-case OPT over realized welfare across the domain.

    Conventions: 0/0 counts as 1; positive OPT over zero realized welfare is
    unbounded and dominates every finite ratio.
    """
    setting = tree.setting
    worst = None  # (ratio or None-for-unbounded, profile, sw, opt)
    for profile, _, leaf_id, _ in _realized(tree, strategies, domain):
        leaf = tree.nodes[leaf_id]
        sw = social_welfare(profile, leaf.allocation)
        opt, _ = opt_welfare(profile, setting)
        if sw == 0:
            ratio = None if opt > 0 else Fraction(1)
        else:
            ratio = opt / sw
        if ratio is None:
            return RatioReport(None, profile, sw, opt)
        if worst is None or ratio > worst[0]:
            worst = (ratio, profile, sw, opt)
    assert worst is not None
    return RatioReport(*worst)


@dataclass(frozen=True)
class BadGoodViolation:
    """A vertex where a strictly worse outcome fails to pin the message."""

    player: int
    vertex: str
    profile: tuple
    alt_profile: tuple
    leaf: str
    alt_leaf: str
    utility: Fraction
    alt_utility: Fraction


def scan_bad_leaf_good_leaf(tree: MechanismTree, strategies: Sequence, domain) -> list:
    """All witnesses against the same-message consequence of obviousness.

    Finds every (player, vertex, profile pair) where both realized paths
    visit the vertex, the first outcome is strictly worse for the player's
    first valuation, and yet her plan sends different messages there.  Any
    obviously dominant plan yields an empty list.
    """
    realized = list(_realized(tree, strategies, domain))
    out = []
    for (p1, _, leaf1, path1), (p2, _, leaf2, path2) in itertools.product(realized, repeat=2):
        common = set(path1) & set(path2)
        l1, l2 = tree.nodes[leaf1], tree.nodes[leaf2]
        for i in range(tree.setting.n):
            v, v_alt = p1[i], p2[i]
            u_bad = utility(v, l1.allocation[i], l1.payments[i])
            u_good = utility(v, l2.allocation[i], l2.payments[i])
            if not u_bad < u_good:
                continue
            b, b_alt = strategies[i][v], strategies[i][v_alt]
            for nid in common:
                node = tree.nodes[nid]
                if isinstance(node, Leaf) or node.speaker != i:
                    continue
                if b.choices[nid] != b_alt.choices[nid]:
                    out.append(
                        BadGoodViolation(
                            player=i, vertex=nid, profile=p1, alt_profile=p2,
                            leaf=leaf1, alt_leaf=leaf2,
                            utility=u_bad, alt_utility=u_good,
                        )
                    )
    return out


@dataclass(frozen=True)
class Divergence:
    vertex: str
    player: int
    valuations: tuple
    labels: tuple


def first_divergence(tree: MechanismTree, strategies: Sequence, subsets) -> Optional[Divergence]:
    """Shallowest vertex where two profiles from the subsets part ways.

    Vertices are scanned breadth-first with ties broken by preorder
    position.  Returns None when every profile reaches the same leaf.
    """
    routes = []
    for profile, _, _, path in _realized(tree, strategies, subsets):
        routes.append((profile, path, set(path)))
    for nid in tree.bfs_internal():
        node = tree.nodes[nid]
        taken = []
        for profile, path, members in routes:
            if nid in members:
                taken.append((profile, _path_edge(tree, path, nid)))
        if not taken:
            continue
        first_label = taken[0][1]
        for profile, lbl in taken[1:]:
            if lbl != first_label:
                return Divergence(
                    vertex=nid,
                    player=node.speaker,
                    valuations=(taken[0][0][node.speaker], profile[node.speaker]),
                    labels=(first_label, lbl),
                )
    return None


@dataclass(frozen=True)
class PaymentBoundReport:
    """Realized payments at the two profiles the payment-bound argument constrains."""

    all_one_winners: tuple          # (player, payment) at the all-one profile
    winners_pay_at_most_one: bool
    all_units_winner: Optional[tuple]  # (player, payment) if someone wins all units
    all_units_within_square: Optional[bool]
    k: Fraction


def mu_payment_bounds(tree: MechanismTree, strategies: Sequence, domain: Domain) -> PaymentBoundReport:
    """Check the payment bounds at the adversarial multi-unit profiles.

    At the profile where everyone is a one-unit value-1 bidder, any winner
    must pay at most 1.  At the profile where the first featured bidder
    demands everything (value k^4) against one-unit rivals, a bidder who
    wins all m units should pay at most k^2; that second bound additionally
    presumes the mechanism's ratio beats min(m, n), which the caller is
    responsible for establishing.
    """
    setting = tree.setting
    players = _players(domain)
    m = setting.m
    k = Fraction(max(setting.m, setting.n))
    one = SingleMindedMU(quantity=1, value=Fraction(1))
    all_v = SingleMindedMU(quantity=m, value=k**4)
    for vs in players:
        if one not in vs:
            raise ValueError("domain is not the adversarial multi-unit fixture")
    featured = next((i for i, vs in enumerate(players) if all_v in vs), None)
    if featured is None:
        raise ValueError("domain is not the adversarial multi-unit fixture")

    def outcome(profile):
        behaviors = tuple(strategies[i][profile[i]] for i in range(setting.n))
        leaf_id, _ = run(tree, behaviors)
        leaf = tree.nodes[leaf_id]
        return leaf.allocation, leaf.payments

    all_one = tuple(one for _ in range(setting.n))
    alloc, pays = outcome(all_one)
    winners = tuple(
        (i, pays[i]) for i in range(setting.n) if not bundle_is_empty(setting, alloc[i])
    )
    bound_one = all(p <= 1 for _, p in winners)

    spike = tuple(all_v if i == featured else one for i in range(setting.n))
    alloc2, pays2 = outcome(spike)
    all_units = next(
        ((i, pays2[i]) for i in range(setting.n) if bundle_contains(setting, alloc2[i], m)),
        None,
    )
    within = None if all_units is None else all_units[1] <= k**2
    return PaymentBoundReport(
        all_one_winners=winners,
        winners_pay_at_most_one=bound_one,
        all_units_winner=all_units,
        all_units_within_square=within,
        k=k,
    )

"""Shared test utilities: random instances and brute-force oracles.

The oracles quantify directly over behavior profiles per the definitions,
with none of the library's per-vertex factoring, so agreement between the
two is a real check.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from ospcheck import (
    AuctionSetting,
    Behavior,
    GeneralCA,
    GeneralMU,
    Domain,
    Leaf,
    MechanismBundle,
    build_tree,
    bundle_contains,
    evaluate,
    run,
)

PAY_LEVELS = [Fraction(0), Fraction(0), Fraction(1), Fraction(2), Fraction(1, 2), Fraction(3)]


def random_setting(rng: random.Random, max_n=2, max_m=2) -> AuctionSetting:
    kind = rng.choice(["combinatorial", "multi-unit"])
    return AuctionSetting(kind=kind, n=rng.randint(1, max_n), m=rng.randint(1, max_m))


def random_valuation(rng: random.Random, setting: AuctionSetting):
    levels = [Fraction(0), Fraction(1), Fraction(2), Fraction(3), Fraction(1, 2)]
    if setting.is_combinatorial:
        values = [Fraction(0)] * (1 << setting.m)
        for mask in range(1, 1 << setting.m):
            floor = max(
                values[mask & ~(1 << j)] for j in range(setting.m) if mask >> j & 1
            )
            values[mask] = floor + rng.choice(levels)
        return GeneralCA(values=tuple(values))
    values = [Fraction(0)]
    for _ in range(setting.m):
        values.append(values[-1] + rng.choice(levels))
    return GeneralMU(values=tuple(values))


def random_allocation(rng: random.Random, setting: AuctionSetting):
    if setting.is_combinatorial:
        buckets = [frozenset()] * setting.n
        pools = [set() for _ in range(setting.n)]
        for j in range(setting.m):
            who = rng.randint(-1, setting.n - 1)
            if who >= 0:
                pools[who].add(j)
        return tuple(frozenset(p) for p in pools)
    remaining = setting.m
    out = []
    for i in range(setting.n):
        q = rng.randint(0, remaining)
        out.append(q)
        remaining -= q
    return tuple(out)


def random_tree_spec(rng: random.Random, setting: AuctionSetting, depth: int):
    if depth == 0 or rng.random() < 0.35:
        return {
            "allocation": list(random_allocation(rng, setting)),
            "payments": [rng.choice(PAY_LEVELS) for _ in range(setting.n)],
        }
    fanout = rng.randint(2, 3)
    return {
        "speaker": rng.randrange(setting.n),
        "edges": {
            str(lbl): random_tree_spec(rng, setting, depth - 1) for lbl in range(fanout)
        },
    }


def random_instance(rng: random.Random, max_depth=3, max_domain=3) -> MechanismBundle:
    """Random (tree, strategies, domain): strategies are arbitrary, not truthful."""
    setting = random_setting(rng)
    tree = build_tree(random_tree_spec(rng, setting, max_depth), setting)
    players = tuple(
        tuple(random_valuation(rng, setting) for _ in range(rng.randint(1, max_domain)))
        for _ in range(setting.n)
    )
    domain = Domain(setting=setting, players=players)
    strategies = []
    for i in range(setting.n):
        table = {}
        for v in players[i]:
            choices = {
                nid: rng.choice(sorted(tree.nodes[nid].edges))
                for nid in tree.nodes_of(i)
            }
            table[v] = Behavior(owner=i, choices=choices)
        strategies.append(table)
    return MechanismBundle(tree=tree, strategies=tuple(strategies), domain=domain)


def all_behaviors(tree, player):
    """Every behavior of a player, by brute-force product over her nodes."""
    nodes = tree.nodes_of(player)
    label_sets = [sorted(tree.nodes[nid].edges) for nid in nodes]
    for combo in itertools.product(*label_sets):
        yield Behavior(owner=player, choices=dict(zip(nodes, combo)))


def leaf_utility(tree, leaf_id, player, valuation) -> Fraction:
    leaf = tree.nodes[leaf_id]
    return evaluate(valuation, leaf.allocation[player]) - leaf.payments[player]


def oracle_osp(bundle: MechanismBundle) -> bool:
    """Obvious dominance straight from the definition.

    For every player, valuation, and vertex attainable under her planned
    behavior where the plan and some alternative differ, compare every pair
    of behavior profiles passing through the vertex.
    """
    tree = bundle.tree
    n = tree.setting.n
    behaviors = [list(all_behaviors(tree, i)) for i in range(n)]
    profiles = list(itertools.product(*behaviors))
    outcomes = {tuple(id(b) for b in prof): run(tree, prof) for prof in profiles}

    for i in range(n):
        for v in bundle.domain.players[i]:
            plan = bundle.strategies[i][v]
            for nid in tree.nodes_of(i):
                for prof in profiles:
                    if prof[i].choices != plan.choices:
                        continue
                    leaf1, path1 = outcomes[tuple(id(b) for b in prof)]
                    if nid not in path1:
                        continue
                    for prof2 in profiles:
                        if prof2[i].choices[nid] == plan.choices[nid]:
                            continue
                        leaf2, path2 = outcomes[tuple(id(b) for b in prof2)]
                        if nid not in path2:
                            continue
                        if leaf_utility(tree, leaf1, i, v) < leaf_utility(tree, leaf2, i, v):
                            return False
    return True


def oracle_dsic(bundle: MechanismBundle) -> bool:
    """Dominance straight from the definition: every opponent behavior
    profile, every alternative own behavior."""
    tree = bundle.tree
    n = tree.setting.n
    behaviors = [list(all_behaviors(tree, i)) for i in range(n)]
    for i in range(n):
        others = [behaviors[j] for j in range(n) if j != i]
        for v in bundle.domain.players[i]:
            plan = bundle.strategies[i][v]
            for opp in itertools.product(*others):
                profile = list(opp)
                profile.insert(i, plan)
                leaf1, _ = run(tree, tuple(profile))
                u_plan = leaf_utility(tree, leaf1, i, v)
                for alt in behaviors[i]:
                    profile[i] = alt
                    leaf2, _ = run(tree, tuple(profile))
                    if leaf_utility(tree, leaf2, i, v) > u_plan:
                        return False
                profile[i] = plan
    return True


def oracle_decisive(tree, nid, player, bundle, price) -> bool:
    """Decisiveness by explicit enumeration of sub-behaviors below the node."""
    setting = tree.setting
    price = Fraction(price)
    sub_internal = [x for x in tree.internal_ids if nid in tree.path_to(x)]
    mine = [x for x in sub_internal if tree.nodes[x].speaker == player]
    theirs = [x for x in sub_internal if tree.nodes[x].speaker != player]

    def walk(own_map, other_map) -> bool:
        cur = nid
        while not isinstance(tree.nodes[cur], Leaf):
            node = tree.nodes[cur]
            lbl = own_map[cur] if node.speaker == player else other_map[cur]
            cur = node.edges[lbl]
        leaf = tree.nodes[cur]
        return (
            bundle_contains(setting, leaf.allocation[player], bundle)
            and leaf.payments[player] <= price
        )

    my_labels = [sorted(tree.nodes[x].edges) for x in mine]
    their_labels = [sorted(tree.nodes[x].edges) for x in theirs]
    for own in itertools.product(*my_labels):
        own_map = dict(zip(mine, own))
        if all(
            walk(own_map, dict(zip(theirs, rest)))
            for rest in itertools.product(*their_labels)
        ):
            return True
    return False

"""Protocol trees for sequential auctions and their execution semantics.

A mechanism is a finite rooted tree.  Every internal node names the single
player who speaks there and maps each message label to a child; every leaf
carries an allocation of the items and one payment per player.  Running the
tree against a behavior profile (one message choice per node per owner)
walks from the root to a leaf.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Mapping, Sequence, Union

COMBINATORIAL = "combinatorial"
MULTI_UNIT = "multi-unit"

#: A bundle is a frozenset of item indices (combinatorial) or a quantity
#: of identical units (multi-unit).
Bundle = Union[frozenset, int]

#: One bundle per player.  Combinatorial bundles must be pairwise disjoint;
#: multi-unit quantities must sum to at most m.  Items may stay unallocated.
Allocation = tuple


class MechanismError(ValueError):
    """Raised for structurally invalid trees, behaviors or allocations."""


@dataclass(frozen=True)
class AuctionSetting:
    """Auction environment: item model, player count and item count."""

    kind: str
    n: int
    m: int

    def __post_init__(self):
        if self.kind not in (COMBINATORIAL, MULTI_UNIT):
            raise MechanismError(f"unknown setting kind {self.kind!r}")
        if self.n < 1 or self.m < 1:
            raise MechanismError("need n >= 1 players and m >= 1 items")

    @property
    def is_combinatorial(self) -> bool:
        return self.kind == COMBINATORIAL

    def grand_bundle(self) -> Bundle:
        return frozenset(range(self.m)) if self.is_combinatorial else self.m

    def empty_bundle(self) -> Bundle:
        return frozenset() if self.is_combinatorial else 0


def validate_bundle(setting: AuctionSetting, bundle: Bundle) -> None:
    if setting.is_combinatorial:
        if not isinstance(bundle, frozenset):
            raise MechanismError("combinatorial bundle must be a frozenset of item indices")
        if any(not (0 <= j < setting.m) for j in bundle):
            raise MechanismError("item index out of range")
    else:
        if not isinstance(bundle, int) or isinstance(bundle, bool):
            raise MechanismError("multi-unit bundle must be an integer quantity")
        if not (0 <= bundle <= setting.m):
            raise MechanismError("quantity out of range")


def bundle_contains(setting: AuctionSetting, outer: Bundle, inner: Bundle) -> bool:
    """Whether ``outer`` covers ``inner`` (superset / at-least-quantity)."""
    if setting.is_combinatorial:
        return inner <= outer
    return outer >= inner


def bundle_is_empty(setting: AuctionSetting, bundle: Bundle) -> bool:
    return len(bundle) == 0 if setting.is_combinatorial else bundle == 0


def validate_allocation(setting: AuctionSetting, allocation: Allocation) -> None:
    if len(allocation) != setting.n:
        raise MechanismError("allocation must assign one bundle per player")
    for b in allocation:
        validate_bundle(setting, b)
    if setting.is_combinatorial:
        seen: set = set()
        for b in allocation:
            if b & seen:
                raise MechanismError("combinatorial bundles must be pairwise disjoint")
            seen |= b
    else:
        if sum(allocation) > setting.m:
            raise MechanismError("multi-unit quantities exceed supply")


@dataclass(frozen=True)
class Leaf:
    allocation: Allocation
    payments: tuple


@dataclass(frozen=True)
class InternalNode:
    speaker: int
    # label -> child node id, in lexicographic label order (canonical form)
    edges: Mapping[str, str]


Node = Union[Leaf, InternalNode]


@dataclass(frozen=True)
class Behavior:
    """A full choice of messages for one player, one per owned node."""

    owner: int
    choices: Mapping[str, str]


class MechanismTree:
    """Immutable arena of nodes with a distinguished root.

    Construct via :func:`build_tree`; instances are never mutated after
    validation, so they are safe to share across threads.
    """

    def __init__(self, setting: AuctionSetting, nodes: dict, root: str):
        self.setting = setting
        self.nodes = nodes
        self.root = root
        self._validate()

    def _validate(self) -> None:
        if self.root not in self.nodes:
            raise MechanismError("root id missing from node arena")
        seen: set = set()
        stack = [self.root]
        parents: dict = {}
        while stack:
            nid = stack.pop()
            if nid in seen:
                raise MechanismError(f"node {nid!r} reached twice (cycle or shared child)")
            seen.add(nid)
            node = self.nodes.get(nid)
            if node is None:
                raise MechanismError(f"edge points to unknown node {nid!r}")
            if isinstance(node, InternalNode):
                if not (0 <= node.speaker < self.setting.n):
                    raise MechanismError(f"speaker {node.speaker} out of range at node {nid!r}")
                if not node.edges:
                    raise MechanismError(f"internal node {nid!r} has no outgoing edge")
                for child in node.edges.values():
                    if child in parents:
                        raise MechanismError(f"node {child!r} has two parents")
                    parents[child] = nid
                    stack.append(child)
            else:
                validate_allocation(self.setting, node.allocation)
                if len(node.payments) != self.setting.n:
                    raise MechanismError(f"leaf {nid!r} needs one payment per player")
        orphans = set(self.nodes) - seen
        if orphans:
            raise MechanismError(f"orphan nodes not reachable from root: {sorted(orphans)}")
        self._parents = parents

    def parent(self, nid: str):
        return self._parents.get(nid)

    @cached_property
    def depth(self) -> int:
        best = 0
        stack = [(self.root, 0)]
        while stack:
            nid, d = stack.pop()
            node = self.nodes[nid]
            if isinstance(node, InternalNode):
                stack.extend((c, d + 1) for c in node.edges.values())
            else:
                best = max(best, d)
        return best

    @cached_property
    def preorder(self) -> tuple:
        """Node ids in depth-first preorder, children in edge-label order."""
        out = []
        stack = [self.root]
        while stack:
            nid = stack.pop()
            out.append(nid)
            node = self.nodes[nid]
            if isinstance(node, InternalNode):
                stack.extend(reversed(list(node.edges.values())))
        return tuple(out)

    @cached_property
    def leaf_ids(self) -> tuple:
        return tuple(nid for nid in self.preorder if isinstance(self.nodes[nid], Leaf))

    @cached_property
    def internal_ids(self) -> tuple:
        return tuple(nid for nid in self.preorder if isinstance(self.nodes[nid], InternalNode))

    def nodes_of(self, player: int) -> tuple:
        """All node ids where ``player`` speaks."""
        return self._speaker_index[player]

    @cached_property
    def _speaker_index(self) -> tuple:
        idx: list = [[] for _ in range(self.setting.n)]
        for nid in self.preorder:
            node = self.nodes[nid]
            if isinstance(node, InternalNode):
                idx[node.speaker].append(nid)
        return tuple(tuple(ns) for ns in idx)

    def path_to(self, nid: str) -> list:
        """Node ids from the root down to ``nid`` inclusive."""
        path = [nid]
        while path[-1] != self.root:
            path.append(self._parents[path[-1]])
        path.reverse()
        return path

    def depth_of(self, nid: str) -> int:
        return len(self.path_to(nid)) - 1

    def subtree_leaves(self, nid: str) -> Iterator[str]:
        stack = [nid]
        while stack:
            cur = stack.pop()
            node = self.nodes[cur]
            if isinstance(node, Leaf):
                yield cur
            else:
                stack.extend(reversed(list(node.edges.values())))

    def bfs_internal(self) -> list:
        """Internal node ids by depth, ties broken by preorder position."""
        order = {nid: k for k, nid in enumerate(self.preorder)}
        return sorted(self.internal_ids, key=lambda nid: (self.depth_of(nid), order[nid]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, MechanismTree):
            return NotImplemented
        return (
            self.setting == other.setting
            and self.root == other.root
            and self.nodes == other.nodes
        )

    def __hash__(self):
        raise TypeError("MechanismTree is not hashable")


def _parse_payment(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise MechanismError(f"cannot read payment {value!r}")


def _coerce_bundle(setting: AuctionSetting, raw) -> Bundle:
    if setting.is_combinatorial:
        if isinstance(raw, frozenset):
            return raw
        if isinstance(raw, (list, tuple, set)):
            return frozenset(int(j) for j in raw)
        raise MechanismError(f"cannot read combinatorial bundle {raw!r}")
    if isinstance(raw, int) and not isinstance(raw, bool):
        return raw
    raise MechanismError(f"cannot read multi-unit bundle {raw!r}")


_AUTO_PREFIX = "#"


def build_tree(spec, setting: AuctionSetting) -> MechanismTree:
    """Validate a structural description and produce a MechanismTree.

    ``spec`` is either a nested node dict (internal: ``{"speaker", "edges"}``,
    leaf: ``{"allocation", "payments"}``, both with optional ``"id"``) or an
    arena form ``{"nodes": {id: flat-node}, "root": id}`` whose edges refer
    to ids.  Edge maps are canonicalized to lexicographic label order and
    unnamed nodes get stable preorder ids ``#0, #1, ...``, so rebuilding a
    serialized tree reproduces the same ids.
    """
    nodes: dict = {}
    counter = [0]

    def add_node(raw, resolve_child) -> str:
        if not isinstance(raw, dict):
            raise MechanismError(f"node description must be a mapping, got {type(raw).__name__}")
        given = raw.get("id")
        nid = _AUTO_PREFIX + str(counter[0]) if given is None else str(given)
        counter[0] += 1
        if given is not None and nid.startswith(_AUTO_PREFIX):
            raise MechanismError(f"node ids may not start with {_AUTO_PREFIX!r}: {nid!r}")
        if nid in nodes:
            raise MechanismError(f"duplicate node id {nid!r}")
        nodes[nid] = None  # reserve before children so ids follow preorder
        if "edges" in raw or "speaker" in raw:
            edges_raw = raw.get("edges")
            if not isinstance(edges_raw, dict) or not edges_raw:
                raise MechanismError(f"internal node {nid!r} needs a nonempty edge map")
            by_label = {}
            for lbl, child in edges_raw.items():
                if str(lbl) in by_label:
                    raise MechanismError(f"duplicate message label at node {nid!r}")
                by_label[str(lbl)] = child
            edges = {}
            for lbl in sorted(by_label):
                edges[lbl] = resolve_child(by_label[lbl])
            nodes[nid] = InternalNode(speaker=int(raw["speaker"]), edges=edges)
        else:
            alloc = tuple(_coerce_bundle(setting, b) for b in raw["allocation"])
            pays = tuple(_parse_payment(p) for p in raw["payments"])
            nodes[nid] = Leaf(allocation=alloc, payments=pays)
        return nid

    if isinstance(spec, dict) and "nodes" in spec and "root" in spec:
        raw_nodes = spec["nodes"]
        in_progress: set = set()
        done: dict = {}

        def walk_arena(key) -> str:
            if key in in_progress:
                raise MechanismError(f"cycle through node {key!r}")
            if key in done:
                raise MechanismError(f"node {key!r} has two parents")
            if key not in raw_nodes:
                raise MechanismError(f"edge points to unknown node {key!r}")
            in_progress.add(key)
            raw = dict(raw_nodes[key])
            raw.setdefault("id", key)
            nid = add_node(raw, walk_arena)
            in_progress.discard(key)
            done[key] = nid
            return nid

        root = walk_arena(spec["root"])
        orphans = set(raw_nodes) - set(done)
        if orphans:
            raise MechanismError(f"orphan nodes not reachable from root: {sorted(orphans)}")
    else:

        def walk_nested(raw) -> str:
            return add_node(raw, walk_nested)

        root = walk_nested(spec)

    return MechanismTree(setting=setting, nodes=nodes, root=root)


def run(tree: MechanismTree, profile: Sequence[Behavior]):
    """Execute the tree under a behavior profile.

    Returns ``(leaf_id, path)`` where ``path`` lists every visited node id,
    root first and the reached leaf last.
    """
    if len(profile) != tree.setting.n:
        raise MechanismError("need one behavior per player")
    for i, beh in enumerate(profile):
        if beh.owner != i:
            raise MechanismError(f"behavior at position {i} owned by player {beh.owner}")
    path = []
    nid = tree.root
    while True:
        path.append(nid)
        node = tree.nodes[nid]
        if isinstance(node, Leaf):
            return nid, path
        choice = profile[node.speaker].choices.get(nid)
        if choice is None:
            raise MechanismError(f"behavior of player {node.speaker} undefined at node {nid!r}")
        child = node.edges.get(choice)
        if child is None:
            raise MechanismError(f"label {choice!r} does not exist at node {nid!r}")
        nid = child


def attainable(tree: MechanismTree, player: int, behavior: Behavior, nid: str) -> bool:
    """Whether ``nid`` is reachable for some opponent play, given ``behavior``.

    True iff on the root-to-node path every node owned by ``player`` has its
    outgoing path edge equal to the behavior's choice there.
    """
    node = tree.nodes.get(nid)
    if not isinstance(node, InternalNode) or node.speaker != player:
        raise MechanismError(f"node {nid!r} is not owned by player {player}")
    path = tree.path_to(nid)
    for cur, nxt in zip(path, path[1:]):
        cur_node = tree.nodes[cur]
        if cur_node.speaker != player:
            continue
        taken = next(lbl for lbl, child in cur_node.edges.items() if child == nxt)
        if behavior.choices.get(cur) != taken:
            return False
    return True


def validate_strategy(tree: MechanismTree, player: int, strategy: Mapping) -> None:
    """Check that every behavior in a strategy table is total on the player's nodes."""
    owned = tree.nodes_of(player)
    for valuation, behavior in strategy.items():
        if behavior.owner != player:
            raise MechanismError("behavior owner mismatch in strategy table")
        for nid in owned:
            lbl = behavior.choices.get(nid)
            if lbl is None:
                raise MechanismError(
                    f"strategy of player {player} undefined at node {nid!r} for {valuation!r}"
                )
            if lbl not in tree.nodes[nid].edges:
                raise MechanismError(f"label {lbl!r} does not exist at node {nid!r}")


def realize(tree: MechanismTree, strategies: Sequence[Mapping], domain) -> dict:
    """Tabulate the realized outcome for every profile of the finite domain.

    ``strategies`` holds one valuation-to-behavior map per player; ``domain``
    is the per-player valuation lists (a ``valuations.Domain`` or plain
    sequence of sequences).  Returns a dict mapping each valuation profile
    to ``(allocation, payments)``.
    """
    players = getattr(domain, "players", domain)
    for i, strategy in enumerate(strategies):
        for v in players[i]:
            if v not in strategy:
                raise MechanismError(f"strategy of player {i} undefined for a domain valuation")
        validate_strategy(tree, i, {v: strategy[v] for v in players[i]})
    table: dict = {}
    for profile in itertools.product(*players):
        behaviors = tuple(strategies[i][profile[i]] for i in range(tree.setting.n))
        leaf_id, _ = run(tree, behaviors)
        leaf = tree.nodes[leaf_id]
        table[profile] = (leaf.allocation, leaf.payments)
    return table

"""Bounded exhaustive enumeration of normalized mechanisms.

The search walks every mechanism of a declared finite class: trees whose
internal nodes partition the speaker's currently-consistent valuation set
into message blocks (players with a singleton consistent set never speak),
whose leaves combine any valid allocation with per-player payments from a
finite grid, and whose strategies are block membership.  Within that class
the walk is exhaustive, duplicate-free up to message relabeling, and
deterministic, so a "no counterexample" verdict is a statement about the
whole class.

With pruning enabled, a partial tree is abandoned as soon as a pair of
already-placed leaves certifies that no completion can be obviously
strategy-proof (the bad-leaf/good-leaf consequence), or as soon as a leaf
would violate individual rationality or charge a negative payment for a
profile that realizes it.  Both cuts only remove trees the final property
checks would reject, so pruned and unpruned scans reach the same verdict.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterator, Optional

from .checkers import check_ir, check_nnt, check_osp, enumerate_allocations, opt_welfare
from .mechanisms import MechanismBundle
from .model import Behavior, build_tree
from .valuations import Domain, SingleMindedMU, evaluate

GRID_CAVEAT = (
    "verdict is relative to the declared normalized class and its finite payment "
    "grid; it is not a proof over unbounded payments"
)

_BIG = 1 << 62


def default_payment_grid(setting, family: str = "mu-single-minded") -> tuple:
    """Payment levels the impossibility arguments pin payments near.

    Always includes the integers 0..5; adds the square/cube thresholds in
    the flavor matching the valuation family.
    """
    k = Fraction(max(setting.m, setting.n))
    levels = {Fraction(t) for t in range(6)}
    levels.update({k**2, k**2 + 1, k**4})
    if family in ("additive", "unit-demand", "ca-single-minded"):
        levels.update({2 * k**2, 2 * k**2 + 2, 2 * k**3 + k**2})
    return tuple(sorted(levels))


@dataclass(frozen=True)
class SearchSpace:
    """Domain, payment grid and depth cap delimiting the search class."""

    domain: Domain
    payment_grid: tuple
    max_depth: Optional[int] = None

    def __post_init__(self):
        grid = tuple(sorted({Fraction(p) for p in self.payment_grid}))
        if not grid:
            raise ValueError("payment grid must be nonempty")
        object.__setattr__(self, "payment_grid", grid)
        if self.max_depth is None:
            object.__setattr__(
                self, "max_depth", sum(len(vs) for vs in self.domain.players)
            )
        if self.max_depth < 0:
            raise ValueError("max depth must be nonnegative")

    def describe(self) -> str:
        sizes = "x".join(str(len(vs)) for vs in self.domain.players)
        grid = ", ".join(f"{p.numerator}/{p.denominator}" for p in self.payment_grid)
        return (
            f"normalized partition-message mechanisms over a {sizes} domain, "
            f"depth <= {self.max_depth}, all valid allocations, payments in {{{grid}}}"
        )


@dataclass
class SearchVerdict:
    outcome: str  # "no-counterexample" | "counterexample" | "budget-exhausted"
    counterexample: Optional[MechanismBundle]
    examined: int
    survivors: int
    elapsed: float
    class_description: str
    audit: dict = field(default_factory=dict)
    caveat: str = GRID_CAVEAT


class _Frame:
    """Constraint bookkeeping for one internal node on the DFS stack.

    Tracks, per valuation of the node's speaker: the minimum realized
    utility over leaves of completed earlier children (``done_rmin``, only
    for valuations consistent there), the maximum utility over all those
    leaves (``done_emax``), and the same two aggregates for the child under
    construction.
    """

    __slots__ = ("speaker", "done_rmin", "done_emax", "cur_rmin", "cur_emax", "done_vmask")

    def __init__(self, speaker: int, size: int):
        self.speaker = speaker
        self.done_rmin = [_BIG] * size
        self.done_emax = [-_BIG] * size
        self.cur_rmin = [_BIG] * size
        self.cur_emax = [-_BIG] * size
        self.done_vmask = 0


def _partitions(elements: tuple) -> list:
    """Set partitions of ``elements`` into >= 2 blocks, canonical order.

    Restricted-growth strings enumerated lexicographically; blocks come out
    ordered by their smallest element.
    """
    n = len(elements)
    out = []
    rgs = [0] * n

    def rec(i: int, maxval: int) -> None:
        if i == n:
            if maxval >= 1:
                blocks = [[] for _ in range(maxval + 1)]
                for pos, b in enumerate(rgs):
                    blocks[b].append(elements[pos])
                out.append(tuple(tuple(b) for b in blocks))
            return
        for b in range(maxval + 2):
            rgs[i] = b
            rec(i + 1, max(maxval, b))

    if n >= 2:
        rec(1, 0)
    return out


class _Engine:
    def __init__(self, space: SearchSpace, prune: bool):
        self.space = space
        self.prune = prune
        domain = space.domain
        self.setting = domain.setting
        self.players = domain.players
        self.n = self.setting.n
        self.sizes = [len(vs) for vs in self.players]
        self.allocations = list(enumerate_allocations(self.setting))

        denoms = [p.denominator for p in space.payment_grid]
        values: dict = {}
        for i, vs in enumerate(self.players):
            for vi, v in enumerate(vs):
                for ai, alloc in enumerate(self.allocations):
                    x = evaluate(v, alloc[i])
                    values[(i, vi, ai)] = x
                    denoms.append(x.denominator)
        self.scale = lcm(*denoms)
        self.val = {
            key: int(x * self.scale) for key, x in values.items()
        }
        self.grid = [int(p * self.scale) for p in space.payment_grid]

        # profile indexing, row-major over player valuation indices
        self.strides = [0] * self.n
        stride = 1
        for i in reversed(range(self.n)):
            self.strides[i] = stride
            stride *= self.sizes[i]
        self.profile_count = stride
        self.opt = []
        for profile in itertools.product(*self.players):
            w, _ = opt_welfare(profile, self.setting)
            self.opt.append(int(w * self.scale))
        self.sw = [
            [
                sum(self.val[(i, pv[i], ai)] for i in range(self.n))
                for pv in itertools.product(*(range(c) for c in self.sizes))
            ]
            for ai in range(len(self.allocations))
        ]

        self.realized = [None] * self.profile_count
        self.frames: list = []
        self.trail: list = []
        self._leaf_cache: dict = {}
        self._covered_cache: dict = {}
        self._partition_cache: dict = {}

    # -- cached per-context tables -------------------------------------

    def _covered(self, masks: tuple) -> list:
        got = self._covered_cache.get(masks)
        if got is None:
            axes = []
            for i, mask in enumerate(masks):
                axes.append([vi for vi in range(self.sizes[i]) if mask >> vi & 1])
            got = [
                sum(vi * self.strides[i] for i, vi in enumerate(combo))
                for combo in itertools.product(*axes)
            ]
            self._covered_cache[masks] = got
        return got

    def _leaf_options(self, masks: tuple) -> list:
        got = self._leaf_cache.get(masks)
        if got is None:
            got = []
            for ai in range(len(self.allocations)):
                per_player = []
                for i, mask in enumerate(masks):
                    if self.prune:
                        cap = min(
                            self.val[(i, vi, ai)]
                            for vi in range(self.sizes[i])
                            if mask >> vi & 1
                        )
                        allowed = [p for p in self.grid if 0 <= p <= cap]
                    else:
                        allowed = self.grid
                    per_player.append(allowed)
                for pays in itertools.product(*per_player):
                    got.append((ai, pays))
            self._leaf_cache[masks] = got
        return got

    def _mask_partitions(self, mask: int) -> list:
        got = self._partition_cache.get(mask)
        if got is None:
            elements = tuple(vi for vi in range(mask.bit_length()) if mask >> vi & 1)
            blocks = _partitions(elements)
            got = [
                tuple(sum(1 << vi for vi in block) for block in part)
                for part in blocks
            ]
            self._partition_cache[mask] = got
        return got

    # -- trail ----------------------------------------------------------

    def _unwind(self, mark: int) -> None:
        trail = self.trail
        while len(trail) > mark:
            frame, attr, idx, old = trail.pop()
            if attr == "vmask":
                frame.done_vmask = old
            else:
                getattr(frame, attr)[idx] = old

    def _place_leaf(self, masks: tuple, ai: int, pays: tuple) -> bool:
        if self.prune:
            for frame in self.frames:
                j = frame.speaker
                mask_j = masks[j]
                pay = pays[j]
                vmask = frame.done_vmask
                for vi in range(self.sizes[j]):
                    u = self.val[(j, vi, ai)] - pay
                    if vmask >> vi & 1 and frame.done_rmin[vi] < u:
                        return False
                    if mask_j >> vi & 1 and u < frame.done_emax[vi]:
                        return False
            trail = self.trail
            for frame in self.frames:
                j = frame.speaker
                mask_j = masks[j]
                pay = pays[j]
                for vi in range(self.sizes[j]):
                    u = self.val[(j, vi, ai)] - pay
                    if u > frame.cur_emax[vi]:
                        trail.append((frame, "cur_emax", vi, frame.cur_emax[vi]))
                        frame.cur_emax[vi] = u
                    if mask_j >> vi & 1 and u < frame.cur_rmin[vi]:
                        trail.append((frame, "cur_rmin", vi, frame.cur_rmin[vi]))
                        frame.cur_rmin[vi] = u
        realized = self.realized
        entry = (ai, pays)
        for p in self._covered(masks):
            realized[p] = entry
        return True

    def _complete_child(self, frame: _Frame, block: int) -> None:
        trail = self.trail
        size = len(frame.done_rmin)
        for vi in range(size):
            ce = frame.cur_emax[vi]
            if ce > frame.done_emax[vi]:
                trail.append((frame, "done_emax", vi, frame.done_emax[vi]))
                frame.done_emax[vi] = ce
            if block >> vi & 1:
                trail.append((frame, "done_rmin", vi, frame.done_rmin[vi]))
                frame.done_rmin[vi] = frame.cur_rmin[vi]
            if frame.cur_emax[vi] != -_BIG:
                trail.append((frame, "cur_emax", vi, frame.cur_emax[vi]))
                frame.cur_emax[vi] = -_BIG
            if frame.cur_rmin[vi] != _BIG:
                trail.append((frame, "cur_rmin", vi, frame.cur_rmin[vi]))
                frame.cur_rmin[vi] = _BIG
        trail.append((frame, "vmask", 0, frame.done_vmask))
        frame.done_vmask |= block

    # -- enumeration ------------------------------------------------------

    def subtrees(self, masks: tuple, depth: int) -> Iterator[tuple]:
        """Yield a descriptor for every complete subtree at this position.

        At yield time the engine's realized-outcome table and constraint
        frames reflect the yielded subtree.
        """
        for ai, pays in self._leaf_options(masks):
            mark = len(self.trail)
            if self._place_leaf(masks, ai, pays):
                yield ("leaf", ai, pays)
            self._unwind(mark)
        if depth < 1:
            return
        for j in range(self.n):
            mask_j = masks[j]
            if bin(mask_j).count("1") < 2:
                continue
            for blocks in self._mask_partitions(mask_j):
                frame = _Frame(j, self.sizes[j])
                self.frames.append(frame)
                yield from self._children(frame, j, blocks, 0, masks, depth)
                self.frames.pop()

    def _children(self, frame: _Frame, j: int, blocks: tuple, t: int,
                  masks: tuple, depth: int) -> Iterator[tuple]:
        if t == len(blocks):
            yield ("node", j, blocks, ())
            return
        child_masks = masks[:j] + (blocks[t],) + masks[j + 1:]
        for sub in self.subtrees(child_masks, depth - 1):
            mark = len(self.trail)
            if self.prune:
                self._complete_child(frame, blocks[t])
            for done in self._children(frame, j, blocks, t + 1, masks, depth):
                yield ("node", j, blocks, (sub,) + done[3])
            self._unwind(mark)

    # -- materialization ---------------------------------------------------

    def _unscale(self, pay: int) -> Fraction:
        return Fraction(pay, self.scale)

    def materialize(self, descriptor: tuple) -> MechanismBundle:
        setting = self.setting
        choices: list = [
            [dict() for _ in range(self.sizes[i])] for i in range(self.n)
        ]
        counter = [0]

        def spec_of(desc, masks):
            nid = f"u{counter[0]}"
            counter[0] += 1
            if desc[0] == "leaf":
                _, ai, pays = desc
                return {
                    "id": nid,
                    "allocation": list(self.allocations[ai]),
                    "payments": [self._unscale(p) for p in pays],
                }
            _, j, blocks, subs = desc
            edges = {}
            for t, (block, sub) in enumerate(zip(blocks, subs)):
                for vi in range(self.sizes[j]):
                    if masks[j] >> vi & 1:
                        choices[j][vi].setdefault(nid, "0")
                        if block >> vi & 1:
                            choices[j][vi][nid] = str(t)
                child_masks = masks[:j] + (block,) + masks[j + 1:]
                edges[str(t)] = spec_of(sub, child_masks)
            # valuations no longer consistent here still need a total plan
            for vi in range(self.sizes[j]):
                choices[j][vi].setdefault(nid, "0")
            return {"id": nid, "speaker": j, "edges": edges}

        root_masks = tuple((1 << c) - 1 for c in self.sizes)
        spec = spec_of(descriptor, root_masks)
        tree = build_tree(spec, setting)
        strategies = tuple(
            {
                v: Behavior(owner=i, choices=choices[i][vi])
                for vi, v in enumerate(self.players[i])
            }
            for i in range(self.n)
        )
        return MechanismBundle(tree=tree, strategies=strategies, domain=self.space.domain)

    def root_masks(self) -> tuple:
        return tuple((1 << c) - 1 for c in self.sizes)


def enumerate_normalized_mechanisms(space: SearchSpace) -> Iterator[MechanismBundle]:
    """Stream every mechanism of the class, unpruned, in deterministic order."""
    engine = _Engine(space, prune=False)
    for descriptor in engine.subtrees(engine.root_masks(), space.max_depth):
        yield engine.materialize(descriptor)


class _BudgetExceeded(Exception):
    pass


class _Aggregator:
    """Counts surviving mechanisms by equivalence class instead of one by one.

    Two subtrees over the same consistent sets are interchangeable when they
    share (a) the per-valuation min-realized / max-anywhere utility vectors
    that the bad-leaf/good-leaf pruning compares, and (b) the handful of
    per-profile verdict bits (beats the target ratio, beats min(m, n),
    violates a payment bound).  Both the cross-sibling compatibility filter
    and the final verdict depend only on those, and the covered profile sets
    of siblings are disjoint, so classes compose: the count of a combined
    class is the product of its parts.  One first-encountered descriptor per
    class is kept so a counterexample can still be materialized.

    Class entry layout: (summary, flags, count, descriptor) where summary is
    a per-player tuple of (rmin, emax) pairs and flags is (beats_target,
    beats_minmn, low_bound_violation, square_bound_violation).
    """

    def __init__(self, engine: _Engine, t_num: int, t_den: int, deadline=None,
                 beating_only: bool = False):
        self.e = engine
        self.t_num = t_num
        self.t_den = t_den
        self.minmn = min(engine.setting.m, engine.setting.n)
        self.deadline = deadline
        self.beating_only = beating_only
        self.audit_profiles = _mu_audit_profiles(engine)
        self.memo: dict = {}
        self.work = 0

    # -- flag helpers ---------------------------------------------------

    def _leaf_flags(self, masks: tuple, ai: int, pays: tuple) -> tuple:
        e = self.e
        beats_target = True
        beats_minmn = True
        for p in e._covered(masks):
            sw = e.sw[ai][p]
            opt = e.opt[p]
            if sw == 0:
                if opt != 0:
                    beats_target = beats_minmn = False
                    break
            else:
                if not opt * self.t_den < sw * self.t_num:
                    beats_target = False
                if not opt < sw * self.minmn:
                    beats_minmn = False
        low_viol = False
        square_viol = False
        if self.audit_profiles is not None:
            low_idx, spike_idx, square = self.audit_profiles
            covered = e._covered(masks)
            alloc = e.allocations[ai]
            if low_idx in covered:
                low_viol = any(
                    alloc[i] and pays[i] > e.scale for i in range(e.n)
                )
            if spike_idx in covered:
                square_viol = any(
                    alloc[i] >= e.setting.m and pays[i] > square for i in range(e.n)
                )
        return beats_target, beats_minmn, low_viol, square_viol

    def _leaf_summary(self, masks: tuple, ai: int, pays: tuple) -> tuple:
        e = self.e
        out = []
        for j in range(e.n):
            pay = pays[j]
            row = []
            for vi in range(e.sizes[j]):
                u = e.val[(j, vi, ai)] - pay
                rmin = u if masks[j] >> vi & 1 else _BIG
                row.append((rmin, u))
            out.append(tuple(row))
        return tuple(out)

    # -- composition ------------------------------------------------------

    def classes(self, masks: tuple, depth: int) -> list:
        # beyond full refinement of every consistent set, extra depth adds
        # no trees; collapsing the key avoids recomputing identical lists
        refinement = sum(max(bin(m).count("1") - 1, 0) for m in masks)
        key = (masks, min(depth, refinement))
        got = self.memo.get(key)
        if got is not None:
            return got
        e = self.e
        table: dict = {}
        order: list = []

        def insert(summary, flags, count, desc) -> None:
            k = (summary, flags)
            entry = table.get(k)
            if entry is None:
                table[k] = [summary, flags, count, desc]
                order.append(k)
            else:
                entry[2] += count

        for ai, pays in e._leaf_options(masks):
            flags = self._leaf_flags(masks, ai, pays)
            if self.beating_only and not flags[0]:
                continue
            insert(
                self._leaf_summary(masks, ai, pays),
                flags,
                1,
                ("leaf", ai, pays),
            )
        if depth >= 1:
            for j in range(e.n):
                if bin(masks[j]).count("1") < 2:
                    continue
                for blocks in e._mask_partitions(masks[j]):
                    child_lists = [
                        self.classes(masks[:j] + (block,) + masks[j + 1:], depth - 1)
                        for block in blocks
                    ]
                    self._combine(j, blocks, child_lists, masks, insert)
        # first-encounter order makes the stored representative of each class
        # the stream-first member, so counterexamples match the raw stream
        got = [tuple(table[k]) for k in order]
        self.memo[key] = got
        return got

    def _compatible(self, j: int, block_a: int, sum_a, block_b: int, sum_b) -> bool:
        row_a, row_b = sum_a[j], sum_b[j]
        size = len(row_a)
        for vi in range(size):
            if block_a >> vi & 1 and row_a[vi][0] < row_b[vi][1]:
                return False
            if block_b >> vi & 1 and row_b[vi][0] < row_a[vi][1]:
                return False
        return True

    def _merge(self, j: int, blocks: tuple, parts: list) -> tuple:
        e = self.e
        out = []
        for jj in range(e.n):
            row = []
            for vi in range(e.sizes[jj]):
                emax = max(part[jj][vi][1] for part in parts)
                if jj == j:
                    owner = next(t for t, b in enumerate(blocks) if b >> vi & 1) if any(
                        b >> vi & 1 for b in blocks
                    ) else None
                    rmin = parts[owner][jj][vi][0] if owner is not None else _BIG
                else:
                    rmin = min(part[jj][vi][0] for part in parts)
                row.append((rmin, emax))
            out.append(tuple(row))
        return tuple(out)

    def _combine(self, j: int, blocks: tuple, child_lists: list, masks: tuple, insert) -> None:
        chosen: list = []

        def rec(t: int) -> None:
            self.work += 1
            if self.deadline is not None and not self.work & 0xFFF:
                if time.monotonic() > self.deadline:
                    raise _BudgetExceeded
            if t == len(blocks):
                summary = self._merge(j, blocks, [c[0] for c in chosen])
                flags = (
                    all(c[1][0] for c in chosen),
                    all(c[1][1] for c in chosen),
                    any(c[1][2] for c in chosen),
                    any(c[1][3] for c in chosen),
                )
                count = 1
                for c in chosen:
                    count *= c[2]
                desc = ("node", j, blocks, tuple(c[3] for c in chosen))
                insert(summary, flags, count, desc)
                return
            for cand in child_lists[t]:
                ok = True
                for s, earlier in enumerate(chosen):
                    if not self._compatible(j, blocks[s], earlier[0], blocks[t], cand[0]):
                        ok = False
                        break
                if ok:
                    chosen.append(cand)
                    rec(t + 1)
                    chosen.pop()

        rec(0)


def _mu_audit_profiles(engine: _Engine):
    """Profile indices for the payment-bound audit on the adversarial
    multi-unit fixture; None when the domain is not that fixture."""
    setting = engine.setting
    if setting.is_combinatorial:
        return None
    m = setting.m
    k = Fraction(max(setting.m, setting.n))
    one = SingleMindedMU(quantity=1, value=Fraction(1))
    all_v = SingleMindedMU(quantity=m, value=k**4)
    featured = None
    for i, vs in enumerate(engine.players):
        if one not in vs or vs[0] != one:
            return None
        if featured is None and all_v in vs:
            featured = (i, vs.index(all_v))
    if featured is None:
        return None
    spike = sum(
        (featured[1] if i == featured[0] else 0) * engine.strides[i]
        for i in range(engine.n)
    )
    return 0, spike, int(k**2 * engine.scale)


def falsify_impossibility(
    space: SearchSpace,
    target_ratio,
    budget_seconds: Optional[float] = None,
    prune: bool = True,
    audit_survivors: bool = True,
) -> SearchVerdict:
    """Scan the class for an OSP + IR + NNT mechanism beating ``target_ratio``.

    Returns the first such bundle in enumeration order, or no-counterexample
    once the class is exhausted, or budget-exhausted.  Alongside the scan,
    every surviving (OSP + IR + NNT) mechanism is audited against the
    payment bounds: any winner at the all-low-value profile pays at most 1;
    and, for survivors whose ratio additionally beats min(m, n) on the
    adversarial multi-unit fixture, a bidder winning all units at the spike
    profile pays at most the square threshold.

    With ``prune`` the scan aggregates interchangeable subtrees and counts
    them in bulk; without it every class member is constructed and judged by
    the ordinary property checkers.  Both report the same outcome and the
    same first counterexample, since the aggregation keeps stream order.
    ``audit_survivors=False`` restricts the aggregation to target-beating
    subtrees only: much faster, same outcome and counterexample, but the
    survivor totals and payment audit are not collected (examined then
    counts candidate counterexamples only).
    """
    target = Fraction(target_ratio)
    if target <= 1:
        raise ValueError("target ratio must exceed 1")
    engine = _Engine(space, prune=prune)
    t_num, t_den = target.numerator, target.denominator
    start = time.monotonic()
    deadline = None if budget_seconds is None else start + budget_seconds
    if prune:
        verdict = _scan_aggregated(engine, space, t_num, t_den, deadline,
                                   beating_only=not audit_survivors)
    else:
        verdict = _scan_plain(engine, space, t_num, t_den, deadline)
    verdict.elapsed = time.monotonic() - start
    return verdict


def _fresh_audit(applicable: bool) -> dict:
    return {
        "applicable": applicable,
        "survivors_checked": 0,
        "low_profile_bound_failures": 0,
        "square_bound_premise_met": 0,
        "square_bound_failures": 0,
    }


def _scan_aggregated(engine: _Engine, space: SearchSpace, t_num: int, t_den: int,
                     deadline, beating_only: bool = False) -> SearchVerdict:
    agg = _Aggregator(engine, t_num, t_den, deadline, beating_only=beating_only)
    audit = _fresh_audit(agg.audit_profiles is not None and not beating_only)
    try:
        root = agg.classes(engine.root_masks(), space.max_depth)
    except _BudgetExceeded:
        return SearchVerdict(
            outcome="budget-exhausted",
            counterexample=None,
            examined=0,
            survivors=0,
            elapsed=0.0,
            class_description=space.describe(),
            audit=audit,
        )
    examined = 0
    counterexample = None
    for summary, flags, count, desc in root:
        examined += count
        beats_target, beats_minmn, low_viol, square_viol = flags
        if audit["applicable"]:
            audit["survivors_checked"] += count
            if low_viol:
                audit["low_profile_bound_failures"] += count
            if beats_minmn:
                audit["square_bound_premise_met"] += count
                if square_viol:
                    audit["square_bound_failures"] += count
        if beats_target and counterexample is None:
            counterexample = engine.materialize(desc)
    return SearchVerdict(
        outcome="no-counterexample" if counterexample is None else "counterexample",
        counterexample=counterexample,
        examined=examined,
        survivors=examined,
        elapsed=0.0,
        class_description=space.describe(),
        audit=audit,
    )


def _scan_plain(engine: _Engine, space: SearchSpace, t_num: int, t_den: int,
                deadline) -> SearchVerdict:
    setting = engine.setting
    minmn = min(setting.m, setting.n)
    audit_profiles = _mu_audit_profiles(engine)
    audit = _fresh_audit(audit_profiles is not None)
    opt = engine.opt
    sw = engine.sw
    examined = 0
    survivors = 0
    counterexample = None
    outcome = "no-counterexample"

    for descriptor in engine.subtrees(engine.root_masks(), space.max_depth):
        examined += 1
        if deadline is not None and not examined & 0x3FF and time.monotonic() > deadline:
            outcome = "budget-exhausted"
            break
        bundle = engine.materialize(descriptor)
        if not (
            check_osp(*bundle.checker_args()).passed
            and check_ir(*bundle.checker_args()).passed
            and check_nnt(*bundle.checker_args()).passed
        ):
            continue
        survivors += 1
        realized = engine.realized
        beats_target = True
        beats_minmn = True
        for p in range(engine.profile_count):
            w = sw[realized[p][0]][p]
            o = opt[p]
            if w == 0:
                if o != 0:
                    beats_target = beats_minmn = False
                    break
                continue
            if not o * t_den < w * t_num:
                beats_target = False
            if not o < w * minmn:
                beats_minmn = False
            if not beats_target and not beats_minmn:
                break
        if audit_profiles is not None:
            low_idx, spike_idx, square = audit_profiles
            audit["survivors_checked"] += 1
            ai, pays = realized[low_idx]
            alloc = engine.allocations[ai]
            if any(alloc[i] and pays[i] > engine.scale for i in range(engine.n)):
                audit["low_profile_bound_failures"] += 1
            if beats_minmn:
                audit["square_bound_premise_met"] += 1
                ai2, pays2 = realized[spike_idx]
                alloc2 = engine.allocations[ai2]
                if any(
                    alloc2[i] >= setting.m and pays2[i] > square
                    for i in range(engine.n)
                ):
                    audit["square_bound_failures"] += 1
        if beats_target:
            counterexample = engine.materialize(descriptor)
            outcome = "counterexample"
            break

    return SearchVerdict(
        outcome=outcome,
        counterexample=counterexample,
        examined=examined,
        survivors=survivors,
        elapsed=0.0,
        class_description=space.describe(),
        audit=audit,
    )

"""Valuation families, finite domains, and the adversarial fixture sets.

All valuations are normalized (worth 0 on the empty bundle), monotone, and
nonnegative; constructors enforce this at build time, exhaustively for
explicit tables.  Values are exact rationals so threshold comparisons in the
checkers never suffer rounding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .model import COMBINATORIAL, MULTI_UNIT, AuctionSetting, Bundle


class ValuationError(ValueError):
    """Raised for ill-formed valuation parameters or domains."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise ValuationError(f"cannot read rational {x!r}")


def _nonneg(values) -> tuple:
    out = tuple(_frac(v) for v in values)
    if any(v < 0 for v in out):
        raise ValuationError("values must be nonnegative")
    return out


@dataclass(frozen=True)
class AdditiveValuation:
    """Worth the sum of per-item values of the received bundle."""

    values: tuple

    tag = "additive"
    kind = COMBINATORIAL

    def __post_init__(self):
        object.__setattr__(self, "values", _nonneg(self.values))

    def evaluate(self, bundle: Bundle) -> Fraction:
        _expect_set(bundle)
        return sum((self.values[j] for j in bundle), Fraction(0))


@dataclass(frozen=True)
class UnitDemandValuation:
    """Worth the best single item in the received bundle."""

    values: tuple

    tag = "unit-demand"
    kind = COMBINATORIAL

    def __post_init__(self):
        object.__setattr__(self, "values", _nonneg(self.values))

    def evaluate(self, bundle: Bundle) -> Fraction:
        _expect_set(bundle)
        return max((self.values[j] for j in bundle), default=Fraction(0))


@dataclass(frozen=True)
class SingleMindedCA:
    """Worth ``value`` for any bundle containing the target bundle, else 0."""

    bundle: frozenset
    value: Fraction

    tag = "single-minded-ca"
    kind = COMBINATORIAL

    def __post_init__(self):
        object.__setattr__(self, "bundle", frozenset(self.bundle))
        object.__setattr__(self, "value", _frac(self.value))
        if self.value < 0:
            raise ValuationError("values must be nonnegative")
        if not self.bundle:
            raise ValuationError("single-minded target bundle must be nonempty")

    def evaluate(self, b: Bundle) -> Fraction:
        _expect_set(b)
        return self.value if self.bundle <= b else Fraction(0)


@dataclass(frozen=True)
class SingleMindedMU:
    """Worth ``value`` for any quantity of at least ``quantity``, else 0."""

    quantity: int
    value: Fraction

    tag = "single-minded-mu"
    kind = MULTI_UNIT

    def __post_init__(self):
        object.__setattr__(self, "value", _frac(self.value))
        if self.value < 0:
            raise ValuationError("values must be nonnegative")
        if self.quantity < 1:
            raise ValuationError("single-minded quantity must be at least 1")

    def evaluate(self, b: Bundle) -> Fraction:
        _expect_int(b)
        return self.value if b >= self.quantity else Fraction(0)


@dataclass(frozen=True)
class GeneralCA:
    """Explicit table over all bundles of ``m`` items, indexed by bitmask."""

    values: tuple

    tag = "general-ca"
    kind = COMBINATORIAL

    def __post_init__(self):
        vals = _nonneg(self.values)
        object.__setattr__(self, "values", vals)
        size = len(vals)
        if size == 0 or size & (size - 1):
            raise ValuationError("general table length must be a power of two")
        if vals[0] != 0:
            raise ValuationError("not normalized: v(empty) must be 0")
        m = size.bit_length() - 1
        for mask in range(size):
            for j in range(m):
                if not mask & (1 << j) and vals[mask] > vals[mask | (1 << j)]:
                    raise ValuationError("table violates monotonicity")

    @property
    def m(self) -> int:
        return len(self.values).bit_length() - 1

    def evaluate(self, b: Bundle) -> Fraction:
        _expect_set(b)
        return self.values[sum(1 << j for j in b)]


@dataclass(frozen=True)
class GeneralMU:
    """Explicit table over quantities ``0..m``."""

    values: tuple

    tag = "general-mu"
    kind = MULTI_UNIT

    def __post_init__(self):
        vals = _nonneg(self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ValuationError("empty quantity table")
        if vals[0] != 0:
            raise ValuationError("not normalized: v(0) must be 0")
        if any(a > b for a, b in zip(vals, vals[1:])):
            raise ValuationError("table violates monotonicity")

    def evaluate(self, b: Bundle) -> Fraction:
        _expect_int(b)
        return self.values[b]


Valuation = (
    AdditiveValuation
    | UnitDemandValuation
    | SingleMindedCA
    | SingleMindedMU
    | GeneralCA
    | GeneralMU
)

_TAGS = {
    cls.tag: cls
    for cls in (
        AdditiveValuation,
        UnitDemandValuation,
        SingleMindedCA,
        SingleMindedMU,
        GeneralCA,
        GeneralMU,
    )
}


def _expect_set(b) -> None:
    if not isinstance(b, frozenset):
        raise ValuationError("bundle kind mismatch: expected a combinatorial bundle")


def _expect_int(b) -> None:
    if not isinstance(b, int) or isinstance(b, bool):
        raise ValuationError("bundle kind mismatch: expected a multi-unit quantity")


def evaluate(valuation, bundle: Bundle) -> Fraction:
    """Value of ``bundle`` under ``valuation`` (dispatches on the family)."""
    return valuation.evaluate(bundle)


def make_valuation(tag: str, **params):
    """Build and validate a valuation from its tag and parameters."""
    cls = _TAGS.get(tag)
    if cls is None:
        raise ValuationError(f"unknown valuation tag {tag!r}")
    if cls in (AdditiveValuation, UnitDemandValuation, GeneralCA, GeneralMU):
        return cls(values=tuple(params["values"]))
    if cls is SingleMindedCA:
        return cls(bundle=frozenset(params["bundle"]), value=params["value"])
    return cls(quantity=int(params["quantity"]), value=params["value"])


@dataclass(frozen=True)
class Domain:
    """One finite, nonempty valuation list per player."""

    setting: AuctionSetting
    players: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "players", tuple(tuple(vs) for vs in self.players)
        )
        if len(self.players) != self.setting.n:
            raise ValuationError("need one valuation list per player")
        for vs in self.players:
            if not vs:
                raise ValuationError("every player needs a nonempty valuation list")
            for v in vs:
                if v.kind != self.setting.kind:
                    raise ValuationError(
                        f"{v.tag} valuation incompatible with {self.setting.kind} setting"
                    )

    def profiles(self):
        return itertools.product(*self.players)

    def size(self) -> int:
        out = 1
        for vs in self.players:
            out *= len(vs)
        return out


ADVERSARIAL_FAMILIES = ("mu-single-minded", "ca-single-minded", "additive", "unit-demand")


def adversarial_domain(setting: AuctionSetting, family: str, featured=(0, 1)) -> Domain:
    """The exact valuation subsets driving the lower-bound arguments.

    ``featured`` names the two players who receive the full valuation sets
    (the argument's "bidders 1 and 2"); everyone else keeps the singleton
    one-item valuation.  Requires m >= 2 and n >= 2.
    """
    m, n = setting.m, setting.n
    if m < 2 or n < 2:
        raise ValuationError("adversarial domains need m >= 2 and n >= 2")
    if family not in ADVERSARIAL_FAMILIES:
        raise ValuationError(f"unknown adversarial family {family!r}")
    a, b = featured
    if not (0 <= a < n and 0 <= b < n) or a == b:
        raise ValuationError("featured players must be two distinct player ids")
    k = Fraction(max(m, n))

    def target_item(i: int) -> int:
        # player i's privately valuable item; everyone past the item count
        # shares the last item
        return min(i, m - 1)

    if target_item(a) == target_item(b):
        raise ValuationError("featured players must have distinct target items")

    if family == "mu-single-minded":
        one = SingleMindedMU(quantity=1, value=Fraction(1))
        featured_set = (
            one,
            SingleMindedMU(quantity=1, value=k**2 + 1),
            SingleMindedMU(quantity=m, value=k**4),
        )
        players = [
            featured_set if i in (a, b) else (one,) for i in range(n)
        ]
        return Domain(setting=setting, players=tuple(players))

    if family == "ca-single-minded":
        def one_of(i: int) -> SingleMindedCA:
            return SingleMindedCA(bundle=frozenset({target_item(i)}), value=Fraction(1))

        everything = frozenset(range(m))
        players = []
        for i in range(n):
            if i in (a, b):
                players.append(
                    (
                        one_of(i),
                        SingleMindedCA(bundle=frozenset({target_item(i)}), value=k**2 + 1),
                        SingleMindedCA(bundle=everything, value=k**4),
                    )
                )
            else:
                players.append((one_of(i),))
        return Domain(setting=setting, players=tuple(players))

    # additive and unit-demand share one parameterization
    cls = AdditiveValuation if family == "additive" else UnitDemandValuation

    def vector(item_values: dict) -> tuple:
        vals = [Fraction(0)] * m
        for j, x in item_values.items():
            vals[j] = x
        return tuple(vals)

    def single(j: int, x: Fraction):
        return cls(values=vector({j: x}))

    players = []
    for i in range(n):
        t_own = target_item(i)
        if i in (a, b):
            t_other = target_item(b if i == a else a)
            players.append(
                (
                    single(t_own, Fraction(1)),
                    single(t_own, 3 * k**4),
                    single(t_other, 3 * k**4),
                    cls(values=vector({t_own: 2 * k**2 + 2, t_other: 2 * k**2})),
                )
            )
        else:
            players.append((single(t_own, Fraction(1)),))
    return Domain(setting=setting, players=tuple(players))


def restricted_additive_domain(x_l, x_h, setting: AuctionSetting) -> Domain:
    """All additive valuations with per-item values in {0, x_l, x_h}."""
    x_l, x_h = _frac(x_l), _frac(x_h)
    if not 0 < x_l < x_h:
        raise ValuationError("need 0 < x_l < x_h")
    if not setting.is_combinatorial:
        raise ValuationError("restricted additive domain is combinatorial")
    levels = (Fraction(0), x_l, x_h)
    vals = tuple(
        AdditiveValuation(values=combo)
        for combo in itertools.product(levels, repeat=setting.m)
    )
    return Domain(setting=setting, players=tuple(vals for _ in range(setting.n)))

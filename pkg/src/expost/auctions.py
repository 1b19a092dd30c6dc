"""Combinatorial auctions as VCG games.

An alternative is a full allocation of the goods to the bidders or the
seller.  Valuations without externalities depend only on the bidder's own
bundle.  Bundles are ``frozenset``s of good labels.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .model import AlternativeSet, Announcement, GameInstance, Valuation, rational
from .strategies import NearlyTruth, Strategy

__all__ = [
    "DEFAULT_MAX_ALTERNATIVES",
    "AllocationCapError",
    "AuctionSpace",
    "enumerate_allocations",
    "parse_bundle",
    "bundle_text",
    "all_bundles",
    "valuation_from_bundles",
    "bundle_table_of",
    "is_monotone",
    "is_quasi_field",
    "partition_field",
    "BundleReport",
    "bundling_strategy",
    "gen_vickrey2",
    "gen_section5_sprime",
    "sprime_extension_report",
]

# (3 bidders + seller) ** 4 goods
DEFAULT_MAX_ALTERNATIVES = 4 ** 4


class AllocationCapError(ValueError):
    pass


def bundle_text(bundle, goods=None) -> str:
    if not bundle:
        return "-"
    order = list(goods) if goods is not None else sorted(bundle)
    items = [g for g in order if g in bundle]
    sep = "" if all(len(str(g)) == 1 for g in items) else "+"
    return sep.join(str(g) for g in items)


def parse_bundle(text, goods) -> frozenset:
    """Read ``"ab"``, ``"a+b"``, ``"-"`` or an iterable of goods."""
    if isinstance(text, (set, frozenset, list, tuple)):
        bundle = frozenset(text)
    else:
        text = str(text).strip()
        if text in ("", "-", "{}"):
            return frozenset()
        if "+" in text:
            bundle = frozenset(text.split("+"))
        elif text in goods:
            bundle = frozenset([text])
        else:
            bundle = frozenset(text)
    unknown = bundle - set(goods)
    if unknown:
        raise ValueError(f"unknown goods {sorted(unknown)} in bundle {text!r}")
    return bundle


def all_bundles(goods) -> list:
    goods = list(goods)
    return [
        frozenset(c) for r in range(len(goods) + 1) for c in itertools.combinations(goods, r)
    ]


@dataclass(frozen=True)
class AuctionSpace:
    """Goods, bidders and every allocation, in a fixed order.

    Allocations are tuples of bundles, one per bidder; unassigned goods stay
    with the seller.
    """

    goods: tuple
    players: tuple
    allocations: tuple = field(init=False)
    alternatives: AlternativeSet = field(init=False)
    _by_label: dict = field(init=False, repr=False, compare=False, hash=False)

    def __init__(self, goods, players, max_alternatives: Optional[int] = DEFAULT_MAX_ALTERNATIVES):
        goods, players = tuple(goods), tuple(players)
        if not goods:
            raise ValueError("an auction needs at least one good")
        if len(set(goods)) != len(goods) or len(set(players)) != len(players):
            raise ValueError("duplicate goods or players")
        size = (len(players) + 1) ** len(goods)
        if max_alternatives is not None and size > max_alternatives:
            raise AllocationCapError(
                f"{len(goods)} goods and {len(players)} bidders give {size} allocations, "
                f"above the cap of {max_alternatives}"
            )
        allocs = []
        for owners in itertools.product(range(len(players) + 1), repeat=len(goods)):
            allocs.append(
                tuple(
                    frozenset(g for g, o in zip(goods, owners) if o == k + 1)
                    for k in range(len(players))
                )
            )
        labels = tuple(self._label(goods, a) for a in allocs)
        object.__setattr__(self, "goods", goods)
        object.__setattr__(self, "players", players)
        object.__setattr__(self, "allocations", tuple(allocs))
        object.__setattr__(self, "alternatives", AlternativeSet(labels))
        object.__setattr__(self, "_by_label", dict(zip(labels, allocs)))

    @staticmethod
    def _label(goods, alloc) -> str:
        return "|".join(bundle_text(b, goods) for b in alloc)

    def label(self, alloc) -> str:
        return self._label(self.goods, tuple(frozenset(b) for b in alloc))

    def allocation(self, label) -> tuple:
        return self._by_label[label]

    def bundle_of(self, player, label) -> frozenset:
        return self._by_label[label][self.players.index(player)]

    def grand_bundle_allocation(self, player) -> str:
        k = self.players.index(player)
        everything = frozenset(self.goods)
        return self.label(tuple(everything if j == k else frozenset() for j in range(len(self.players))))

    def solo_allocation(self, player, bundle) -> str:
        """The allocation giving ``bundle`` to ``player`` and the rest to the seller."""
        k = self.players.index(player)
        return self.label(tuple(frozenset(bundle) if j == k else frozenset() for j in range(len(self.players))))


def enumerate_allocations(goods, players, max_alternatives: Optional[int] = DEFAULT_MAX_ALTERNATIVES) -> AlternativeSet:
    return AuctionSpace(goods, players, max_alternatives).alternatives


def _table(goods, table: Mapping) -> dict:
    out = {}
    for k, x in table.items():
        out[parse_bundle(k, goods)] = rational(x)
    out.setdefault(frozenset(), Fraction(0))
    return out


def valuation_from_bundles(space: AuctionSpace, player, table: Mapping) -> Valuation:
    """No-externality valuation: each allocation is worth the value of the
    bundle ``player`` receives in it."""
    t = _table(space.goods, table)
    values = []
    for label in space.alternatives:
        bundle = space.bundle_of(player, label)
        if bundle not in t:
            raise KeyError(f"bundle table of {player!r} has no entry for {bundle_text(bundle)}")
        values.append(t[bundle])
    return Valuation(space.alternatives, tuple(values), all(x >= 0 for x in values))


def bundle_table_of(space: AuctionSpace, player, v) -> dict:
    """Bundle values read off the allocations giving the rest to the seller."""
    return {b: v[space.solo_allocation(player, b)] for b in all_bundles(space.goods)}


def is_monotone(table: Mapping, goods=None) -> bool:
    if goods is not None:
        table = _table(goods, table)
    items = list(table.items())
    return all(x <= y for (k, x), (l, y) in itertools.product(items, items) if k <= l)


def is_quasi_field(family, goods):
    """``(True, None)`` for a quasi-field, else ``(False, reason)``.

    The reason names the violating member(s): ``("empty",)``,
    ``("complement", K)`` or ``("disjoint union", K, L)``.
    """
    everything = frozenset(goods)
    fam = {frozenset(b) for b in family}
    if not fam:
        return False, ("empty",)
    for k in sorted(fam, key=lambda b: (len(b), sorted(map(str, b)))):
        if everything - k not in fam:
            return False, ("complement", k)
    ordered = sorted(fam, key=lambda b: (len(b), sorted(map(str, b))))
    for k, l in itertools.combinations_with_replacement(ordered, 2):
        if not (k & l) and k | l not in fam:
            return False, ("disjoint union", k, l)
    return True, None


def partition_field(parts) -> set:
    """All unions of blocks of a partition."""
    parts = [frozenset(p) for p in parts]
    return {
        frozenset().union(*c)
        for r in range(len(parts) + 1)
        for c in itertools.combinations(parts, r)
    }


@dataclass(frozen=True)
class BundleReport(Strategy):
    """Report the true value of listed bundles; any other bundle is reported
    at the value of the largest listed bundle inside it (ties: higher
    value)."""

    space: AuctionSpace
    player: object
    bundles: frozenset
    kind = "bundling"

    def __post_init__(self):
        object.__setattr__(self, "bundles", frozenset(frozenset(b) for b in self.bundles))

    def apply(self, v):
        table = bundle_table_of(self.space, self.player, v)
        reported = {}
        for b in table:
            if b in self.bundles:
                reported[b] = table[b]
            else:
                inside = [k for k in self.bundles if k <= b]
                if not inside:
                    reported[b] = Fraction(0)
                else:
                    reported[b] = max((len(k), table[k]) for k in inside)[1]
        return Announcement(
            v.alternatives,
            tuple(reported[self.space.bundle_of(self.player, a)] for a in v.alternatives),
        )

    def induced_subset(self) -> tuple:
        return tuple(a for a in self.space.alternatives if self.space.bundle_of(self.player, a) in self.bundles)

    def communication_cost(self, n_alternatives):
        return len(self.bundles)


def bundling_strategy(space: AuctionSpace, player, field_) -> BundleReport:
    ok, why = is_quasi_field(field_, space.goods)
    if not ok:
        raise ValueError(f"bundle family is not a quasi-field: {why}")
    return BundleReport(space, player, frozenset(field_))


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------


def _monotone_tables(goods, levels):
    bundles = all_bundles(goods)
    nonempty = [b for b in bundles if b]
    for vals in itertools.product(levels, repeat=len(nonempty)):
        t = {frozenset(): Fraction(0)}
        t.update(zip(nonempty, vals))
        if is_monotone(t):
            yield t


def gen_vickrey2(levels=(0, 1, 2)):
    """Two goods A and B, two bidders.  Bidder 1 reports on AB and A, bidder
    2 on AB and B, both reporting zero on the remaining good.  Grids hold
    every monotone no-externality valuation with bundle values in
    ``levels``."""
    space = AuctionSpace(("A", "B"), ("p1", "p2"))
    levels = [rational(x) for x in levels]
    tables = list(_monotone_tables(space.goods, levels))
    grids = {p: [valuation_from_bundles(space, p, t) for t in tables] for p in space.players}
    ab, a, b = frozenset("AB"), frozenset("A"), frozenset("B")
    profile = {
        "p1": BundleReport(space, "p1", {frozenset(), a, ab}),
        "p2": BundleReport(space, "p2", {frozenset(), b, ab}),
    }
    maxima = {p: space.grand_bundle_allocation(p) for p in space.players}
    return space, GameInstance(space.alternatives, space.players, grids, maxima=maxima), profile


SPRIME = (
    ("", "", ""),
    ("", "bc", ""),
    ("", "abc", ""),
    ("ab", "", ""),
    ("abc", "", ""),
    ("", "", "abc"),
)


def gen_section5_sprime(levels=(0, 1, 2), per_player: int = 4, seed: int = 0):
    """Three goods, three bidders, the six-allocation subset containing every
    grand-bundle allocation, and the nearly-truthful profile over it.

    Grids are unrestricted (externalities allowed, no monotonicity) apart
    from each bidder valuing its own grand bundle most.  Returns
    ``(space, subset, instance, profile)``.
    """
    import random

    space = AuctionSpace(("a", "b", "c"), ("p1", "p2", "p3"))
    subset = tuple(space.label(tuple(parse_bundle(x, space.goods) for x in row)) for row in SPRIME)
    rng = random.Random(seed)
    levels = [rational(x) for x in levels]
    top = max(levels) + 1
    grids, maxima = {}, {}
    for p in space.players:
        peak = space.grand_bundle_allocation(p)
        maxima[p] = peak
        grid = []
        for _ in range(per_player):
            vals = tuple(top if a == peak else rng.choice(levels) for a in space.alternatives)
            grid.append(Valuation(space.alternatives, vals, True))
        grids[p] = grid
    instance = GameInstance(space.alternatives, space.players, grids, maxima=maxima)
    profile = {p: NearlyTruth(subset) for p in space.players}
    return space, subset, instance, profile


def sprime_extension_report(space: AuctionSpace, subset) -> dict:
    """What no externalities and monotonicity would add to bids on ``subset``.

    For each bidder, the allocations outside the subset whose bid is forced
    by a bundle the bidder already reports, and for each such allocation
    the other bidders whose bundle there is never reported (so their bid is
    not determined).
    """
    inside = set(subset)
    reported = {
        p: {space.bundle_of(p, a) for a in subset} for p in space.players
    }
    forced = {}
    for p in space.players:
        rows = []
        for a in space.alternatives:
            if a in inside:
                continue
            bundle = space.bundle_of(p, a)
            if bundle and bundle in reported[p]:
                undetermined = [
                    q for q in space.players
                    if q != p and space.bundle_of(q, a) not in reported[q]
                ]
                rows.append({"allocation": a, "bundle": bundle_text(bundle, space.goods),
                             "undetermined": undetermined})
        forced[p] = rows
    asymmetric = any(row["undetermined"] for rows in forced.values() for row in rows)
    return {
        "subset": list(subset),
        "forced_outside": forced,
        "asymmetric": asymmetric,
        "same_bundles_for_all": len({frozenset(r) for r in reported.values()}) == 1,
    }

"""Exact model of a VCG game: alternatives, valuations, announcements,
welfare, tie-breaking and agent utility.

Every number is a :class:`fractions.Fraction`; ties between alternatives are
decided exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union

__all__ = [
    "Rational",
    "rational",
    "format_rational",
    "AlternativeSet",
    "Valuation",
    "Announcement",
    "TieBreakPolicy",
    "ALL_ORDERS",
    "GameInstance",
    "ConstantCharge",
    "ClarkeCharge",
    "social_welfare",
    "welfare_maximizers",
    "choose",
    "utility",
    "z_valuation",
    "maximum_family_grid",
]

Rational = Fraction
RationalLike = Union[Fraction, int, str]


def rational(x: RationalLike) -> Fraction:
    """Parse an exact rational from an int, a Fraction or a ``"p/q"`` string.

    Floats are rejected: they would smuggle rounding into tie detection.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        text = x.strip()
        try:
            return Fraction(text)
        except ZeroDivisionError:
            raise ValueError(f"invalid rational {x!r}: zero denominator") from None
        except ValueError:
            raise ValueError(f"invalid rational {x!r}") from None
    raise TypeError(f"cannot read {type(x).__name__} {x!r} as an exact rational")


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class AlternativeSet:
    """Ordered, duplicate-free set of alternative labels."""

    labels: tuple
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise ValueError("alternative set must be non-empty")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate alternative labels in {labels}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", {a: k for k, a in enumerate(labels)})

    def __iter__(self) -> Iterator:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label) -> bool:
        return label in self._index

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown alternative {label!r}") from None


def _as_alternatives(alternatives) -> AlternativeSet:
    if isinstance(alternatives, AlternativeSet):
        return alternatives
    return AlternativeSet(tuple(alternatives))


@dataclass(frozen=True)
class _ValueTable:
    alternatives: AlternativeSet
    values: tuple

    def __post_init__(self):
        values = tuple(rational(x) for x in self.values)
        if len(values) != len(self.alternatives):
            raise ValueError(
                f"expected {len(self.alternatives)} values, got {len(values)}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_map(cls, alternatives, mapping: Mapping, **kw):
        alts = _as_alternatives(alternatives)
        unknown = set(mapping) - set(alts.labels)
        if unknown:
            raise KeyError(f"unknown alternatives {sorted(map(str, unknown))}")
        missing = [a for a in alts if a not in mapping]
        if missing:
            raise KeyError(f"no value for alternatives {missing}")
        return cls(alts, tuple(mapping[a] for a in alts), **kw)

    @classmethod
    def constant(cls, alternatives, value: RationalLike = 0, **kw):
        alts = _as_alternatives(alternatives)
        return cls(alts, (rational(value),) * len(alts), **kw)

    def __getitem__(self, label) -> Fraction:
        return self.values[self.alternatives.index(label)]

    def items(self):
        return zip(self.alternatives.labels, self.values)

    def as_dict(self) -> dict:
        return dict(self.items())

    def argmax(self) -> tuple:
        top = max(self.values)
        return tuple(a for a, x in self.items() if x == top)

    def __str__(self) -> str:
        body = ", ".join(f"{a}: {format_rational(x)}" for a, x in self.items())
        return "{" + body + "}"


@dataclass(frozen=True)
class Valuation(_ValueTable):
    """An agent's true value for every alternative."""

    nonnegative: bool = False

    def __post_init__(self):
        super().__post_init__()
        if self.nonnegative and any(x < 0 for x in self.values):
            raise ValueError(f"negative value in non-negative valuation {self}")

    def has_maximum(self, label) -> bool:
        return self[label] == max(self.values)


@dataclass(frozen=True)
class Announcement(_ValueTable):
    """A reported valuation; negative entries are allowed."""


def z_valuation(alternatives, peak, height: RationalLike) -> Valuation:
    """Valuation worth ``height`` at ``peak`` and zero elsewhere."""
    alts = _as_alternatives(alternatives)
    s = rational(height)
    if s <= 0:
        raise ValueError("Z-valuation height must be positive")
    k = alts.index(peak)
    return Valuation(alts, tuple(s if j == k else Fraction(0) for j in range(len(alts))), True)


# ---------------------------------------------------------------------------
# Welfare and choice
# ---------------------------------------------------------------------------

Profile = Mapping[object, _ValueTable]


def _alternatives_of(profile: Profile, alternatives=None) -> AlternativeSet:
    if alternatives is not None:
        return _as_alternatives(alternatives)
    for table in profile.values():
        return table.alternatives
    raise ValueError("empty profile: alternatives must be given explicitly")


def social_welfare(profile: Profile, a) -> Fraction:
    """Sum of every player's value (true or announced) at ``a``."""
    total = Fraction(0)
    for table in profile.values():
        total += table[a]
    return total


def _welfare_vector(profile: Profile, alts: AlternativeSet) -> list:
    totals = [Fraction(0)] * len(alts)
    for table in profile.values():
        if table.alternatives != alts:
            raise ValueError("profile mixes tables over different alternative sets")
        totals = [t + x for t, x in zip(totals, table.values)]
    return totals


def welfare_maximizers(profile: Profile, alternatives=None) -> tuple:
    """All alternatives attaining the maximal total, in alternative order."""
    alts = _alternatives_of(profile, alternatives)
    totals = _welfare_vector(profile, alts)
    top = max(totals)
    return tuple(a for a, t in zip(alts, totals) if t == top)


class _AllOrders:
    def __repr__(self):
        return "ALL_ORDERS"


ALL_ORDERS = _AllOrders()


@dataclass(frozen=True)
class TieBreakPolicy:
    """Either a fixed priority order over alternatives, or ``ALL_ORDERS``.

    ``ALL_ORDERS`` asks callers to quantify over every welfare maximizer
    instead of picking one.
    """

    priority: object = ALL_ORDERS

    def __post_init__(self):
        if self.priority is not ALL_ORDERS:
            object.__setattr__(self, "priority", tuple(self.priority))

    @property
    def is_concrete(self) -> bool:
        return self.priority is not ALL_ORDERS

    def validate(self, alternatives) -> None:
        if self.is_concrete and sorted(map(str, self.priority)) != sorted(
            map(str, _as_alternatives(alternatives).labels)
        ):
            raise ValueError("priority order is not a permutation of the alternatives")

    @classmethod
    def natural(cls, alternatives) -> "TieBreakPolicy":
        return cls(_as_alternatives(alternatives).labels)


def choose(policy: TieBreakPolicy, profile: Profile, alternatives=None):
    """The welfare maximizer ranked first by ``policy``."""
    if not policy.is_concrete:
        raise ValueError("choose needs a concrete priority order")
    alts = _alternatives_of(profile, alternatives)
    policy.validate(alts)
    best = set(welfare_maximizers(profile, alts))
    for a in policy.priority:
        if a in best:
            return a
    raise AssertionError("unreachable: maximizer set is never empty")


# ---------------------------------------------------------------------------
# Charges h_i(b_-i)
# ---------------------------------------------------------------------------

Charge = Callable[[Mapping[object, Announcement]], Fraction]


@dataclass(frozen=True)
class ConstantCharge:
    value: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "value", rational(self.value))

    def __call__(self, opponents: Mapping[object, Announcement]) -> Fraction:
        return self.value


@dataclass(frozen=True)
class ClarkeCharge:
    """Clarke pivot term: the best total the opponents could reach without us."""

    def __call__(self, opponents: Mapping[object, Announcement]) -> Fraction:
        if not opponents:
            return Fraction(0)
        return max(_welfare_vector(opponents, _alternatives_of(opponents)))


def utility(
    i,
    true_valuation: Valuation,
    announcements: Profile,
    hspec: Optional[Mapping[object, Charge]] = None,
    policy: Optional[TieBreakPolicy] = None,
) -> Fraction:
    """Agent ``i``'s VCG utility: own value plus opponents' reports at the
    chosen alternative, minus ``h_i`` of the opponents' reports."""
    if i not in announcements:
        raise KeyError(f"no announcement for player {i!r}")
    alts = true_valuation.alternatives
    if policy is None:
        policy = TieBreakPolicy.natural(alts)
    chosen = choose(policy, announcements, alts)
    opponents = {j: b for j, b in announcements.items() if j != i}
    u = true_valuation[chosen] + social_welfare(opponents, chosen)
    if hspec is not None and i in hspec and hspec[i] is not None:
        u -= rational(hspec[i](opponents))
    return u


# ---------------------------------------------------------------------------
# Game instance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GameInstance:
    """Alternatives, players, a finite valuation grid per player, optional
    charges ``h`` and optional per-player maxima (the family R_i(a_i))."""

    alternatives: AlternativeSet
    players: tuple
    grids: Mapping
    hspec: Optional[Mapping] = None
    maxima: Optional[Mapping] = None

    def __post_init__(self):
        alts = _as_alternatives(self.alternatives)
        players = tuple(self.players)
        if not players:
            raise ValueError("a game needs at least one player")
        if len(set(players)) != len(players):
            raise ValueError("duplicate player labels")
        grids = {}
        for i in players:
            if i not in self.grids:
                raise ValueError(f"no valuation grid for player {i!r}")
            grid = tuple(self.grids[i])
            for v in grid:
                if v.alternatives != alts:
                    raise ValueError(f"valuation of {i!r} is over other alternatives")
            grids[i] = grid
        maxima = dict(self.maxima or {})
        for i, a in maxima.items():
            if a is None:
                continue
            if a not in alts:
                raise ValueError(f"maximum {a!r} of {i!r} is not an alternative")
            for v in grids[i]:
                if not v.nonnegative:
                    raise ValueError(f"R_{i}({a}) grids must hold non-negative valuations")
                if not v.has_maximum(a):
                    raise ValueError(f"valuation {v} of {i!r} does not peak at {a!r}")
        object.__setattr__(self, "alternatives", alts)
        object.__setattr__(self, "players", players)
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "maxima", maxima)
        object.__setattr__(self, "hspec", dict(self.hspec or {}))

    def maximum_of(self, i):
        return self.maxima.get(i)

    @property
    def has_all_maxima(self) -> bool:
        return all(self.maxima.get(i) is not None for i in self.players)

    def with_grids(self, grids: Mapping) -> "GameInstance":
        return GameInstance(self.alternatives, self.players, grids, self.hspec, self.maxima)

    def with_hspec(self, hspec: Mapping) -> "GameInstance":
        return GameInstance(self.alternatives, self.players, self.grids, hspec, self.maxima)


def maximum_family_grid(alternatives, maxima: Mapping, levels, per_player: int, seed: int = 0, z_height=None):
    """Random finite sample of each family R_i(a_i).

    Values come from ``levels`` and each valuation is lifted so that its
    value at ``a_i`` is the largest.  With ``z_height`` set, the first grid
    entry of every player is the Z-valuation peaking at ``a_i``.  Duplicates
    are skipped, so a grid may come out shorter when ``levels`` is small.
    """
    import random

    alts = _as_alternatives(alternatives)
    levels = sorted({rational(x) for x in levels})
    if any(x < 0 for x in levels):
        raise ValueError("levels must be non-negative")
    rng = random.Random(seed)
    grids = {}
    for i, peak in maxima.items():
        k = alts.index(peak)
        grid = []
        if z_height is not None:
            grid.append(z_valuation(alts, peak, z_height))
        attempts = 0
        while len(grid) < per_player and attempts < 100 * per_player:
            attempts += 1
            vals = [rng.choice(levels) for _ in alts]
            vals[k] = max(vals)
            v = Valuation(alts, tuple(vals), True)
            if v not in grid:
                grid.append(v)
        grids[i] = grid
    return grids

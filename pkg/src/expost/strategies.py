"""Strategy families: truth telling and its shifts, nearly truth telling over
a subset of alternatives, scaling, explicit tables and the maxima-plus-ten
profile.  A strategy maps a true valuation to an announcement."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional

from .model import Announcement, Valuation, rational

__all__ = [
    "gen_nearly_truthful",
    "gen_maxima_plus_ten",
    "Strategy",
    "ConstantOffset",
    "ValueOffset",
    "ConstantOff",
    "Truth",
    "ShiftedTruth",
    "NearlyTruth",
    "Scaling",
    "Table",
    "MaximaPlusTen",
    "make_maxima_plus_ten",
    "apply",
    "communication_cost",
]


@dataclass(frozen=True)
class ConstantOffset:
    value: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "value", rational(self.value))

    def __call__(self, v: Valuation) -> Fraction:
        return self.value


@dataclass(frozen=True)
class ValueOffset:
    """Offset ``scale * v(alternative) + shift``; lets the shift depend on v."""

    alternative: object
    scale: Fraction = Fraction(1)
    shift: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "scale", rational(self.scale))
        object.__setattr__(self, "shift", rational(self.shift))

    def __call__(self, v: Valuation) -> Fraction:
        return self.scale * v[self.alternative] + self.shift


class Strategy:
    """Base class.  Subclasses implement :meth:`apply`."""

    kind = "abstract"

    def apply(self, v: Valuation) -> Announcement:
        raise NotImplementedError

    def communication_cost(self, n_alternatives: int) -> int:
        return n_alternatives

    def __call__(self, v: Valuation) -> Announcement:
        return self.apply(v)


@dataclass(frozen=True)
class Truth(Strategy):
    kind = "truth"

    def apply(self, v):
        return Announcement(v.alternatives, v.values)


@dataclass(frozen=True)
class ShiftedTruth(Strategy):
    """Report ``v(a) + f(v)``.

    ``per_alternative`` adds a fixed extra amount on named alternatives; any
    non-constant extra breaks the near-truth shape and exists to build
    counterexamples.
    """

    offset: Callable = ConstantOffset()
    per_alternative: Optional[Mapping] = None
    kind = "shifted_truth"

    def __post_init__(self):
        if self.per_alternative is not None:
            object.__setattr__(
                self,
                "per_alternative",
                tuple((a, rational(x)) for a, x in dict(self.per_alternative).items()),
            )

    def apply(self, v):
        f = rational(self.offset(v))
        extra = dict(self.per_alternative or ())
        return Announcement(
            v.alternatives,
            tuple(x + f + extra.get(a, 0) for a, x in v.items()),
        )


@dataclass(frozen=True)
class NearlyTruth(Strategy):
    """Truth plus a common shift on ``subset``; a floor constant elsewhere.

    ``floor=None`` uses the largest admissible floor, the minimum announced
    value over ``subset``.
    """

    subset: tuple
    offset: Callable = ConstantOffset()
    floor: Optional[Fraction] = None
    kind = "nearly_truth"

    def __post_init__(self):
        subset = tuple(self.subset)
        if not subset:
            raise ValueError("nearly-truth subset must be non-empty")
        if len(set(subset)) != len(subset):
            raise ValueError("duplicate alternatives in nearly-truth subset")
        object.__setattr__(self, "subset", subset)
        if self.floor is not None:
            object.__setattr__(self, "floor", rational(self.floor))

    def apply(self, v):
        missing = [a for a in self.subset if a not in v.alternatives]
        if missing:
            raise ValueError(f"subset alternatives {missing} not in the valuation")
        f = rational(self.offset(v))
        inside = set(self.subset)
        lowest = min(v[a] + f for a in self.subset)
        if self.floor is None:
            c = lowest
        elif self.floor > lowest:
            raise ValueError(
                f"floor {self.floor} exceeds the minimum {lowest} announced on the subset"
            )
        else:
            c = self.floor
        return Announcement(
            v.alternatives, tuple(x + f if a in inside else c for a, x in v.items())
        )

    def communication_cost(self, n_alternatives):
        return len(self.subset) + 1


@dataclass(frozen=True)
class Scaling(Strategy):
    factor: Fraction = Fraction(1)
    kind = "scaling"

    def __post_init__(self):
        object.__setattr__(self, "factor", rational(self.factor))

    def apply(self, v):
        return Announcement(v.alternatives, tuple(self.factor * x for x in v.values))


@dataclass(frozen=True)
class Table(Strategy):
    """Explicit valuation -> announcement map, optionally backed by a
    fallback strategy for valuations not listed."""

    entries: Mapping
    fallback: Optional[Strategy] = None
    kind = "table"

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))
        # match on the value vector so the non-negative flag does not matter
        object.__setattr__(self, "_lookup", {k.values: b for k, b in self.entries.items()})

    def apply(self, v):
        try:
            return self._lookup[v.values]
        except KeyError:
            if self.fallback is None:
                raise KeyError(f"table strategy has no entry for {v}") from None
            return self.fallback.apply(v)


@dataclass(frozen=True)
class ConstantOff:
    """Off-maxima rule returning the same value everywhere."""

    value: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "value", rational(self.value))

    def __call__(self, v: Valuation, a) -> Fraction:
        return self.value


@dataclass(frozen=True)
class MaximaPlusTen(Strategy):
    """``v(a_k) + 10`` on every maximum, ``off(v, a)`` in [0, 9] elsewhere."""

    maxima: tuple
    off: Callable = ConstantOff()
    kind = "maxima_plus_ten"

    LOW = Fraction(0)
    HIGH = Fraction(9)
    BONUS = Fraction(10)

    def __post_init__(self):
        maxima = tuple(dict.fromkeys(self.maxima))
        if not maxima:
            raise ValueError("maxima-plus-ten needs at least one maximum")
        object.__setattr__(self, "maxima", maxima)

    def apply(self, v):
        tops = set(self.maxima)
        out = []
        for a, x in v.items():
            if a in tops:
                out.append(x + self.BONUS)
                continue
            y = rational(self.off(v, a))
            if not self.LOW <= y <= self.HIGH:
                raise ValueError(f"off-maxima announcement {y} at {a!r} is outside [0, 9]")
            out.append(y)
        return Announcement(v.alternatives, tuple(out))


def make_maxima_plus_ten(maxima, off_rule: Callable = ConstantOff()) -> MaximaPlusTen:
    return MaximaPlusTen(tuple(maxima), off_rule)


def apply(strategy: Strategy, v: Valuation) -> Announcement:
    return strategy.apply(v)


def communication_cost(strategy: Strategy, n_alternatives: int) -> int:
    """How many numbers the strategy has to transmit."""
    return strategy.communication_cost(n_alternatives)


def gen_maxima_plus_ten(
    n: int = 3,
    num_alternatives: Optional[int] = None,
    levels=(0, 1, 2),
    per_player: int = 3,
    seed: int = 0,
    z_height=1,
):
    """Player ``p_k`` has maximum ``a_k``; everyone plays maxima-plus-ten
    with off-maxima bids of zero.  Grids start with a Z-valuation at the
    maximum unless ``z_height`` is None.

    Returns ``(instance, profile)``.
    """
    from .model import GameInstance, maximum_family_grid

    m = num_alternatives if num_alternatives is not None else n + 1
    if m < n:
        raise ValueError("need at least one alternative per player")
    alts = tuple(f"a{k}" for k in range(1, m + 1))
    players = tuple(f"p{k}" for k in range(1, n + 1))
    maxima = {p: alts[k] for k, p in enumerate(players)}
    grids = maximum_family_grid(alts, maxima, levels, per_player, seed, z_height)
    instance = GameInstance(alts, players, grids, maxima=maxima)
    strategy = make_maxima_plus_ten(tuple(maxima.values()))
    return instance, {p: strategy for p in players}


def gen_nearly_truthful(
    n: int = 3,
    num_alternatives: int = 5,
    subset_size: Optional[int] = None,
    levels=(0, "1/2", 1, 2),
    per_player: int = 3,
    seed: int = 0,
    z_height=1,
):
    """Player ``p_k`` has maximum ``a_k`` and everyone reports truthfully on
    ``a1 .. a_m'`` (``m' = subset_size``, default ``n + 1``) with the default
    floor elsewhere.  Each grid starts with a Z-valuation at the player's
    maximum unless ``z_height`` is None.

    Returns ``(instance, profile)``.
    """
    from .model import GameInstance, maximum_family_grid

    size = subset_size if subset_size is not None else min(n + 1, num_alternatives)
    if not n <= size <= num_alternatives:
        raise ValueError("the reported subset must contain every maximum")
    alts = tuple(f"a{k}" for k in range(1, num_alternatives + 1))
    players = tuple(f"p{k}" for k in range(1, n + 1))
    maxima = {p: alts[k] for k, p in enumerate(players)}
    grids = maximum_family_grid(alts, maxima, levels, per_player, seed, z_height)
    instance = GameInstance(alts, players, grids, maxima=maxima)
    strategy = NearlyTruth(alts[:size])
    return instance, {p: strategy for p in players}

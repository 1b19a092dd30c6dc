"""Welfare loss of equilibrium play against truthful play.

The ratio compares true welfare at the truthful outcome with true welfare at
the outcome of the equilibrium announcements.  Ties are read pessimistically:
the best truthful outcome against the worst equilibrium outcome.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .auctions import AuctionSpace
from .equilibrium import is_expost_equilibrium
from .model import AlternativeSet, GameInstance, Valuation, rational
from .strategies import NearlyTruth, Truth

__all__ = [
    "UndefinedRatioError",
    "PreconditionError",
    "EfficiencyReport",
    "efficiency_ratio",
    "worst_case_ratio",
    "homogeneity_degree",
    "compatibility_degree",
    "bound_check",
    "gen_example5",
    "gen_example6",
]


class UndefinedRatioError(ZeroDivisionError):
    pass


class PreconditionError(ValueError):
    pass


def _welfare_table(valuations: Mapping, players) -> list:
    rows = [valuations[i].values for i in players]
    return [sum(col, Fraction(0)) for col in zip(*rows)]


def _outcomes(true_totals, announced_totals):
    top = max(announced_totals)
    return [k for k, x in enumerate(announced_totals) if x == top]


def _ratio_parts(valuations: Mapping, truth_profile: Mapping, eq_profile: Mapping):
    players = list(valuations)
    alts = valuations[players[0]].alternatives
    true_totals = _welfare_table(valuations, players)
    dom_bids = {i: truth_profile[i].apply(valuations[i]) for i in players}
    eq_bids = {i: eq_profile[i].apply(valuations[i]) for i in players}
    dom = max(_outcomes(true_totals, _welfare_table(dom_bids, players)), key=lambda k: (true_totals[k], -k))
    eqs = _outcomes(true_totals, _welfare_table(eq_bids, players))
    eq = min(eqs, key=lambda k: (true_totals[k], k))
    if true_totals[eq] <= 0:
        raise UndefinedRatioError(
            f"equilibrium outcome {alts.labels[eq]} has welfare {true_totals[eq]}"
        )
    return alts.labels[dom], true_totals[dom], alts.labels[eq], true_totals[eq]


def efficiency_ratio(truth_profile: Mapping, eq_profile: Mapping, valuations: Mapping) -> Fraction:
    """Welfare at the truthful outcome over welfare at the equilibrium outcome."""
    _, sd, _, se = _ratio_parts(valuations, truth_profile, eq_profile)
    return sd / se


def _truth(instance):
    return {i: Truth() for i in instance.players}


def _scan(instance: GameInstance, eq_profile: Mapping, truth_profile: Optional[Mapping] = None):
    """Worst ratio over all grid profiles; first maximiser in enumeration order."""
    truth_profile = truth_profile or _truth(instance)
    players = instance.players
    grids = [instance.grids[i] for i in players]
    true_v = [[v.values for v in g] for g in grids]
    dom_b = [[truth_profile[i].apply(v).values for v in g] for i, g in zip(players, grids)]
    eq_b = [[eq_profile[i].apply(v).values for v in g] for i, g in zip(players, grids)]
    labels = instance.alternatives.labels
    best = None
    for combo in itertools.product(*(range(len(g)) for g in grids)):
        tt = [sum(col, Fraction(0)) for col in zip(*(true_v[p][k] for p, k in enumerate(combo)))]
        dt = [sum(col, Fraction(0)) for col in zip(*(dom_b[p][k] for p, k in enumerate(combo)))]
        et = [sum(col, Fraction(0)) for col in zip(*(eq_b[p][k] for p, k in enumerate(combo)))]
        dom = max(_outcomes(tt, dt), key=lambda c: (tt[c], -c))
        eq = min(_outcomes(tt, et), key=lambda c: (tt[c], c))
        if tt[eq] <= 0:
            raise UndefinedRatioError(
                f"equilibrium outcome {labels[eq]} has welfare {tt[eq]} at grid profile {combo}"
            )
        r = tt[dom] / tt[eq]
        if best is None or r > best[0]:
            best = (r, combo, labels[dom], tt[dom], labels[eq], tt[eq])
    return best


def worst_case_ratio(instance: GameInstance, eq_profile: Mapping, truth_profile: Optional[Mapping] = None):
    """``(ratio, valuation profile)`` maximising the ratio over the grids."""
    r, combo, *_ = _scan(instance, eq_profile, truth_profile)
    witness = {i: instance.grids[i][k] for i, k in zip(instance.players, combo)}
    return r, witness


def _value_sets(instance: GameInstance):
    """Per alternative, the set of values each player's grid takes there.

    Players draw independently, so the reachable value vectors at an
    alternative are exactly the product of these sets.
    """
    out = []
    for c in range(len(instance.alternatives)):
        out.append([sorted({v.values[c] for v in instance.grids[i]}) for i in instance.players])
    return out


def homogeneity_degree(instance: GameInstance) -> Fraction:
    """Supremum of ``n * max_i v_i(m) / sum_i v_i(m)`` over grid profiles and
    alternatives with positive total.  The family is homogeneous of every
    degree strictly above this value.  Zero-welfare alternatives are
    skipped."""
    n = len(instance.players)
    best = Fraction(0)
    for sets in _value_sets(instance):
        for vec in itertools.product(*sets):
            total = sum(vec, Fraction(0))
            if total > 0:
                best = max(best, n * max(vec) / total)
    return best


def compatibility_degree(instance: GameInstance) -> int:
    """Most players valuing one alternative positively in a grid profile."""
    return max(
        (sum(1 for s in sets if s[-1] > 0) for sets in _value_sets(instance)),
        default=0,
    )


@dataclass(frozen=True)
class EfficiencyReport:
    dominant_alternative: object
    equilibrium_alternative: object
    dominant_welfare: Fraction
    equilibrium_welfare: Fraction
    ratio: Fraction
    bound_kind: str
    bound_value: Fraction
    satisfied: bool
    witness: Mapping
    bounds: Mapping

    def as_dict(self) -> dict:
        return {
            "dominant_alternative": self.dominant_alternative,
            "equilibrium_alternative": self.equilibrium_alternative,
            "dominant_welfare": self.dominant_welfare,
            "equilibrium_welfare": self.equilibrium_welfare,
            "ratio": self.ratio,
            "bound": {"kind": self.bound_kind, "value": self.bound_value},
            "bounds": dict(self.bounds),
            "satisfied": self.satisfied,
        }


def bound_check(
    instance: GameInstance,
    eq_profile: Mapping,
    truth_profile: Optional[Mapping] = None,
    check_equilibrium: bool = True,
    jobs: int = 1,
) -> EfficiencyReport:
    """Worst-case ratio against the tightest applicable bound.

    The player-count bound always applies.  The homogeneity and
    compatibility bounds apply when every player has a designated maximum.
    Raises :class:`PreconditionError` if ``eq_profile`` is not an ex-post
    equilibrium on the instance.
    """
    if check_equilibrium:
        verdict = is_expost_equilibrium(instance, eq_profile, jobs=jobs)
        if not verdict.passed:
            raise PreconditionError(
                f"profile is not an ex-post equilibrium (witness: {verdict.witness})"
            )
    r, combo, dom_a, dom_w, eq_a, eq_w = _scan(instance, eq_profile, truth_profile)
    bounds = {"N-bound": Fraction(len(instance.players))}
    if instance.has_all_maxima:
        bounds["homogeneous"] = homogeneity_degree(instance)
        c = compatibility_degree(instance)
        if c > 0:
            bounds["compatible"] = Fraction(c)
    kind = min(bounds, key=lambda k: bounds[k])
    witness = {i: instance.grids[i][k] for i, k in zip(instance.players, combo)}
    return EfficiencyReport(
        dom_a, eq_a, dom_w, eq_w, r, kind, bounds[kind], r <= bounds[kind], witness, bounds
    )


# ---------------------------------------------------------------------------
# Tightness examples
# ---------------------------------------------------------------------------


def gen_example5(n: int, eps, max_alternatives: Optional[int] = None):
    """``n`` bidders, ``n`` goods; good ``k`` belongs to bidder ``k``'s
    interest.  A bidder values a bundle at 0 without its good, 1 with it
    (short of everything) and ``1 + eps`` for all goods.  Everyone reports
    truthfully on the grand-bundle allocations and zero elsewhere.

    Returns ``(space, instance, eq_profile)``.
    """
    if n < 2:
        raise ValueError("example needs at least two bidders")
    eps = rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    goods = tuple(chr(ord("a") + k) for k in range(n))
    players = tuple(f"p{k + 1}" for k in range(n))
    cap = max_alternatives if max_alternatives is not None else (n + 1) ** n
    space = AuctionSpace(goods, players, cap)
    everything = frozenset(goods)
    grids = {}
    for k, p in enumerate(players):
        vals = []
        for label in space.alternatives:
            bundle = space.bundle_of(p, label)
            if goods[k] not in bundle:
                vals.append(Fraction(0))
            elif bundle == everything:
                vals.append(1 + eps)
            else:
                vals.append(Fraction(1))
        grids[p] = [Valuation(space.alternatives, tuple(vals), True)]
    grand = tuple(space.grand_bundle_allocation(p) for p in players)
    maxima = dict(zip(players, grand))
    instance = GameInstance(space.alternatives, players, grids, maxima=maxima)
    profile = {p: NearlyTruth(grand, floor=0) for p in players}
    return space, instance, profile


def gen_example6(num_alternatives: int, n: int, eps):
    """Alternatives ``m0 .. m{M-1}``; bidder ``i`` values ``m_i`` at
    ``1 + i*eps``, ``m0`` at 1 and the rest at 0, and reports nearly
    truthfully on everything except ``m0``.

    Returns ``(instance, eq_profile)``.
    """
    if num_alternatives < n + 1:
        raise ValueError("need at least n + 1 alternatives")
    eps = rational(eps)
    alts = AlternativeSet(tuple(f"m{k}" for k in range(num_alternatives)))
    players = tuple(f"p{k}" for k in range(1, n + 1))
    grids, maxima = {}, {}
    for k, p in enumerate(players, start=1):
        vals = {a: Fraction(0) for a in alts}
        vals["m0"] = Fraction(1)
        vals[f"m{k}"] = 1 + k * eps
        grids[p] = [Valuation.from_map(alts, vals, nonnegative=True)]
        maxima[p] = f"m{k}"
    instance = GameInstance(alts, players, grids, maxima=maxima)
    subset = tuple(a for a in alts if a != "m0")
    profile = {p: NearlyTruth(subset) for p in players}
    return instance, profile

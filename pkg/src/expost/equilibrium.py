"""Exact ex-post equilibrium decision on finite valuation grids.

A profile is an equilibrium for the whole class of VCG games when, for every
non-empty group of players, every grid profile, every welfare-maximizing
outcome of the announcements and every player in the group, the player's
true value plus the others' announcements is maximal at that outcome.  A
deviating player can steer the mechanism to any alternative, so this is the
same as "no announcement does better", and the check never enumerates
deviations.
"""
from __future__ import annotations

import itertools
import multiprocessing
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .model import (
    Announcement,
    GameInstance,
    TieBreakPolicy,
    Valuation,
    social_welfare,
    utility,
    welfare_maximizers,
    z_valuation,
)
from .parallelogram import SampledFunction, check_mve
from .strategies import Strategy, Table

__all__ = [
    "Witness",
    "EquilibriumVerdict",
    "MissingZValuationError",
    "best_response_gap",
    "is_expost_equilibrium",
    "replay_witness",
    "deviation_crosscheck",
    "verify_near_truth_on_maxima",
    "extract_g",
    "check_mve_pair",
    "check_structural_lemmas",
    "check_g_consistency",
    "PASS",
    "FAIL",
]

PASS = "PASS"
FAIL = "FAIL"


@dataclass(frozen=True)
class Witness:
    players: tuple
    valuations: Mapping
    chosen: object
    deviator: object
    better: object
    gap: Fraction
    grid_indices: tuple = ()


@dataclass(frozen=True)
class EquilibriumVerdict:
    status: str
    witness: Optional[Witness] = None
    cells_checked: int = 0
    subsets_checked: int = 0

    @property
    def passed(self) -> bool:
        return self.status == PASS


def _best_deviation(v_i: Valuation, opponents: Mapping, a):
    alts = v_i.alternatives
    score = list(v_i.values)
    for b in opponents.values():
        score = [x + y for x, y in zip(score, b.values)]
    top = max(score)
    best = next(alt for alt, x in zip(alts, score) if x == top)
    return top - score[alts.index(a)], best


def best_response_gap(i, v_i: Valuation, opponents: Mapping, a) -> Fraction:
    """How much ``i`` loses at ``a`` compared with its best alternative,
    given the opponents' announcements.  Zero iff ``a`` is optimal for ``i``."""
    return _best_deviation(v_i, {j: b for j, b in opponents.items() if j != i}, a)[0]


# ---------------------------------------------------------------------------
# Decision procedure
# ---------------------------------------------------------------------------


def _announcements(instance: GameInstance, profile: Mapping):
    missing = [i for i in instance.players if i not in profile]
    if missing:
        raise ValueError(f"no strategy for players {missing}")
    bids = {}
    for i in instance.players:
        if not instance.grids[i]:
            raise ValueError(f"empty valuation grid for player {i!r}")
        bids[i] = [profile[i].apply(v).values for v in instance.grids[i]]
    return bids


def _subsets(players: Sequence):
    for size in range(1, len(players) + 1):
        yield from itertools.combinations(players, size)


def _scan_subset(instance, bids, group):
    """Scan every grid profile of ``group``; return (witness or None, cells)."""
    alts = instance.alternatives
    labels = alts.labels
    m = len(labels)
    grids = [instance.grids[i] for i in group]
    cells = 0
    for combo in itertools.product(*(range(len(g)) for g in grids)):
        cells += 1
        own = [bids[i][k] for i, k in zip(group, combo)]
        total = [sum(col, Fraction(0)) for col in zip(*own)]
        top = max(total)
        chosen = [c for c in range(m) if total[c] == top]
        scores = []
        for pos, (i, k) in enumerate(zip(group, combo)):
            v = grids[pos][k].values
            scores.append([v[c] + total[c] - own[pos][c] for c in range(m)])
        for c in chosen:
            for pos, i in enumerate(group):
                sc = scores[pos]
                best = max(sc)
                if sc[c] < best:
                    better = labels[sc.index(best)]
                    w = Witness(
                        players=tuple(group),
                        valuations={j: grids[q][k] for q, (j, k) in enumerate(zip(group, combo))},
                        chosen=labels[c],
                        deviator=i,
                        better=better,
                        gap=best - sc[c],
                        grid_indices=tuple(combo),
                    )
                    return w, cells
    return None, cells


# Shared with forked workers so strategies never need pickling.
_WORK = {}


def _scan_worker(k):
    instance, bids, groups = _WORK["job"]
    return _scan_subset(instance, bids, groups[k])


def is_expost_equilibrium(instance: GameInstance, profile: Mapping, jobs: int = 1) -> EquilibriumVerdict:
    """Decide the ex-post equilibrium property exactly on the grids.

    The witness on failure is the first one in enumeration order (group
    size, then group, then grid indices, then alternative, then player), so
    it does not depend on ``jobs``.
    """
    bids = _announcements(instance, profile)
    groups = list(_subsets(instance.players))
    results = None
    if jobs > 1 and len(groups) > 1:
        try:
            ctx = multiprocessing.get_context("fork")
        except ValueError:
            ctx = None
        if ctx is not None:
            _WORK["job"] = (instance, bids, groups)
            try:
                with ctx.Pool(min(jobs, len(groups))) as pool:
                    results = pool.map(_scan_worker, range(len(groups)))
            finally:
                _WORK.clear()
    cells = 0
    for k, group in enumerate(groups):
        w, n = results[k] if results is not None else _scan_subset(instance, bids, group)
        cells += n
        if w is not None:
            return EquilibriumVerdict(FAIL, w, cells, k + 1)
    return EquilibriumVerdict(PASS, None, cells, len(groups))


def replay_witness(profile: Mapping, witness: Witness, hspec=None) -> Fraction:
    """Re-evaluate a witness through the utility function.

    The deviator's utility when the mechanism picks ``chosen`` is compared
    with its utility after announcing its true valuation, under a tie-break
    favouring ``better``.  Returns the gain, which equals the witness gap.
    """
    announced = {j: profile[j].apply(v) for j, v in witness.valuations.items()}
    i = witness.deviator
    v_i = witness.valuations[i]
    alts = v_i.alternatives
    if witness.chosen not in welfare_maximizers(announced, alts):
        raise AssertionError("witness outcome is not a welfare maximizer of the announcements")

    def favour(a):
        return TieBreakPolicy((a,) + tuple(x for x in alts if x != a))

    stay = utility(i, v_i, announced, hspec, favour(witness.chosen))
    deviated = dict(announced)
    deviated[i] = Announcement(alts, v_i.values)
    move = utility(i, v_i, deviated, hspec, favour(witness.better))
    return move - stay


def deviation_crosscheck(
    instance: GameInstance, profile: Mapping, samples: int = 100, seed: int = 0
) -> dict:
    """Randomized check that the gap characterisation matches explicit
    deviations.

    For random cells a random Table deviation is evaluated under every tie
    break; its gain must never exceed the computed gap.  A targeted
    deviation (true values plus a premium on the best alternative) must
    gain exactly the gap.
    """
    rng = random.Random(seed)
    bids = {i: [profile[i].apply(v) for v in instance.grids[i]] for i in instance.players}
    groups = list(_subsets(instance.players))
    hspec = instance.hspec or None
    disagreements = []
    for _ in range(samples):
        group = rng.choice(groups)
        combo = [rng.randrange(len(instance.grids[i])) for i in group]
        vals = {i: instance.grids[i][k] for i, k in zip(group, combo)}
        announced = {i: bids[i][k] for i, k in zip(group, combo)}
        alts = instance.alternatives
        chosen = rng.choice(welfare_maximizers(announced, alts))
        i = rng.choice(group)
        opponents = {j: b for j, b in announced.items() if j != i}
        gap, best = _best_deviation(vals[i], opponents, chosen)
        stay = vals[i][chosen] + social_welfare(opponents, chosen)

        scale = 2 + max(abs(x) for b in announced.values() for x in b.values)
        random_bid = Announcement(
            alts,
            tuple(Fraction(rng.randint(-4 * int(scale), 4 * int(scale)), rng.randint(1, 4)) for _ in alts),
        )
        deviation = Table({vals[i]: random_bid})
        dev = dict(announced)
        dev[i] = deviation.apply(vals[i])
        gains = [
            vals[i][a] + social_welfare(opponents, a) - stay
            for a in welfare_maximizers(dev, alts)
        ]
        if max(gains) > gap:
            disagreements.append(("random deviation beats gap", group, combo, i, chosen))

        premium = Announcement(
            alts, tuple(x + (scale * 4 if a == best else 0) for a, x in vals[i].items())
        )
        dev[i] = premium
        targeted = [
            vals[i][a] + social_welfare(opponents, a) - stay
            for a in welfare_maximizers(dev, alts)
        ]
        if min(targeted) != gap:
            disagreements.append(("targeted deviation misses gap", group, combo, i, chosen))
        if hspec is not None and i in hspec:
            # charges depend only on the others' reports: gains are unchanged
            order = TieBreakPolicy((best,) + tuple(x for x in alts if x != best))
            charged = utility(i, vals[i], dev, hspec, order)
            plain = utility(i, vals[i], dev, None, order)
            if plain - charged != hspec[i](opponents):
                disagreements.append(("charge depends on own report", group, combo, i, chosen))
    return {"samples": samples, "disagreements": disagreements}


# ---------------------------------------------------------------------------
# Structure on the maxima
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NearTruthEntry:
    valuation: Valuation
    offsets: tuple
    constant: bool


def _all_maxima(instance: GameInstance) -> tuple:
    if not instance.has_all_maxima:
        raise ValueError("every player needs a designated maximum")
    return tuple(dict.fromkeys(instance.maxima[i] for i in instance.players))


def verify_near_truth_on_maxima(instance: GameInstance, profile: Mapping) -> dict:
    """Per player, the offsets ``b(v)(a_k) - v(a_k)`` over all maxima for
    each grid valuation, flagged constant or not."""
    maxima = _all_maxima(instance)
    report = {}
    for i in instance.players:
        rows = []
        for v in instance.grids[i]:
            b = profile[i].apply(v)
            offs = tuple(b[a] - v[a] for a in maxima)
            rows.append(NearTruthEntry(v, offs, len(set(offs)) == 1))
        report[i] = rows
    return report


def near_truth_constant(report: Mapping) -> bool:
    return all(row.constant for rows in report.values() for row in rows)


# ---------------------------------------------------------------------------
# g-functions
# ---------------------------------------------------------------------------


def extract_g(strategy: Strategy, alternatives, a, a2, s_grid) -> SampledFunction:
    """Samples of ``s -> b(Z^(a,s))(a) - b(Z^(a,s))(a2)``."""
    grid = sorted({Fraction(s) for s in s_grid})
    values = []
    for s in grid:
        bid = strategy.apply(z_valuation(alternatives, a, s))
        values.append(bid[a] - bid[a2])
    return SampledFunction(tuple(grid), tuple(values))


def check_mve_pair(g1: SampledFunction, g2: SampledFunction):
    """None when the sampled pair satisfies mean value exclusion, else the
    first counterexample."""
    return check_mve(g1, g2)


def check_g_consistency(strategy: Strategy, valuations, a, a2, g: SampledFunction) -> list:
    """Grid-level consistency of bid differences with a g-table.

    For each valuation maximised at ``a`` whose spread ``v(a) - v(a2)`` is on
    the g-grid, the announced spread must equal ``g`` there.  Returns the
    mismatches.
    """
    bad = []
    for v in valuations:
        if not v.has_maximum(a):
            continue
        s = v[a] - v[a2]
        if s <= 0 or s not in g.grid:
            continue
        b = strategy.apply(v)
        if b[a] - b[a2] != g(s):
            bad.append((v, s, b[a] - b[a2], g(s)))
    return bad


# ---------------------------------------------------------------------------
# Structural lemmas
# ---------------------------------------------------------------------------


class MissingZValuationError(ValueError):
    pass


NOT_APPLICABLE = "N/A"


@dataclass
class LemmaResult:
    status: str = PASS
    checked: int = 0
    failure: Optional[str] = None

    def fail(self, msg: str):
        if self.status != FAIL:
            self.status, self.failure = FAIL, msg


def _z_peak(v: Valuation):
    positive = [(a, x) for a, x in v.items() if x != 0]
    if len(positive) == 1 and positive[0][1] > 0 and all(x >= 0 for x in v.values):
        return positive[0]
    return None


def _z_probes(instance, i, peaks, heights):
    """Z-valuations for player ``i`` peaking at one of ``peaks``: those in
    the grid, plus constructed ones at ``heights``."""
    found = []
    for v in instance.grids[i]:
        z = _z_peak(v)
        if z is not None and z[0] in peaks:
            found.append(v)
    for a in peaks:
        for s in heights or ():
            v = z_valuation(instance.alternatives, a, s)
            if v not in found:
                found.append(v)
    return found


def check_structural_lemmas(instance: GameInstance, profile: Mapping, heights=None) -> dict:
    """Check the necessary conditions every equilibrium has to meet.

    * ``l1``   strict maximum of ``v`` stays the strict maximum of ``b(v)``
    * ``old2`` equal values get equal bids (unrestricted families, n >= 2)
    * ``old4`` Z-valuations announce exactly their height as spread
      (unrestricted families, n >= 3, |A| >= 3)
    * ``l6``   under ``Z^(a_i,t)``, equal bids on the other maxima (n >= 3)
    * ``l7``   under ``Z^(a_i,t)``, other maxima bid at least as much as any
      non-own alternative (n >= 2)
    * ``l8``   under ``Z^(a_i,s)``, spread ``s`` towards every other maximum
      (n >= 3, |A| >= 3)

    Lemmas whose hypotheses fail are reported as ``"N/A"``.  Z-valuations
    come from the grid, or are built at ``heights`` when given.
    """
    n = len(instance.players)
    alts = instance.alternatives
    out = {k: LemmaResult() for k in ("l1", "old2", "old4", "l6", "l7", "l8")}

    for i in instance.players:
        strat = profile[i]
        for v in instance.grids[i]:
            b = strat.apply(v)
            top = v.argmax()
            if len(top) == 1:
                out["l1"].checked += 1
                a = top[0]
                if any(b[a] <= b[x] for x in alts if x != a):
                    out["l1"].fail(f"player {i}: {v} peaks at {a} but bids {b}")

    restricted = instance.has_all_maxima
    if restricted or n < 2:
        out["old2"].status = NOT_APPLICABLE
    if restricted or n < 3 or len(alts) < 3:
        out["old4"].status = NOT_APPLICABLE
    if not restricted or n < 3:
        out["l6"].status = NOT_APPLICABLE
    if not restricted or n < 2:
        out["l7"].status = NOT_APPLICABLE
    if not restricted or n < 3 or len(alts) < 3:
        out["l8"].status = NOT_APPLICABLE

    if out["old2"].status != NOT_APPLICABLE:
        for i in instance.players:
            for v in instance.grids[i]:
                b = profile[i].apply(v)
                for x, y in itertools.combinations(alts, 2):
                    if v[x] == v[y]:
                        out["old2"].checked += 1
                        if b[x] != b[y]:
                            out["old2"].fail(f"player {i}: v({x}) = v({y}) in {v}, bids differ")

    if out["old4"].status != NOT_APPLICABLE:
        for i in instance.players:
            probes = _z_probes(instance, i, set(alts), heights)
            if not probes:
                raise MissingZValuationError(f"no Z-valuation available for player {i!r}")
            for z in probes:
                a, s = _z_peak(z)
                b = profile[i].apply(z)
                for x in alts:
                    if x != a:
                        out["old4"].checked += 1
                        if b[a] - b[x] != s:
                            out["old4"].fail(f"player {i}: Z({a},{s}) spread to {x} is {b[a] - b[x]}")

    if restricted and n >= 2:
        maxima = _all_maxima(instance)
        for i in instance.players:
            own = instance.maxima[i]
            others = [a for a in maxima if a != own]
            probes = _z_probes(instance, i, {own}, heights)
            if not probes:
                raise MissingZValuationError(
                    f"no Z-valuation peaking at {own!r} available for player {i!r}"
                )
            for z in probes:
                _, s = _z_peak(z)
                try:
                    b = profile[i].apply(z)
                except KeyError as exc:
                    raise MissingZValuationError(str(exc)) from None
                tag = f"player {i}: Z({own},{s})"
                if out["l6"].status != NOT_APPLICABLE:
                    for x, y in itertools.combinations(others, 2):
                        out["l6"].checked += 1
                        if b[x] != b[y]:
                            out["l6"].fail(f"{tag} bids {b[x]} on {x} but {b[y]} on {y}")
                for x in others:
                    for y in alts:
                        if y != own:
                            out["l7"].checked += 1
                            if b[x] < b[y]:
                                out["l7"].fail(f"{tag} bids less on maximum {x} than on {y}")
                if out["l8"].status != NOT_APPLICABLE:
                    for x in others:
                        out["l8"].checked += 1
                        if b[own] - b[x] != s:
                            out["l8"].fail(f"{tag} spread to {x} is {b[own] - b[x]}, not {s}")
    return out

"""Brute-force reference implementations used to freeze expected values.

Nothing here calls the library's decision procedures; only plain data
access (valuation values, strategy application) is shared.
"""
from __future__ import annotations

import itertools
from fractions import Fraction


def table_sum(tables, k):
    total = Fraction(0)
    for t in tables:
        total += t.values[k]
    return total


def argmax_all(tables):
    n = len(tables[0].values)
    totals = [table_sum(tables, k) for k in range(n)]
    best = max(totals)
    return [k for k in range(n) if totals[k] == best]


def outcomes_over_orders(tables):
    """Alternatives picked by some priority order among the welfare maximisers."""
    n = len(tables[0].values)
    picked = set()
    for order in itertools.permutations(range(n)):
        totals = [table_sum(tables, k) for k in range(n)]
        best = max(totals)
        picked.add(next(k for k in order if totals[k] == best))
    return sorted(picked)


def deviation_gain(i, valuations, bids):
    """Largest gain of player ``i`` over any chosen outcome, by deviating to
    a bid that forces each alternative in turn (huge spike there)."""
    players = list(valuations)
    n = len(valuations[i].values)
    spike = 1 + sum(abs(x) for p in players for x in bids[p].values) + sum(
        abs(x) for x in valuations[i].values
    )
    worst = None
    for a in outcomes_over_orders([bids[p] for p in players]):
        stay = valuations[i].values[a] + sum(bids[j].values[a] for j in players if j != i)
        best = stay
        for target in range(n):
            dev = [Fraction(0)] * n
            dev[target] = spike
            tables = [bids[j] for j in players if j != i]
            totals = [sum((t.values[k] for t in tables), Fraction(0)) + dev[k] for k in range(n)]
            won = max(range(n), key=lambda k: totals[k])
            got = valuations[i].values[won] + sum(bids[j].values[won] for j in players if j != i)
            best = max(best, got)
        gain = best - stay
        worst = gain if worst is None else max(worst, gain)
    return worst


def brute_equilibrium(instance, profile):
    """True iff no player in any non-empty group gains by any forcing bid."""
    players = instance.players
    for r in range(1, len(players) + 1):
        for group in itertools.combinations(players, r):
            for combo in itertools.product(*(instance.grids[p] for p in group)):
                vals = dict(zip(group, combo))
                bids = {p: profile[p].apply(v) for p, v in vals.items()}
                for i in group:
                    if deviation_gain(i, vals, bids) > 0:
                        return False
    return True


def mve_triples(f1, f2, grid):
    """Every grid triple ``(s, t, y)`` violating either clause."""
    bad = []
    for s in grid:
        for t in grid:
            for first, second, clause in ((f1, f2, 1), (f2, f1, 2)):
                y = second(t)
                fs = first(s)
                if (s < y <= fs) or (fs <= y < s):
                    bad.append((s, t, y, clause))
    return bad


def subsets(goods):
    return [frozenset(c) for r in range(len(goods) + 1) for c in itertools.combinations(goods, r)]


def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [part[k] | {head}] + part[k + 1 :]
        yield part + [frozenset({head})]

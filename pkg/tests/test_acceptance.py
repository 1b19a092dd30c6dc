"""End-to-end acceptance checks.

Each test carries a ``criterion`` mark; a one-line verdict per criterion is
printed in the terminal summary.
"""
import random
import time
from fractions import Fraction as F

import pytest

from expost.auctions import gen_section5_sprime, is_quasi_field, partition_field, sprime_extension_report
from expost.efficiency import (
    bound_check,
    compatibility_degree,
    efficiency_ratio,
    gen_example5,
    gen_example6,
    homogeneity_degree,
    worst_case_ratio,
)
from expost.equilibrium import (
    FAIL,
    PASS,
    check_structural_lemmas,
    is_expost_equilibrium,
    near_truth_constant,
    replay_witness,
    verify_near_truth_on_maxima,
)
from expost.model import AlternativeSet, GameInstance, Valuation
from expost.parallelogram import (
    IntervalMapFunction,
    build_compatible_pair,
    check_mve,
    decompose,
    random_decomposition,
    refining_grid,
)
from expost.strategies import NearlyTruth, Scaling, ShiftedTruth, Truth, gen_maxima_plus_ten, gen_nearly_truthful

import oracles
from instances import A3, crafted_unequal_maxima, full_grid

LEMMAS = ("l1", "l6", "l7", "l8")
EPSILONS = ("1/10", "1/100", "1/1000")


def near_truth_instance(seed):
    return gen_nearly_truthful(3, 5, 4, (0, "1/2", 1, 2), 3, seed=seed)


def single_profile(inst):
    return {p: inst.grids[p][0] for p in inst.players}


# ---------------------------------------------------------------------------


def _flat_on_subset(inst, subset):
    return any(len({v[a] for a in subset}) == 1 for g in inst.grids.values() for v in g)


@pytest.mark.criterion(1, "nearly truth telling over a superset of the maxima is an equilibrium")
@pytest.mark.parametrize("seed", range(10))
def test_nearly_truthful_passes(seed):
    inst, prof = near_truth_instance(seed)
    subset = prof["p1"].subset
    assert set(subset) == {"a1", "a2", "a3", "a4"}
    assert all(len(g) == 3 for g in inst.grids.values())
    start = time.perf_counter()
    verdict = is_expost_equilibrium(inst, prof)
    assert time.perf_counter() - start < 60
    assert verdict.passed == oracles.brute_equilibrium(inst, prof)
    if verdict.status == FAIL:
        # with the floor at the minimum, a valuation flat on the subset bids
        # the same everywhere, so an alternative outside the subset ties
        w = verdict.witness
        assert w.chosen not in subset and w.better in subset
        assert len({w.valuations[w.deviator][a] for a in subset}) == 1
    else:
        assert verdict.status == PASS and verdict.subsets_checked == 7
    if not _flat_on_subset(inst, subset):
        assert verdict.status == PASS
    strict = {p: NearlyTruth(subset, floor=-1) for p in inst.players}
    assert is_expost_equilibrium(inst, strict).status == PASS


@pytest.mark.criterion(2, "non-truthful announcements fail with a replayable witness")
@pytest.mark.parametrize("strategy", [Scaling(2), ShiftedTruth(per_alternative={"a2": 1})], ids=["scaling", "skewed"])
def test_deviations_found(strategy):
    grid = full_grid(A3)
    assert len(grid) == 27
    inst = GameInstance(A3, ("p1", "p2"), {"p1": grid, "p2": grid})
    prof = {"p1": strategy, "p2": strategy}
    verdict = is_expost_equilibrium(inst, prof)
    assert verdict.status == FAIL
    assert verdict.witness.gap > 0
    assert replay_witness(prof, verdict.witness) == verdict.witness.gap
    assert not oracles.brute_equilibrium(inst, prof)


@pytest.mark.criterion(3, "maxima plus ten is an equilibrium with offset 10 on every maximum")
def test_maxima_plus_ten():
    inst, prof = gen_maxima_plus_ten(3)
    assert is_expost_equilibrium(inst, prof).status == PASS
    rep = verify_near_truth_on_maxima(inst, prof)
    assert near_truth_constant(rep)
    assert {o for rows in rep.values() for r in rows for o in r.offsets} == {10}
    tops = set(inst.maxima.values())
    for p in inst.players:
        for v in inst.grids[p]:
            b = prof[p].apply(v)
            assert all(0 <= b[a] <= 9 for a in inst.alternatives if a not in tops)


@pytest.mark.criterion(4, "worst-case ratio at most n, tight on the grand-bundle auction")
@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("seed", range(4))
def test_ratio_bounded_by_players(n, seed):
    inst, prof = gen_nearly_truthful(n, n + 2, n, ("1/2", 1, 2), 4, seed=seed)
    prof = {p: NearlyTruth(s.subset, floor=0) for p, s in prof.items()}
    assert is_expost_equilibrium(inst, prof).passed
    ratio, _ = worst_case_ratio(inst, prof)
    assert 1 <= ratio <= n


@pytest.mark.criterion(4, "worst-case ratio at most n, tight on the grand-bundle auction")
@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("eps", EPSILONS)
def test_grand_bundle_tightness(n, eps):
    eps = F(eps)
    _, inst, prof = gen_example5(n, eps)
    ratio, _ = worst_case_ratio(inst, prof)
    assert ratio == n / (1 + eps)
    assert ratio > n - n * eps


@pytest.mark.criterion(5, "homogeneous and compatible degree-2 families stay within ratio 2")
def test_homogeneous_family():
    alts = AlternativeSet(("a1", "a2", "a3", "a4"))
    players = ("p1", "p2", "p3")
    grids, maxima = {}, {}
    for k, p in enumerate(players):
        rows = []
        for rest in (1, F(3, 2), 2):
            vals = [F(rest)] * 4
            vals[k] = F(2)
            rows.append(Valuation(alts, tuple(vals), True))
        grids[p], maxima[p] = rows, alts.labels[k]
    inst = GameInstance(alts, players, grids, maxima=maxima)
    # worst mix: one player at 2, two at 1, so 3 * 2 / 4
    assert homogeneity_degree(inst) == F(3, 2)
    prof = {p: NearlyTruth(("a1", "a2", "a3"), floor=0) for p in players}
    assert is_expost_equilibrium(inst, prof).passed
    assert worst_case_ratio(inst, prof)[0] <= 2
    rep = bound_check(inst, prof)
    assert rep.bounds["homogeneous"] == F(3, 2) and rep.satisfied


@pytest.mark.criterion(5, "homogeneous and compatible degree-2 families stay within ratio 2")
def test_compatible_family():
    alts = AlternativeSet(("a1", "a2", "a3", "a4"))
    support = {"p1": ("a1", "a3", "a4"), "p2": ("a2", "a1", "a4"), "p3": ("a3", "a2")}
    grids, maxima = {}, {}
    for p, (peak, *rest) in support.items():
        rows = []
        for mask in range(2 ** len(rest)):
            vals = dict.fromkeys(alts, F(0))
            vals[peak] = F(2)
            for j, a in enumerate(rest):
                vals[a] = F(1 + (mask >> j & 1))
            rows.append(Valuation.from_map(alts, vals, nonnegative=True))
        grids[p], maxima[p] = rows, peak
    inst = GameInstance(alts, tuple(support), grids, maxima=maxima)
    # every alternative has exactly two players valuing it positively
    assert compatibility_degree(inst) == 2
    prof = {p: NearlyTruth(("a1", "a2", "a3"), floor=0) for p in inst.players}
    assert is_expost_equilibrium(inst, prof).passed
    ratio, _ = worst_case_ratio(inst, prof)
    assert 1 < ratio <= 2
    assert bound_check(inst, prof).bounds["compatible"] == 2


@pytest.mark.criterion(6, "lone fallback alternative example")
def test_lone_fallback_example():
    inst, prof = gen_example6(5, 3, "1/10")
    rep = bound_check(inst, prof)
    assert rep.equilibrium_alternative == "m3"
    assert (rep.equilibrium_welfare, rep.dominant_welfare) == (F(13, 10), 3)
    assert rep.ratio == F(30, 13)
    ratios = []
    for eps in EPSILONS:
        inst, prof = gen_example6(5, 3, eps)
        ratios.append(efficiency_ratio({p: Truth() for p in inst.players}, prof, single_profile(inst)))
    assert ratios == sorted(set(ratios)) and ratios[-1] < 3


# ---------------------------------------------------------------------------


def _random_pairs(count=100, seed=7):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        d = random_decomposition(rng)
        out.append((d, *build_compatible_pair(d)))
    return out


@pytest.fixture(scope="module")
def pairs():
    return _random_pairs()


def _assert_structure(d, h1, h2, grid):
    segs = d.segments
    assert all(a.upper <= b.lower for a, b in zip(segs, segs[1:]))
    for a, b, ga, gb in zip(segs, segs[1:], d.signs, d.signs[1:]):
        if a.upper == b.lower:
            assert ga * gb == -1
    for x in grid:
        if not any(s.in_closure(x) for s in segs):
            assert h1(x) == x and h2(x) == x


@pytest.mark.criterion(7, "compatible pairs round-trip through build and decompose")
def test_round_trip(pairs):
    start = time.perf_counter()
    assert len(pairs) == 100
    assert any(len(d.segments) >= 4 for d, _, _ in pairs)
    assert any(d.choices for d, _, _ in pairs)
    for d, h1, h2 in pairs:
        assert len(d.segments) <= 6
        assert all(0 < s.lower < s.upper <= 20 for s in d.segments)
        grid = refining_grid(h1, h2, extra=[s.midpoint for s in d.segments])
        assert check_mve(h1, h2, grid) is None
        back = decompose(h1, h2)
        assert back.segments == d.segments
        assert back.signs == d.signs
        assert back.choices == d.choices
        _assert_structure(back, h1, h2, grid)
    assert time.perf_counter() - start < 30


def _swap_on(seg, f, other):
    mine = tuple(p for p in f.pieces if p[:2] != (seg.lower, seg.upper))
    theirs = next(p for p in other.pieces if p[:2] == (seg.lower, seg.upper))
    return IntervalMapFunction(mine + (theirs,), f.points)


def _mutations(pairs, count=20):
    rng = random.Random(11)
    out = []
    for d, h1, h2 in pairs:
        if len(out) == count:
            break
        if d.segments:
            seg = rng.choice(d.segments)
            out.append((_swap_on(seg, h1, h2), _swap_on(seg, h2, h1)))
        else:
            x = F(rng.randint(1, 40), 2)
            out.append((h1.with_point(x, x + 1), h2))
    return out


@pytest.mark.criterion(8, "mean value exclusion agrees with a triple-loop oracle")
def test_mve_oracle(pairs):
    for _, h1, h2 in pairs:
        grid = refining_grid(h1, h2)
        assert check_mve(h1, h2, grid) is None
        assert oracles.mve_triples(h1, h2, grid) == []
    mutated = _mutations(pairs)
    assert len(mutated) == 20
    assert any(not f.pieces for f, _ in mutated)
    for m1, m2 in mutated:
        grid = refining_grid(m1, m2)
        hit = check_mve(m1, m2, grid)
        assert hit is not None
        assert tuple(hit) in oracles.mve_triples(m1, m2, grid)


# ---------------------------------------------------------------------------


@pytest.mark.criterion(9, "structural lemmas agree with the equilibrium checker")
@pytest.mark.parametrize(
    "make",
    [lambda: near_truth_instance(0), lambda: near_truth_instance(2), lambda: gen_maxima_plus_ten(3)],
    ids=["nearly-0", "nearly-2", "plus-ten"],
)
def test_lemmas_on_equilibria(make):
    inst, prof = make()
    assert is_expost_equilibrium(inst, prof).passed
    res = check_structural_lemmas(inst, prof)
    for k in LEMMAS:
        assert res[k].status == PASS and res[k].checked > 0


@pytest.mark.criterion(9, "structural lemmas agree with the equilibrium checker")
def test_lemmas_on_crafted_failure():
    inst, prof = crafted_unequal_maxima()
    assert check_structural_lemmas(inst, prof)["l6"].status == FAIL
    assert is_expost_equilibrium(inst, prof).status == FAIL


@pytest.mark.criterion(10, "six-allocation auction subset passes and its extension is reported")
def test_sprime():
    space, subset, inst, prof = gen_section5_sprime()
    assert is_expost_equilibrium(inst, prof).status == PASS
    rep = sprime_extension_report(space, subset)
    assert rep["asymmetric"]
    forced = rep["forced_outside"]
    assert forced["p1"] and forced["p2"] and not forced["p3"]
    rows = {r["allocation"]: r for r in rep["forced_outside"]["p1"]}
    assert rows["ab|c|-"]["undetermined"] == ["p2"]


@pytest.mark.criterion(11, "quasi-field recognition")
@pytest.mark.parametrize("goods", ["a", "ab", "abc", "abcd"])
def test_partition_families(goods):
    parts = list(oracles.set_partitions(goods))
    assert len(parts) == {1: 1, 2: 2, 3: 5, 4: 15}[len(goods)]
    for part in parts:
        assert is_quasi_field(partition_field(part), goods) == (True, None)


@pytest.mark.criterion(11, "quasi-field recognition")
@pytest.mark.parametrize("goods", ["ab", "abc", "abcd"])
def test_missing_complement(goods):
    fam = [frozenset(), frozenset("a"), frozenset(goods)]
    assert is_quasi_field(fam, goods) == (False, ("complement", frozenset("a")))

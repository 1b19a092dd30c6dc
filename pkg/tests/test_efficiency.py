from fractions import Fraction as F

import pytest

from expost.auctions import gen_vickrey2
from expost.efficiency import (
    PreconditionError,
    UndefinedRatioError,
    bound_check,
    compatibility_degree,
    efficiency_ratio,
    gen_example5,
    gen_example6,
    homogeneity_degree,
    worst_case_ratio,
)
from expost.model import AlternativeSet, GameInstance, Valuation
from expost.strategies import NearlyTruth, Scaling, Truth, gen_nearly_truthful


def single_profile(inst):
    return {p: inst.grids[p][0] for p in inst.players}


def instance_from_columns(columns, maxima=None):
    """``columns[k]`` lists each player's value at alternative ``m{k}``."""
    n = len(columns[0])
    alts = AlternativeSet(tuple(f"m{k}" for k in range(len(columns))))
    players = tuple(f"p{j + 1}" for j in range(n))
    grids = {
        p: [Valuation(alts, tuple(F(col[j]) for col in columns), True)] for j, p in enumerate(players)
    }
    return GameInstance(alts, players, grids, maxima=maxima)


def truth(inst):
    return {p: Truth() for p in inst.players}


def test_ratio_of_truth_is_one():
    _, inst, _ = gen_example5(3, "1/10")
    assert efficiency_ratio(truth(inst), truth(inst), single_profile(inst)) == 1


def test_ratio_example5():
    _, inst, prof = gen_example5(3, "1/10")
    assert efficiency_ratio(truth(inst), prof, single_profile(inst)) == F(30, 11)


def test_ratio_example6():
    inst, prof = gen_example6(5, 3, "1/10")
    assert efficiency_ratio(truth(inst), prof, single_profile(inst)) == F(30, 13)


def test_ratio_undefined_at_zero_welfare():
    inst = instance_from_columns([(0, 0), (0, 0)])
    with pytest.raises(UndefinedRatioError):
        efficiency_ratio(truth(inst), truth(inst), single_profile(inst))


@pytest.mark.parametrize("eps, ratio", [("1/10", F(40, 11)), ("1/100", F(400, 101)), ("1/1000", F(4000, 1001))])
def test_worst_case_example5_four_players(eps, ratio):
    _, inst, prof = gen_example5(4, eps)
    assert worst_case_ratio(inst, prof)[0] == ratio


def test_example5_boundary():
    _, inst, prof = gen_example5(2, 1)
    assert worst_case_ratio(inst, prof)[0] == 1


def test_worst_case_single_player():
    inst, _ = gen_nearly_truthful(1, 3, 2, (1, 2), 4, seed=1)
    r, witness = worst_case_ratio(inst, {"p1": NearlyTruth(("a1", "a2"), floor=0)})
    assert r == 1 and set(witness) == {"p1"}


def test_flat_bids_at_the_floor_tie_pessimistically():
    # (2, 2, 1) reported over {a1, a2} with the floor at the minimum ties a3 in
    inst, prof = gen_nearly_truthful(1, 3, 2, (1, 2), 4, seed=1)
    r, witness = worst_case_ratio(inst, prof)
    assert r == 2 and witness["p1"].values == (2, 2, 1)


def test_homogeneity_identical_players():
    assert homogeneity_degree(instance_from_columns([(2, 2, 2), (1, 1, 1)])) == 1


def test_homogeneity_two_values():
    assert homogeneity_degree(instance_from_columns([(1, 2)])) == F(4, 3)


def test_homogeneity_bounded_family():
    inst, _ = gen_nearly_truthful(3, 4, 4, (1, 2), 4, seed=3, z_height=None)
    assert homogeneity_degree(inst) <= 2


def test_homogeneity_skips_zero_welfare():
    assert homogeneity_degree(instance_from_columns([(0, 0), (3, 1)])) == F(3, 2)


def test_compatibility_examples():
    assert compatibility_degree(instance_from_columns([(0, 0, 0)])) == 0
    assert compatibility_degree(instance_from_columns([(1, 1, 0), (0, 2, 1), (3, 0, 1)])) == 2


def test_compatibility_auction_bounded_by_goods():
    space, inst, _ = gen_vickrey2()
    assert compatibility_degree(inst) <= len(space.goods)


def test_bound_check_homogeneous():
    cols = [(4, 4, 4, 3, 0), (1, 1, 1, 1, 1)]
    maxima = {"p1": "m0", "p2": "m0", "p3": "m0", "p4": "m0", "p5": "m1"}
    inst = instance_from_columns(cols, maxima)
    rep = bound_check(inst, truth(inst))
    assert rep.bound_kind == "homogeneous" and rep.bound_value == F(4, 3)
    assert rep.ratio == 1 and rep.satisfied


def test_bound_check_example5():
    _, inst, prof = gen_example5(3, "1/10")
    rep = bound_check(inst, prof)
    assert rep.bound_value == 3 and rep.ratio == F(30, 11) and rep.satisfied
    assert rep.dominant_welfare / rep.equilibrium_welfare == rep.ratio


def test_bound_check_example6():
    inst, prof = gen_example6(5, 3, "1/10")
    rep = bound_check(inst, prof)
    assert (rep.dominant_alternative, rep.dominant_welfare) == ("m0", 3)
    assert (rep.equilibrium_alternative, rep.equilibrium_welfare) == ("m3", F(13, 10))
    assert rep.ratio == F(30, 13) and rep.satisfied


def test_bound_check_truth_profile():
    inst, _ = gen_nearly_truthful(3, 5, 4, (0, 1, 2), 3, seed=7)
    rep = bound_check(inst, truth(inst))
    assert rep.ratio == 1 and all(rep.ratio <= b for b in rep.bounds.values())


def test_bound_check_refuses_non_equilibrium():
    inst, _ = gen_nearly_truthful(2, 3, 2, (0, 1, 2), 4, seed=1)
    with pytest.raises(PreconditionError):
        bound_check(inst, {p: Scaling(2) for p in inst.players})


def test_bound_check_without_maxima_uses_player_count():
    inst = instance_from_columns([(1, 2), (2, 0)])
    rep = bound_check(inst, truth(inst))
    assert set(rep.bounds) == {"N-bound"}


def test_example_generators_validate():
    with pytest.raises(ValueError):
        gen_example5(1, "1/10")
    with pytest.raises(ValueError):
        gen_example5(2, 0)
    with pytest.raises(ValueError):
        gen_example6(3, 3, "1/10")


def test_example6_profile_shape():
    inst, prof = gen_example6(5, 3, "1/10")
    assert prof["p1"] == NearlyTruth(("m1", "m2", "m3", "m4"))
    assert inst.grids["p2"][0].as_dict()["m2"] == F(6, 5)

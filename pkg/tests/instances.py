"""Hand-built instances shared by several test modules."""
import itertools
from fractions import Fraction as F

from expost.model import AlternativeSet, Announcement, GameInstance, Valuation, z_valuation
from expost.strategies import Table, make_maxima_plus_ten

A3 = AlternativeSet(("a1", "a2", "a3"))
A4 = AlternativeSet(("a1", "a2", "a3", "a4"))


def full_grid(alts, levels=(0, 1, 2)):
    return [Valuation(alts, tuple(F(x) for x in t), True) for t in itertools.product(levels, repeat=len(alts))]


def crafted_unequal_maxima():
    """p1 bids unequally on the two other maxima under its own Z-valuation."""
    maxima = {"p1": "a1", "p2": "a2", "p3": "a3"}
    m10 = make_maxima_plus_ten(("a1", "a2", "a3"))
    z1 = z_valuation(A4, "a1", 1)
    grids = {
        "p1": [z1],
        "p2": [z_valuation(A4, "a2", F(3, 2))],
        "p3": [z_valuation(A4, "a3", F(3, 2))],
    }
    inst = GameInstance(A4, ("p1", "p2", "p3"), grids, maxima=maxima)
    prof = {"p1": Table({z1: Announcement(A4, (11, 10, 9, 0))}, m10), "p2": m10, "p3": m10}
    return inst, prof

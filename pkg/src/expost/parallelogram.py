"""Segment machinery for pairs of functions on the non-negative reals.

A pair ``(h1, h2)`` satisfies *mean value exclusion* when neither function
jumps over a value taken by the other.  Such pairs are exactly the identity
away from a family of disjoint open segments, and inside each segment one
function sits at the lower end and the other at the upper end.  This module
builds those pairs from a signed family of segments, checks the exclusion
property on grids, and recovers the signed family from a pair.

Functions are held as :class:`IntervalMapFunction`: finitely many open
pieces with constant values, finitely many point overrides, identity
everywhere else.  On that representation every question asked here is
decidable exactly.
"""
from __future__ import annotations

import bisect
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

from .model import format_rational, rational

__all__ = [
    "Segment",
    "SignedDecomposition",
    "IntervalMapFunction",
    "SampledFunction",
    "MVEViolation",
    "NotDecomposableError",
    "build_compatible_pair",
    "check_mve",
    "refining_grid",
    "decompose",
    "verify_compatibility",
    "classify_segments",
    "small_epsilon_witness",
    "random_decomposition",
]

PLUS = 1
MINUS = -1


@dataclass(frozen=True, order=True)
class Segment:
    """Open interval ``(lower, upper)`` with ``0 < lower < upper``."""

    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        lo, hi = rational(self.lower), rational(self.upper)
        if not 0 < lo < hi:
            raise ValueError(f"segment needs 0 < lower < upper, got ({lo}, {hi})")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def __contains__(self, x) -> bool:
        return self.lower < x < self.upper

    def in_closure(self, x) -> bool:
        return self.lower <= x <= self.upper

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def __str__(self):
        return f"({format_rational(self.lower)}, {format_rational(self.upper)})"


@dataclass(frozen=True)
class SignedDecomposition:
    """Disjoint segments with signs in {-1, +1} and, for each endpoint shared
    by two segments, the value chosen for the free function there.

    ``choices`` maps a shared point ``p = I.upper = J.lower`` to either
    ``I.lower`` or ``J.upper``.
    """

    segments: tuple
    signs: tuple
    choices: Mapping = field(default_factory=dict)

    def __post_init__(self):
        segments = tuple(self.segments)
        signs = tuple(int(g) for g in self.signs)
        if len(segments) != len(signs):
            raise ValueError("one sign per segment")
        if any(g not in (PLUS, MINUS) for g in signs):
            raise ValueError("signs must be +1 or -1")
        order = sorted(range(len(segments)), key=lambda k: segments[k])
        segments = tuple(segments[k] for k in order)
        signs = tuple(signs[k] for k in order)
        for (a, ga), (b, gb) in zip(zip(segments, signs), zip(segments[1:], signs[1:])):
            if b.lower < a.upper:
                raise ValueError(f"segments {a} and {b} overlap")
            if a.upper == b.lower and ga == gb:
                raise ValueError(f"segments {a} and {b} share an endpoint but have equal signs")
        choices = {rational(p): rational(c) for p, c in dict(self.choices).items()}
        shared = {p: (a, b) for p, a, b in _shared(segments)}
        if set(choices) != set(shared):
            raise ValueError(
                f"endpoint choices given for {sorted(choices)}, shared endpoints are {sorted(shared)}"
            )
        for p, (a, b) in shared.items():
            if choices[p] not in (a.lower, b.upper):
                raise ValueError(f"choice at {p} must be {a.lower} or {b.upper}")
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "choices", choices)

    @classmethod
    def with_default_choices(cls, segments, signs, prefer: str = "lower"):
        """Fill every shared endpoint with ``I.lower`` (or ``J.upper``)."""
        pairs = sorted(zip(segments, signs))
        segs = [s for s, _ in pairs]
        choices = {
            p: (a.lower if prefer == "lower" else b.upper) for p, a, b in _shared(segs)
        }
        return cls(tuple(segs), tuple(g for _, g in pairs), choices)

    def sign_of(self, segment: Segment) -> int:
        return self.signs[self.segments.index(segment)]

    def shared_endpoints(self):
        """``(p, I, J)`` for each ``p = I.upper = J.lower``."""
        return _shared(self.segments)

    def __eq__(self, other):
        if not isinstance(other, SignedDecomposition):
            return NotImplemented
        return (
            self.segments == other.segments
            and self.signs == other.signs
            and dict(self.choices) == dict(other.choices)
        )

    def __hash__(self):
        return hash((self.segments, self.signs, tuple(sorted(self.choices.items()))))


def _shared(segments: Sequence[Segment]):
    return [(a.upper, a, b) for a, b in zip(segments, segments[1:]) if a.upper == b.lower]


# ---------------------------------------------------------------------------
# Function representations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalMapFunction:
    """Piecewise map of the non-negative reals into themselves.

    ``pieces`` are ``(lower, upper, value)`` open intervals on which the map is
    constant; ``points`` override single points; everything else maps to
    itself.
    """

    pieces: tuple = ()
    points: Mapping = field(default_factory=dict)

    def __post_init__(self):
        pieces = []
        for lo, hi, val in self.pieces:
            lo, hi, val = rational(lo), rational(hi), rational(val)
            if not 0 <= lo < hi:
                raise ValueError(f"bad piece ({lo}, {hi})")
            if val < 0:
                raise ValueError("interval maps take non-negative values")
            pieces.append((lo, hi, val))
        pieces.sort()
        for (a0, a1, _), (b0, _, _) in zip(pieces, pieces[1:]):
            if b0 < a1:
                raise ValueError("pieces overlap")
        points = {rational(x): rational(y) for x, y in dict(self.points).items()}
        if any(x < 0 or y < 0 for x, y in points.items()):
            raise ValueError("interval maps live on the non-negative reals")
        object.__setattr__(self, "pieces", tuple(pieces))
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "_lowers", [p[0] for p in pieces])

    @classmethod
    def identity(cls) -> "IntervalMapFunction":
        return cls()

    def __call__(self, x) -> Fraction:
        x = rational(x)
        if x < 0:
            raise ValueError("interval maps are defined on x >= 0")
        if x in self.points:
            return self.points[x]
        piece = self._piece_at(x)
        return piece[2] if piece is not None else x

    def _piece_at(self, x):
        k = bisect.bisect_left(self._lowers, x) - 1
        if k >= 0:
            lo, hi, val = self.pieces[k]
            if lo < x < hi:
                return self.pieces[k]
        return None

    def breakpoints(self) -> list:
        pts = set(self.points)
        for lo, hi, _ in self.pieces:
            pts.update((lo, hi))
        return sorted(pts)

    def values(self) -> list:
        return sorted({v for *_, v in self.pieces} | set(self.points.values()))

    def with_point(self, x, y) -> "IntervalMapFunction":
        pts = dict(self.points)
        pts[rational(x)] = rational(y)
        return IntervalMapFunction(self.pieces, pts)

    def constant_on(self, lower: Fraction, upper: Fraction) -> Optional[Fraction]:
        """The single value taken on the open interval, or None if it varies."""
        value = None
        cursor = lower
        for lo, hi, val in self.pieces:
            if hi <= cursor:
                continue
            if lo >= upper:
                break
            if lo > cursor:
                return None  # identity on (cursor, lo): not constant
            if value is None:
                value = val
            elif val != value:
                return None
            cursor = hi
            if cursor >= upper:
                break
            # the gap point `cursor` itself is decided below
            if self(cursor) != value:
                return None
        if value is None or cursor < upper:
            return None
        for x, y in self.points.items():
            if lower < x < upper and y != value:
                return None
        return value

    def preimage_extent(self, y: Fraction):
        """``(inf, inf_attained, sup, sup_attained)`` of ``{x : h(x) = y}``,
        or None when the preimage is empty."""
        lows, highs = [], []
        for lo, hi, val in self.pieces:
            if val == y:
                lows.append((lo, self(lo) == y))
                highs.append((hi, self(hi) == y))
        for x, val in self.points.items():
            if val == y:
                lows.append((x, True))
                highs.append((x, True))
        if y not in self.points and self._piece_at(y) is None:
            lows.append((y, True))
            highs.append((y, True))
        if not lows:
            return None
        inf = min(x for x, _ in lows)
        sup = max(x for x, _ in highs)
        inf_hit = any(x == inf and hit for x, hit in lows)
        sup_hit = any(x == sup and hit for x, hit in highs)
        return inf, inf_hit, sup, sup_hit

    def representatives(self) -> list:
        """One point from every piece plus every overridden point; off these
        the map is the identity."""
        reps = [(lo + hi) / 2 for lo, hi, _ in self.pieces]
        reps.extend(self.points)
        return sorted(set(reps))


@dataclass(frozen=True)
class SampledFunction:
    """Values of a function on a finite, strictly increasing positive grid."""

    grid: tuple
    values: tuple

    def __post_init__(self):
        grid = tuple(rational(x) for x in self.grid)
        values = tuple(rational(y) for y in self.values)
        if len(grid) != len(values):
            raise ValueError("grid and values differ in length")
        if any(x <= 0 for x in grid):
            raise ValueError("sample grid must be positive")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("sample grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_table", dict(zip(grid, values)))

    @classmethod
    def from_function(cls, f, grid) -> "SampledFunction":
        grid = sorted({rational(x) for x in grid})
        return cls(tuple(grid), tuple(f(x) for x in grid))

    @classmethod
    def from_map(cls, mapping: Mapping) -> "SampledFunction":
        items = sorted((rational(x), rational(y)) for x, y in mapping.items())
        return cls(tuple(x for x, _ in items), tuple(y for _, y in items))

    def __call__(self, x) -> Fraction:
        try:
            return self._table[rational(x)]
        except KeyError:
            raise KeyError(f"{x} is not on the sample grid") from None

    def items(self):
        return zip(self.grid, self.values)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def build_compatible_pair(d: SignedDecomposition):
    """The ``(h1, h2)`` pair compatible with ``d`` and its endpoint choices.

    Inside a +1 segment ``h1`` sits at the upper end and ``h2`` at the lower
    end; a -1 segment swaps them.  Unshared endpoints repeat the interior
    values.  At a shared point ``p`` the function pinned by the left
    segment's sign equals ``p`` and the other takes the recorded choice.
    """
    if not isinstance(d, SignedDecomposition):
        raise TypeError("expected a SignedDecomposition")
    pieces1, pieces2 = [], []
    points1, points2 = {}, {}
    for seg, g in zip(d.segments, d.signs):
        v1, v2 = (seg.upper, seg.lower) if g == PLUS else (seg.lower, seg.upper)
        pieces1.append((seg.lower, seg.upper, v1))
        pieces2.append((seg.lower, seg.upper, v2))
        points1[seg.lower], points2[seg.lower] = v1, v2
        points1[seg.upper], points2[seg.upper] = v1, v2
    for p, left, _right in d.shared_endpoints():
        if d.sign_of(left) == PLUS:
            points1[p], points2[p] = p, d.choices[p]
        else:
            points1[p], points2[p] = d.choices[p], p
    return IntervalMapFunction(tuple(pieces1), points1), IntervalMapFunction(tuple(pieces2), points2)


# ---------------------------------------------------------------------------
# Mean value exclusion
# ---------------------------------------------------------------------------


class MVEViolation(NamedTuple):
    """``clause`` 1: ``y`` lies between ``s`` and ``f1(s)`` and ``y = f2(t)``;
    clause 2 swaps the roles of the functions."""

    s: Fraction
    t: Fraction
    y: Fraction
    clause: int


def _between(s, fs, y) -> bool:
    return s < y <= fs or fs <= y < s


def _first_violation(f, g, grid_s, grid_t, clause):
    g_vals = sorted({g(t) for t in grid_t})
    for s in grid_s:
        fs = f(s)
        if fs == s:
            continue
        if fs > s:
            k = bisect.bisect_right(g_vals, s)
            hit = k < len(g_vals) and g_vals[k] <= fs
        else:
            k = bisect.bisect_left(g_vals, fs)
            hit = k < len(g_vals) and g_vals[k] < s
        if hit:
            for t in grid_t:
                y = g(t)
                if _between(s, fs, y):
                    return MVEViolation(s, t, y, clause)
    return None


def _grid_of(f, grid):
    if grid is not None:
        return sorted({rational(x) for x in grid})
    if isinstance(f, SampledFunction):
        return list(f.grid)
    raise ValueError("a grid is required unless both functions are sampled")


def check_mve(f1, f2, grid=None) -> Optional[MVEViolation]:
    """First grid counterexample to mean value exclusion, or None.

    Order: clause 1 before clause 2, then ``s`` ascending, then ``t``
    ascending.  Sampled functions default to their own grids.
    """
    g1 = _grid_of(f1, grid)
    g2 = _grid_of(f2, grid)
    return _first_violation(f1, f2, g1, g2, 1) or _first_violation(f2, f1, g2, g1, 2)


def refining_grid(*functions, extra: Iterable = ()) -> list:
    """Positive grid holding every breakpoint and value of the functions,
    the midpoints between consecutive points, and points beyond both ends."""
    pts = {rational(x) for x in extra}
    for f in functions:
        if isinstance(f, IntervalMapFunction):
            pts.update(f.breakpoints())
            pts.update(f.values())
        elif isinstance(f, SampledFunction):
            pts.update(f.grid)
            pts.update(f.values)
    pts = sorted(p for p in pts if p > 0)
    if not pts:
        return [Fraction(1)]
    mids = [(a + b) / 2 for a, b in zip(pts, pts[1:])]
    return sorted(set(pts) | set(mids) | {pts[0] / 2, pts[-1] + 1})


# ---------------------------------------------------------------------------
# Decomposition
# ---------------------------------------------------------------------------


class NotDecomposableError(ValueError):
    """Raised when a pair has no signed segment decomposition."""

    def __init__(self, message, violation: Optional[MVEViolation] = None):
        super().__init__(message)
        self.violation = violation


def _d_segments(h1: IntervalMapFunction) -> dict:
    """Maximal segments generated by ``h1`` with their D-class.

    Wherever ``h1(x) = y > x`` the segment runs from the infimum of the
    preimage of ``y`` up to ``y``: class D3 if that infimum is itself mapped
    to ``y``, otherwise D5 (the preimage then starts with an open piece, so a
    sequence decreasing to the infimum exists).  ``h1(x) = y < x`` is the
    mirror image and gives D4 or D6.
    """
    found = {}
    for x in h1.representatives():
        y = h1(x)
        if y == x:
            continue
        inf, inf_hit, sup, sup_hit = h1.preimage_extent(y)
        if y > x:
            lo, hi, cls = inf, y, "D3" if inf_hit else "D5"
        else:
            lo, hi, cls = y, sup, "D4" if sup_hit else "D6"
        if lo <= 0:
            raise NotDecomposableError(f"segment ({lo}, {hi}) touches zero")
        found.setdefault(Segment(lo, hi), set()).add(cls)
    return found


def decompose(h1: IntervalMapFunction, h2: IntervalMapFunction, grid=None) -> SignedDecomposition:
    """Recover the signed segments and endpoint choices of a pair.

    The pair is first checked for mean value exclusion on a grid refining
    all breakpoints; a violation raises :class:`NotDecomposableError`
    carrying the counterexample.  The recovered decomposition is then
    checked for disjointness, alternating signs at shared endpoints and
    identity off the segment closures.
    """
    if grid is None:
        grid = refining_grid(h1, h2)
    bad = check_mve(h1, h2, grid)
    if bad is not None:
        raise NotDecomposableError(f"mean value exclusion fails at {bad}", bad)

    segments = sorted(_d_segments(h1))
    for a, b in zip(segments, segments[1:]):
        if b.lower < a.upper:
            raise NotDecomposableError(f"recovered segments {a} and {b} overlap")

    signs = []
    for seg in segments:
        c1 = h1.constant_on(seg.lower, seg.upper)
        c2 = h2.constant_on(seg.lower, seg.upper)
        if (c1, c2) == (seg.upper, seg.lower):
            signs.append(PLUS)
        elif (c1, c2) == (seg.lower, seg.upper):
            signs.append(MINUS)
        else:
            raise NotDecomposableError(f"segment {seg} satisfies neither sign condition")

    choices = {}
    for a, b in zip(segments, segments[1:]):
        if a.upper != b.lower:
            continue
        p = a.upper
        g = signs[segments.index(a)]
        if g == signs[segments.index(b)]:
            raise NotDecomposableError(f"segments {a} and {b} share {p} with equal signs")
        pinned, free = (h1, h2) if g == PLUS else (h2, h1)
        if pinned(p) != p or free(p) not in (a.lower, b.upper):
            raise NotDecomposableError(f"shared endpoint {p} has inadmissible values")
        choices[p] = free(p)

    d = SignedDecomposition(tuple(segments), tuple(signs), choices)
    _check_identity_off_segments(h1, h2, d)
    _check_lone_endpoints(h1, h2, d)
    return d


def _covered(d: SignedDecomposition, lo, hi) -> bool:
    """Whether the open interval (lo, hi) lies inside the union of closures."""
    cursor = lo
    for seg in d.segments:
        if seg.upper <= cursor:
            continue
        if seg.lower > cursor:
            return False
        cursor = seg.upper
        if cursor >= hi:
            return True
    return cursor >= hi


def _check_identity_off_segments(h1, h2, d):
    for h in (h1, h2):
        for lo, hi, val in h.pieces:
            if not _covered(d, lo, hi):
                raise NotDecomposableError(f"piece ({lo}, {hi}) -> {val} leaves the segments")
        for x, y in h.points.items():
            if y != x and not any(seg.in_closure(x) for seg in d.segments):
                raise NotDecomposableError(f"{x} -> {y} is off every segment but not fixed")


def _check_lone_endpoints(h1, h2, d):
    shared = {p for p, _, _ in d.shared_endpoints()}
    for seg, g in zip(d.segments, d.signs):
        v1, v2 = (seg.upper, seg.lower) if g == PLUS else (seg.lower, seg.upper)
        for p in (seg.lower, seg.upper):
            if p not in shared and (h1(p), h2(p)) != (v1, v2):
                raise NotDecomposableError(f"unshared endpoint {p} of {seg} breaks continuity")


# ---------------------------------------------------------------------------
# Compatibility report
# ---------------------------------------------------------------------------


def _interior_probes(seg: Segment, *fs) -> list:
    pts = {seg.midpoint, seg.lower + (seg.upper - seg.lower) / 3}
    for f in fs:
        if isinstance(f, IntervalMapFunction):
            pts.update(x for x in f.breakpoints() if x in seg)
    return sorted(pts)


def verify_compatibility(h1, h2, d: SignedDecomposition, grid=None) -> dict:
    """Check the seven compatibility conditions one by one.

    Returns ``{condition: None | failure description}`` for conditions 1-7,
    plus ``"choices"`` comparing shared-endpoint values with ``d``.
    Condition 1 is probed on ``grid`` (default: a refining grid) and on 0.
    """
    report = {k: None for k in range(1, 8)}

    def fail(k, msg):
        if report[k] is None:
            report[k] = msg

    if grid is None:
        extra = [s.lower for s in d.segments] + [s.upper for s in d.segments]
        grid = refining_grid(h1, h2, extra=extra)
    for x in [Fraction(0)] + list(grid):
        if any(seg.in_closure(x) for seg in d.segments):
            continue
        if h1(x) != x or h2(x) != x:
            fail(1, f"h({x}) = ({h1(x)}, {h2(x)}) off the segments")

    shared = {p: (a, b) for p, a, b in d.shared_endpoints()}
    for seg, g in zip(d.segments, d.signs):
        inner = (seg.lower, seg.upper) if g == MINUS else (seg.upper, seg.lower)
        cond = 2 if g == MINUS else 3
        for x in _interior_probes(seg, h1, h2):
            if (h1(x), h2(x)) != inner:
                fail(cond, f"h({x}) = ({h1(x)}, {h2(x)}) inside {seg}, expected {inner}")
        if seg.lower not in shared and (h1(seg.lower), h2(seg.lower)) != inner:
            fail(4, f"lower endpoint of {seg} maps to ({h1(seg.lower)}, {h2(seg.lower)})")
        if seg.upper not in shared and (h1(seg.upper), h2(seg.upper)) != inner:
            fail(5, f"upper endpoint of {seg} maps to ({h1(seg.upper)}, {h2(seg.upper)})")

    choice_errors = []
    for p, (a, b) in shared.items():
        allowed = (a.lower, b.upper)
        if d.sign_of(a) == PLUS:
            if h1(p) != p or h2(p) not in allowed:
                fail(6, f"shared point {p}: ({h1(p)}, {h2(p)})")
            free = h2(p)
        else:
            if h2(p) != p or h1(p) not in allowed:
                fail(7, f"shared point {p}: ({h1(p)}, {h2(p)})")
            free = h1(p)
        if free != d.choices.get(p):
            choice_errors.append(f"at {p}: function takes {free}, decomposition says {d.choices.get(p)}")
    report["choices"] = "; ".join(choice_errors) or None
    return report


def compatible(report: Mapping) -> bool:
    return all(report[k] is None for k in range(1, 8))


# ---------------------------------------------------------------------------
# D-classes
# ---------------------------------------------------------------------------


def _classes_of(h1: IntervalMapFunction, seg: Segment) -> set:
    out = set()
    lo, hi = seg.lower, seg.upper
    if h1(lo) == hi:
        out.add("D1")
    if h1(hi) == lo:
        out.add("D2")
    up = h1.preimage_extent(hi)
    if up is not None:
        inf, inf_hit, _, _ = up
        if inf == lo and inf_hit and "D1" in out:
            out.add("D3")
        # preimage starts with an open piece at lo: a sequence decreases to lo
        if inf == lo and not inf_hit:
            out.add("D5")
    down = h1.preimage_extent(lo)
    if down is not None:
        _, _, sup, sup_hit = down
        if sup == hi and sup_hit and "D2" in out:
            out.add("D4")
        # the D6 clause is read with D6 (not D5) as the quantified class
        if sup == hi and not sup_hit:
            out.add("D6")
    return out


@dataclass
class Classification:
    classes: dict
    lemma_d_failures: list

    @property
    def d_segments(self) -> list:
        return sorted(s for s, c in self.classes.items() if c & {"D3", "D4", "D5", "D6"})


def classify_segments(h1: IntervalMapFunction, segments=None, grid=None) -> Classification:
    """D1..D6 membership of each segment.

    By default the maximal segments generated by ``h1`` are classified.  The
    D1/D2 segments ``(x, h1(x))`` (or ``(h1(x), x)``) for ``x`` on ``grid``
    are checked for containment in some maximal segment; failures are
    listed in ``lemma_d_failures``.
    """
    if segments is None:
        segments = sorted(_d_segments(h1))
    classes = {seg: _classes_of(h1, seg) for seg in segments}
    maximal = [s for s, c in classes.items() if c & {"D3", "D4", "D5", "D6"}]
    if grid is None:
        grid = refining_grid(h1)
    failures = []
    for x in grid:
        y = h1(x)
        if y == x or min(x, y) <= 0:
            continue
        small = Segment(min(x, y), max(x, y))
        if not any(m.lower <= small.lower and small.upper <= m.upper for m in maximal):
            failures.append(small)
    return Classification(classes, failures)


def small_epsilon_witness(h1, h2, eps, grid) -> Optional[Fraction]:
    """A grid point ``0 < d < eps`` with both ``h1(d)`` and ``h2(d)`` in (0, eps)."""
    eps = rational(eps)
    for x in sorted(rational(g) for g in grid):
        if 0 < x < eps and 0 < h1(x) < eps and 0 < h2(x) < eps:
            return x
    return None


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------


def random_decomposition(
    rng: random.Random, max_segments: int = 6, top: int = 20, denominators=(1, 2, 3, 4)
) -> SignedDecomposition:
    """Random signed decomposition with rational endpoints in (0, top]."""
    k = rng.randint(0, max_segments)
    pool = sorted(
        {Fraction(n, q) for q in denominators for n in range(1, top * q + 1)}
    )
    cuts = sorted(rng.sample(pool, k + 1 + rng.randint(0, k))) if k else []
    segments, signs = [], []
    idx = 0
    while len(segments) < k and idx + 1 < len(cuts):
        seg = Segment(cuts[idx], cuts[idx + 1])
        if segments and segments[-1].upper == seg.lower:
            g = -signs[-1]
        else:
            g = rng.choice((PLUS, MINUS))
        segments.append(seg)
        signs.append(g)
        # share the endpoint with the next segment or leave a gap
        idx += 1 if rng.random() < 0.5 else 2
    choices = {p: rng.choice((a.lower, b.upper)) for p, a, b in _shared(segments)}
    return SignedDecomposition(tuple(segments), tuple(signs), choices)

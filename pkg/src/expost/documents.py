"""Instance and report documents.

Instances are YAML with explicit sections; every number is an integer or a
``"p/q"`` string so files replay bit-exactly.  Floats are refused.

    alternatives: [a1, a2, a3]          # or an `auction` section
    players: [p1, p2]
    families:
      p1:
        maximum: a1                     # optional
        valuations:
          - {a1: 2, a2: "1/2", a3: 0}
          - {z: a1, height: 3}          # Z-valuation shorthand
    strategies:
      p1: {kind: nearly_truth, subset: [a1, a2], offset: 0, floor: min}
      p2: {kind: scaling, factor: 2}
    h:                                  # optional charges
      p1: "5"
    checks: [equilibrium, near_truth, lemmas, efficiency]
"""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Optional

import yaml

from .auctions import (
    DEFAULT_MAX_ALTERNATIVES,
    AuctionSpace,
    BundleReport,
    bundle_text,
    bundling_strategy,
    parse_bundle,
    valuation_from_bundles,
)
from .model import (
    AlternativeSet,
    Announcement,
    ClarkeCharge,
    ConstantCharge,
    GameInstance,
    Valuation,
    format_rational,
    rational,
    z_valuation,
)
from .parallelogram import IntervalMapFunction, SampledFunction, Segment, SignedDecomposition
from .strategies import (
    ConstantOff,
    ConstantOffset,
    MaximaPlusTen,
    NearlyTruth,
    Scaling,
    ShiftedTruth,
    Strategy,
    Table,
    Truth,
    ValueOffset,
)

__all__ = [
    "DocumentError",
    "LoadedInstance",
    "load_instance",
    "dump_instance",
    "load_function_document",
    "dump_decomposition",
    "to_plain",
    "KNOWN_CHECKS",
]

KNOWN_CHECKS = ("equilibrium", "near_truth", "lemmas", "efficiency", "crosscheck")


class DocumentError(ValueError):
    """Input document problem, located by section path and, when known, line."""

    def __init__(self, message: str, section: str = "", line: Optional[int] = None):
        where = section or "document"
        if line is not None:
            where += f" (line {line})"
        super().__init__(f"{where}: {message}")
        self.section = section
        self.line = line


def _num(x, section) -> Fraction:
    if isinstance(x, float):
        raise DocumentError(f"float {x!r} is not exact; write it as \"p/q\"", section)
    try:
        return rational(x)
    except (TypeError, ValueError) as exc:
        raise DocumentError(str(exc), section) from None


def _parse_yaml(text: str):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise DocumentError(
            f"not valid YAML: {getattr(exc, 'problem', exc)}",
            "document",
            mark.line + 1 if mark is not None else None,
        ) from None
    if not isinstance(data, dict):
        raise DocumentError("expected a mapping of sections")
    return data


def _labels(seq, section):
    if not isinstance(seq, list) or not seq:
        raise DocumentError("expected a non-empty list", section)
    return tuple(str(x) for x in seq)


class LoadedInstance:
    def __init__(self, instance, profile, checks, space=None, raw=None):
        self.instance = instance
        self.profile = profile
        self.checks = checks
        self.space = space
        self.raw = raw


def _valuation(entry, alts, space, player, nonneg, section):
    if not isinstance(entry, dict):
        raise DocumentError("valuation must be a mapping", section)
    if "z" in entry:
        try:
            return z_valuation(alts, str(entry["z"]), _num(entry.get("height"), section + ".height"))
        except (KeyError, ValueError) as exc:
            raise DocumentError(str(exc), section) from None
    if "bundles" in entry:
        if space is None:
            raise DocumentError("bundle valuations need an auction section", section)
        table = {}
        for k, x in entry["bundles"].items():
            try:
                table[parse_bundle(k, space.goods)] = _num(x, f"{section}.bundles.{k}")
            except ValueError as exc:
                raise DocumentError(str(exc), section) from None
        try:
            v = valuation_from_bundles(space, player, table)
        except KeyError as exc:
            raise DocumentError(str(exc), section) from None
        return Valuation(v.alternatives, v.values, nonneg or v.nonnegative)
    values = {str(a): _num(x, f"{section}.{a}") for a, x in entry.items()}
    try:
        return Valuation.from_map(alts, values, nonnegative=nonneg)
    except (KeyError, ValueError) as exc:
        raise DocumentError(str(exc.args[0] if exc.args else exc), section) from None


def _offset(spec, section):
    if spec is None:
        return ConstantOffset()
    if isinstance(spec, dict):
        return ValueOffset(
            str(spec["alternative"]),
            _num(spec.get("scale", 1), section + ".scale"),
            _num(spec.get("shift", 0), section + ".shift"),
        )
    return ConstantOffset(_num(spec, section))


def _strategy(spec, i, alts, space, maxima, section):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise DocumentError("strategy needs a `kind`", section)
    kind = spec["kind"]
    try:
        if kind == "truth":
            return Truth()
        if kind == "shifted_truth":
            extra = spec.get("per_alternative")
            if extra is not None:
                extra = {str(a): _num(x, f"{section}.per_alternative.{a}") for a, x in extra.items()}
            return ShiftedTruth(_offset(spec.get("offset"), section + ".offset"), extra)
        if kind == "nearly_truth":
            subset = _labels(spec.get("subset"), section + ".subset")
            bad = [a for a in subset if a not in alts]
            if bad:
                raise DocumentError(f"unknown alternatives {bad}", section + ".subset")
            floor = spec.get("floor", "min")
            floor = None if floor == "min" else _num(floor, section + ".floor")
            return NearlyTruth(subset, _offset(spec.get("offset"), section + ".offset"), floor)
        if kind == "scaling":
            return Scaling(_num(spec.get("factor", 1), section + ".factor"))
        if kind == "maxima_plus_ten":
            tops = spec.get("maxima")
            tops = _labels(tops, section + ".maxima") if tops is not None else tuple(
                dict.fromkeys(a for a in maxima.values() if a is not None)
            )
            return MaximaPlusTen(tops, ConstantOff(_num(spec.get("off", 0), section + ".off")))
        if kind == "bundling":
            if space is None:
                raise DocumentError("bundling strategies need an auction section", section)
            bundles = [parse_bundle(b, space.goods) for b in spec.get("bundles", [])]
            if spec.get("quasi_field", True):
                return bundling_strategy(space, i, bundles)
            return BundleReport(space, i, frozenset(bundles))
        if kind == "table":
            entries = {}
            for k, row in enumerate(spec.get("entries", [])):
                where = f"{section}.entries[{k}]"
                v = _valuation(row["valuation"], alts, space, i, False, where + ".valuation")
                b = {str(a): _num(x, f"{where}.announcement.{a}") for a, x in row["announcement"].items()}
                entries[v] = Announcement.from_map(alts, b)
            fallback = spec.get("fallback")
            fb = _strategy(fallback, i, alts, space, maxima, section + ".fallback") if fallback else None
            return Table(entries, fb)
    except DocumentError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise DocumentError(str(exc), section) from None
    raise DocumentError(f"unknown strategy kind {kind!r}", section)


def load_instance(text: str, max_alternatives: Optional[int] = None) -> LoadedInstance:
    """Parse an instance document.

    ``max_alternatives`` caps the alternative count; when omitted the
    document's own ``max_alternatives`` entry applies, else the default.
    """
    data = _parse_yaml(text)
    space = None
    if "auction" in data:
        sec = data["auction"]
        if not isinstance(sec, dict):
            raise DocumentError("expected goods and players", "auction")
        goods = _labels(sec.get("goods"), "auction.goods")
        players = _labels(sec.get("players", data.get("players")), "auction.players")
        cap = max_alternatives
        if cap is None and "max_alternatives" in sec:
            cap = int(sec["max_alternatives"])
        elif cap is None:
            cap = DEFAULT_MAX_ALTERNATIVES
        try:
            space = AuctionSpace(goods, players, cap)
        except ValueError as exc:
            raise DocumentError(str(exc), "auction") from None
        alts = space.alternatives
        if "alternatives" in data and tuple(map(str, data["alternatives"])) != alts.labels:
            raise DocumentError("alternatives disagree with the auction allocations", "alternatives")
    else:
        if "alternatives" not in data:
            raise DocumentError("missing section", "alternatives")
        labels = _labels(data["alternatives"], "alternatives")
        if max_alternatives is None:
            max_alternatives = int(data.get("max_alternatives", DEFAULT_MAX_ALTERNATIVES))
        if len(labels) > max_alternatives:
            raise DocumentError(
                f"{len(labels)} alternatives exceed the cap of {max_alternatives}", "alternatives"
            )
        try:
            alts = AlternativeSet(labels)
        except ValueError as exc:
            raise DocumentError(str(exc), "alternatives") from None
        players = _labels(data.get("players"), "players")
    if space is not None:
        players = space.players

    families = data.get("families")
    if not isinstance(families, dict):
        raise DocumentError("missing or malformed section", "families")
    grids, maxima = {}, {}
    for i in players:
        sec = f"families.{i}"
        fam = families.get(i)
        if not isinstance(fam, dict):
            raise DocumentError("missing family", sec)
        top = fam.get("maximum")
        if top is not None:
            top = str(top)
            if top not in alts:
                raise DocumentError(f"unknown alternative {top!r}", sec + ".maximum")
        maxima[i] = top
        nonneg = bool(fam.get("nonnegative", top is not None))
        vals = fam.get("valuations")
        if not isinstance(vals, list) or not vals:
            raise DocumentError("needs a non-empty list of valuations", sec + ".valuations")
        grids[i] = [
            _valuation(v, alts, space, i, nonneg, f"{sec}.valuations[{k}]") for k, v in enumerate(vals)
        ]

    hspec = {}
    for i, spec in (data.get("h") or {}).items():
        sec = f"h.{i}"
        if str(i) not in players:
            raise DocumentError(f"unknown player {i!r}", sec)
        if isinstance(spec, dict) and spec.get("clarke"):
            hspec[str(i)] = ClarkeCharge()
        else:
            hspec[str(i)] = ConstantCharge(_num(spec, sec))

    try:
        instance = GameInstance(alts, players, grids, hspec, maxima)
    except ValueError as exc:
        raise DocumentError(str(exc), "families") from None

    strategies = data.get("strategies")
    if not isinstance(strategies, dict):
        raise DocumentError("missing or malformed section", "strategies")
    profile = {}
    for i in players:
        if i not in strategies:
            raise DocumentError(f"no strategy for {i!r}", "strategies")
        profile[i] = _strategy(strategies[i], i, alts, space, maxima, f"strategies.{i}")

    checks = data.get("checks", ["equilibrium"])
    if isinstance(checks, str):
        checks = [checks]
    unknown = [c for c in checks if c not in KNOWN_CHECKS]
    if unknown:
        raise DocumentError(f"unknown checks {unknown}; known: {list(KNOWN_CHECKS)}", "checks")
    return LoadedInstance(instance, profile, list(checks), space, data)


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------


def _r(x) -> object:
    x = rational(x)
    return x.numerator if x.denominator == 1 else format_rational(x)


def _dump_offset(f):
    if isinstance(f, ConstantOffset):
        return _r(f.value)
    if isinstance(f, ValueOffset):
        return {"alternative": f.alternative, "scale": _r(f.scale), "shift": _r(f.shift)}
    raise TypeError(f"cannot serialise offset rule {f!r}")


def _dump_strategy(s: Strategy, space=None):
    if isinstance(s, Truth):
        return {"kind": "truth"}
    if isinstance(s, ShiftedTruth):
        out = {"kind": "shifted_truth", "offset": _dump_offset(s.offset)}
        if s.per_alternative:
            out["per_alternative"] = {a: _r(x) for a, x in s.per_alternative}
        return out
    if isinstance(s, NearlyTruth):
        return {
            "kind": "nearly_truth",
            "subset": list(s.subset),
            "offset": _dump_offset(s.offset),
            "floor": "min" if s.floor is None else _r(s.floor),
        }
    if isinstance(s, Scaling):
        return {"kind": "scaling", "factor": _r(s.factor)}
    if isinstance(s, MaximaPlusTen):
        if not isinstance(s.off, ConstantOff):
            raise TypeError("only constant off-maxima rules serialise")
        return {"kind": "maxima_plus_ten", "maxima": list(s.maxima), "off": _r(s.off.value)}
    if isinstance(s, BundleReport):
        from .auctions import is_quasi_field

        ok, _ = is_quasi_field(s.bundles, s.space.goods)
        bundles = sorted(s.bundles, key=lambda b: (len(b), sorted(b)))
        return {
            "kind": "bundling",
            "bundles": [bundle_text(b, s.space.goods) for b in bundles],
            "quasi_field": ok,
        }
    if isinstance(s, Table):
        out = {
            "kind": "table",
            "entries": [
                {"valuation": _dump_values(v), "announcement": _dump_values(b)}
                for v, b in s.entries.items()
            ],
        }
        if s.fallback is not None:
            out["fallback"] = _dump_strategy(s.fallback, space)
        return out
    raise TypeError(f"cannot serialise strategy {s!r}")


def _dump_values(table) -> dict:
    return {a: _r(x) for a, x in table.items()}


def dump_instance(instance: GameInstance, profile: Mapping, space=None, checks=("equilibrium",)) -> str:
    doc = {}
    if space is not None:
        doc["auction"] = {"goods": list(space.goods), "players": list(space.players)}
        if len(space.alternatives) > DEFAULT_MAX_ALTERNATIVES:
            doc["auction"]["max_alternatives"] = len(space.alternatives)
    else:
        doc["alternatives"] = list(instance.alternatives.labels)
        doc["players"] = list(instance.players)
        if len(instance.alternatives) > DEFAULT_MAX_ALTERNATIVES:
            doc["max_alternatives"] = len(instance.alternatives)
    fams = {}
    for i in instance.players:
        fam = {}
        if instance.maxima.get(i) is not None:
            fam["maximum"] = instance.maxima[i]
        fam["nonnegative"] = all(v.nonnegative for v in instance.grids[i])
        fam["valuations"] = [_dump_values(v) for v in instance.grids[i]]
        fams[i] = fam
    doc["families"] = fams
    doc["strategies"] = {i: _dump_strategy(profile[i], space) for i in instance.players}
    if instance.hspec:
        h = {}
        for i, c in instance.hspec.items():
            if isinstance(c, ClarkeCharge):
                h[i] = {"clarke": True}
            elif isinstance(c, ConstantCharge):
                h[i] = _r(c.value)
            else:
                raise TypeError(f"cannot serialise charge {c!r}")
        doc["h"] = h
    doc["checks"] = list(checks)
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None, width=100)


# ---------------------------------------------------------------------------
# Function-pair documents
# ---------------------------------------------------------------------------


def _decomposition(data, section) -> SignedDecomposition:
    segs, signs = [], []
    for k, row in enumerate(data.get("segments", [])):
        where = f"{section}.segments[{k}]"
        try:
            segs.append(Segment(_num(row["lower"], where + ".lower"), _num(row["upper"], where + ".upper")))
            signs.append(int(row["sign"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise DocumentError(str(exc), where) from None
    choices = {
        _num(p, f"{section}.choices"): _num(c, f"{section}.choices.{p}")
        for p, c in (data.get("choices") or {}).items()
    }
    try:
        if data.get("default_choices") and not choices:
            return SignedDecomposition.with_default_choices(segs, signs, data["default_choices"])
        return SignedDecomposition(tuple(segs), tuple(signs), choices)
    except ValueError as exc:
        raise DocumentError(str(exc), section) from None


def _interval_map(data, section) -> IntervalMapFunction:
    pieces = []
    for k, row in enumerate(data.get("pieces", [])):
        where = f"{section}.pieces[{k}]"
        pieces.append(
            (_num(row["lower"], where), _num(row["upper"], where), _num(row["value"], where))
        )
    points = {_num(x, section + ".points"): _num(y, f"{section}.points.{x}") for x, y in (data.get("points") or {}).items()}
    try:
        return IntervalMapFunction(tuple(pieces), points)
    except ValueError as exc:
        raise DocumentError(str(exc), section) from None


def load_function_document(text: str) -> dict:
    """Read one of three shapes.

    * ``decomposition: {segments: [{lower, upper, sign}], choices: {p: c}}``
    * ``h1: {pieces: [{lower, upper, value}], points: {x: y}}`` and ``h2``
    * ``sampled: {grid: [...], g1: [...], g2: [...]}``
    """
    data = _parse_yaml(text)
    if "decomposition" in data:
        return {"kind": "decomposition", "decomposition": _decomposition(data["decomposition"], "decomposition")}
    if "h1" in data and "h2" in data:
        return {
            "kind": "interval_map",
            "h1": _interval_map(data["h1"], "h1"),
            "h2": _interval_map(data["h2"], "h2"),
        }
    if "sampled" in data:
        sec = data["sampled"]
        grid = [_num(x, "sampled.grid") for x in sec.get("grid", [])]
        try:
            g1 = SampledFunction(tuple(grid), tuple(_num(x, "sampled.g1") for x in sec.get("g1", [])))
            g2 = SampledFunction(tuple(grid), tuple(_num(x, "sampled.g2") for x in sec.get("g2", [])))
        except ValueError as exc:
            raise DocumentError(str(exc), "sampled") from None
        return {"kind": "sampled", "g1": g1, "g2": g2}
    raise DocumentError("expected a decomposition, an h1/h2 pair or a sampled section")


def dump_decomposition(d: SignedDecomposition) -> dict:
    return {
        "segments": [
            {"lower": _r(s.lower), "upper": _r(s.upper), "sign": g} for s, g in zip(d.segments, d.signs)
        ],
        "choices": {format_rational(p): _r(c) for p, c in sorted(d.choices.items())},
    }


def to_plain(obj):
    """Make report data YAML/JSON friendly: rationals become ``"p/q"``."""
    if isinstance(obj, Fraction):
        return _r(obj)
    if isinstance(obj, (Valuation, Announcement)):
        return _dump_values(obj)
    if isinstance(obj, frozenset):
        return sorted(map(str, obj))
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    return obj

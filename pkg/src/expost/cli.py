"""Command line: ``expost check|efficiency|decompose|generate``.

Exit codes: 0 pass, 1 fail (or refused), 2 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

import yaml

from .auctions import AllocationCapError, gen_section5_sprime, gen_vickrey2, sprime_extension_report
from .documents import (
    DocumentError,
    dump_decomposition,
    dump_instance,
    load_function_document,
    load_instance,
    to_plain,
)
from .efficiency import PreconditionError, UndefinedRatioError, bound_check, gen_example5, gen_example6
from .equilibrium import (
    NOT_APPLICABLE,
    MissingZValuationError,
    check_mve_pair,
    check_structural_lemmas,
    deviation_crosscheck,
    is_expost_equilibrium,
    near_truth_constant,
    replay_witness,
    verify_near_truth_on_maxima,
)
from .model import format_rational, rational
from .parallelogram import (
    NotDecomposableError,
    build_compatible_pair,
    check_mve,
    classify_segments,
    compatible,
    decompose,
    refining_grid,
    verify_compatibility,
)
from .strategies import gen_maxima_plus_ten, gen_nearly_truthful

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class _Timer:
    def __init__(self, enabled):
        self.enabled = enabled
        self.start = time.perf_counter()

    def stamp(self, report):
        if self.enabled:
            report.setdefault("metadata", {})["elapsed_seconds"] = round(time.perf_counter() - self.start, 3)
        return report


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(report, fmt, out):
    plain = to_plain(report)
    if fmt == "machine":
        out.write(json.dumps(plain, indent=2, sort_keys=False) + "\n")
    else:
        out.write(yaml.safe_dump(plain, sort_keys=False, default_flow_style=False, width=100))


def _witness_doc(profile, witness, hspec):
    bids = {j: profile[j].apply(v) for j, v in witness.valuations.items()}
    return {
        "players": list(witness.players),
        "deviator": witness.deviator,
        "chosen": witness.chosen,
        "better": witness.better,
        "gap": witness.gap,
        "replayed_gain": replay_witness(profile, witness, hspec),
        "grid_indices": list(witness.grid_indices),
        "valuations": dict(witness.valuations),
        "announcements": bids,
    }


def _load(args):
    return load_instance(_read(args.file), args.max_alternatives)


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def cmd_check(args, out) -> int:
    timer = _Timer(args.timing)
    doc = _load(args)
    inst, prof = doc.instance, doc.profile
    report = {"command": "check", "checks": {}}
    failed = False
    checks = doc.checks or ["equilibrium"]
    if "equilibrium" in checks:
        v = is_expost_equilibrium(inst, prof, jobs=args.jobs)
        entry = {"verdict": v.status, "cells_checked": v.cells_checked, "subsets_checked": v.subsets_checked}
        if v.witness is not None:
            entry["witness"] = _witness_doc(prof, v.witness, inst.hspec)
        report["checks"]["equilibrium"] = entry
        failed |= not v.passed
    if "near_truth" in checks:
        r = verify_near_truth_on_maxima(inst, prof)
        ok = near_truth_constant(r)
        report["checks"]["near_truth"] = {
            "verdict": "PASS" if ok else "FAIL",
            "offsets": {
                i: [{"valuation": e.valuation, "offsets": list(e.offsets), "constant": e.constant} for e in rows]
                for i, rows in r.items()
            },
        }
        failed |= not ok
    if "lemmas" in checks:
        try:
            res = check_structural_lemmas(inst, prof)
        except MissingZValuationError as exc:
            report["checks"]["lemmas"] = {"status": NOT_APPLICABLE, "reason": str(exc)}
        else:
            report["checks"]["lemmas"] = {
                k: {"status": x.status, "checked": x.checked, "failure": x.failure} for k, x in res.items()
            }
            failed |= any(x.status == "FAIL" for x in res.values())
    if "crosscheck" in checks:
        cc = deviation_crosscheck(inst, prof, samples=args.samples, seed=args.seed)
        report["checks"]["crosscheck"] = cc
        failed |= bool(cc["disagreements"])
    if "efficiency" in checks:
        try:
            rep = bound_check(inst, prof, check_equilibrium=False)
            report["checks"]["efficiency"] = dict(rep.as_dict(), witness=dict(rep.witness))
            failed |= not rep.satisfied
        except UndefinedRatioError as exc:
            report["checks"]["efficiency"] = {"error": str(exc)}
            failed = True
    report["verdict"] = "FAIL" if failed else "PASS"
    _emit(timer.stamp(report), args.format, out)
    return EXIT_FAIL if failed else EXIT_PASS


# ---------------------------------------------------------------------------
# efficiency
# ---------------------------------------------------------------------------


def cmd_efficiency(args, out) -> int:
    timer = _Timer(args.timing)
    doc = _load(args)
    report = {"command": "efficiency"}
    try:
        rep = bound_check(doc.instance, doc.profile, jobs=args.jobs)
    except PreconditionError as exc:
        report["refused"] = str(exc)
        _emit(timer.stamp(report), args.format, out)
        return EXIT_FAIL
    except UndefinedRatioError as exc:
        report["error"] = str(exc)
        _emit(timer.stamp(report), args.format, out)
        return EXIT_FAIL
    report.update(rep.as_dict())
    report["witness"] = dict(rep.witness)
    _emit(timer.stamp(report), args.format, out)
    return EXIT_PASS if rep.satisfied else EXIT_FAIL


# ---------------------------------------------------------------------------
# decompose
# ---------------------------------------------------------------------------


def _step_grid(step, top):
    step = rational(step)
    if step <= 0:
        raise DocumentError("grid step must be positive", "--grid")
    k, pts = 1, []
    while k * step <= top:
        pts.append(k * step)
        k += 1
    return pts


def _violation_doc(v):
    return None if v is None else {"s": v.s, "t": v.t, "y": v.y, "clause": v.clause}


def _decompose_pair(h1, h2, extra_grid, report):
    grid = refining_grid(h1, h2, extra=extra_grid)
    viol = check_mve(h1, h2, grid)
    report["mve"] = {"verdict": "PASS" if viol is None else "FAIL", "counterexample": _violation_doc(viol)}
    if viol is not None:
        return False
    try:
        d = decompose(h1, h2, grid)
    except NotDecomposableError as exc:
        report["decomposition_error"] = str(exc)
        return False
    report["decomposition"] = dump_decomposition(d)
    comp = verify_compatibility(h1, h2, d, grid)
    report["compatibility"] = {str(k): v for k, v in comp.items()}
    cls = classify_segments(h1, grid=grid)
    report["classes"] = {str(s): sorted(c) for s, c in cls.classes.items()}
    report["lemma_d_failures"] = [str(s) for s in cls.lemma_d_failures]
    return compatible(comp) and comp["choices"] is None


def _pieces_doc(h):
    return {
        "pieces": [{"lower": lo, "upper": hi, "value": v} for lo, hi, v in h.pieces],
        "points": {format_rational(x): y for x, y in sorted(h.points.items())},
    }


def cmd_decompose(args, out) -> int:
    timer = _Timer(args.timing)
    doc = load_function_document(_read(args.file))
    report = {"command": "decompose", "input": doc["kind"]}
    if doc["kind"] == "sampled":
        g1, g2 = doc["g1"], doc["g2"]
        viol = check_mve_pair(g1, g2)
        report["mve"] = {"verdict": "PASS" if viol is None else "FAIL", "counterexample": _violation_doc(viol)}
        ok = viol is None
    else:
        if doc["kind"] == "decomposition":
            d = doc["decomposition"]
            h1, h2 = build_compatible_pair(d)
            report["h1"], report["h2"] = _pieces_doc(h1), _pieces_doc(h2)
        else:
            h1, h2 = doc["h1"], doc["h2"]
        top = max(refining_grid(h1, h2))
        extra = _step_grid(args.grid, top) if args.grid else ()
        ok = _decompose_pair(h1, h2, extra, report)
        if ok and doc["kind"] == "decomposition":
            back = report["decomposition"] == dump_decomposition(d)
            report["round_trip"] = back
            ok = back
    report["verdict"] = "PASS" if ok else "FAIL"
    _emit(timer.stamp(report), args.format, out)
    return EXIT_PASS if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def _levels(text):
    return tuple(rational(x) for x in text.split(","))


def cmd_generate(args, out) -> int:
    name = args.name
    space = None
    checks = ["equilibrium"]
    if name == "vickrey2":
        space, inst, prof = gen_vickrey2(_levels(args.levels or "0,1,2"))
    elif name == "example5":
        space, inst, prof = gen_example5(args.n or 3, args.eps or "1/10", args.max_alternatives)
        checks = ["equilibrium", "efficiency"]
    elif name == "example6":
        inst, prof = gen_example6(args.alternatives or 5, args.n or 3, args.eps or "1/10")
        checks = ["equilibrium", "efficiency"]
    elif name == "sprime":
        space, _, inst, prof = gen_section5_sprime(
            _levels(args.levels or "0,1,2"), args.per_player or 4, args.seed
        )
    elif name == "maxima-plus-ten":
        inst, prof = gen_maxima_plus_ten(
            args.n or 3, args.alternatives, _levels(args.levels or "0,1/2,1,2"), args.per_player or 3, args.seed
        )
        checks = ["equilibrium", "near_truth", "lemmas"]
    elif name == "nearly-truthful":
        inst, prof = gen_nearly_truthful(
            args.n or 3,
            args.alternatives or 5,
            args.subset_size,
            _levels(args.levels or "0,1/2,1,2"),
            args.per_player or 3,
            args.seed,
        )
        checks = ["equilibrium", "near_truth", "lemmas"]
    else:  # argparse restricts the choices
        raise DocumentError(f"unknown generator {name!r}")
    out.write(dump_instance(inst, prof, space, checks))
    return EXIT_PASS


def cmd_sprime_report(args, out) -> int:
    space, subset, _, _ = gen_section5_sprime()
    _emit({"command": "sprime-report", "subset": list(subset), **sprime_extension_report(space, subset)}, args.format, out)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

GENERATORS = ("vickrey2", "example5", "example6", "sprime", "maxima-plus-ten", "nearly-truthful")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=1, help="worker processes for equilibrium scans")
    common.add_argument("--max-alternatives", type=int, default=None, help="cap on alternatives / allocations")
    common.add_argument("--format", choices=("human", "machine"), default="human")
    common.add_argument("--seed", type=int, default=0, help="seed for random cross-check deviations and generators")
    common.add_argument("--timing", action="store_true", help="add elapsed time to the report metadata")

    p = argparse.ArgumentParser(prog="expost", description="Exact ex-post equilibrium checks for VCG games.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="run the checks listed in an instance file")
    c.add_argument("file")
    c.add_argument("--samples", type=int, default=100, help="random deviations for the cross-check")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("efficiency", parents=[common], help="worst-case welfare ratio against the bounds")
    e.add_argument("file")
    e.set_defaults(func=cmd_efficiency)

    d = sub.add_parser("decompose", parents=[common], help="segment decomposition of a function pair")
    d.add_argument("file")
    d.add_argument("--grid", default=None, help="extra probe step, e.g. 1/4")
    d.set_defaults(func=cmd_decompose)

    g = sub.add_parser("generate", parents=[common], help="write a generated instance document")
    g.add_argument("name", choices=GENERATORS)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--eps", default=None)
    g.add_argument("--alternatives", type=int, default=None)
    g.add_argument("--levels", default=None, help="comma separated grid values")
    g.add_argument("--per-player", type=int, default=None)
    g.add_argument("--subset-size", type=int, default=None)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("sprime-report", parents=[common], help="bids forced outside the six-allocation subset")
    s.set_defaults(func=cmd_sprime_report)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except (DocumentError, AllocationCapError, ValueError, KeyError, ZeroDivisionError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"expost: error: {msg}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

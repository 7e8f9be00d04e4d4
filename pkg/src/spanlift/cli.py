"""Command-line entry point.

Exit codes: 0 success (ACCEPTED / within budget), 1 rejected or exceeded,
2 I/O, parse or parameter errors.  Every report goes to stdout (or --out)
as JSON; --report-dir additionally writes CSV tables and PNG figures.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from typing import List, Optional

from . import __version__
from .errors import SpanliftError
from .logic.flavors import DP, RDP, TCDP, ZCDP, Flavor

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

# name -> (type, builtin default); values come from flags, then --config, then here.
COMMON = {
    "strict": (bool, False),
    "fuel": (int, 64),
    "grid": (list, []),
    "default_grid": (str, None),
    "out": (str, None),
    "format": (str, "json"),
    "report_dir": (str, None),
    "bits": (bool, False),
}

BIT_KEYS = {"epsilon", "per_step_epsilon", "value", "observed", "max_observed", "claimed", "slack"}


class UsageError(Exception):
    pass


# -- parsing helpers ----------------------------------------------------------------------


def parse_flavor(text: str) -> Flavor:
    """``KIND:a,b`` with KIND one of DP, RDP, zCDP, tCDP (e.g. ``zCDP:0,0.375``)."""
    try:
        kind, rest = text.split(":", 1)
        a, b = (float(v) for v in rest.split(","))
    except ValueError:
        raise UsageError(f"cannot parse budget {text!r}; expected KIND:a,b")
    ctor = {"dp": DP, "rdp": RDP, "zcdp": ZCDP, "tcdp": TCDP}.get(kind.strip().lower())
    if ctor is None:
        raise UsageError(f"unknown flavor {kind!r}")
    return ctor(a, b)


def parse_spec(text: str):
    """``RENYI:alpha``, ``ZCDP:xi``, ``TCDP:omega`` or ``DP:epsilon``."""
    from .divergences import DPDiv, RenyiDiv, TCDPDiv, ZCDPDiv

    try:
        fam, val = text.split(":", 1)
        v = float(val)
    except ValueError:
        raise UsageError(f"cannot parse divergence spec {text!r}; expected FAMILY:param")
    ctor = {"RENYI": RenyiDiv, "ZCDP": ZCDPDiv, "TCDP": TCDPDiv, "DP": DPDiv}.get(fam.strip().upper())
    if ctor is None:
        raise UsageError(f"unknown divergence family {fam!r}")
    return ctor(v)


def parse_grids(items: List[str], default: Optional[str]):
    from .dist import GridSpec

    grids = {}
    for item in items:
        site, sep, spec = item.partition("=")
        if not sep:
            raise UsageError(f"--grid expects site=center,halfwidth,bins, got {item!r}")
        grids[site.strip()] = GridSpec.parse(spec)
    return grids, (GridSpec.parse(default) if default else None)


def read_config(path: str) -> dict:
    cp = configparser.ConfigParser()
    if not cp.read(path, encoding="utf-8"):
        raise OSError(f"cannot read config file {path}")
    if not cp.has_section("spanlift"):
        return {}
    sec = cp["spanlift"]
    out = {}
    for key, (ty, _) in COMMON.items():
        if key not in sec:
            continue
        if ty is bool:
            out[key] = sec.getboolean(key)
        elif ty is int:
            out[key] = sec.getint(key)
        elif ty is list:
            out[key] = [g.strip() for g in sec[key].replace(";", "\n").splitlines() if g.strip()]
        else:
            out[key] = sec[key]
    return out


def resolve(args) -> None:
    """Fill unset common options from --config, then from builtin defaults."""
    conf = read_config(args.config) if args.config else {}
    for key, (_, default) in COMMON.items():
        if getattr(args, key, None) in (None, []):
            setattr(args, key, conf.get(key, default))


def to_bits(obj):
    if isinstance(obj, dict):
        out = {k: (v / math.log(2) if k in BIT_KEYS and isinstance(v, float) else to_bits(v))
               for k, v in obj.items()}
        return out
    if isinstance(obj, list):
        return [to_bits(v) for v in obj]
    return obj


def _jsonable(obj):
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def emit(args, payload: dict, convertible: bool = True) -> None:
    if args.bits and convertible:
        payload = dict(to_bits(payload), units="bits")
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _report_dir(args) -> Optional[str]:
    if args.report_dir:
        os.makedirs(args.report_dir, exist_ok=True)
    return args.report_dir


def _interp_config(args, file_grids=None):
    from .interp import InterpConfig

    items = [f"{k}={v}" for k, v in (file_grids or {}).items()] + list(args.grid)
    grids, default = parse_grids(items, args.default_grid)
    return InterpConfig(fuel=args.fuel, grids=grids, default_grid=default)


def _budget_report(route: str, b, intermediate=None) -> dict:
    from .accountant import report

    if isinstance(b, Flavor) and b.kind == "DP":
        return report(route, b, intermediate)
    extra = dict(intermediate or {})
    extra["budget"] = b.to_json() if isinstance(b, Flavor) else {"kind": "RDP", "alpha": "any", "rho": b.label}
    return {"route": route, "epsilon": None, "delta": None, "intermediate": extra}


# -- commands ----------------------------------------------------------------------------------


def _proof_path(text: str) -> str:
    if text.startswith("golden:"):
        from .golden import golden_path

        return golden_path(text.split(":", 1)[1])
    return text


def cmd_check(args) -> int:
    from .logic.checker import check_derivation, load_proof

    programs = {}
    for item in args.program or []:
        name, sep, path = item.partition("=")
        if not sep:
            raise UsageError(f"--program expects NAME=PATH, got {item!r}")
        programs[name] = path
    pf = load_proof(_proof_path(args.proof), programs)
    cert = check_derivation(pf.derivation, strict=args.strict, lemmas=pf.lemmas, programs=pf.programs)
    emit(args, cert.to_json(), convertible=False)
    d = _report_dir(args)
    if d:
        from .report import check_report

        check_report(d, pf.derivation)
    if not cert.accepted:
        print(f"REJECTED at {cert.path}: {cert.reason}: {cert.message}", file=sys.stderr)
    return EXIT_OK if cert.accepted else EXIT_FAIL


def _load_dist(path: str):
    from .dist import SubDist

    with open(path, encoding="utf-8") as fh:
        return SubDist.from_json(json.load(fh))


def cmd_divergence(args) -> int:
    from .divergences import divergence, spec_family, spec_params

    spec = parse_spec(args.spec)
    mu1, mu2 = _load_dist(args.dist_a), _load_dist(args.dist_b)
    value, cert = divergence(spec, mu1, mu2)
    out = {"family": spec_family(spec), "params": spec_params(spec), "value": value,
           "certificate": cert.to_json() if cert is not None else None}
    emit(args, out)
    d = _report_dir(args)
    if d:
        from .report import divergence_curve

        fam = spec_family(spec)
        param = {"DP": "epsilon", "RENYI": "alpha", "ZCDP": "xi", "TCDP": "omega"}[fam]
        divergence_curve(d, mu1, mu2, "RENYI" if fam == "RENYI" else fam, getattr(spec, param))
    return EXIT_OK


def _load_program(path: str):
    from .lang.syntax import parse_program

    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())


def cmd_oracle(args) -> int:
    from .errors import InvalidParam
    from .interp import make_memory
    from .lang.syntax import parse_assertion
    from .logic.judgment import Judgment
    from .logic.validate import empirical_validate

    c1, ctx = _load_program(args.program_a)
    c2, ctx2 = _load_program(args.program_b)
    if ctx != ctx2:
        raise InvalidParam("the two programs declare different variables")
    with open(args.inputs, encoding="utf-8") as fh:
        spec = json.load(fh)
    if not isinstance(spec, dict) or not isinstance(spec.get("pairs"), list):
        raise InvalidParam("inputs file needs a 'pairs' list")
    output = args.output or spec.get("output")
    if not output:
        raise InvalidParam("name the output variable with --output or 'output' in the inputs file")
    pre = parse_assertion(spec.get("pre", "true"), ctx)
    post = parse_assertion(f"{output}@1 == {output}@2", ctx)
    flavor = parse_flavor(args.flavor or spec.get("flavor", ""))
    if args.budget is not None:
        flavor = flavor.with_grade(flavor.a, args.budget)
    pairs = []
    for k, p in enumerate(spec["pairs"]):
        if not isinstance(p, dict) or not isinstance(p.get("left"), dict) or not isinstance(p.get("right"), dict):
            raise InvalidParam(f"input pair {k} needs 'left' and 'right' memories")
        pairs.append((make_memory(ctx, p["left"]), make_memory(ctx, p["right"])))
    j = Judgment(ctx, c1, c2, pre, post, flavor)
    result = empirical_validate(j, pairs, _interp_config(args, spec.get("grids")))
    emit(args, result)
    d = _report_dir(args)
    if d:
        from .report import oracle_report

        oracle_report(d, result)
    return EXIT_OK if result["within_budget"] else EXIT_FAIL


def cmd_account(args) -> int:
    from . import accountant as acc

    budget = None
    if args.action in ("convert", "group") and len(args.budgets) != 1:
        raise UsageError(f"account {args.action} takes exactly one budget")
    if args.action == "compose" and not args.budgets:
        raise UsageError("account compose needs at least one budget")
    if args.action == "compose":
        steps = [parse_flavor(b) for b in args.budgets]
        budget = acc.compose_all(steps)
        rep = _budget_report("compose", budget, {"steps": [s.to_json() for s in steps]})
    elif args.action == "convert":
        (b,) = [parse_flavor(x) for x in args.budgets]
        assumptions: list = []
        out = acc.convert(b, args.to, delta=args.delta, alpha=args.alpha, lossless=not args.not_lossless,
                          assumptions=assumptions)
        rep = _budget_report(f"{b.kind}->{args.to}", out, {"from": b.to_json(), "assumptions": assumptions})
        budget = b
    elif args.action == "group":
        (b,) = [parse_flavor(x) for x in args.budgets]
        notes: list = []
        out = acc.group_privacy(b, args.k, notes=notes)
        rep = _budget_report("group", out, {"from": b.to_json(), "k": args.k, "notes": notes})
    else:
        if args.epsilon is None or args.delta1 is None or args.K is None or args.delta2 is None:
            raise UsageError("advanced needs --epsilon, --delta1, -K and --delta2")
        out = acc.advanced_composition(args.epsilon, args.delta1, args.K, args.delta2)
        rep = acc.report("advanced", out, {"per_step_epsilon": args.epsilon, "K": args.K})
    emit(args, rep)
    d = _report_dir(args)
    if d:
        from .report import account_report

        account_report(d, rep, budget if budget is not None and budget.kind != "DP" else None)
    return EXIT_OK


def cmd_compare_foldg(args) -> int:
    from .accountant import compare_foldg

    rep = compare_foldg(args.K, args.sigma, args.delta1, args.delta2)
    emit(args, rep)
    d = _report_dir(args)
    if d:
        from .report import foldg_sweep

        foldg_sweep(d, args.sigma, args.delta1, args.delta2, args.K)
    if rep["inequality_checked"] and not rep["zcdp_better"]:
        print("zCDP route is not better than advanced composition", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with a [spanlift] section; flags override it")
    common.add_argument("--strict", action="store_true", default=None,
                        help="fail on entailments the decision procedure cannot settle")
    common.add_argument("--fuel", type=int, help="loop unrolling budget for the interpreter")
    common.add_argument("--grid", action="append", default=[], metavar="SITE=C,H,BINS",
                        help="discretization grid for a sampler site (repeatable)")
    common.add_argument("--default-grid", metavar="C,H,BINS", help="grid for sites without their own")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--format", choices=["json"], help="output format (json)")
    common.add_argument("--report-dir", help="also write CSV tables and PNG figures here")
    common.add_argument("--bits", action="store_true", default=None,
                        help="display epsilon-like numbers in bits (computation stays in nats)")

    p = argparse.ArgumentParser(prog="spanlift", description="Span-lifting proof checker and privacy accountant.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="check a proof file")
    c.add_argument("proof", help="proof JSON, or golden:NAME for a shipped proof")
    c.add_argument("--program", action="append", metavar="NAME=PATH", help="override a program's location")
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("divergence", parents=[common], help="divergence between two distribution files")
    d.add_argument("spec", help="RENYI:alpha, ZCDP:xi, TCDP:omega or DP:epsilon")
    d.add_argument("dist_a")
    d.add_argument("dist_b")
    d.set_defaults(func=cmd_divergence)

    o = sub.add_parser("oracle", parents=[common], help="run two programs and compare against a budget")
    o.add_argument("program_a")
    o.add_argument("program_b")
    o.add_argument("inputs", help="JSON with 'pairs' of memories and optional 'pre', 'output', 'flavor', 'grids'")
    o.add_argument("--flavor", help="budget as KIND:a,b (e.g. zCDP:0,0.375)")
    o.add_argument("--budget", type=float, help="override the claimed grade (delta or rho)")
    o.add_argument("--output", help="output variable")
    o.set_defaults(func=cmd_oracle)

    a = sub.add_parser("account", parents=[common], help="budget arithmetic")
    a.add_argument("action", choices=["compose", "convert", "group", "advanced"])
    a.add_argument("budgets", nargs="*", help="budgets as KIND:a,b")
    a.add_argument("--to", choices=["DP", "RDP", "zCDP", "tCDP"], default="DP")
    a.add_argument("--delta", type=float)
    a.add_argument("--alpha", type=float)
    a.add_argument("--not-lossless", action="store_true", help="refuse conversions that need losslessness")
    a.add_argument("-k", type=int, default=2, help="group size")
    a.add_argument("--epsilon", type=float)
    a.add_argument("--delta1", type=float)
    a.add_argument("--delta2", type=float)
    a.add_argument("-K", type=int)
    a.set_defaults(func=cmd_account)

    f = sub.add_parser("compare-foldg", parents=[common], help="zCDP route vs advanced composition")
    f.add_argument("-K", type=int, default=100)
    f.add_argument("--sigma", type=float, default=10.0)
    f.add_argument("--delta1", type=float, default=1e-7)
    f.add_argument("--delta2", type=float, default=1e-5)
    f.set_defaults(func=cmd_compare_foldg)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        resolve(args)
        return args.func(args)
    except (OSError, UsageError, SpanliftError, json.JSONDecodeError, configparser.Error) as exc:
        print(f"spanlift: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit codes: 0 success / property holds, 1 property fails or a precondition
is violated, 2 usage or input errors, 3 resource exhaustion.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import cohen
from .errors import (
    ClassValidationError, DanglingParameter, FreeVariableError, InfForceError,
    InternalConsistencyError, NoPathError, ParseError, PreconditionViolated,
    ResourceExhausted, SignatureError, UnknownNode,
)
from .forcing import build_generic, forces, generic_nodes, is_generic
from .logic import Signature, classify, free_vars, parse_formula, render, satisfies, size
from .modal import bfa_sigma1_report, check_modal_principle, modal_eval, parse_modal, render_modal
from .suites import SUITES, run_suite
from .system import check_extension_system, load_class_file, sigma_closed_probe

OK, FAIL, USAGE, EXHAUSTED = 0, 1, 2, 3


@dataclass
class CommandResult:
    code: int
    report: str
    payload: dict | None = None


def _system(args):
    if not args.cls:
        raise _Usage("--class is required")
    try:
        return load_class_file(args.cls)
    except FileNotFoundError:
        raise _Usage(f"no such class file: {args.cls}") from None


class _Usage(Exception):
    pass


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise _Usage("missing " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _formula(args, sig):
    _need(args, "formula")
    return parse_formula(args.formula, sig)


# -- subcommands ------------------------------------------------------------

def cmd_parse(args):
    _need(args, "formula")
    if args.cls:
        sig = _system(args).signature
    else:
        sig = Signature.from_spec(args.sig or "")
    phi = parse_formula(args.formula, sig)
    payload = {"formula": render(phi), "size": size(phi),
               "free": sorted(free_vars(phi))}
    if not free_vars(phi):
        payload["class"] = str(classify(phi))
    text = f"{payload['formula']}  (size {payload['size']}"
    text += f", {payload['class']})" if "class" in payload else ")"
    return CommandResult(OK, text, payload)


def cmd_eval(args):
    system = _system(args)
    _need(args, "node")
    phi = _formula(args, system.signature)
    value = satisfies(system.node(args.node), phi)
    return CommandResult(OK, f"{args.node} |= {render(phi)}: {str(value).lower()}",
                         {"node": args.node, "sentence": render(phi), "value": value})


def cmd_force(args):
    system = _system(args)
    _need(args, "node")
    phi = _formula(args, system.signature)
    v = forces(system, args.node, phi, trace=args.trace)
    text = f"{args.node} {v.verdict}: {render(phi)}"
    if args.trace:
        text += "\n" + json.dumps(v.trace, indent=2)
    return CommandResult(OK, text, v.to_json())


def cmd_generics(args):
    system = _system(args)
    _need(args, "budget")
    if args.node:
        rep = is_generic(system, args.node, args.budget)
        text = f"{args.node}: {'generic' if rep.generic else 'not generic'} at budget " \
               f"{args.budget} ({len(rep.undecided)} undecided)"
        return CommandResult(OK, text, rep.to_json())
    gens = generic_nodes(system, args.budget)
    return CommandResult(OK, "generic nodes: " + (", ".join(gens) or "none"),
                         {"budget": args.budget, "generic": gens})


def cmd_build_generic(args):
    system = _system(args)
    _need(args, "node", "budget")
    path = build_generic(system, args.node, args.budget, args.max_moves)
    lines = [f"{e.source} -> {e.target} (edge {e.index}) decides {render(f)}"
             for e, f in path.steps]
    lines.append(f"generic: {path.final}")
    return CommandResult(OK, "\n".join(lines), path.to_json())


def cmd_check(args):
    system = _system(args)
    if args.suite is None:
        rep = check_extension_system(system)
        return CommandResult(OK if rep.passes else FAIL,
                             "valid" if rep.passes else "\n".join(rep.problems()), rep.to_json())
    _need(args, "budget")
    rep = run_suite(system, args.suite, args.budget)
    head = f"suite {args.suite} at budget {args.budget}: " \
           f"{'holds' if rep.passes else 'FAILS'} ({rep.checked} checked)"
    return CommandResult(OK if rep.passes else FAIL,
                         "\n".join([head] + rep.violations[:20]), rep.to_json())


def cmd_modal(args):
    system = _system(args)
    _need(args, "node")
    if args.principle:
        _need(args, "budget")
        rep = check_modal_principle(system, args.node, args.principle, args.budget)
        text = f"{rep.principle} at {args.node}: {'holds' if rep.holds else 'fails'}"
        if rep.sentence is not None:
            text += f" ({render(rep.sentence)})"
        return CommandResult(OK if rep.holds else FAIL, text, rep.to_json())
    _need(args, "formula")
    m = parse_modal(args.formula, system.signature)
    value = modal_eval(system, args.node, m)
    return CommandResult(OK, f"{args.node} |= {render_modal(m)}: {str(value).lower()}",
                         {"node": args.node, "formula": render_modal(m), "value": value})


def cmd_bfa(args):
    system = _system(args)
    _need(args, "node", "budget")
    out = bfa_sigma1_report(system, args.node, args.budget)
    payload = {"node": args.node, "budget": args.budget,
               "violations": [{"descendant": d, "sentence": render(f)} for d, f in out]}
    text = "Sigma_1-absolute into its cone" if not out else \
        "\n".join(f"{d}: {render(f)}" for d, f in out[:20])
    return CommandResult(OK if not out else FAIL, text, payload)


def cmd_probe(args):
    system = _system(args)
    _need(args, "seed")
    rep = sigma_closed_probe(system, args.length, args.samples, args.seed, args.kappa)
    text = f"{rep.verdict} ({len(rep.chains)} chains, " \
           f"{'exhaustive' if rep.exhaustive else 'sampled'})"
    return CommandResult(OK if rep.directed else FAIL, text, rep.to_json())


def _families(args):
    _need(args, "families", "depth")
    return cohen.parse_families(args.families, max(args.depth, 1))


def cmd_cohen(args):
    action = args.action
    if action == "verify":
        if not args.cert:
            raise _Usage("cohen verify needs a certificate path")
        cert = cohen.AmalgamationCertificate.from_json(json.loads(Path(args.cert).read_text()))
        fams = cohen.parse_families(args.families, cert.depth) if args.families else None
        res = cohen.verify_amalgamation(cert, fams)
        return CommandResult(OK if res.ok else FAIL,
                             "certificate verifies" if res.ok else f"FAILS: {res.failure}",
                             res.to_json())
    fams = _families(args)
    if action == "gen":
        real = cohen.build_generic_real(fams, args.depth)
        return CommandResult(OK, real.bits, real.to_json())
    _need(args, "seed")
    if action == "tower":
        _need(args, "k")
        tower = cohen.build_mutual_tower(args.k, fams, args.depth, args.seed)
        return CommandResult(OK, "\n".join(r.bits for r in tower),
                             {"seed": args.seed, "reals": [r.to_json() for r in tower]})
    if args.inputs is not None:
        inputs = [c for c in args.inputs.split(",") if c]
    elif args.k is None:
        raise _Usage("cohen amalgamate needs --k or --inputs")
    elif args.k:
        inputs = cohen.build_mutual_tower(args.k, fams, args.depth, args.seed)
    else:
        inputs = []
    cert = cohen.amalgamate(inputs, fams, args.depth, args.seed, args.policy)
    res = cohen.verify_amalgamation(cert)
    payload = cert.to_json()
    payload["verification"] = res.to_json()
    text = "\n".join([f"d[{n}] = {row}" for n, row in sorted(cert.d.items())] +
                     [f"diff_{n} = {v}" for n, v in sorted(cert.diffs.items())] +
                     ["certificate verifies" if res.ok else f"FAILS: {res.failure}"])
    return CommandResult(OK if res.ok else FAIL, text, payload)


COMMANDS = {
    "parse": cmd_parse, "eval": cmd_eval, "force": cmd_force, "generics": cmd_generics,
    "build-generic": cmd_build_generic, "check": cmd_check, "modal": cmd_modal,
    "bfa": cmd_bfa, "probe": cmd_probe, "cohen": cmd_cohen,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--class", dest="cls", metavar="PATH")
    common.add_argument("--node")
    common.add_argument("--formula")
    common.add_argument("--budget", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--json", action="store_true")
    common.add_argument("--trace", action="store_true")

    parser = argparse.ArgumentParser(prog="infforce", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("parse", parents=[common])
    p.add_argument("--sig", help='signature without a class file, e.g. "<:2,P:1,c:0"')
    sub.add_parser("eval", parents=[common])
    sub.add_parser("force", parents=[common])
    sub.add_parser("generics", parents=[common])
    p = sub.add_parser("build-generic", parents=[common])
    p.add_argument("--max-moves", type=int)
    p = sub.add_parser("check", parents=[common])
    p.add_argument("--suite", choices=sorted(SUITES))
    p = sub.add_parser("modal", parents=[common])
    p.add_argument("--principle", type=str.upper, choices=["MP", "RA"])
    sub.add_parser("bfa", parents=[common])
    p = sub.add_parser("probe", parents=[common])
    p.add_argument("--length", type=int, default=3, help="maximum chain length")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--kappa", type=int)
    p = sub.add_parser("cohen", parents=[common])
    p.add_argument("action", choices=["gen", "tower", "amalgamate", "verify"])
    p.add_argument("cert", nargs="?", help="certificate file (verify)")
    p.add_argument("--families")
    p.add_argument("--depth", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--inputs", help="comma-separated input bit strings (amalgamate)")
    p.add_argument("--policy", choices=["tower", "fresh"], default="tower")
    return parser


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, ResourceExhausted):
        return EXHAUSTED
    if isinstance(exc, (PreconditionViolated, NoPathError, InternalConsistencyError)):
        return FAIL
    if isinstance(exc, (ParseError, UnknownNode, DanglingParameter, ClassValidationError,
                        FreeVariableError, SignatureError, _Usage, ValueError, TypeError,
                        OSError, json.JSONDecodeError)):
        return USAGE
    return FAIL


def run_command(argv: list[str]) -> CommandResult:
    parser = build_parser()
    err = io.StringIO()
    try:
        with contextlib.redirect_stderr(err):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return CommandResult(USAGE if exc.code else OK, err.getvalue().strip())
    try:
        result = COMMANDS[args.command](args)
    except (InfForceError, _Usage, ValueError, TypeError, OSError) as exc:
        return CommandResult(_exit_code(exc), f"error: {exc}")
    if not args.json:
        result.payload = None
    return result


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if argv and argv[0] in ("-h", "--help"):
        build_parser().print_help()
        return OK
    result = run_command(argv)
    if result.payload is not None:
        print(json.dumps(result.payload, indent=2, sort_keys=True))
    elif result.code in (OK, FAIL) and not result.report.startswith("error:"):
        print(result.report)
    else:
        print(result.report, file=sys.stderr)
    return result.code


if __name__ == "__main__":
    sys.exit(main())

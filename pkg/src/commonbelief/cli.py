"""Command-line front end.

Exit codes: 0 affirmative verdict, 1 negative verdict, 2 usage or parse
error, 3 search bound guard.
"""

from __future__ import annotations

import argparse
import sys

from . import proof, search
from .bisim import are_bisimilar
from .construct import ConstructionError, fold_construct, make_branching, verify_construction
from .kripke import ModelError, UniModalModel, as_unimodal, check_frame_properties, dumps_model, load_model, to_dot
from .semantics import ClosureMode, Evaluator
from .syntax import (
    And, Atom, C, Neg, ParseError, atoms, parse, proper_closure, subformulas, to_string,
)

OK, NO, USAGE, GUARD = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _Usage(message)


class _Usage(Exception):
    pass


def _closure_arg(p):
    p.add_argument(
        "--closure", choices=[m.value for m in ClosureMode], default="transitive",
        help="closure used for C (default: transitive)",
    )


def _search_args(p):
    p.add_argument("--formula", required=True)
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--max-states", type=int, required=True)
    p.add_argument("--atoms", help="comma-separated atoms (default: those of the formula)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exhaustive", action="store_true", default=True)
    g.add_argument("--samples", type=int, help="random mode with this many sampled models")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="write a countermodel to this file")
    _closure_arg(p)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="commonbelief", description="Common belief over KD45 models.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="parse and pretty-print a formula")
    p.add_argument("--formula", required=True)
    p.add_argument("--tree", action="store_true", help="also print the primitive AST")

    p = sub.add_parser("check-model", help="frame properties of a model file")
    p.add_argument("--model", required=True)

    p = sub.add_parser("mc", help="model check a formula")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--state", help="state to check (default: validity on the model)")
    _closure_arg(p)

    p = sub.add_parser("closure", help="subformulas and proper closure of a formula")
    p.add_argument("--formula", required=True)

    p = sub.add_parser("bisim", help="bisimilarity of two pointed models")
    p.add_argument("--model1", required=True)
    p.add_argument("--state1", required=True)
    p.add_argument("--model2", required=True)
    p.add_argument("--state2", required=True)

    _search_args(sub.add_parser("search", help="look for a KD45_n countermodel"))
    _search_args(sub.add_parser("certify", help="certify validity up to bounds"))

    p = sub.add_parser("prove", help="check a CB_n proof file")
    p.add_argument("--proof", required=True)
    p.add_argument("--agents", type=int, default=2)

    p = sub.add_parser("construct", help="build a KD45_n model from a uni-modal one")
    p.add_argument("--model", required=True)
    p.add_argument("--root", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--agents", type=int, default=2)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--branch", metavar="ATOM",
                   help="clone root successors marked by the fresh ATOM and conjoin <C>ATOM & <C>~ATOM")
    p.add_argument("--trace", action="store_true", help="print the elimination trace")
    p.add_argument("--out", help="write the constructed model to this file")
    p.add_argument("--dot", help="write a Graphviz rendering to this file")

    p = sub.add_parser("axioms", help="print CB_n axiom schemas or instances")
    p.add_argument("--agents", type=int, default=2)
    p.add_argument("--args", help="comma-separated formulas for a Cn instance")
    p.add_argument("--diamond", action="store_true", help="print the diamond form of Cn")
    return ap


def _cmd_parse(a, out):
    f = parse(a.formula)
    print(to_string(f), file=out)
    if a.tree:
        print(repr(f), file=out)
    return OK


def _cmd_check_model(a, out):
    report = check_frame_properties(load_model(a.model))
    print(report, file=out)
    return OK if report.kd45 else NO


def _cmd_mc(a, out):
    m = load_model(a.model)
    f = parse(a.formula)
    ev = Evaluator(m, ClosureMode(a.closure))
    if a.state is not None:
        verdict = ev.holds(a.state, f)
        print(f"{'true' if verdict else 'false'} at {a.state}", file=out)
        return OK if verdict else NO
    ext = ev.extension(f)
    print("extension: {" + ", ".join(s for s in m.states if s in ext) + "}", file=out)
    valid = len(ext) == len(m.states)
    print("valid on model" if valid else "not valid on model", file=out)
    return OK if valid else NO


def _cmd_closure(a, out):
    f = parse(a.formula)
    subs = sorted(subformulas(f), key=lambda g: (len(to_string(g)), to_string(g)))
    print("subformulas:", file=out)
    for g in subs:
        print("  " + to_string(g), file=out)
    cl = proper_closure(f)
    print(f"proper closure ({len(cl)}):", file=out)
    for g in cl:
        mark = "  [diamond]" if g in cl.diamonds else ""
        print(f"  {to_string(g)}{mark}", file=out)
    return OK


def _cmd_bisim(a, out):
    verdict = are_bisimilar(load_model(a.model1), a.state1, load_model(a.model2), a.state2)
    print("bisimilar" if verdict else "not bisimilar", file=out)
    return OK if verdict else NO


def _config(a, f):
    declared = [x.strip() for x in a.atoms.split(",") if x.strip()] if a.atoms else sorted(atoms(f))
    random_mode = a.samples is not None
    return search.SearchConfig(
        a.agents, a.max_states, tuple(declared), exhaustive=not random_mode,
        samples=a.samples or 0, seed=a.seed, mode=ClosureMode(a.closure), jobs=a.jobs,
    )


def _emit_countermodel(a, outcome, out):
    cm = outcome.countermodel
    text = dumps_model(cm.model, point=cm.state)
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
    print(text, end="", file=out)


def _cmd_search(a, out):
    f = parse(a.formula)
    outcome = search.find_countermodel(f, _config(a, f))
    if outcome.found:
        print(f"countermodel found ({outcome.stats}):", file=out)
        _emit_countermodel(a, outcome, out)
        return NO
    print(f"no countermodel within bounds ({outcome.stats})", file=out)
    return OK


def _cmd_certify(a, out):
    f = parse(a.formula)
    report = search.certify_valid_up_to(f, _config(a, f))
    print(report, file=out)
    if report.certified:
        return OK
    _emit_countermodel(a, report.outcome, out)
    return NO


def _cmd_prove(a, out):
    with open(a.proof) as fh:
        p = proof.loads_proof(fh.read(), a.agents)
    verdict = proof.check_proof(p)
    print(verdict, file=out)
    return OK if verdict.accepted else NO


def _cmd_construct(a, out):
    m = load_model(a.model)
    # a one-agent file is taken as given; several agents mean their common-belief closure
    m = UniModalModel(m.states, m.relations[0], m.valuation) if m.agent_count == 1 else as_unimodal(m)
    f = parse(a.formula)
    if a.branch:
        m, extra = make_branching(m, a.root, a.agents, a.branch)
        f = And(f, extra)
    cm = fold_construct(m, a.root, proper_closure(f), a.agents)
    if a.trace:
        print(cm.trace.log(), file=out)
    text = dumps_model(cm.model, point=cm.root)
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
    if a.dot:
        with open(a.dot, "w") as fh:
            fh.write(to_dot(cm.model, cm.root))
    print(text, end="", file=out)
    if a.verify:
        report = verify_construction(cm)
        print(report, file=out)
        return OK if report.passed else NO
    return OK


def _cmd_axioms(a, out):
    n = a.agents
    if a.args:
        args = [parse(x) for x in a.args.split(",")]
        build = proof.build_chat_n if a.diamond else proof.build_cn
        print(to_string(build(n, args)), file=out)
        return OK
    names = {"k": "K", "d": "D", "4": "4", "cc": "Cc", "cn": f"C{n}"}
    for ax in proof.AXIOM_IDS:
        print(f"{names[ax]:>4}: {_schema_text(proof.schema(ax, n))}", file=out)
    print(" MP: from phi -> psi and phi, derive psi", file=out)
    print("Nec: from phi, derive C phi", file=out)
    return OK


def _schema_text(pattern) -> str:
    # metavariables print as atoms of the same name
    def inst(p):
        if isinstance(p, proof.Meta):
            return Atom(p.name)
        if isinstance(p, Neg):
            return Neg(inst(p.child))
        if isinstance(p, C):
            return C(inst(p.child))
        if isinstance(p, And):
            return And(inst(p.left), inst(p.right))
        return p

    return to_string(inst(pattern))


COMMANDS = {
    "parse": _cmd_parse,
    "check-model": _cmd_check_model,
    "mc": _cmd_mc,
    "closure": _cmd_closure,
    "bisim": _cmd_bisim,
    "search": _cmd_search,
    "certify": _cmd_certify,
    "prove": _cmd_prove,
    "construct": _cmd_construct,
    "axioms": _cmd_axioms,
}


def run(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        a = build_parser().parse_args(argv)
        if getattr(a, "agents", 1) < 1:
            raise _Usage("--agents must be positive")
        return COMMANDS[a.command](a, out)
    except _Usage as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except search.BoundGuardError as e:
        print(f"bound guard: {e}", file=sys.stderr)
        return GUARD
    except (ParseError, ModelError, proof.ProofFormatError, ConstructionError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

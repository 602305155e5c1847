"""Hilbert-style proof checking for the common-belief system CB_n.

Axioms: Prop (tautology instances), K, D, 4, Cc and the counting axiom
Cn; rules MP and Nec.  Schema matching is uniform substitution on the
primitive AST.  Indexed conjunctions and disjunctions in Cn are nested to
the right in increasing ``(i, j)`` order; :func:`normalize_cn` rewrites
other nestings and orderings into that shape.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .syntax import (
    And, Atom, C, CHat, Formula, Implies, Neg, Or, ParseError, Top,
    as_implies, as_or, atoms, conj_all, disj_all, parse, to_string,
)


@dataclass(frozen=True)
class Meta:
    """Schema metavariable; matches any formula."""

    name: str


def build_cn(n: int, args: Sequence[Formula]) -> Formula:
    """``C /\\_{i<j} (C a_i | C a_j) -> \\/_i C a_i`` over ``n + 1`` arguments."""
    args = _arity(n, args)
    pairs = [Or(C(args[i]), C(args[j])) for i, j in itertools.combinations(range(n + 1), 2)]
    return Implies(C(conj_all(pairs)), disj_all([C(a) for a in args]))


def build_chat_n(n: int, args: Sequence[Formula]) -> Formula:
    """Diamond form: ``/\\_i <C>a_i -> <C> \\/_{i<j} (<C>a_i & <C>a_j)``."""
    args = _arity(n, args)
    pairs = [And(CHat(args[i]), CHat(args[j])) for i, j in itertools.combinations(range(n + 1), 2)]
    return Implies(conj_all([CHat(a) for a in args]), CHat(disj_all(pairs)))


def _arity(n, args):
    args = list(args)
    if n < 1:
        raise ValueError("agent count must be at least 1")
    if len(args) != n + 1:
        raise ValueError(f"counting axiom for {n} agents takes {n + 1} arguments, got {len(args)}")
    return args


_PHI, _PSI = Meta("phi"), Meta("psi")

SCHEMAS = {
    "k": Implies(C(Implies(_PHI, _PSI)), Implies(C(_PHI), C(_PSI))),
    "d": Implies(C(_PHI), Neg(C(Neg(_PHI)))),
    "4": Implies(C(_PHI), C(C(_PHI))),
    "cc": C(Implies(C(_PHI), _PHI)),
}

AXIOM_IDS = ("k", "d", "4", "cc", "cn")


def schema(axiom: str, n: int = 2):
    if axiom == "cn":
        return build_cn(n, [Meta(f"phi{i}") for i in range(1, n + 2)])
    try:
        return SCHEMAS[axiom]
    except KeyError:
        raise ValueError(f"unknown axiom schema {axiom!r}") from None


def match(pattern, f: Formula, binding: Optional[dict] = None) -> Optional[dict]:
    """Uniform-substitution match; returns the metavariable binding or None."""
    binding = {} if binding is None else binding
    stack = [(pattern, f)]
    while stack:
        p, g = stack.pop()
        if isinstance(p, Meta):
            bound = binding.get(p.name)
            if bound is None:
                binding[p.name] = g
            elif bound != g:
                return None
        elif type(p) is not type(g):
            return None
        elif isinstance(p, Atom):
            if p.name != g.name:
                return None
        elif isinstance(p, (Neg, C)):
            stack.append((p.child, g.child))
        elif isinstance(p, And):
            stack.append((p.left, g.left))
            stack.append((p.right, g.right))
    return binding


def _flatten(f, view):
    pair = view(f)
    if pair is None:
        return [f]
    return _flatten(pair[0], view) + _flatten(pair[1], view)


def _flatten_and(f):
    return _flatten(f, lambda g: (g.left, g.right) if isinstance(g, And) else None)


def normalize_cn(f: Formula, n: int) -> Formula:
    """Canonical form of a Cn instance written with another nesting or order.

    The consequent's disjuncts fix the argument order.  Returns ``f``
    unchanged when it is not a Cn instance modulo associativity and
    commutativity of the indexed connectives.
    """
    imp = as_implies(f)
    if imp is None or not isinstance(imp[0], C):
        return f
    consequent = _flatten(imp[1], as_or)
    if len(consequent) != n + 1 or not all(isinstance(g, C) for g in consequent):
        return f
    args = [g.child for g in consequent]
    found = Counter()
    for leaf in _flatten_and(imp[0].child):
        pair = as_or(leaf)
        if pair is None or not all(isinstance(g, C) for g in pair):
            return f
        found[frozenset(Counter(pair).items())] += 1
    wanted = Counter(
        frozenset(Counter((C(args[i]), C(args[j]))).items())
        for i, j in itertools.combinations(range(n + 1), 2)
    )
    return build_cn(n, args) if found == wanted else f


def match_axiom(f: Formula, axiom: str, n: int = 2) -> bool:
    if axiom == "cn":
        if n < 2:
            raise ValueError("Cn needs at least two agents")
        return match(schema("cn", n), normalize_cn(f, n)) is not None
    return match(schema(axiom, n), f) is not None


# -- propositional tautologies -----------------------------------------------

def skeleton(f: Formula, table: Optional[dict] = None):
    """Replace maximal C-subformulas by atoms ``#0, #1, ...``.

    Returns the skeleton and the abstraction table.
    """
    table = {} if table is None else table
    if isinstance(f, C):
        if f not in table:
            table[f] = Atom(f"#{len(table)}")
        return table[f], table
    if isinstance(f, Neg):
        return Neg(skeleton(f.child, table)[0]), table
    if isinstance(f, And):
        return And(skeleton(f.left, table)[0], skeleton(f.right, table)[0]), table
    return f, table


def _truth(f, row):
    if isinstance(f, Atom):
        return row[f.name]
    if isinstance(f, Top):
        return True
    if isinstance(f, Neg):
        return not _truth(f.child, row)
    return _truth(f.left, row) and _truth(f.right, row)


def is_tautology_instance(f: Formula) -> bool:
    sk, _ = skeleton(f)
    names = sorted(atoms(sk))
    for values in itertools.product((False, True), repeat=len(names)):
        if not _truth(sk, dict(zip(names, values))):
            return False
    return True


# -- proofs ------------------------------------------------------------------

RULES = ("prop",) + AXIOM_IDS + ("mp", "nec")


@dataclass(frozen=True)
class Justification:
    rule: str
    refs: tuple = ()

    def __post_init__(self):
        arity = {"mp": 2, "nec": 1}.get(self.rule, 0)
        if self.rule not in RULES:
            raise ValueError(f"unknown justification {self.rule!r}")
        if len(self.refs) != arity:
            raise ValueError(f"{self.rule} takes {arity} line numbers")

    def __str__(self):
        return " ".join([self.rule, *map(str, self.refs)])


@dataclass(frozen=True)
class ProofLine:
    formula: Formula
    justification: Justification


@dataclass(frozen=True)
class Proof:
    agent_count: int
    lines: tuple

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    line: Optional[int] = None
    reason: str = ""

    def __bool__(self):
        return self.accepted

    def __str__(self):
        if self.accepted:
            return "accepted"
        return f"rejected at line {self.line}: {self.reason}"


def check_line(lines: Sequence[ProofLine], k: int, n: int) -> Optional[str]:
    """Reason why line ``k`` (1-based) fails, or None when it is justified."""
    line = lines[k - 1]
    f, j = line.formula, line.justification
    for r in j.refs:
        if not 1 <= r < k:
            return f"line {r} is not an earlier line"
    if j.rule == "prop":
        return None if is_tautology_instance(f) else "not a propositional tautology instance"
    if j.rule in AXIOM_IDS:
        return None if match_axiom(f, j.rule, n) else f"not an instance of {j.rule.upper()}"
    if j.rule == "mp":
        major, minor = (lines[r - 1].formula for r in j.refs)
        if Implies(minor, f) != major:
            return f"line {j.refs[0]} is not line {j.refs[1]} -> this formula"
        return None
    (src,) = j.refs
    if C(lines[src - 1].formula) != f:
        return f"not C applied to line {src}"
    return None


def check_proof(p: Proof) -> Verdict:
    if p.agent_count < 2:
        return Verdict(False, None, "CB_n needs at least two agents")
    for k in range(1, len(p.lines) + 1):
        reason = check_line(p.lines, k, p.agent_count)
        if reason is not None:
            return Verdict(False, k, reason)
    return Verdict(True)


class ProofFormatError(ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


def loads_proof(text: str, agent_count: int = 2) -> Proof:
    """Read ``<index>. <formula> ; <justification>`` lines.

    Blank lines and lines starting with ``#`` are skipped.  Indices must
    run 1, 2, 3, ... in order.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, dot, rest = line.partition(".")
        if not dot or not head.strip().isdigit():
            raise ProofFormatError("expected '<index>. <formula> ; <justification>'", lineno)
        if int(head) != len(lines) + 1:
            raise ProofFormatError(f"expected index {len(lines) + 1}, got {head.strip()}", lineno)
        body, semi, just = rest.rpartition(";")
        if not semi:
            raise ProofFormatError("missing ';' before justification", lineno)
        try:
            f = parse(body)
        except ParseError as e:
            raise ProofFormatError(str(e), lineno) from None
        words = just.split()
        if not words:
            raise ProofFormatError("empty justification", lineno)
        rule, refs = words[0].lower(), words[1:]
        if not all(r.isdigit() for r in refs):
            raise ProofFormatError("line references must be integers", lineno)
        try:
            lines.append(ProofLine(f, Justification(rule, tuple(int(r) for r in refs))))
        except ValueError as e:
            raise ProofFormatError(str(e), lineno) from None
    return Proof(agent_count, lines)


def dumps_proof(p: Proof) -> str:
    return "".join(
        f"{i}. {to_string(l.formula)} ; {l.justification}\n" for i, l in enumerate(p.lines, 1)
    )

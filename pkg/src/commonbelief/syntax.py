"""Formulas of the single-modality common-belief language.

The primitive constructors are :class:`Atom`, :class:`Top`, :class:`Neg`,
:class:`And` and :class:`C`.  Everything else (``bot``, ``|``, ``->``,
``<C>``) is sugar that is expanded when a formula is built or parsed and
recovered again when it is printed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True)
class Top:
    def __str__(self):
        return to_string(self)


@dataclass(frozen=True)
class Neg:
    child: "Formula"

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True)
class C:
    child: "Formula"

    def __str__(self):
        return to_string(self)


Formula = Union[Atom, Top, Neg, And, C]

TOP = Top()


# -- sugar -------------------------------------------------------------------

def Bot() -> Formula:
    return Neg(TOP)


def Or(left: Formula, right: Formula) -> Formula:
    return Neg(And(Neg(left), Neg(right)))


def Implies(left: Formula, right: Formula) -> Formula:
    return Neg(And(left, Neg(right)))


def CHat(child: Formula) -> Formula:
    """Common-belief diamond: some reachable state satisfies ``child``."""
    return Neg(C(Neg(child)))


def conj_all(formulas: Sequence[Formula]) -> Formula:
    """Right-nested conjunction ``f1 & (f2 & (... & fn))``; empty gives top."""
    if not formulas:
        return TOP
    result = formulas[-1]
    for f in reversed(formulas[:-1]):
        result = And(f, result)
    return result


def disj_all(formulas: Sequence[Formula]) -> Formula:
    """Right-nested disjunction; empty gives bot."""
    if not formulas:
        return Bot()
    result = formulas[-1]
    for f in reversed(formulas[:-1]):
        result = Or(f, result)
    return result


def as_or(f: Formula):
    """Return ``(a, b)`` if ``f`` is the expansion of ``a | b``, else None."""
    if isinstance(f, Neg) and isinstance(f.child, And):
        l, r = f.child.left, f.child.right
        if isinstance(l, Neg) and isinstance(r, Neg):
            return l.child, r.child
    return None


def as_implies(f: Formula):
    if isinstance(f, Neg) and isinstance(f.child, And) and isinstance(f.child.right, Neg):
        return f.child.left, f.child.right.child
    return None


def as_chat(f: Formula):
    if isinstance(f, Neg) and isinstance(f.child, C) and isinstance(f.child.child, Neg):
        return f.child.child.child
    return None


# -- traversal ---------------------------------------------------------------

def children(f: Formula) -> tuple:
    if isinstance(f, (Neg, C)):
        return (f.child,)
    if isinstance(f, And):
        return (f.left, f.right)
    return ()


def subformulas(f: Formula) -> frozenset:
    """The least set containing ``f`` and closed under immediate subterms."""
    seen = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        stack.extend(children(g))
    return frozenset(seen)


def postorder(f: Formula) -> list:
    """Distinct subformulas of ``f``, every node after its children."""
    out = []
    seen = set()

    def visit(g):
        if g in seen:
            return
        for h in children(g):
            visit(h)
        seen.add(g)
        out.append(g)

    visit(f)
    return out


def atoms(f: Formula) -> frozenset:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Atom))


def depth(f: Formula) -> int:
    kids = children(f)
    return 0 if not kids else 1 + max(depth(k) for k in kids)


def size(f: Formula) -> int:
    return 1 + sum(size(k) for k in children(f))


# -- closure sets ------------------------------------------------------------

@dataclass(frozen=True)
class ClosureSet:
    formulas: frozenset
    diamonds: frozenset = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "diamonds",
            frozenset(g for g in self.formulas if isinstance(g, Neg) and isinstance(g.child, C)),
        )

    def __contains__(self, f):
        return f in self.formulas

    def __iter__(self) -> Iterator[Formula]:
        return iter(sorted(self.formulas, key=lambda g: (size(g), to_string(g))))

    def __len__(self):
        return len(self.formulas)


def proper_closure(f: Formula) -> ClosureSet:
    """Smallest subformula-closed set around ``f`` that contains ``<C> top``
    and ``~C psi`` for each ``C psi`` it contains."""
    cl = set(subformulas(f)) | set(subformulas(CHat(TOP)))
    for g in list(cl):
        if isinstance(g, C):
            # ~C psi only adds itself: its subformulas are already present
            cl.add(Neg(g))
    return ClosureSet(frozenset(cl))


# -- printing ----------------------------------------------------------------

_IMP, _OR, _AND, _UNARY, _ATOMIC = 1, 2, 3, 4, 5


def _view(f: Formula):
    """Sugared reading of a node: (kind, precedence, operands)."""
    if isinstance(f, Atom):
        return "atom", _ATOMIC, ()
    if isinstance(f, Top):
        return "top", _ATOMIC, ()
    if isinstance(f, C):
        return "C", _UNARY, (f.child,)
    if isinstance(f, And):
        return "&", _AND, (f.left, f.right)
    # Neg: try sugar, most specific first
    if isinstance(f.child, Top):
        return "bot", _ATOMIC, ()
    inner = as_chat(f)
    if inner is not None:
        return "<C>", _UNARY, (inner,)
    pair = as_or(f)
    if pair is not None:
        return "|", _OR, pair
    pair = as_implies(f)
    if pair is not None:
        return "->", _IMP, pair
    return "~", _UNARY, (f.child,)


def to_string(f: Formula) -> str:
    """Deterministic, minimally parenthesized rendering; inverse of :func:`parse`."""
    kind, _, ops = _view(f)
    if kind == "atom":
        return f.name
    if kind == "top":
        return "top"
    if kind == "bot":
        return "bot"
    if kind in ("~", "C", "<C>"):
        (a,) = ops
        body = _wrap(a, _view(a)[1] < _UNARY)
        return "~" + body if kind == "~" else f"{kind} {body}"
    a, b = ops
    pa, pb = _view(a)[1], _view(b)[1]
    if kind == "->":
        left, right = pa <= _IMP, False
    else:
        prec = _AND if kind == "&" else _OR
        left, right = pa < prec, pb <= prec
    return f"{_wrap(a, left)} {kind} {_wrap(b, right)}"


def _wrap(f, paren):
    s = to_string(f)
    return f"({s})" if paren else s


# -- parsing -----------------------------------------------------------------

KEYWORDS = {"top", "bot", "C"}

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<chat><C>)|(?P<arrow>->)|(?P<punct>[~&|()])"
    r"|(?P<ident>[a-z][a-zA-Z0-9_]*)|(?P<C>C)"
)


class ParseError(ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unknown token {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        col = pos - line_start + 1
        if kind == "ws":
            for i, ch in enumerate(value):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        else:
            if kind == "ident" and value in KEYWORDS:
                kind = value
            elif kind in ("punct", "arrow", "chat", "C"):
                kind = value
            tokens.append((kind, value, line, col))
        pos = m.end()
    tokens.append(("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos][0]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message):
        _, value, line, col = self.tokens[self.pos]
        found = repr(value) if value else "end of input"
        raise ParseError(f"{message}, found {found}", line, col)

    def expect(self, kind):
        if self.peek() != kind:
            self.fail(f"expected {kind!r}")
        return self.advance()

    def formula(self):
        left = self.disjunction()
        if self.peek() == "->":
            self.advance()
            return Implies(left, self.formula())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.peek() == "|":
            self.advance()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.peek() == "&":
            self.advance()
            left = And(left, self.unary())
        return left

    def unary(self):
        kind = self.peek()
        if kind == "~":
            self.advance()
            return Neg(self.unary())
        if kind == "C":
            self.advance()
            return C(self.unary())
        if kind == "<C>":
            self.advance()
            return CHat(self.unary())
        if kind == "(":
            self.advance()
            f = self.formula()
            self.expect(")")
            return f
        if kind == "ident":
            return Atom(self.advance()[1])
        if kind == "top":
            self.advance()
            return TOP
        if kind == "bot":
            self.advance()
            return Bot()
        self.fail("expected a formula")


def parse(text: str) -> Formula:
    """Parse ``text`` into a primitive AST.

    Precedence, tightest first: ``~ C <C>``, ``&``, ``|``, ``->``.
    ``&`` and ``|`` associate to the left, ``->`` to the right.
    """
    p = _Parser(text)
    f = p.formula()
    if p.peek() != "eof":
        p.fail("unexpected trailing input")
    return f


def parse_all(texts: Iterable[str]) -> list:
    return [parse(t) for t in texts]

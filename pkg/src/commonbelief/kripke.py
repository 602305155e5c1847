"""Finite multi-agent and uni-modal Kripke models.

Relations are frozensets of ``(source, target)`` pairs over string state
ids.  Agents are numbered from 1.  Closure computations run on integer
bitsets (bit ``i`` stands for ``states[i]``).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

Relation = frozenset


class ModelError(ValueError):
    """Ill-formed model or reference to a state the model does not have."""


def _freeze_valuation(valuation: Mapping[str, Iterable[str]]) -> dict:
    return {atom: frozenset(ss) for atom, ss in sorted(valuation.items())}


def _check_relation(states: frozenset, rel, label):
    for a, b in rel:
        if a not in states or b not in states:
            raise ModelError(f"{label}: edge {a}->{b} leaves the state set")


@dataclass(frozen=True)
class KripkeModel:
    states: tuple
    relations: tuple
    valuation: dict = field(default_factory=dict)

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise ModelError("a model needs at least one state")
        if len(set(states)) != len(states):
            raise ModelError("duplicate state ids")
        rels = tuple(frozenset(r) for r in self.relations)
        if not rels:
            raise ModelError("a model needs at least one agent")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "valuation", _freeze_valuation(self.valuation))
        sset = frozenset(states)
        for i, r in enumerate(rels, 1):
            _check_relation(sset, r, f"agent {i}")
        for atom, ss in self.valuation.items():
            if not ss <= sset:
                raise ModelError(f"valuation of {atom} mentions unknown states")

    @property
    def agent_count(self) -> int:
        return len(self.relations)

    def relation(self, agent: int) -> Relation:
        return self.relations[agent - 1]

    @cached_property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.states)}

    def require(self, state):
        if state not in self.index:
            raise ModelError(f"unknown state {state!r}")

    def true_atoms(self, state) -> frozenset:
        return frozenset(a for a, ss in self.valuation.items() if state in ss)


@dataclass(frozen=True)
class UniModalModel:
    states: tuple
    relation: Relation
    valuation: dict = field(default_factory=dict)

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise ModelError("a model needs at least one state")
        if len(set(states)) != len(states):
            raise ModelError("duplicate state ids")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "relation", frozenset(self.relation))
        object.__setattr__(self, "valuation", _freeze_valuation(self.valuation))
        sset = frozenset(states)
        _check_relation(sset, self.relation, "relation")
        for atom, ss in self.valuation.items():
            if not ss <= sset:
                raise ModelError(f"valuation of {atom} mentions unknown states")

    @property
    def agent_count(self) -> int:
        return 1

    @property
    def relations(self) -> tuple:
        return (self.relation,)

    @cached_property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.states)}

    def require(self, state):
        if state not in self.index:
            raise ModelError(f"unknown state {state!r}")

    def true_atoms(self, state) -> frozenset:
        return frozenset(a for a, ss in self.valuation.items() if state in ss)

    def as_kripke(self) -> KripkeModel:
        return KripkeModel(self.states, (self.relation,), self.valuation)


def as_unimodal(m) -> UniModalModel:
    """Uni-modal view of a model whose single relation is the closure of
    the union of its agents' relations."""
    if isinstance(m, UniModalModel):
        return m
    return UniModalModel(m.states, transitive_closure(union_relation(m)), m.valuation)


# -- bitset helpers ----------------------------------------------------------

def to_masks(states: Sequence, rel) -> list:
    idx = {s: i for i, s in enumerate(states)}
    masks = [0] * len(states)
    for a, b in rel:
        masks[idx[a]] |= 1 << idx[b]
    return masks


def from_masks(states: Sequence, masks: Sequence[int]) -> Relation:
    return frozenset(
        (states[i], states[j])
        for i, m in enumerate(masks)
        for j in range(len(states))
        if m >> j & 1
    )


def compose_masks(first: Sequence[int], second: Sequence[int]) -> list:
    out = []
    for m in first:
        acc = 0
        j = 0
        while m:
            if m & 1:
                acc |= second[j]
            m >>= 1
            j += 1
        out.append(acc)
    return out


def closure_masks(masks: Sequence[int]) -> list:
    """Transitive closure by iterative squaring: R := R | R.R until stable."""
    cur = list(masks)
    while True:
        nxt = [a | b for a, b in zip(cur, compose_masks(cur, cur))]
        if nxt == cur:
            return cur
        cur = nxt


def _nodes(rel) -> list:
    seen = {}
    for a, b in sorted(rel):
        seen.setdefault(a, None)
        seen.setdefault(b, None)
    return list(seen)


# -- relation operations -----------------------------------------------------

def union_relation(m) -> Relation:
    return frozenset().union(*m.relations)


def transitive_closure(rel) -> Relation:
    nodes = _nodes(rel)
    return from_masks(nodes, closure_masks(to_masks(nodes, rel)))


def reflexive_transitive_closure(rel, states: Iterable) -> Relation:
    return transitive_closure(rel) | {(s, s) for s in states}


def successors(rel, state) -> list:
    return sorted(b for a, b in rel if a == state)


def shift_reflexive_counterexample(rel) -> Optional[tuple]:
    """First pair ``(x, y)`` with ``xRy`` but not ``yRy``, or None."""
    for a, b in sorted(rel):
        if (b, b) not in rel:
            return (a, b)
    return None


def is_shift_reflexive(rel) -> bool:
    return shift_reflexive_counterexample(rel) is None


def cn_counterexample(rel, n: int, states: Optional[Sequence] = None):
    """Failure of the n-agent counting property
    ``forall x y1..y(n+1) (/\\ xRyi -> exists z (xRz & \\/_{i<j} zRyi & zRyj))``.

    Tuples may repeat states; since the condition is symmetric in the
    ``y``'s it is enough to range over multisets.  Returns ``(x, ys)`` or None.
    """
    if n < 1:
        raise ValueError("agent count must be at least 1")
    order = list(states) if states is not None else _nodes(rel)
    succ = {s: [t for t in order if (s, t) in rel] for s in order}
    for x in order:
        sx = succ[x]
        if not sx:
            continue
        seeing = {z: set(succ.get(z, ())) for z in sx}
        for ys in itertools.combinations_with_replacement(sx, n + 1):
            if not any(
                ys[i] in seen and ys[j] in seen
                for seen in seeing.values()
                for i, j in itertools.combinations(range(n + 1), 2)
            ):
                return x, ys
    return None


def cn_frame_property(rel, n: int, states: Optional[Sequence] = None) -> bool:
    return cn_counterexample(rel, n, states) is None


# -- frame properties --------------------------------------------------------

@dataclass(frozen=True)
class AgentProperties:
    agent: int
    serial: bool
    transitive: bool
    euclidean: bool
    serial_witness: Optional[str] = None
    transitive_witness: Optional[tuple] = None
    euclidean_witness: Optional[tuple] = None

    @property
    def kd45(self) -> bool:
        return self.serial and self.transitive and self.euclidean


@dataclass(frozen=True)
class PropertyReport:
    agents: tuple

    @property
    def kd45(self) -> bool:
        return all(a.kd45 for a in self.agents)

    def __str__(self):
        lines = []
        for a in self.agents:
            parts = []
            for name in ("serial", "transitive", "euclidean"):
                ok = getattr(a, name)
                w = getattr(a, name + "_witness")
                parts.append(f"{name}={'yes' if ok else 'no'}" + ("" if ok else f" [{_fmt_witness(w)}]"))
            lines.append(f"agent {a.agent}: " + ", ".join(parts))
        lines.append(f"kd45: {'yes' if self.kd45 else 'no'}")
        return "\n".join(lines)


def _fmt_witness(w):
    return w if isinstance(w, str) else " ".join(w)


def relation_properties(states: Sequence, rel, agent: int = 1) -> AgentProperties:
    succ = {s: [t for t in states if (s, t) in rel] for s in states}
    serial_w = next((s for s in states if not succ[s]), None)
    trans_w = None
    eucl_w = None
    for x in states:
        for y in succ[x]:
            for z in succ[y]:
                if trans_w is None and (x, z) not in rel:
                    trans_w = (x, y, z)
            for z in succ[x]:
                if eucl_w is None and (y, z) not in rel:
                    eucl_w = (x, y, z)
    return AgentProperties(
        agent,
        serial=serial_w is None,
        transitive=trans_w is None,
        euclidean=eucl_w is None,
        serial_witness=serial_w,
        transitive_witness=trans_w,
        euclidean_witness=eucl_w,
    )


def check_frame_properties(m) -> PropertyReport:
    return PropertyReport(
        tuple(relation_properties(m.states, r, i) for i, r in enumerate(m.relations, 1))
    )


# -- submodels ---------------------------------------------------------------

def reachable(m, root) -> frozenset:
    """States reachable from ``root`` in one or more steps of any agent."""
    m.require(root)
    rel = union_relation(m)
    seen = set()
    stack = [root]
    while stack:
        s = stack.pop()
        for a, b in rel:
            if a == s and b not in seen:
                seen.add(b)
                stack.append(b)
    return frozenset(seen)


def restrict(m, keep: Iterable):
    keep = frozenset(keep)
    states = tuple(s for s in m.states if s in keep)
    val = {a: ss & keep for a, ss in m.valuation.items()}
    rels = tuple(frozenset((a, b) for a, b in r if a in keep and b in keep) for r in m.relations)
    if isinstance(m, UniModalModel):
        return UniModalModel(states, rels[0], val)
    return KripkeModel(states, rels, val)


def generated_submodel(m, root):
    return restrict(m, reachable(m, root) | {root})


# -- relabeling --------------------------------------------------------------

def with_valuation(m, valuation: Mapping[str, Iterable[str]]):
    if isinstance(m, UniModalModel):
        return UniModalModel(m.states, m.relation, valuation)
    return KripkeModel(m.states, m.relations, valuation)


# -- file format -------------------------------------------------------------

_IDENT = r"[a-z][a-zA-Z0-9_]*"
_IDENT_RE = re.compile(_IDENT + r"\Z")
_EDGE_RE = re.compile(rf"({_IDENT})->({_IDENT})\Z")


class ModelFormatError(ModelError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


def loads_model(text: str) -> KripkeModel:
    """Read the line-oriented model format.

    ::

        states: s t u
        agents: 2
        rel 1: s->t t->t u->u
        rel 2: s->u u->u t->t
        val p: t
    """
    states = None
    agents = None
    rels = {}
    val = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, body = line.partition(":")
        if not sep:
            raise ModelFormatError(f"missing ':' in {line!r}", lineno)
        words = body.split()
        head = head.strip()
        if head == "states":
            if states is not None:
                raise ModelFormatError("duplicate states line", lineno)
            for w in words:
                if not _IDENT_RE.match(w):
                    raise ModelFormatError(f"bad state id {w!r}", lineno)
            states = words
        elif head == "agents":
            if len(words) != 1 or not words[0].isdigit() or int(words[0]) < 1:
                raise ModelFormatError("agents needs one positive integer", lineno)
            agents = int(words[0])
        elif head.startswith("rel"):
            tag = head[3:].strip()
            if not tag.isdigit():
                raise ModelFormatError(f"bad agent number in {head!r}", lineno)
            edges = []
            for w in words:
                em = _EDGE_RE.match(w)
                if em is None:
                    raise ModelFormatError(f"bad edge {w!r}", lineno)
                edges.append((em.group(1), em.group(2)))
            rels.setdefault(int(tag), []).extend(edges)
        elif head.startswith("val"):
            atom = head[3:].strip()
            if not _IDENT_RE.match(atom):
                raise ModelFormatError(f"bad atom name {atom!r}", lineno)
            val.setdefault(atom, []).extend(words)
        else:
            raise ModelFormatError(f"unknown directive {head!r}", lineno)
    if states is None:
        raise ModelFormatError("no states line", 0)
    if agents is None:
        agents = max(rels, default=1)
    bad = [i for i in rels if not 1 <= i <= agents]
    if bad:
        raise ModelFormatError(f"relation for undeclared agent {bad[0]}", 0)
    return KripkeModel(states, tuple(rels.get(i, ()) for i in range(1, agents + 1)), val)


def dumps_model(m, point=None) -> str:
    lines = ["states: " + " ".join(m.states), f"agents: {m.agent_count}"]
    order = m.index
    for i, r in enumerate(m.relations, 1):
        edges = sorted(r, key=lambda e: (order[e[0]], order[e[1]]))
        lines.append(f"rel {i}: " + " ".join(f"{a}->{b}" for a, b in edges))
    for atom, ss in sorted(m.valuation.items()):
        lines.append(f"val {atom}: " + " ".join(s for s in m.states if s in ss))
    if point is not None:
        lines.append(f"# point: {point}")
    return "\n".join(line.rstrip() for line in lines) + "\n"


def load_model(path) -> KripkeModel:
    with open(path) as fh:
        return loads_model(fh.read())


def to_dot(m, root=None, labels: Optional[Mapping] = None) -> str:
    """Graphviz rendering; edges are labelled with their agent."""
    out = ["digraph model {"]
    for s in m.states:
        atoms = ",".join(sorted(m.true_atoms(s)))
        name = labels.get(s, s) if labels else s
        label = f"{name}\\n{atoms}" if atoms else name
        shape = ' shape="doublecircle"' if s == root else ""
        out.append(f'  "{s}" [label="{label}"{shape}];')
    for i, r in enumerate(m.relations, 1):
        for a, b in sorted(r):
            out.append(f'  "{a}" -> "{b}" [label="{i}"];')
    out.append("}")
    return "\n".join(out) + "\n"

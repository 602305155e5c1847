"""Turning a uni-modal model into a KD45_n model with the same theory at
the root.

The input is a finite uni-modal model whose relation plays the role of
common belief: transitive, serial, shift-reflexive and satisfying the
n-agent counting property at the root.  The construction has two stages.

1. *Witness elimination.*  Pick one root successor witnessing each diamond
   of the closure set that holds at the root, then repeatedly replace two
   of any ``n + 1`` witnesses by a root successor that sees both, until at
   most ``n`` remain.  Pad with further root successors to exactly ``n``.
2. *Cluster unravelling, folded.*  Root branch ``i`` enters agent ``i``'s
   cluster for the ``i``-th remaining witness.  A cluster for base state
   ``s`` entered by agent ``a`` holds one node per edge ``s -> z``; agent
   ``a`` sees the whole cluster from each node, and node ``(s, z)`` sees,
   for the partner agent ``b``, the whole cluster of ``z`` entered by
   ``b``.  Clusters therefore alternate between ``a`` and ``b`` level by
   level.  Copies that agree on (base, target, enter agent, exit agent)
   are identified, which keeps the model finite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .bisim import max_bisimulation
from .kripke import (
    KripkeModel, UniModalModel, as_unimodal, check_frame_properties,
    cn_counterexample, generated_submodel, relation_properties,
    shift_reflexive_counterexample, transitive_closure, union_relation,
)
from .semantics import TRANSITIVE, Evaluator
from .syntax import And, Atom, CHat, ClosureSet, Formula, Neg, proper_closure, to_string


class ConstructionError(ValueError):
    """The input does not meet the construction's preconditions."""


# -- certificate -------------------------------------------------------------

@dataclass(frozen=True)
class FrameCertificate:
    serial: bool
    transitive: bool
    shift_reflexive: bool
    cn_property: bool
    branching_root: bool
    serial_witness: Optional[str] = None
    transitive_witness: Optional[tuple] = None
    shift_reflexive_witness: Optional[tuple] = None
    cn_witness: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return (
            self.serial and self.transitive and self.shift_reflexive
            and self.cn_property and self.branching_root
        )

    def failures(self) -> list:
        out = []
        if not self.serial:
            out.append(f"not serial: {self.serial_witness} has no successor")
        if not self.transitive:
            out.append("not transitive: " + "->".join(self.transitive_witness))
        if not self.shift_reflexive:
            a, b = self.shift_reflexive_witness
            out.append(f"not shift-reflexive: {a}->{b} but no loop at {b}")
        if not self.cn_property:
            x, ys = self.cn_witness
            out.append(f"counting property fails at {x} for ({', '.join(ys)})")
        if not self.branching_root:
            out.append("root has fewer than two distinct successors")
        return out


def _input(m, root) -> UniModalModel:
    m = as_unimodal(m)
    m.require(root)
    return generated_submodel(m, root)


def certify_input(m, root, n: int) -> FrameCertificate:
    """Check the construction's preconditions on the part of ``m``
    generated from ``root``."""
    g = _input(m, root)
    props = relation_properties(g.states, g.relation)
    sr = shift_reflexive_counterexample(g.relation)
    cn = cn_counterexample(g.relation, n, g.states)
    succ = {b for a, b in g.relation if a == root}
    return FrameCertificate(
        serial=props.serial,
        transitive=props.transitive,
        shift_reflexive=sr is None,
        cn_property=cn is None,
        branching_root=len(succ) >= 2,
        serial_witness=props.serial_witness,
        transitive_witness=props.transitive_witness,
        shift_reflexive_witness=sr,
        cn_witness=cn,
    )


# -- witness elimination -----------------------------------------------------

@dataclass(frozen=True)
class Merge:
    chosen: tuple
    mediator: str
    replaced: tuple


@dataclass(frozen=True)
class EliminationTrace:
    root: str
    witnesses: tuple          # (diamond, witness state) pairs, diamonds true at root
    stages: tuple             # witness sets stage by stage, each a tuple in state order
    merges: tuple
    padding: tuple
    final: tuple              # exactly n states, in branch order

    @property
    def initial(self) -> tuple:
        return self.stages[0]

    def log(self) -> str:
        lines = [f"root: {self.root}"]
        for d, w in self.witnesses:
            lines.append(f"witness for {to_string(d)}: {w}")
        for i, st in enumerate(self.stages):
            lines.append(f"stage {i} = {{{', '.join(st)}}}")
            if i < len(self.merges):
                mg = self.merges[i]
                lines.append(
                    f"  merge: among ({', '.join(mg.chosen)}) mediator {mg.mediator} "
                    f"sees {mg.replaced[0]} and {mg.replaced[1]}"
                )
        if self.padding:
            lines.append(f"padding: {', '.join(self.padding)}")
        lines.append(f"final: ({', '.join(self.final)})")
        return "\n".join(lines)


def x_elimination(m, root, cl: ClosureSet, n: int) -> EliminationTrace:
    g = _input(m, root)
    cert = certify_input(g, root, n)
    if not cert.ok:
        raise ConstructionError("; ".join(cert.failures()))
    order = g.index
    rel = g.relation
    succ = [s for s in g.states if (root, s) in rel]
    ev = Evaluator(g, TRANSITIVE)

    witnesses = []
    for d in sorted(cl.diamonds, key=lambda f: (len(to_string(f)), to_string(f))):
        if not ev.holds(root, d):
            continue
        # d is ~C psi: a successor where ~psi holds
        target = Neg(d.child.child)
        w = next(s for s in succ if ev.holds(s, target))
        witnesses.append((d, w))

    x = sorted({w for _, w in witnesses}, key=order.get)
    stages = [tuple(x)]
    merges = []
    while len(x) > n:
        chosen = tuple(x[: n + 1])
        found = None
        for z in succ:
            for i, j in itertools.combinations(range(n + 1), 2):
                if (z, chosen[i]) in rel and (z, chosen[j]) in rel:
                    found = z, (chosen[i], chosen[j])
                    break
            if found:
                break
        if found is None:
            raise ConstructionError(
                f"no successor of {root} sees two of ({', '.join(chosen)})"
            )
        z, pair = found
        merges.append(Merge(chosen, z, pair))
        x = sorted((set(x) - set(pair)) | {z}, key=order.get)
        stages.append(tuple(x))

    padding = []
    if len(x) < n:
        spare = [s for s in succ if s not in x]
        if len(x) + len(spare) < n:
            raise ConstructionError(
                f"padding impossible: {root} has {len(succ)} distinct successors, {n} needed"
            )
        padding = spare[: n - len(x)]
    final = tuple(x) + tuple(padding)
    return EliminationTrace(root, tuple(witnesses), tuple(stages), tuple(merges), tuple(padding), final)


# -- folded cluster construction ---------------------------------------------

@dataclass(frozen=True, order=True)
class ClusterNode:
    base: str
    target: str
    enter_agent: int
    exit_agent: int

    def name(self) -> str:
        return f"{self.base}_{self.target}_{self.enter_agent}_{self.exit_agent}"


def alternation_pairs(n: int) -> list:
    """Branch ``i`` alternates agent ``i`` with agent ``i + 1`` (wrapping)."""
    return [(i, i % n + 1) for i in range(1, n + 1)]


@dataclass(frozen=True)
class ConstructedModel:
    model: KripkeModel
    root: str
    nodes: dict               # state id -> ClusterNode
    input: UniModalModel
    input_root: str
    trace: EliminationTrace
    closure: ClosureSet = field(repr=False)

    def base_of(self, state) -> str:
        return self.input_root if state == self.root else self.nodes[state].base

    def state_of(self, node: ClusterNode) -> str:
        return self._by_node[node]

    @property
    def _by_node(self) -> dict:
        return {v: k for k, v in self.nodes.items()}


def fold_construct(m, root, cl: ClosureSet, n: int, trace: Optional[EliminationTrace] = None) -> ConstructedModel:
    if n < 2:
        raise ConstructionError("the construction alternates agents and needs n >= 2")
    g = _input(m, root)
    if trace is None:
        trace = x_elimination(g, root, cl, n)
    rel = g.relation
    targets = {s: [z for z in g.states if (s, z) in rel] for s in g.states}

    def cluster(s, a, b):
        return [ClusterNode(s, z, a, b) for z in targets[s]]

    roots = []
    seen = set()
    queue = []
    for i, (x_i, (a, b)) in enumerate(zip(trace.final, alternation_pairs(n)), 1):
        key = (x_i, a, b)
        roots.append((i, key))
        if key not in seen:
            seen.add(key)
            queue.append(key)
    while queue:
        s, a, b = queue.pop(0)
        for z in targets[s]:
            child = (z, b, a)
            if child not in seen:
                seen.add(child)
                queue.append(child)

    clusters = sorted(seen, key=lambda k: (g.index[k[0]], k[1], k[2]))
    nodes = [node for key in clusters for node in cluster(*key)]
    names = {node: node.name() for node in nodes}
    root_name = root
    if len(set(names.values())) != len(names) or root_name in names.values():
        names = {node: f"n{i}" for i, node in enumerate(nodes)}
        root_name = "w"

    rels = [set() for _ in range(n)]
    for i, (s, a, b) in roots:
        for node in cluster(s, a, b):
            rels[i - 1].add((root_name, names[node]))
    for s, a, b in clusters:
        members = cluster(s, a, b)
        for u in members:
            for v in members:
                rels[a - 1].add((names[u], names[v]))
            for v in cluster(u.target, b, a):
                rels[b - 1].add((names[u], names[v]))
            for j in range(1, n + 1):
                if j not in (a, b):
                    rels[j - 1].add((names[u], names[u]))

    val = {}
    for atom, ss in g.valuation.items():
        val[atom] = {names[node] for node in nodes if node.base in ss}
        if root in ss:
            val[atom].add(root_name)
    model = KripkeModel((root_name,) + tuple(names[node] for node in nodes), tuple(rels), val)
    return ConstructedModel(model, root_name, {names[nd]: nd for nd in nodes}, g, root, trace, cl)


# -- verification ------------------------------------------------------------

@dataclass(frozen=True)
class VerificationReport:
    kd45: bool
    frame_report: object
    non_bisimilar: tuple      # states whose node is not bisimilar to its base
    disagreements: tuple      # closure formulas where root and input root differ
    checked_nodes: int
    checked_formulas: int

    @property
    def bisimilar(self) -> bool:
        return not self.non_bisimilar

    @property
    def root_agreement(self) -> bool:
        return not self.disagreements

    @property
    def passed(self) -> bool:
        return self.kd45 and self.bisimilar and self.root_agreement

    def __str__(self):
        lines = [
            f"KD45: {'ok' if self.kd45 else 'FAIL'}",
            f"bisimilar to base: {self.checked_nodes - len(self.non_bisimilar)}/{self.checked_nodes}",
            f"closure agreement at root: {self.checked_formulas - len(self.disagreements)}/{self.checked_formulas}",
        ]
        if not self.kd45:
            lines.append(str(self.frame_report))
        for s in self.non_bisimilar:
            lines.append(f"  not bisimilar: {s}")
        for f in self.disagreements:
            lines.append(f"  disagree at root: {to_string(f)}")
        lines.append(f"verification: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def verify_construction(cm: ConstructedModel, model: Optional[KripkeModel] = None) -> VerificationReport:
    """Audit a construction: KD45-ness, bisimilarity of every cluster node
    (in the common-belief closure of the output) with its base state in
    the input, and agreement at the root on every closure formula.

    ``model`` overrides ``cm.model``, which lets tests audit mutated outputs
    against the original bookkeeping.
    """
    out = cm.model if model is None else model
    report = check_frame_properties(out)
    closed = UniModalModel(out.states, transitive_closure(union_relation(out)), out.valuation)
    # one fixpoint serves every node
    z = max_bisimulation(closed, cm.input)
    bad_nodes = tuple(
        s for s in out.states if s != cm.root and (s, cm.nodes[s].base) not in z
    )
    ev_out = Evaluator(out, TRANSITIVE)
    ev_in = Evaluator(cm.input, TRANSITIVE)
    bad_formulas = tuple(
        f for f in cm.closure if ev_out.holds(cm.root, f) != ev_in.holds(cm.input_root, f)
    )
    return VerificationReport(
        report.kd45, report, bad_nodes, bad_formulas, len(out.states) - 1, len(cm.closure)
    )


# -- the fresh-atom device for non-branching roots ---------------------------

def make_branching(m, root, n: int, atom: str):
    """Clone the root's first successor until the root sees ``n`` distinct
    states, marking the clones with the fresh ``atom``.

    Returns ``(model, extra)`` where ``extra`` is the formula
    ``<C> atom & <C> ~atom`` to conjoin with the target formula.
    """
    g = _input(m, root)
    if any(atom == a for a in g.valuation):
        raise ConstructionError(f"atom {atom} is not fresh")
    succ = [s for s in g.states if (root, s) in g.relation]
    if not succ:
        raise ConstructionError(f"{root} has no successor")
    want = max(2, n)
    x = succ[0]
    rel = set(g.relation)
    states = list(g.states)
    clones = []
    k = 0
    while len(succ) + len(clones) < want:
        name = f"{x}_copy{k}"
        k += 1
        if name in states:
            continue
        clones.append(name)
        states.append(name)
    for c in clones:
        rel |= {(a, c) for a, b in g.relation if b == x}
        rel |= {(c, b) for a, b in g.relation if a == x}
        if (x, x) in g.relation:
            rel |= {(c, c)} | {(c, d) for d in clones}
    val = {a: set(ss) | {c for c in clones if x in ss} for a, ss in g.valuation.items()}
    val[atom] = set(clones)
    extra = And(CHat(Atom(atom)), CHat(Neg(Atom(atom))))
    return UniModalModel(tuple(states), frozenset(rel), val), extra


def construct(m, root, f: Formula, n: int) -> ConstructedModel:
    """Closure set of ``f``, witness elimination, folded construction."""
    cl = proper_closure(f)
    return fold_construct(m, root, cl, n)

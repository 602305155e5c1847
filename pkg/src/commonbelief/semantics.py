"""Truth of formulas at states of finite models.

``C phi`` holds at ``s`` when ``phi`` holds at every state reachable from
``s`` along the closure (transitive, or reflexive-transitive) of the union
of the agents' relations.  A uni-modal model is treated the same way with
its single relation.
"""

from __future__ import annotations

import enum
from typing import Sequence

from .kripke import closure_masks, to_masks, union_relation
from .syntax import And, Atom, C, Formula, Neg, Top, postorder


class ClosureMode(enum.Enum):
    TRANSITIVE = "transitive"
    REFLEXIVE_TRANSITIVE = "reflexive"

    @classmethod
    def parse(cls, text: str) -> "ClosureMode":
        for mode in cls:
            if mode.value == text:
                return mode
        raise ValueError(f"unknown closure mode {text!r}")


TRANSITIVE = ClosureMode.TRANSITIVE
REFLEXIVE_TRANSITIVE = ClosureMode.REFLEXIVE_TRANSITIVE


def common_masks(masks: Sequence[int], mode: ClosureMode) -> list:
    out = closure_masks(masks)
    if mode is ClosureMode.REFLEXIVE_TRANSITIVE:
        out = [m | 1 << i for i, m in enumerate(out)]
    return out


class Evaluator:
    """Memoizing model checker for one model under one closure mode.

    Extensions are bitsets over ``model.states``; each subformula is
    evaluated once.
    """

    def __init__(self, model, mode: ClosureMode = TRANSITIVE):
        self.model = model
        self.mode = mode
        self.succ = common_masks(to_masks(model.states, union_relation(model)), mode)
        self.full = (1 << len(model.states)) - 1
        idx = model.index
        self._atoms = {
            a: sum(1 << idx[s] for s in ss) for a, ss in model.valuation.items()
        }
        self._memo = {}

    def mask(self, f: Formula) -> int:
        memo = self._memo
        if f in memo:
            return memo[f]
        for g in postorder(f):
            if g in memo:
                continue
            if isinstance(g, Atom):
                v = self._atoms.get(g.name, 0)
            elif isinstance(g, Top):
                v = self.full
            elif isinstance(g, Neg):
                v = self.full ^ memo[g.child]
            elif isinstance(g, And):
                v = memo[g.left] & memo[g.right]
            elif isinstance(g, C):
                inner = memo[g.child]
                v = 0
                for i, sm in enumerate(self.succ):
                    if not sm & ~inner:
                        v |= 1 << i
            else:
                raise TypeError(f"not a formula: {g!r}")
            memo[g] = v
        return memo[f]

    def holds(self, state, f: Formula) -> bool:
        self.model.require(state)
        return bool(self.mask(f) >> self.model.index[state] & 1)

    def extension(self, f: Formula) -> frozenset:
        m = self.mask(f)
        return frozenset(s for i, s in enumerate(self.model.states) if m >> i & 1)


def satisfies(m, s, f: Formula, mode: ClosureMode = TRANSITIVE) -> bool:
    return Evaluator(m, mode).holds(s, f)


def extension(m, f: Formula, mode: ClosureMode = TRANSITIVE) -> frozenset:
    return Evaluator(m, mode).extension(f)


def valid_on_model(m, f: Formula, mode: ClosureMode = TRANSITIVE) -> bool:
    ev = Evaluator(m, mode)
    return ev.mask(f) == ev.full


# -- evaluation over all valuations at once ----------------------------------
#
# Valuation number v assigns atom j true at state i iff bit i*len(atoms)+j
# of v is set.  A "vector" is an int whose bit v is the truth value under
# valuation v, so one pass over the formula decides every valuation.


def compile_formula(f: Formula) -> list:
    """Flatten ``f`` into ``(op, arg1, arg2)`` steps over earlier step indices."""
    nodes = postorder(f)
    pos = {g: i for i, g in enumerate(nodes)}
    prog = []
    for g in nodes:
        if isinstance(g, Atom):
            prog.append(("atom", g.name, None))
        elif isinstance(g, Top):
            prog.append(("top", None, None))
        elif isinstance(g, Neg):
            prog.append(("neg", pos[g.child], None))
        elif isinstance(g, And):
            prog.append(("and", pos[g.left], pos[g.right]))
        else:
            prog.append(("box", pos[g.child], None))
    return prog


def bit_pattern(bit: int, width: int) -> int:
    """Int of ``2**width`` bits whose bit ``v`` equals bit ``bit`` of ``v``."""
    total = 1 << width
    block = 1 << (bit + 1)
    half = 1 << bit
    unit = ((1 << half) - 1) << half
    return unit * (((1 << total) - 1) // ((1 << block) - 1))


def exhaustive_atom_vectors(k: int, atoms: Sequence[str]):
    """Atom vectors covering every valuation of ``atoms`` over ``k`` states."""
    m = len(atoms)
    width = k * m
    vecs = {
        (i, a): bit_pattern(i * m + j, width)
        for i in range(k)
        for j, a in enumerate(atoms)
    }
    return vecs, (1 << (1 << width)) - 1


def evaluate_vectors(prog: list, succ: Sequence[int], atom_vecs: dict, full: int) -> list:
    """Per-state truth vectors of the compiled formula's root over the
    valuation space described by ``atom_vecs``; C is read over ``succ``."""
    k = len(succ)
    succ_lists = [[j for j in range(k) if sm >> j & 1] for sm in succ]
    vals = []
    for op, x, y in prog:
        if op == "atom":
            row = [atom_vecs.get((i, x), 0) for i in range(k)]
        elif op == "top":
            row = [full] * k
        elif op == "neg":
            row = [full ^ v for v in vals[x]]
        elif op == "and":
            a, b = vals[x], vals[y]
            row = [a[i] & b[i] for i in range(k)]
        else:
            inner = vals[x]
            row = []
            for sl in succ_lists:
                acc = full
                for j in sl:
                    acc &= inner[j]
                row.append(acc)
        vals.append(row)
    return vals[-1]


def valid_on_frame(states: Sequence, rel, f: Formula, atoms: Sequence[str] = None) -> bool:
    """Whether ``f`` is true at every state under every valuation of
    ``atoms`` (default: the atoms of ``f``), reading C directly over ``rel``
    as a uni-modal relation, with no closure applied."""
    from .syntax import atoms as atoms_of

    atoms = sorted(atoms_of(f)) if atoms is None else list(atoms)
    succ = to_masks(states, rel)
    vecs, full = exhaustive_atom_vectors(len(states), atoms)
    return all(v == full for v in evaluate_vectors(compile_formula(f), succ, vecs, full))


def valuation_from_index(states: Sequence, atoms: Sequence[str], v: int) -> dict:
    m = len(atoms)
    return {
        a: frozenset(s for i, s in enumerate(states) if v >> (i * m + j) & 1)
        for j, a in enumerate(atoms)
    }

"""Bisimulations between multi-agent models."""

from __future__ import annotations

from dataclasses import dataclass

from .kripke import KripkeModel, ModelError, UniModalModel


def _as_kripke(m) -> KripkeModel:
    return m.as_kripke() if isinstance(m, UniModalModel) else m


def _succ(m):
    return [
        {s: frozenset(b for a, b in r if a == s) for s in m.states}
        for r in m.relations
    ]


@dataclass(frozen=True)
class BisimRelation:
    pairs: frozenset
    left: KripkeModel
    right: KripkeModel

    def __contains__(self, pair):
        return pair in self.pairs

    def __len__(self):
        return len(self.pairs)


def max_bisimulation(m1, m2) -> BisimRelation:
    """Largest relation satisfying Atoms, Forth and Back.

    Starts from all atom-agreeing pairs and deletes pairs that violate
    Forth or Back until nothing changes.
    """
    m1, m2 = _as_kripke(m1), _as_kripke(m2)
    if m1.agent_count != m2.agent_count:
        raise ModelError(
            f"agent counts differ: {m1.agent_count} vs {m2.agent_count}"
        )
    s1, s2 = _succ(m1), _succ(m2)
    z = {
        (a, b)
        for a in m1.states
        for b in m2.states
        if m1.true_atoms(a) == m2.true_atoms(b)
    }
    changed = True
    while changed:
        changed = False
        for a, b in sorted(z):
            if not _clauses_hold(a, b, s1, s2, z):
                z.discard((a, b))
                changed = True
    return BisimRelation(frozenset(z), m1, m2)


def _clauses_hold(a, b, s1, s2, z) -> bool:
    for r1, r2 in zip(s1, s2):
        ub, vb = r1[a], r2[b]
        if any(not any((u, v) in z for v in vb) for u in ub):
            return False
        if any(not any((u, v) in z for u in ub) for v in vb):
            return False
    return True


def are_bisimilar(m1, s1, m2, s2) -> bool:
    m1, m2 = _as_kripke(m1), _as_kripke(m2)
    m1.require(s1)
    m2.require(s2)
    return (s1, s2) in max_bisimulation(m1, m2)


def audit(pairs, m1, m2) -> list:
    """Clause-by-clause check of a candidate bisimulation.

    Returns a list of ``(pair, clause)`` violations; empty means ``pairs``
    is a bisimulation.
    """
    m1, m2 = _as_kripke(m1), _as_kripke(m2)
    pairs = set(pairs)
    problems = []
    for a, b in sorted(pairs):
        if m1.true_atoms(a) != m2.true_atoms(b):
            problems.append(((a, b), "atoms"))
            continue
        for i, (r1, r2) in enumerate(zip(m1.relations, m2.relations), 1):
            ua = [u for x, u in r1 if x == a]
            vb = [v for x, v in r2 if x == b]
            if any(not any((u, v) in pairs for v in vb) for u in ua):
                problems.append(((a, b), f"forth {i}"))
            if any(not any((u, v) in pairs for u in ua) for v in vb):
                problems.append(((a, b), f"back {i}"))
    return problems


def unfold(m, root, depth: int = 2) -> tuple:
    """Tree unfolding of ``m`` from ``root`` down to ``depth`` steps.

    Tree nodes are paths; a node at the last level steps back into a copy
    of ``m``, so the result is bisimilar to ``m`` at ``root``.  Returns
    ``(model, tree_root)``.
    """
    m = _as_kripke(m)
    m.require(root)
    copy = {s: f"o_{s}" for s in m.states}
    names = {}
    counter = iter(range(10**9))

    def name(path):
        if path not in names:
            names[path] = f"t{next(counter)}"
        return names[path]

    rels = [set() for _ in m.relations]
    base = {}
    frontier = [(root,)]
    base[name((root,))] = root
    for level in range(depth + 1):
        nxt = []
        for path in frontier:
            here = name(path)
            last = path[-1]
            for i, r in enumerate(m.relations):
                for a, b in sorted(r):
                    if a != last:
                        continue
                    if level < depth:
                        child = path + (i, b)
                        rels[i].add((here, name(child)))
                        base[name(child)] = b
                        nxt.append(child)
                    else:
                        rels[i].add((here, copy[b]))
        frontier = nxt
    for i, r in enumerate(m.relations):
        rels[i] |= {(copy[a], copy[b]) for a, b in r}
    tree_states = list(names.values())
    states = tree_states + [copy[s] for s in m.states]
    val = {
        atom: {t for t in tree_states if base[t] in ss} | {copy[s] for s in ss}
        for atom, ss in m.valuation.items()
    }
    return KripkeModel(tuple(states), tuple(rels), val), name((root,))

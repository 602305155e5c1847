import random

import pytest
from hypothesis import strategies as st

from commonbelief.kripke import KripkeModel, UniModalModel
from commonbelief.syntax import And, Atom, C, Neg, TOP


def split_model(valuation=None):
    """Two agents whose views part at s; loops make every relation serial."""
    return KripkeModel(
        ("s", "t", "u"),
        (
            {("s", "t"), ("t", "t"), ("u", "u")},
            {("s", "u"), ("u", "u"), ("t", "t")},
        ),
        {"p": {"t"}} if valuation is None else valuation,
    )


def fork_model(valuation=None):
    return UniModalModel(
        ("s", "t", "u"),
        {("s", "t"), ("s", "u"), ("t", "t"), ("u", "u")},
        {"p": {"t"}} if valuation is None else valuation,
    )


@pytest.fixture
def split_fixture():
    return split_model()


@pytest.fixture
def fork_fixture():
    return fork_model()


# -- independent oracles -----------------------------------------------------

def dfs_reach(rel, start):
    """States reachable from ``start`` in one or more steps."""
    adj = {}
    for a, b in rel:
        adj.setdefault(a, []).append(b)
    seen = set()
    stack = list(adj.get(start, ()))
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        stack.extend(adj.get(x, ()))
    return seen


def dfs_closure(rel):
    nodes = {a for a, _ in rel} | {b for _, b in rel}
    return {(a, b) for a in nodes for b in dfs_reach(rel, a)}


def naive_holds(m, s, f, reflexive=False):
    """Satisfaction straight from the clauses, reachability by DFS."""
    rel = set().union(*m.relations)
    if isinstance(f, Atom):
        return s in m.valuation.get(f.name, ())
    if f == TOP:
        return True
    if isinstance(f, Neg):
        return not naive_holds(m, s, f.child, reflexive)
    if isinstance(f, And):
        return naive_holds(m, s, f.left, reflexive) and naive_holds(m, s, f.right, reflexive)
    reach = dfs_reach(rel, s) | ({s} if reflexive else set())
    return all(naive_holds(m, t, f.child, reflexive) for t in reach)


# -- random generation -------------------------------------------------------

def random_formula(rng, depth, atoms=("p", "q")):
    if depth == 0 or rng.random() < 0.25:
        return TOP if rng.random() < 0.1 else Atom(rng.choice(atoms))
    kind = rng.choice(["neg", "and", "c", "c"])
    if kind == "neg":
        return Neg(random_formula(rng, depth - 1, atoms))
    if kind == "c":
        return C(random_formula(rng, depth - 1, atoms))
    return And(random_formula(rng, depth - 1, atoms), random_formula(rng, depth - 1, atoms))


def random_relation(rng, states, density=0.3):
    return {(a, b) for a in states for b in states if rng.random() < density}


def random_model(rng, n, k, atoms=("p", "q"), density=0.3):
    states = tuple(f"w{i}" for i in range(k))
    rels = tuple(random_relation(rng, states, density) for _ in range(n))
    val = {a: {s for s in states if rng.random() < 0.5} for a in atoms}
    return KripkeModel(states, rels, val)


@pytest.fixture
def rng():
    return random.Random(20261014)


def formulas(atoms=("p", "q", "r"), max_leaves=12):
    leaves = st.one_of(st.sampled_from([Atom(a) for a in atoms]), st.just(TOP))
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.builds(Neg, sub),
            st.builds(C, sub),
            st.builds(And, sub, sub),
        ),
        max_leaves=max_leaves,
    )


# -- acceptance reporting ----------------------------------------------------

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda l: int(l.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)

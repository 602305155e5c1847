import itertools

import pytest
from hypothesis import given, settings, strategies as st

from commonbelief.kripke import (
    KripkeModel, ModelError, ModelFormatError, UniModalModel, as_unimodal,
    check_frame_properties, cn_counterexample, cn_frame_property, dumps_model,
    generated_submodel, is_shift_reflexive, loads_model, reachable,
    reflexive_transitive_closure, relation_properties, shift_reflexive_counterexample,
    to_dot, transitive_closure,
)

from commonbelief.search import random_kd45_model

from conftest import dfs_closure, split_model, random_relation

STATES = ("a", "b", "c")


def all_relations(states):
    pairs = [(x, y) for x in states for y in states]
    for bits in range(1 << len(pairs)):
        yield frozenset(p for i, p in enumerate(pairs) if bits >> i & 1)


def brute_cn(rel, n, states):
    # ordered tuples, straight from the first-order condition
    for x in states:
        sx = [y for y in states if (x, y) in rel]
        for ys in itertools.product(sx, repeat=n + 1):
            if not any(
                (z, ys[i]) in rel and (z, ys[j]) in rel
                for z in sx
                for i in range(n + 1)
                for j in range(i + 1, n + 1)
            ):
                return False
    return True


class TestModel:
    def test_valuation_frozen(self):
        m = split_model()
        assert m.valuation == {"p": frozenset({"t"})}
        assert m.true_atoms("t") == {"p"}
        assert m.agent_count == 2
        assert m.relation(2) == {("s", "u"), ("u", "u"), ("t", "t")}

    @pytest.mark.parametrize(
        "args",
        [
            ((), ({("a", "a")},), {}),
            (("a", "a"), ({("a", "a")},), {}),
            (("a",), ({("a", "b")},), {}),
            (("a",), (), {}),
            (("a",), ({("a", "a")},), {"p": {"z"}}),
        ],
    )
    def test_rejects_ill_formed(self, args):
        with pytest.raises(ModelError):
            KripkeModel(*args)

    def test_unknown_state(self):
        with pytest.raises(ModelError, match="unknown state"):
            split_model().require("zz")

    def test_unimodal_view(self):
        u = as_unimodal(split_model())
        assert isinstance(u, UniModalModel)
        assert u.relation == {("s", "t"), ("s", "u"), ("t", "t"), ("u", "u")}
        assert u.as_kripke().relations == (u.relation,)


class TestClosure:
    def test_chain(self):
        rel = {("a", "b"), ("b", "c")}
        assert transitive_closure(rel) == {("a", "b"), ("b", "c"), ("a", "c")}

    def test_reflexive(self):
        assert reflexive_transitive_closure({("a", "b")}, "abc") == {
            ("a", "b"), ("a", "a"), ("b", "b"), ("c", "c"),
        }

    def test_against_dfs(self, rng):
        for _ in range(200):
            k = rng.randint(1, 9)
            states = [f"v{i}" for i in range(k)]
            rel = random_relation(rng, states, rng.choice([0.1, 0.2, 0.4]))
            assert transitive_closure(rel) == dfs_closure(rel)

    @settings(max_examples=200, deadline=None)
    @given(st.sets(st.tuples(st.integers(0, 6), st.integers(0, 6)), max_size=20))
    def test_idempotent_and_transitive(self, pairs):
        rel = {(f"n{a}", f"n{b}") for a, b in pairs}
        tc = transitive_closure(rel)
        assert rel <= tc
        assert transitive_closure(tc) == tc
        for (x, y), (y2, z) in itertools.product(tc, tc):
            if y == y2:
                assert (x, z) in tc


class TestFrameProperties:
    def test_split_model_is_kd45(self):
        rep = check_frame_properties(split_model())
        assert rep.kd45
        assert "kd45: yes" in str(rep)

    def test_witnesses(self):
        p = relation_properties(STATES, {("a", "b"), ("b", "c"), ("c", "c")})
        assert p.serial
        assert p.transitive_witness == ("a", "b", "c")
        assert not p.euclidean
        q = relation_properties(STATES, {("a", "b")})
        assert q.serial_witness == "b"

    def test_kd45_count_one_agent(self):
        # KD45 relations per state count, checked by brute force
        for k, expected in [(1, 1), (2, 4), (3, 17)]:
            states = STATES[:k]
            got = sum(relation_properties(states, r).kd45 for r in all_relations(states))
            assert got == expected

    def test_kd45_means_successors_share_view(self):
        for rel in all_relations(STATES):
            if relation_properties(STATES, rel).kd45:
                for x, y in rel:
                    assert {b for a, b in rel if a == y} == {b for a, b in rel if a == x}


class TestShiftReflexive:
    def test_counterexample(self):
        assert shift_reflexive_counterexample({("a", "b")}) == ("a", "b")
        assert is_shift_reflexive({("a", "b"), ("b", "b")})

    def test_transitive_closure_of_kd45_union(self):
        # closures of unions of KD45 relations are shift-reflexive
        m = split_model()
        assert is_shift_reflexive(transitive_closure(m.relation(1) | m.relation(2)))


class TestCnProperty:
    def test_star_fails_two(self):
        rel = {("x", "a"), ("x", "b"), ("x", "c"), ("a", "a"), ("b", "b"), ("c", "c")}
        assert not cn_frame_property(rel, 2)
        x, ys = cn_counterexample(rel, 2)
        assert x == "x" and sorted(ys) == ["a", "b", "c"]
        assert cn_frame_property(rel, 3)

    def test_empty_relation_holds(self):
        assert cn_frame_property(set(), 1)

    def test_matches_ordered_tuple_oracle(self):
        for rel in all_relations(STATES):
            for n in (1, 2):
                assert cn_frame_property(rel, n, STATES) == brute_cn(rel, n, STATES)

    def test_large_n_on_shift_reflexive(self, rng):
        # with at most n successors each y_i can serve as its own mediator
        for _ in range(200):
            states = [f"v{i}" for i in range(rng.randint(1, 5))]
            rel = transitive_closure(random_relation(rng, states))
            rel = rel | {(b, b) for _, b in rel}
            assert cn_frame_property(rel, len(states), states)

    def test_non_shift_reflexive_can_fail(self):
        assert not cn_frame_property({("x", "y")}, 1)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            cn_counterexample({("a", "a")}, 0)


class TestSubmodel:
    def test_reachable(self):
        m = KripkeModel(("a", "b", "c"), ({("a", "b"), ("c", "c")},), {"p": {"c"}})
        assert reachable(m, "a") == {"b"}
        g = generated_submodel(m, "a")
        assert g.states == ("a", "b")
        assert g.valuation == {"p": frozenset()}


class TestFormat:
    TEXT = """\
# a comment
states: s t u
agents: 2
rel 1: s->t t->t u->u
rel 2: s->u u->u t->t
val p: t
"""

    def test_load(self):
        assert loads_model(self.TEXT) == split_model()

    def test_round_trip(self, rng):
        for _ in range(50):
            k = rng.randint(1, 4)
            states = tuple(f"w{i}" for i in range(k))
            rels = tuple(random_relation(rng, states) for _ in range(rng.randint(1, 3)))
            m = KripkeModel(states, rels, {"p": {s for s in states if rng.random() < 0.5}})
            assert loads_model(dumps_model(m, point="w0")) == m

    def test_point_comment(self):
        assert dumps_model(split_model(), point="s").splitlines()[-1] == "# point: s"

    @pytest.mark.parametrize(
        "text, line",
        [
            ("states: s\nfoo: 1\n", 2),
            ("states: s\nrel x: s->s\n", 2),
            ("states: s\nrel 1: s-s\n", 2),
            ("states: S\n", 1),
            ("states: s\nagents: 0\n", 2),
            ("states s\n", 1),
        ],
    )
    def test_errors(self, text, line):
        with pytest.raises(ModelFormatError) as exc:
            loads_model(text)
        assert exc.value.line == line

    def test_missing_states(self):
        with pytest.raises(ModelFormatError):
            loads_model("agents: 1\n")

    def test_undeclared_agent(self):
        with pytest.raises(ModelFormatError):
            loads_model("states: s\nagents: 1\nrel 2: s->s\n")

    def test_edge_to_unknown_state(self):
        with pytest.raises(ModelError):
            loads_model("states: s\nrel 1: s->t\n")

    def test_dot(self):
        dot = to_dot(split_model(), "s")
        assert dot.startswith("digraph model {")
        assert '"s" -> "t" [label="1"];' in dot
        assert "doublecircle" in dot


class TestListedExamples:
    def test_unrepaired_relation_not_serial(self):
        rep = relation_properties(("s", "t", "u"), {("s", "t"), ("t", "t")})
        assert not rep.serial and rep.serial_witness == "u"

    def test_empty_relation_one_state(self):
        rep = relation_properties(("a",), set())
        assert (rep.serial, rep.transitive, rep.euclidean) == (False, True, True)

    def test_closure_examples(self):
        rel = {("s", "t"), ("s", "u"), ("t", "t"), ("u", "u")}
        assert transitive_closure(rel) == rel
        assert transitive_closure(set()) == set()
        assert reflexive_transitive_closure(set(), ["a"]) == {("a", "a")}
        assert reflexive_transitive_closure(rel, "stu") == rel | {("s", "s")}

    def test_cn_fork(self):
        assert cn_frame_property({("s", "t"), ("s", "u"), ("t", "t"), ("u", "u")}, 2)

    def test_reachable_split(self):
        assert reachable(split_model(), "t") == {"t"}
        assert reachable(split_model(), "s") == {"t", "u"}
        assert generated_submodel(split_model(), "t").states == ("t",)


def test_closure_of_kd45_union_has_frame_properties(rng):
    # closure of the union of n KD45 relations is shift-reflexive and has the n-agent counting property
    for _ in range(100):
        n = rng.randint(1, 3)
        m = random_kd45_model(n, rng.randint(1, 5), rng)
        tc = transitive_closure(frozenset().union(*m.relations))
        assert is_shift_reflexive(tc)
        assert cn_frame_property(tc, n, m.states)

import pytest

from commonbelief.kripke import KripkeModel, check_frame_properties, relation_properties
from commonbelief.proof import build_chat_n, build_cn
from commonbelief.search import (
    BoundGuardError, SearchConfig, certify_valid_up_to, default_config,
    enumerate_kd45, find_countermodel, kd45_relation_masks, random_kd45_model,
    state_names,
)
from commonbelief.semantics import REFLEXIVE_TRANSITIVE, satisfies
from commonbelief.syntax import Atom, Neg, parse

from conftest import naive_holds, random_formula


def brute_kd45_count(k):
    states = state_names(k)
    pairs = [(x, y) for x in states for y in states]
    total = 0
    for bits in range(1 << len(pairs)):
        rel = {pr for i, pr in enumerate(pairs) if bits >> i & 1}
        total += relation_properties(states, rel).kd45
    return total


class TestEnumeration:
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_per_agent_count_matches_brute_force(self, k):
        assert len(kd45_relation_masks(k)) == brute_kd45_count(k)

    def test_four_states(self):
        # frozen from brute_kd45_count(4)
        assert len(kd45_relation_masks(4)) == 89

    @pytest.mark.parametrize("n, k, expected", [(1, 1, 1), (1, 2, 4), (2, 2, 16), (2, 3, 289)])
    def test_frame_counts(self, n, k, expected):
        frames = list(enumerate_kd45(n, k))
        assert len(frames) == expected
        assert len({m.relations for m in frames}) == expected
        assert all(check_frame_properties(m).kd45 for m in frames)

    def test_guard(self):
        with pytest.raises(BoundGuardError):
            list(enumerate_kd45(1, 5))
        with pytest.raises(BoundGuardError):
            SearchConfig(2, 5)
        with pytest.raises(BoundGuardError):
            SearchConfig(4, 2)
        SearchConfig(2, 50, exhaustive=False)

    def test_bad_config(self):
        with pytest.raises(ValueError):
            SearchConfig(0, 2)
        with pytest.raises(ValueError):
            SearchConfig(1, 0)


class TestExhaustive:
    def test_five_refuted(self):
        f = parse("~C p -> C ~C p")
        out = find_countermodel(f, default_config(f, 2, 3))
        assert out.found
        cm = out.countermodel
        assert check_frame_properties(cm.model).kd45
        assert satisfies(cm.model, cm.state, Neg(f))
        assert out.stats.frames > 0 and out.stats.valuations > 0

    def test_t_refuted_transitive_only(self):
        f = parse("C p -> p")
        assert find_countermodel(f, default_config(f, 1, 2)).found
        assert not find_countermodel(f, default_config(f, 1, 2, mode=REFLEXIVE_TRANSITIVE)).found

    def test_undeclared_atoms(self):
        with pytest.raises(ValueError, match="undeclared"):
            find_countermodel(parse("p & q"), SearchConfig(1, 1, ("p",)))

    def test_extra_atoms_allowed(self):
        assert certify_valid_up_to(parse("C p -> C C p"), SearchConfig(2, 2, ("p", "q"))).certified

    def test_agrees_with_naive_enumeration(self, rng):
        for _ in range(40):
            f = random_formula(rng, 4, ("p",))
            cfg = SearchConfig(2, 2, ("p",))
            found = find_countermodel(f, cfg).found
            naive = False
            for k in (1, 2):
                for frame in enumerate_kd45(2, k):
                    for bits in range(1 << k):
                        val = {"p": {s for i, s in enumerate(frame.states) if bits >> i & 1}}
                        m = KripkeModel(frame.states, frame.relations, val)
                        if any(not naive_holds(m, s, f) for s in m.states):
                            naive = True
            assert found == naive

    def test_jobs_give_same_answer(self):
        f = build_chat_n(2, [Atom("p1"), Atom("p2"), Atom("p3")])
        one = find_countermodel(f, default_config(f, 3, 4))
        two = find_countermodel(f, default_config(f, 3, 4, jobs=2))
        assert one.countermodel == two.countermodel
        # other shards run on past the earliest hit, so their counts only add up
        assert two.stats.frames >= one.stats.frames

    def test_cn_certified_two_agents(self):
        f = build_cn(2, [Atom("p1"), Atom("p2"), Atom("p3")])
        assert certify_valid_up_to(f, default_config(f, 2, 3)).certified


class TestRandom:
    def test_random_kd45(self, rng):
        for _ in range(100):
            m = random_kd45_model(rng.randint(1, 3), rng.randint(1, 8), rng, atoms=("p",))
            assert check_frame_properties(m).kd45

    def test_finds_five(self):
        f = parse("~C p -> C ~C p")
        out = find_countermodel(f, default_config(f, 2, 6, exhaustive=False, samples=500, seed=3))
        assert out.found

    def test_seeded(self):
        f = parse("~C p -> C ~C p")
        cfg = default_config(f, 2, 6, exhaustive=False, samples=500, seed=11)
        assert find_countermodel(f, cfg).countermodel == find_countermodel(f, cfg).countermodel

    def test_sampled_valuations(self):
        # nine atoms on up to three states exceeds the exhaustive valuation budget
        names = [f"a{i}" for i in range(9)]
        f = parse(" & ".join(names))
        out = find_countermodel(f, default_config(f, 1, 3, exhaustive=False, samples=20, seed=0))
        assert out.found


class TestReport:
    def test_certify_text(self):
        f = parse("C p -> C C p")
        rep = certify_valid_up_to(f, default_config(f, 2, 2))
        assert str(rep).startswith("certified up to bounds: KD45_2 models with at most 2 states")

    def test_refuted_text(self):
        f = parse("p")
        rep = certify_valid_up_to(f, default_config(f, 1, 1))
        assert not rep.certified
        assert str(rep).startswith("refuted at s0 of a 1-state model")

"""Bounded countermodel search over KD45_n models.

Exhaustive mode walks state counts ``1..max_states``, every tuple of KD45
relations on that many states, and every valuation of the declared atoms.
Valuations are not looped over one by one: each subformula is evaluated
once per frame on bit vectors indexed by valuation number (see
:func:`commonbelief.semantics.evaluate_vectors`).
"""

from __future__ import annotations

import itertools
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional, Sequence

from .kripke import (
    KripkeModel, check_frame_properties, closure_masks, from_masks,
)
from .semantics import (
    TRANSITIVE, ClosureMode, common_masks, compile_formula, evaluate_vectors,
    exhaustive_atom_vectors, satisfies, valuation_from_index,
)
from .syntax import Formula, Neg, atoms as atoms_of

MAX_EXHAUSTIVE_STATES = 4
MAX_EXHAUSTIVE_AGENTS = 3
# valuation bits per frame beyond which random mode samples valuations
MAX_VALUATION_BITS = 16
RANDOM_VALUATION_SAMPLES = 64


class BoundGuardError(ValueError):
    """Requested search is outside the allowed exhaustive bounds."""


@dataclass(frozen=True)
class SearchConfig:
    agent_count: int
    max_states: int
    atoms: tuple = ()
    exhaustive: bool = True
    samples: int = 1000
    seed: int = 0
    mode: ClosureMode = TRANSITIVE
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if self.max_states < 1:
            raise ValueError("max_states must be at least 1")
        if self.agent_count < 1:
            raise ValueError("agent_count must be at least 1")
        if self.exhaustive:
            check_bounds(self.agent_count, self.max_states)

    def bounds_text(self) -> str:
        how = "exhaustive" if self.exhaustive else f"{self.samples} random samples (seed {self.seed})"
        return (
            f"KD45_{self.agent_count} models with at most {self.max_states} states, "
            f"atoms {{{', '.join(self.atoms)}}}, {self.mode.value} closure, {how}"
        )


def check_bounds(n: int, k: int):
    if k > MAX_EXHAUSTIVE_STATES or n > MAX_EXHAUSTIVE_AGENTS:
        raise BoundGuardError(
            f"exhaustive search is limited to {MAX_EXHAUSTIVE_AGENTS} agents and "
            f"{MAX_EXHAUSTIVE_STATES} states (asked for {n} agents, {k} states)"
        )


@dataclass
class SearchStats:
    raw_relations: int = 0
    frames: int = 0
    valuations: int = 0
    elapsed: float = 0.0

    def add(self, other: "SearchStats"):
        self.raw_relations += other.raw_relations
        self.frames += other.frames
        self.valuations += other.valuations

    def __str__(self):
        return (
            f"raw relations filtered: {self.raw_relations}, KD45 frames: {self.frames}, "
            f"valuations checked: {self.valuations}"
        )


@dataclass(frozen=True)
class Countermodel:
    model: KripkeModel
    state: str


@dataclass(frozen=True)
class SearchOutcome:
    formula: Formula
    config: SearchConfig
    countermodel: Optional[Countermodel]
    stats: SearchStats = field(compare=False)

    @property
    def found(self) -> bool:
        return self.countermodel is not None


def state_names(k: int) -> tuple:
    return tuple(f"s{i}" for i in range(k))


# -- enumeration -------------------------------------------------------------

@lru_cache(maxsize=None)
def kd45_relation_masks(k: int) -> tuple:
    """Every serial, transitive, Euclidean relation on ``k`` states, as
    bitset rows, in increasing order of their ``k*k``-bit encoding."""
    if k < 1:
        raise ValueError("need at least one state")
    if k > MAX_EXHAUSTIVE_STATES:
        raise BoundGuardError(f"relations on {k} states are not enumerated")
    states = range(k)
    sel = (1 << k) - 1
    out = []
    for code in range(1 << (k * k)):
        rows = [(code >> (i * k)) & sel for i in states]
        if _kd45_rows(rows):
            out.append(tuple(rows))
    return tuple(out)


def _kd45_rows(rows) -> bool:
    for x, sx in enumerate(rows):
        if not sx:
            return False
        for y in range(len(rows)):
            if sx >> y & 1:
                # transitive: R(y) within R(x); Euclidean: R(x) within R(y)
                if rows[y] != sx:
                    return False
    return True


def enumerate_kd45(n: int, k: int) -> Iterator[KripkeModel]:
    """All KD45_n frames on ``k`` states (empty valuation), deterministic order."""
    check_bounds(n, k)
    names = state_names(k)
    rels = [from_masks(names, rows) for rows in kd45_relation_masks(k)]
    for combo in itertools.product(rels, repeat=n):
        yield KripkeModel(names, combo, {})


def _scan(prog, n, k, atoms, mode, first_choices):
    """Search frames on ``k`` states whose first relation is drawn from
    ``first_choices``; returns ``(hit, stats)`` with ``hit`` the first
    ``(first, rest, state, valuation)`` in enumeration order."""
    per_agent = kd45_relation_masks(k)
    vecs, full = exhaustive_atom_vectors(k, atoms)
    nval = 1 << (k * len(atoms))
    stats = SearchStats()
    for first in first_choices:
        for rest in itertools.product(range(len(per_agent)), repeat=n - 1):
            stats.frames += 1
            stats.valuations += nval
            rows = [per_agent[first]] + [per_agent[r] for r in rest]
            union = [0] * k
            for rel in rows:
                union = [a | b for a, b in zip(union, rel)]
            succ = common_masks(union, mode)
            for i, vec in enumerate(evaluate_vectors(prog, succ, vecs, full)):
                if vec != full:
                    bad = full ^ vec
                    v = (bad & -bad).bit_length() - 1
                    return (first, rest, i, v), stats
    return None, stats


def _scan_job(args):
    return _scan(*args)


def _hit_to_countermodel(hit, n, k, atoms) -> Countermodel:
    first, rest, i, v = hit
    per_agent = kd45_relation_masks(k)
    names = state_names(k)
    rels = tuple(from_masks(names, per_agent[r]) for r in (first,) + tuple(rest))
    model = KripkeModel(names, rels, valuation_from_index(names, atoms, v))
    return Countermodel(model, names[i])


def _exhaustive(f, cfg: SearchConfig) -> SearchOutcome:
    prog = compile_formula(f)
    n, atoms = cfg.agent_count, list(cfg.atoms)
    total = SearchStats()
    for k in range(1, cfg.max_states + 1):
        per_agent = kd45_relation_masks(k)
        total.raw_relations += 1 << (k * k)
        firsts = list(range(len(per_agent)))
        if cfg.jobs > 1 and len(firsts) > 1:
            shards = [firsts[j :: cfg.jobs] for j in range(cfg.jobs)]
            shards = [s for s in shards if s]
            with ProcessPoolExecutor(max_workers=len(shards)) as pool:
                results = list(
                    pool.map(_scan_job, [(prog, n, k, atoms, cfg.mode, s) for s in shards])
                )
            hits = []
            for hit, stats in results:
                total.add(stats)
                if hit is not None:
                    hits.append(hit)
            # earliest in enumeration order, whichever worker found it
            hit = min(hits, key=lambda h: (h[0], h[1], h[2], h[3])) if hits else None
        else:
            hit, stats = _scan(prog, n, k, atoms, cfg.mode, firsts)
            total.add(stats)
        if hit is not None:
            return SearchOutcome(f, cfg, _hit_to_countermodel(hit, n, k, atoms), total)
    return SearchOutcome(f, cfg, None, total)


# -- random models -----------------------------------------------------------

def random_kd45_rows(k: int, rng: random.Random, density: float = 0.35) -> list:
    """Uniform edge sampling, then repair: add loops where a state has no
    successor and close transitively.  Returns None when the result is not
    Euclidean."""
    rows = [0] * k
    for i in range(k):
        for j in range(k):
            if rng.random() < density:
                rows[i] |= 1 << j
        if not rows[i]:
            rows[i] = 1 << i
    rows = closure_masks(rows)
    return rows if _kd45_rows(rows) else None


def random_kd45_model(n: int, k: int, rng: random.Random, atoms: Sequence[str] = (), density: float = 0.35) -> KripkeModel:
    names = state_names(k)
    rels = []
    while len(rels) < n:
        rows = random_kd45_rows(k, rng, density)
        if rows is not None:
            rels.append(from_masks(names, rows))
    val = {a: frozenset(s for s in names if rng.random() < 0.5) for a in atoms}
    return KripkeModel(names, tuple(rels), val)


def _random(f, cfg: SearchConfig) -> SearchOutcome:
    rng = random.Random(cfg.seed)
    prog = compile_formula(f)
    atoms = list(cfg.atoms)
    stats = SearchStats()
    for _ in range(cfg.samples):
        k = rng.randint(1, cfg.max_states)
        names = state_names(k)
        rows = []
        while len(rows) < cfg.agent_count:
            stats.raw_relations += 1
            r = random_kd45_rows(k, rng)
            if r is not None:
                rows.append(r)
        stats.frames += 1
        union = [0] * k
        for r in rows:
            union = [a | b for a, b in zip(union, r)]
        succ = common_masks(union, cfg.mode)
        exhaustive_vals = k * len(atoms) <= MAX_VALUATION_BITS
        if exhaustive_vals:
            vecs, full = exhaustive_atom_vectors(k, atoms)
            stats.valuations += 1 << (k * len(atoms))
        else:
            width = RANDOM_VALUATION_SAMPLES
            full = (1 << width) - 1
            vecs = {(i, a): rng.getrandbits(width) for i in range(k) for a in atoms}
            stats.valuations += width
        for i, vec in enumerate(evaluate_vectors(prog, succ, vecs, full)):
            if vec == full:
                continue
            bad = full ^ vec
            v = (bad & -bad).bit_length() - 1
            if exhaustive_vals:
                val = valuation_from_index(names, atoms, v)
            else:
                val = {a: frozenset(names[j] for j in range(k) if vecs[(j, a)] >> v & 1) for a in atoms}
            model = KripkeModel(names, tuple(from_masks(names, r) for r in rows), val)
            return SearchOutcome(f, cfg, Countermodel(model, names[i]), stats)
    return SearchOutcome(f, cfg, None, stats)


# -- entry points ------------------------------------------------------------

def find_countermodel(f: Formula, cfg: SearchConfig) -> SearchOutcome:
    """Look for a pointed KD45_n model falsifying ``f`` within ``cfg``'s bounds."""
    missing = atoms_of(f) - set(cfg.atoms)
    if missing:
        raise ValueError(f"formula uses undeclared atoms: {', '.join(sorted(missing))}")
    started = time.perf_counter()
    outcome = _exhaustive(f, cfg) if cfg.exhaustive else _random(f, cfg)
    outcome.stats.elapsed = time.perf_counter() - started
    if outcome.found:
        _reverify(outcome)
    return outcome


def _reverify(outcome: SearchOutcome):
    cm = outcome.countermodel
    if not check_frame_properties(cm.model).kd45:
        raise AssertionError("search produced a non-KD45 countermodel")
    if not satisfies(cm.model, cm.state, Neg(outcome.formula), outcome.config.mode):
        raise AssertionError("search produced a countermodel that does not refute the formula")


@dataclass(frozen=True)
class CertifyReport:
    formula: Formula
    certified: bool
    bounds: str
    outcome: SearchOutcome

    def __str__(self):
        if self.certified:
            return f"certified up to bounds: {self.bounds}"
        cm = self.outcome.countermodel
        return f"refuted at {cm.state} of a {len(cm.model.states)}-state model ({self.bounds})"


def certify_valid_up_to(f: Formula, cfg: SearchConfig) -> CertifyReport:
    outcome = find_countermodel(f, cfg)
    return CertifyReport(f, not outcome.found, cfg.bounds_text(), outcome)


def default_config(f: Formula, agent_count: int, max_states: int, **kw) -> SearchConfig:
    """Config whose atoms are exactly those of ``f``."""
    return SearchConfig(agent_count, max_states, tuple(sorted(atoms_of(f))), **kw)


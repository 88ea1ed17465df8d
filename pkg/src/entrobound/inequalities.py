"""Shannon-type inequality machinery.

Covers the elemental family (conditional entropies given all other variables
and pairwise conditional mutual informations), local growth of candidate
inequalities from a pool of joint-entropy terms, and equality filtering
against a code-induced entropy oracle.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .terms import (EMPTY_TERM, GE, EncodingError, LinearForm, SymmetryGroup,
                    TermSet, VariableUniverse, linear_form)

MONO = "MONO"
CMI = "CMI"

# TermPool provenance tags
BOOTSTRAP = "bootstrap"
GROWN = "grown"
EVIDENCE = "evidence"


class SpecError(ValueError):
    """An inequality specification violates its structural invariants."""


@dataclass(frozen=True)
class InequalitySpec:
    """A typed Shannon inequality.

    MONO: first = {i}, second empty; the inequality H(cond,i) - H(cond) >= 0.
    CMI:  I(first; second | cond) >= 0 with first, second nonempty and
    first/second/cond pairwise disjoint.
    """

    kind: str
    first: TermSet
    second: TermSet
    cond: TermSet

    def __post_init__(self):
        if self.kind == MONO:
            if len(self.first) != 1 or not self.second.is_empty:
                raise SpecError("monotonicity spec needs a single grown variable")
            if not self.first.isdisjoint(self.cond):
                raise SpecError("monotonicity variable already in the condition")
        elif self.kind == CMI:
            if self.first.is_empty or self.second.is_empty:
                raise SpecError("CMI spec needs nonempty argument sets")
            if (not self.first.isdisjoint(self.second)
                    or not self.first.isdisjoint(self.cond)
                    or not self.second.isdisjoint(self.cond)):
                raise SpecError("CMI argument sets must be pairwise disjoint")
        else:
            raise SpecError(f"unknown inequality kind: {self.kind!r}")


def mono(index: int, cond: TermSet) -> InequalitySpec:
    return InequalitySpec(MONO, TermSet.of([index]), EMPTY_TERM, cond)


def cmi(first: TermSet, second: TermSet, cond: TermSet = EMPTY_TERM) -> InequalitySpec:
    return InequalitySpec(CMI, first, second, cond)


def expand(spec: InequalitySpec) -> LinearForm:
    """The inequality as a linear form in joint entropies (>= 0).

    All coefficients are +-1 and at most four distinct terms appear; an empty
    condition folds the zero entropy away.
    """
    if spec.kind == MONO:
        pairs = [(spec.cond | spec.first, Fraction(1)), (spec.cond, Fraction(-1))]
    else:
        pairs = [
            (spec.cond | spec.first, Fraction(1)),
            (spec.cond | spec.second, Fraction(1)),
            (spec.cond | spec.first | spec.second, Fraction(-1)),
            (spec.cond, Fraction(-1)),
        ]
    return linear_form(pairs, relation=GE)


def slack(spec: InequalitySpec, oracle) -> Fraction:
    """Value of the expanded inequality under an entropy oracle.

    Computed straight from the spec's term sets; agrees with
    expand(spec).evaluate(oracle.eval) exactly (property-tested).
    """
    ev = oracle.eval
    if spec.kind == MONO:
        return ev(spec.cond | spec.first) - ev(spec.cond)
    return (ev(spec.cond | spec.first) + ev(spec.cond | spec.second)
            - ev(spec.cond | spec.first | spec.second) - ev(spec.cond))


def is_elemental(spec: InequalitySpec, universe: VariableUniverse) -> bool:
    if spec.kind == MONO:
        return (spec.cond | spec.first) == universe.full_term()
    return len(spec.first) == 1 and len(spec.second) == 1


def encode_spec(spec: InequalitySpec, universe: VariableUniverse) -> str:
    if spec.kind == MONO:
        (i,) = spec.first.indices()
        return f"MONO {universe.names[i]} | {universe.format_term(spec.cond)}"
    return (f"CMI {universe.format_term(spec.first)} ; "
            f"{universe.format_term(spec.second)} | {universe.format_term(spec.cond)}")


def parse_spec(text: str, universe: VariableUniverse) -> InequalitySpec:
    text = text.strip()
    try:
        if text.startswith("MONO "):
            head, cond = text[5:].split("|", 1)
            return mono(universe.index(head.strip()), universe.parse_term(cond))
        if text.startswith("CMI "):
            args, cond = text[4:].rsplit("|", 1)
            first, second = args.split(";", 1)
            return cmi(universe.parse_term(first), universe.parse_term(second),
                       universe.parse_term(cond))
    except (ValueError, SpecError) as exc:
        raise EncodingError(f"bad inequality encoding {text!r}: {exc}") from exc
    raise EncodingError(f"bad inequality encoding: {text!r}")


def count_elemental(n: int) -> int:
    """N + C(N,2) * 2^(N-2) elemental inequalities on N ground variables."""
    if n < 1:
        raise ValueError("need at least one variable")
    if n == 1:
        return 1
    return n + math.comb(n, 2) * 2 ** (n - 2)


def enumerate_elemental(universe: VariableUniverse) -> Iterator[InequalitySpec]:
    """Stream every elemental inequality exactly once.

    N monotonicity specs conditioned on all other variables, then one CMI per
    unordered variable pair and each subset of the remaining variables.
    """
    n = universe.size
    full = universe.full_term()
    for i in range(n):
        yield mono(i, full - TermSet.of([i]))
    for i in range(n):
        for j in range(i + 1, n):
            rest = [k for k in range(n) if k != i and k != j]
            for bits in range(1 << len(rest)):
                cond = TermSet.of(rest[k] for k in range(len(rest)) if bits >> k & 1)
                yield cmi(TermSet.of([i]), TermSet.of([j]), cond)


DEFAULT_MATERIALIZE_CAP = 16


def elemental_specs(universe: VariableUniverse,
                    cap: int = DEFAULT_MATERIALIZE_CAP) -> list[InequalitySpec]:
    """Materialize the elemental set; refuses to above the variable cap."""
    if universe.size > cap:
        raise ValueError(
            f"refusing to materialize {count_elemental(universe.size)} elemental "
            f"inequalities for N={universe.size} (cap {cap})")
    return list(enumerate_elemental(universe))


@dataclass(frozen=True)
class EntropyOracle:
    """An exact entropy function over a universe, induced by a construction."""

    universe: VariableUniverse
    eval: Callable[[TermSet], Fraction]


@dataclass
class TabularOracle:
    """Oracle backed by an explicit table (used in tests and examples)."""

    universe: VariableUniverse
    table: dict[TermSet, Fraction]

    def eval(self, t: TermSet) -> Fraction:
        if t.is_empty:
            return Fraction(0)
        if t not in self.table:
            raise KeyError(f"no entropy value for {self.universe.format_term(t)}")
        return Fraction(self.table[t])


@dataclass
class TermPool:
    """A growable set of joint-entropy terms with provenance tags."""

    symmetry: SymmetryGroup | None = None
    terms: dict[TermSet, str] = field(default_factory=dict)

    def add(self, t: TermSet, tag: str) -> None:
        if self.symmetry is not None:
            t = self.symmetry.canonicalize(t)
        if t.is_empty:
            return
        prior = self.terms.get(t)
        if prior is None:
            self.terms[t] = tag
        elif tag == EVIDENCE and prior != EVIDENCE:
            self.terms[t] = EVIDENCE

    def members(self) -> list[TermSet]:
        return list(self.terms)

    def __len__(self) -> int:
        return len(self.terms)


def _weighted_pick(items: Sequence[TermSet], weights: Sequence[int],
                   rng: random.Random) -> TermSet:
    total = sum(weights)
    x = rng.randrange(total)
    for item, w in zip(items, weights):
        x -= w
        if x < 0:
            return item
    return items[-1]


def _tight(spec: InequalitySpec, oracles: Sequence) -> bool:
    """Whether the spec holds with equality under every oracle."""
    return all(slack(spec, o) == 0 for o in oracles)


def _decomposition_walk(pool: TermPool, target: TermSet, rng: random.Random,
                        emitted: dict[InequalitySpec, None],
                        max_pool: int, oracles: Sequence = ()) -> None:
    """Chain random subset pieces of `target` until their union reaches it.

    Each accepted step pairs the running union `acc` with a fresh piece Q and
    emits I(acc\\Q; Q\\acc | acc^Q), so the walk manufactures exactly the
    progressive splits H(target) <= sum of piece entropies that converse
    proofs are built from.  Uniform pair sampling alone almost never
    produces these chains: the union of one pair has to be re-drawn as a
    member of the next pair, an event whose probability vanishes as the
    pool grows.

    When filter oracles are given, a step is taken only if its spec holds
    with equality under all of them, so the whole chain survives the
    downstream equality filter instead of being punctured link by link.
    """
    pieces = [t for t in pool.members() if t != target and t.issubset(target)]
    rng.shuffle(pieces)
    acc: TermSet | None = None
    for q in pieces:
        if acc is None:
            acc = q
            continue
        if q.issubset(acc):
            continue
        if acc.issubset(q):
            acc = q
            continue
        spec = cmi(acc - q, q - acc, acc & q)
        if oracles and not _tight(spec, oracles):
            continue
        emitted[spec] = None
        acc = acc | q
        if len(pool) < max_pool:
            pool.add(acc, GROWN)
        if acc == target:
            return


def _extension_walk(pool: TermPool, rng: random.Random,
                    emitted: dict[InequalitySpec, None], max_pool: int,
                    steps: int, anchors: Sequence[TermSet],
                    oracles: Sequence = ()) -> None:
    """Grow a running union of random pool terms, pairing it as it grows.

    Each step unions a random pool term into the accumulator and emits the
    pair candidate, then also pairs the accumulator against a few anchor
    (problem-constraint) terms.  The anchor pairings are what let equality
    constraints enter proofs: a pair (anchor, accumulator) whose
    intersection covers the anchor's determining part produces the
    conditional-determinism split that plain random pairs essentially
    never hit.
    """
    members = pool.members()
    if not members:
        return
    acc = members[rng.randrange(len(members))]
    for _ in range(steps):
        q = members[rng.randrange(len(members))]
        if acc.issubset(q):
            acc = q
        elif not q.issubset(acc):
            spec = cmi(acc - q, q - acc, acc & q)
            if not oracles or _tight(spec, oracles):
                emitted[spec] = None
                acc = acc | q
                if len(pool) < max_pool:
                    pool.add(acc, GROWN)
        for k in range(min(3, len(anchors))):
            b = anchors[rng.randrange(len(anchors))]
            if not b.issubset(acc) and not acc.issubset(b):
                spec = cmi(acc - b, b - acc, acc & b)
                if not oracles or _tight(spec, oracles):
                    emitted[spec] = None


def grow_pool(pool: TermPool, rounds: int, max_pool: int, rng: random.Random,
              pairs_per_round: int = 64, walks_per_round: int = 8,
              oracles: Sequence = ()) -> tuple[TermPool, list[InequalitySpec]]:
    """Grow the term pool by unions/intersections and emit candidate specs.

    Each round samples term pairs (P, Q) with neither containing the other
    (evidence-tagged terms at 3x weight), emits the candidate
    I(P\\Q; Q\\P | P^Q), and inserts the union and intersection back into the
    pool while it is below `max_pool`.  Each round also runs a few
    decomposition walks that split a multi-variable pool term into a union
    chain of smaller pool terms (see _decomposition_walk).  Monotonicity
    candidates H(T,i) - H(T) >= 0 are admitted for every pool term T and
    variable i outside T that appears somewhere in the pool.  Deterministic
    for a fixed rng state; the returned candidate list is duplicate-free.

    When `oracles` is nonempty, growth is restricted to the equality
    manifold of those oracles: a pair candidate is emitted and its union
    and intersection inserted only if the candidate is tight under every
    oracle.  Unconstrained growth would mostly produce terms reachable
    only through slack steps, and every such step is discarded by the
    downstream equality filter anyway; gating keeps the pool made of terms
    that tight proofs can actually chain through.
    """
    emitted: dict[InequalitySpec, None] = {}
    for _ in range(rounds):
        members = pool.members()
        if len(members) >= 2:
            weights = [3 if pool.terms[t] == EVIDENCE else 1 for t in members]
            for _ in range(pairs_per_round):
                p = _weighted_pick(members, weights, rng)
                q = _weighted_pick(members, weights, rng)
                if p == q or p.issubset(q) or q.issubset(p):
                    continue
                spec = cmi(p - q, q - p, p & q)
                if oracles and not _tight(spec, oracles):
                    continue
                emitted[spec] = None
                if len(pool) < max_pool:
                    pool.add(p | q, GROWN)
                if len(pool) < max_pool and not (p & q).is_empty:
                    pool.add(p & q, GROWN)
            big = [t for t in members if len(t) >= 2]
            anchors = [t for t, tag in pool.terms.items() if tag == BOOTSTRAP]
            for k in range(walks_per_round if big else 0):
                if k % 2:
                    _extension_walk(pool, rng, emitted, max_pool,
                                    steps=8, anchors=anchors, oracles=oracles)
                else:
                    _decomposition_walk(pool, big[rng.randrange(len(big))],
                                        rng, emitted, max_pool, oracles=oracles)
        support = 0
        for t in pool.terms:
            support |= t.mask
        for t in pool.members():
            extra = support & ~t.mask
            i = 0
            while extra:
                if extra & 1:
                    spec = mono(i, t)
                    if not oracles or _tight(spec, oracles):
                        emitted[spec] = None
                extra >>= 1
                i += 1
    return pool, list(emitted)


def filter_by_oracle(specs: Iterable[InequalitySpec], oracle) -> list[InequalitySpec]:
    """Keep exactly the specs that hold with equality under the oracle."""
    return [s for s in specs if slack(s, oracle) == 0]

"""Ground variables, entropy terms, exact linear forms, and symmetry groups.

Everything in this module is an immutable value and all arithmetic is done
with `fractions.Fraction`, so downstream proof certificates stay exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

ALPHA = "alpha"
BETA = "beta"
SCALARS = (ALPHA, BETA)

# LinearForm relations
GE = "ge"         # form >= 0
EQ = "eq"         # form == 0
OBJECTIVE = "obj"
RELATIONS = (GE, EQ, OBJECTIVE)

_REL_SUFFIX = {GE: " >= 0", EQ: " == 0", OBJECTIVE: ""}


class EncodingError(ValueError):
    """A textual encoding could not be parsed."""


class EvaluationError(ValueError):
    """A linear form referenced a term with no assigned value."""


def parse_rational(text: str) -> Fraction:
    """Parse 'p/q' (q > 0) or a bare integer."""
    m = re.fullmatch(r"\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?", text)
    if not m or m.group(2) == "0":
        raise EncodingError(f"bad rational: {text!r}")
    return Fraction(int(m.group(1)), int(m.group(2) or 1))


def format_rational(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class TermSet:
    """A subset of ground variables, identifying one joint entropy.

    Stored as a bit mask over universe indices; the empty set denotes the
    fixed-zero entropy of no variables.
    """

    mask: int

    def __post_init__(self):
        if self.mask < 0:
            raise ValueError("term mask must be nonnegative")

    @staticmethod
    def of(indices: Iterable[int]) -> "TermSet":
        m = 0
        for i in indices:
            m |= 1 << i
        return TermSet(m)

    def indices(self) -> tuple[int, ...]:
        out = []
        m = self.mask
        i = 0
        while m:
            if m & 1:
                out.append(i)
            m >>= 1
            i += 1
        return tuple(out)

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __or__(self, other: "TermSet") -> "TermSet":
        return TermSet(self.mask | other.mask)

    def __and__(self, other: "TermSet") -> "TermSet":
        return TermSet(self.mask & other.mask)

    def __sub__(self, other: "TermSet") -> "TermSet":
        return TermSet(self.mask & ~other.mask)

    def issubset(self, other: "TermSet") -> bool:
        return self.mask & ~other.mask == 0

    def isdisjoint(self, other: "TermSet") -> bool:
        return self.mask & other.mask == 0

    def contains(self, index: int) -> bool:
        return bool(self.mask >> index & 1)

    def add(self, index: int) -> "TermSet":
        return TermSet(self.mask | 1 << index)

    def sort_key(self) -> tuple[int, ...]:
        """Lexicographic key under the fixed variable ordering."""
        return self.indices()


EMPTY_TERM = TermSet(0)


@dataclass(frozen=True)
class VariableUniverse:
    """An ordered collection of distinct ground-variable labels."""

    names: tuple[str, ...]

    def __post_init__(self):
        if not self.names:
            raise ValueError("universe needs at least one variable")
        seen = set()
        for name in self.names:
            if not name or any(ch in name for ch in "{},; "):
                raise ValueError(f"illegal variable label: {name!r}")
            if name in seen:
                raise ValueError(f"duplicate variable label: {name!r}")
            seen.add(name)
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.names)})

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise EncodingError(f"unknown variable label: {label!r}") from None

    def term(self, *labels: str) -> TermSet:
        return TermSet.of(self.index(l) for l in labels)

    def full_term(self) -> TermSet:
        return TermSet((1 << self.size) - 1)

    def format_term(self, t: TermSet) -> str:
        if t.mask >> self.size:
            raise EncodingError("term set indexes outside the universe")
        return "{" + ",".join(self.names[i] for i in t.indices()) + "}"

    def parse_term(self, text: str) -> TermSet:
        text = text.strip()
        if not (text.startswith("{") and text.endswith("}")):
            raise EncodingError(f"term set must be brace-delimited: {text!r}")
        body = text[1:-1].strip()
        if not body:
            return EMPTY_TERM
        return self.term(*(part.strip() for part in body.split(",")))


def make_universe(labels: Sequence[str]) -> VariableUniverse:
    return VariableUniverse(tuple(labels))


def _normalize_entropy(entropy) -> tuple[tuple[TermSet, Fraction], ...]:
    acc: dict[TermSet, Fraction] = {}
    items = entropy.items() if isinstance(entropy, Mapping) else entropy
    for term, coeff in items:
        coeff = Fraction(coeff)
        if term.is_empty or coeff == 0:
            # H() is identically zero; the coefficient contributes nothing.
            continue
        acc[term] = acc.get(term, Fraction(0)) + coeff
    pairs = [(t, c) for t, c in acc.items() if c != 0]
    pairs.sort(key=lambda tc: tc[0].sort_key())
    return tuple(pairs)


def _normalize_scalars(scalars) -> tuple[tuple[str, Fraction], ...]:
    acc: dict[str, Fraction] = {}
    items = scalars.items() if isinstance(scalars, Mapping) else scalars
    for name, coeff in items:
        if name not in SCALARS:
            raise ValueError(f"unknown scalar: {name!r}")
        coeff = Fraction(coeff)
        acc[name] = acc.get(name, Fraction(0)) + coeff
    return tuple((s, acc[s]) for s in SCALARS if s in acc and acc[s] != 0)


@dataclass(frozen=True)
class LinearForm:
    """A rational linear combination of entropy terms, rate scalars, and a
    constant, in canonical sparse form (no zero coefficients stored)."""

    entropy: tuple[tuple[TermSet, Fraction], ...]
    scalars: tuple[tuple[str, Fraction], ...]
    constant: Fraction
    relation: str

    def entropy_dict(self) -> dict[TermSet, Fraction]:
        return dict(self.entropy)

    def scalar_dict(self) -> dict[str, Fraction]:
        return dict(self.scalars)

    def coefficient(self, term: TermSet) -> Fraction:
        for t, c in self.entropy:
            if t == term:
                return c
        return Fraction(0)

    def terms(self) -> tuple[TermSet, ...]:
        return tuple(t for t, _ in self.entropy)

    def scaled(self, factor) -> "LinearForm":
        factor = Fraction(factor)
        return LinearForm(
            _normalize_entropy((t, c * factor) for t, c in self.entropy),
            _normalize_scalars((s, c * factor) for s, c in self.scalars),
            self.constant * factor,
            self.relation,
        )

    def plus(self, other: "LinearForm", relation: str | None = None) -> "LinearForm":
        return linear_form(
            list(self.entropy) + list(other.entropy),
            list(self.scalars) + list(other.scalars),
            self.constant + other.constant,
            relation or self.relation,
        )

    def evaluate(self, assignment, rates: Mapping[str, Fraction] | None = None,
                 universe: VariableUniverse | None = None) -> Fraction:
        """Exact value of the form under a term assignment and rate values.

        `assignment` is a mapping TermSet -> rational or a callable; the empty
        term is always treated as zero.
        """
        lookup: Callable[[TermSet], Fraction]
        if callable(assignment):
            lookup = assignment
        else:
            def lookup(term, _table=assignment):
                if term not in _table:
                    shown = universe.format_term(term) if universe else str(term.indices())
                    raise EvaluationError(f"no value assigned to term {shown}")
                return _table[term]
        total = Fraction(self.constant)
        for term, coeff in self.entropy:
            total += coeff * Fraction(lookup(term))
        for name, coeff in self.scalars:
            if rates is None or name not in rates:
                raise EvaluationError(f"no value assigned to rate {name!r}")
            total += coeff * Fraction(rates[name])
        return total

    def encode(self, universe: VariableUniverse) -> str:
        parts = [f"{format_rational(c)} {universe.format_term(t)}" for t, c in self.entropy]
        parts += [f"{format_rational(c)} {s}" for s, c in self.scalars]
        if self.constant != 0 or not parts:
            parts.append(format_rational(self.constant))
        return " + ".join(parts) + _REL_SUFFIX[self.relation]


def linear_form(entropy=(), scalars=(), constant=0, relation=GE) -> LinearForm:
    if relation not in RELATIONS:
        raise ValueError(f"unknown relation: {relation!r}")
    return LinearForm(_normalize_entropy(entropy), _normalize_scalars(scalars),
                      Fraction(constant), relation)


def parse_linear_form(text: str, universe: VariableUniverse) -> LinearForm:
    text = text.strip()
    relation = OBJECTIVE
    for rel, suffix in ((GE, ">= 0"), (EQ, "== 0")):
        if text.endswith(suffix):
            relation = rel
            text = text[: -len(suffix)].strip()
            break
    entropy: list[tuple[TermSet, Fraction]] = []
    scalars: list[tuple[str, Fraction]] = []
    constant = Fraction(0)
    for token in text.split(" + "):
        token = token.strip()
        if not token:
            raise EncodingError("empty token in linear form")
        pieces = token.split(None, 1)
        coeff = parse_rational(pieces[0])
        if len(pieces) == 1:
            constant += coeff
        elif pieces[1] in SCALARS:
            scalars.append((pieces[1], coeff))
        else:
            entropy.append((universe.parse_term(pieces[1]), coeff))
    return linear_form(entropy, scalars, constant, relation)


Permutation = tuple[int, ...]


def apply_permutation(t: TermSet, perm: Permutation) -> TermSet:
    """Image of a term set under an index permutation."""
    m = 0
    mask = t.mask
    i = 0
    while mask:
        if mask & 1:
            m |= 1 << perm[i]
        mask >>= 1
        i += 1
    return TermSet(m)


def _compose(p: Permutation, q: Permutation) -> Permutation:
    # (p after q): i -> p[q[i]]
    return tuple(p[q[i]] for i in range(len(p)))


@dataclass
class SymmetryGroup:
    """An explicit permutation group on universe indices, identity included."""

    perms: tuple[Permutation, ...]
    _canon: dict[int, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.perms:
            raise ValueError("group must contain the identity")
        degree = len(self.perms[0])
        for p in self.perms:
            if len(p) != degree or sorted(p) != list(range(degree)):
                raise ValueError(f"not a permutation of 0..{degree - 1}: {p}")

    @property
    def degree(self) -> int:
        return len(self.perms[0])

    def __len__(self) -> int:
        return len(self.perms)

    @classmethod
    def trivial(cls, degree: int) -> "SymmetryGroup":
        return cls((tuple(range(degree)),))

    @classmethod
    def from_generators(cls, generators: Sequence[Permutation], degree: int,
                        max_order: int = 1_000_000) -> "SymmetryGroup":
        identity = tuple(range(degree))
        seen = {identity}
        frontier = [identity]
        gens = [tuple(g) for g in generators]
        while frontier:
            nxt = []
            for p in frontier:
                for g in gens:
                    q = _compose(g, p)
                    if q not in seen:
                        if len(seen) >= max_order:
                            raise ValueError("symmetry group closure too large")
                        seen.add(q)
                        nxt.append(q)
            frontier = nxt
        return cls(tuple(sorted(seen)))

    def is_closed(self) -> bool:
        table = set(self.perms)
        return all(_compose(p, q) in table for p in self.perms for q in self.perms)

    def orbit(self, t: TermSet) -> list[TermSet]:
        return sorted({apply_permutation(t, p) for p in self.perms},
                      key=TermSet.sort_key)

    def canonicalize(self, t: TermSet) -> TermSet:
        """Lexicographically smallest orbit element under the variable order."""
        cached = self._canon.get(t.mask)
        if cached is not None:
            return TermSet(cached)
        orbit = self.orbit(t)
        best = orbit[0]
        for member in orbit:
            self._canon[member.mask] = best.mask
        return best

    def canonical_form(self, f: LinearForm) -> LinearForm:
        return linear_form(
            ((self.canonicalize(t), c) for t, c in f.entropy),
            f.scalars, f.constant, f.relation,
        )


def canonicalize(t: TermSet, group: SymmetryGroup) -> TermSet:
    return group.canonicalize(t)

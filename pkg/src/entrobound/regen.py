"""The (n, k=n-1, d=n-1) regenerating-code problem family.

Builds the problem constraints in either the full representation (stored
contents W_i plus repair messages S_i_j) or the reduced representation (repair
messages only), the node-permutation symmetry group, the canonical layered
code's counting-based entropy oracle, and its achieved tradeoff points.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

from .problemfile import Problem
from .terms import (ALPHA, BETA, EQ, GE, Permutation, SymmetryGroup, TermSet,
                    VariableUniverse, linear_form, make_universe)

REDUCED = "reduced"
FULL = "full"


def reduced_labels(n: int) -> list[str]:
    return [f"S_{i}_{j}" for i in range(1, n + 1) for j in range(1, n + 1) if j != i]


def full_labels(n: int) -> list[str]:
    return [f"W_{i}" for i in range(1, n + 1)] + reduced_labels(n)


def reduced_universe(n: int) -> VariableUniverse:
    return make_universe(reduced_labels(n))


def full_universe(n: int) -> VariableUniverse:
    return make_universe(full_labels(n))


@dataclass(frozen=True)
class RegenSpec:
    """A built problem instance: universe plus the problem constraints."""

    n: int
    representation: str
    universe: VariableUniverse
    constraints: tuple[tuple[str, "LinearForm"], ...]

    def to_problem(self, include_symmetry: bool = True) -> Problem:
        generators: tuple[Permutation, ...] = ()
        if include_symmetry and self.n >= 2:
            generators = tuple(_node_generators(self.n, self.representation))
        return Problem(f"regen-n{self.n}-{self.representation}", self.universe,
                       self.constraints, generators)


def _outgoing(u: VariableUniverse, n: int, i: int) -> TermSet:
    return u.term(*(f"S_{i}_{j}" for j in range(1, n + 1) if j != i))


def _incoming(u: VariableUniverse, n: int, j: int) -> TermSet:
    return u.term(*(f"S_{i}_{j}" for i in range(1, n + 1) if i != j))


def build_regen(n: int, representation: str = REDUCED) -> RegenSpec:
    """Problem constraints for an n-node instance with k = d = n-1.

    Reduced representation: per-node repair determinism (a node's outgoing
    messages are a function of its incoming ones), reconstruction of the unit
    message from any n-1 nodes, storage rate alpha per node, and download
    rate beta per repair message.
    """
    if n < 3:
        raise ValueError(f"need n >= 3 nodes, got {n}")
    if representation not in (REDUCED, FULL):
        raise ValueError(f"unknown representation: {representation!r}")
    nodes = range(1, n + 1)
    rows: list[tuple[str, "LinearForm"]] = []
    if representation == REDUCED:
        u = reduced_universe(n)
        for j in nodes:
            inc = _incoming(u, n, j)
            rows.append((f"repair_{j}", linear_form(
                [(_outgoing(u, n, j) | inc, 1), (inc, -1)], relation=EQ)))
        for m in nodes:
            joined = TermSet(0)
            for i in nodes:
                if i != m:
                    joined = joined | _outgoing(u, n, i)
            rows.append((f"recon_without_{m}",
                         linear_form([(joined, 1)], constant=-1, relation=GE)))
        for i in nodes:
            rows.append((f"storage_{i}", linear_form(
                [(_outgoing(u, n, i), -1)], [(ALPHA, 1)], relation=GE)))
        for i in nodes:
            for j in nodes:
                if j != i:
                    rows.append((f"download_{i}_{j}", linear_form(
                        [(u.term(f"S_{i}_{j}"), -1)], [(BETA, 1)], relation=GE)))
    else:
        u = full_universe(n)
        for i in nodes:
            w = u.term(f"W_{i}")
            rows.append((f"helper_gen_{i}", linear_form(
                [(w | _outgoing(u, n, i), 1), (w, -1)], relation=EQ)))
        for j in nodes:
            inc = _incoming(u, n, j)
            rows.append((f"repair_{j}", linear_form(
                [(u.term(f"W_{j}") | inc, 1), (inc, -1)], relation=EQ)))
        for i in nodes:
            rows.append((f"storage_{i}", linear_form(
                [(u.term(f"W_{i}"), -1)], [(ALPHA, 1)], relation=GE)))
        for i in nodes:
            for j in nodes:
                if j != i:
                    rows.append((f"download_{i}_{j}", linear_form(
                        [(u.term(f"S_{i}_{j}"), -1)], [(BETA, 1)], relation=GE)))
        for m in nodes:
            stored = u.term(*(f"W_{i}" for i in nodes if i != m))
            rows.append((f"recon_without_{m}",
                         linear_form([(stored, 1)], constant=-1, relation=GE)))
    return RegenSpec(n, representation, u, tuple(rows))


def _node_permutation_to_indices(n: int, representation: str,
                                 node_map: dict[int, int]) -> Permutation:
    if representation == REDUCED:
        labels = reduced_labels(n)
    else:
        labels = full_labels(n)
    index = {lab: k for k, lab in enumerate(labels)}
    out = []
    for lab in labels:
        if lab.startswith("W_"):
            i = int(lab[2:])
            out.append(index[f"W_{node_map[i]}"])
        else:
            _, i, j = lab.split("_")
            out.append(index[f"S_{node_map[int(i)]}_{node_map[int(j)]}"])
    return tuple(out)


def _node_generators(n: int, representation: str) -> list[Permutation]:
    swap = {i: i for i in range(1, n + 1)}
    swap[1], swap[2] = 2, 1
    cycle = {i: i % n + 1 for i in range(1, n + 1)}
    return [_node_permutation_to_indices(n, representation, swap),
            _node_permutation_to_indices(n, representation, cycle)]


def regen_symmetry(n: int, representation: str = REDUCED) -> SymmetryGroup:
    """All n! node permutations acting on message (and content) labels."""
    if n < 3:
        raise ValueError(f"need n >= 3 nodes, got {n}")
    perms = []
    for image in itertools.permutations(range(1, n + 1)):
        node_map = {i + 1: image[i] for i in range(n)}
        perms.append(_node_permutation_to_indices(n, representation, node_map))
    group = SymmetryGroup(tuple(sorted(perms)))
    assert len(group) == factorial(n)
    return group


@dataclass
class LayeredOracle:
    """Exact entropies of the canonical layered code, by symbol counting.

    Parameter r picks the code: every r-subset of nodes carries one parity
    group of r symbols with rank r-1, for M = C(n,r)*(r-1) message symbols in
    total.  The repair message S_i_j references, in every parity group shared
    by nodes i and j, the symbol stored at node i.  The entropy of a term set
    is the summed per-group rank min(symbols referenced, r-1), normalized
    by M.
    """

    n: int
    r: int
    universe: VariableUniverse = None  # type: ignore[assignment]
    _symbols: list[list[tuple[int, int]]] = field(default_factory=list, repr=False)
    _cache: dict[int, Fraction] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not 2 <= self.r <= self.n:
            raise ValueError(f"need 2 <= r <= n, got r={self.r}, n={self.n}")
        if self.universe is None:
            self.universe = reduced_universe(self.n)
        groups = list(itertools.combinations(range(1, self.n + 1), self.r))
        group_pos = [{node: pos for pos, node in enumerate(g)} for g in groups]
        self._symbols = []
        for label in self.universe.names:
            _, i, j = label.split("_")
            i, j = int(i), int(j)
            refs = []
            for gid, g in enumerate(groups):
                pos = group_pos[gid]
                if i in pos and j in pos:
                    refs.append((gid, 1 << pos[i]))
            self._symbols.append(refs)
        self._n_groups = len(groups)

    @property
    def message_size(self) -> int:
        return comb(self.n, self.r) * (self.r - 1)

    def raw_count(self, t: TermSet) -> int:
        """Unnormalized entropy: summed per-group ranks."""
        if t.mask >> self.universe.size:
            raise ValueError("term set indexes outside the oracle universe")
        covered = {}
        mask = t.mask
        v = 0
        while mask:
            if mask & 1:
                for gid, bit in self._symbols[v]:
                    covered[gid] = covered.get(gid, 0) | bit
            mask >>= 1
            v += 1
        cap = self.r - 1
        return sum(min(bits.bit_count(), cap) for bits in covered.values())

    def eval(self, t: TermSet) -> Fraction:
        got = self._cache.get(t.mask)
        if got is None:
            got = Fraction(self.raw_count(t), self.message_size)
            self._cache[t.mask] = got
        return got


def layered_entropy(oracle: LayeredOracle, t: TermSet) -> Fraction:
    return oracle.eval(t)


def inner_bound_points(n: int) -> list[tuple[Fraction, Fraction]]:
    """Achieved (alpha, beta) pairs of the layered code, r = 2..n."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return [(Fraction(r, n * (r - 1)), Fraction(r, n * (n - 1)))
            for r in range(2, n + 1)]

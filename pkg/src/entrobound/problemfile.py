"""Generic problem files: variables, constraints, and optional symmetry.

The file is line-oriented structured text; certificates pin its exact bytes
via a SHA-256 digest, so formatting here is a bit-exact contract.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

from .terms import (EQ, GE, EncodingError, LinearForm, Permutation,
                    SymmetryGroup, VariableUniverse, make_universe,
                    parse_linear_form)

FORMAT_LINE = "problem-format: 1"


@dataclass(frozen=True)
class Problem:
    """A posed entropy-LP problem: universe, named constraints, symmetry."""

    name: str
    universe: VariableUniverse
    constraints: tuple[tuple[str, LinearForm], ...]
    symmetry_generators: tuple[Permutation, ...] = ()

    def __post_init__(self):
        for cname, form in self.constraints:
            if form.relation not in (GE, EQ):
                raise ValueError(f"constraint {cname!r} must be >= 0 or == 0")

    def symmetry_group(self) -> SymmetryGroup:
        if not self.symmetry_generators:
            return SymmetryGroup.trivial(self.universe.size)
        return SymmetryGroup.from_generators(self.symmetry_generators,
                                             self.universe.size)

    def constraint_terms(self):
        out: dict = {}
        for _, form in self.constraints:
            for t, _ in form.entropy:
                out[t] = None
        return list(out)


def format_problem(problem: Problem) -> str:
    lines = [FORMAT_LINE, f"name: {problem.name}"]
    lines.append("variables: " + ",".join(problem.universe.names))
    lines.append("objective-scalars: alpha,beta")
    for cname, form in problem.constraints:
        lines.append(f"constraint {cname}: {form.encode(problem.universe)}")
    for perm in problem.symmetry_generators:
        mapping = ",".join(f"{problem.universe.names[i]}->{problem.universe.names[perm[i]]}"
                           for i in range(len(perm)))
        lines.append(f"symmetry-generator: {mapping}")
    return "\n".join(lines) + "\n"


def parse_problem(text: str) -> Problem:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0].strip() != FORMAT_LINE:
        raise EncodingError("missing problem-format header")
    name = "unnamed"
    universe: VariableUniverse | None = None
    constraints: list[tuple[str, LinearForm]] = []
    generators: list[Permutation] = []
    for line in lines[1:]:
        key, _, rest = line.partition(":")
        key, rest = key.strip(), rest.strip()
        if key == "name":
            name = rest
        elif key == "variables":
            universe = make_universe([v.strip() for v in rest.split(",")])
        elif key == "objective-scalars":
            if [s.strip() for s in rest.split(",")] != ["alpha", "beta"]:
                raise EncodingError(f"unsupported objective scalars: {rest!r}")
        elif key.startswith("constraint "):
            if universe is None:
                raise EncodingError("constraint before variables line")
            constraints.append((key[len("constraint "):].strip(),
                                parse_linear_form(rest, universe)))
        elif key == "symmetry-generator":
            if universe is None:
                raise EncodingError("symmetry generator before variables line")
            perm = [-1] * universe.size
            for pair in rest.split(","):
                src, _, dst = pair.partition("->")
                perm[universe.index(src.strip())] = universe.index(dst.strip())
            if sorted(perm) != list(range(universe.size)):
                raise EncodingError("symmetry generator is not a bijection")
            generators.append(tuple(perm))
        else:
            raise EncodingError(f"unknown problem line: {line!r}")
    if universe is None:
        raise EncodingError("problem file has no variables line")
    return Problem(name, universe, tuple(constraints), tuple(generators))


def problem_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()

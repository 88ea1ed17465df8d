"""Episodic maximin search over inequality subsets.

Each episode grows a pool of joint-entropy terms, samples a bounded set of
candidate inequalities (optionally restricted to those holding with equality
under a candidate-optimal code), solves the relaxed LP exactly, and carries
the dual-effective inequalities forward as evidence.  The subset size cap
doubles when the best bound stagnates.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import lp as lpmod
from .inequalities import (BOOTSTRAP, CMI as CMI_KIND, EVIDENCE, GROWN,
                           InequalitySpec, TermPool, _tight as _spec_tight,
                           cmi, expand, filter_by_oracle, grow_pool)
from .problemfile import Problem
from .terms import EQ, SymmetryGroup, TermSet


@dataclass(frozen=True)
class SearchConfig:
    kappa_init: int = 64
    kappa_max: int = 8192
    max_episodes: int = 200
    growth_rounds: int = 8
    pairs_per_round: int = 64
    walks_per_round: int = 8
    det_samples: int = 6
    max_pool: int = 2048
    stagnation: int = 5
    seed: int = 1
    filter_oracles: tuple = ()        # LayeredOracle-likes; specs must be tight under all
    symmetry: bool = False
    # Steer episodes with a floating-point solve and only run the exact
    # solver when the float value beats the certified best.  Exact solving
    # dominates episode time on large instances; the reported best bound
    # and certificate always come from an exact solve either way.
    float_steer: bool = False
    # Deterministic work budget for one exact solve; an episode whose LP
    # exceeds it is skipped (heavily degenerate restrictions can otherwise
    # pivot for hours).  None means unlimited.
    max_pivots: int | None = 20000

    def __post_init__(self):
        if self.kappa_init > self.kappa_max:
            raise ValueError("kappa_init must not exceed kappa_max")
        if min(self.kappa_max, self.max_episodes, self.growth_rounds,
               self.max_pool, self.stagnation, self.pairs_per_round,
               self.walks_per_round, self.det_samples) <= 0:
            raise ValueError("all search counts must be positive")
        if self.max_pivots is not None and self.max_pivots <= 0:
            raise ValueError("max_pivots must be positive or None")


@dataclass
class SpecStats:
    first_episode: int
    last_effective: int
    max_weight: Fraction


@dataclass
class Evidence:
    """Dual-effective inequalities carried between episodes."""

    specs: dict[InequalitySpec, SpecStats] = field(default_factory=dict)
    best_bound: Fraction | None = None
    best_certificate: lpmod.ProofCertificate | None = None

    def terms(self) -> list[TermSet]:
        out: dict[TermSet, None] = {}
        for spec in self.specs:
            for t, _ in expand(spec).entropy:
                out.setdefault(t, None)
        return list(out)


@dataclass
class EpisodeStats:
    episode: int
    value: Fraction
    ip_size: int
    effective_size: int
    kappa: int
    pool_size: int
    wall_time: float
    improved: bool


class SearchError(RuntimeError):
    pass


def _sample_candidates(candidates, kappa: int, evidence_terms: set[TermSet],
                       rng: random.Random) -> list[InequalitySpec]:
    """Weighted sample without replacement, deterministic for a fixed rng.

    Candidates touching evidence terms get 3x weight.  Monotonicity
    candidates vastly outnumber mutual-information ones on large universes
    (one per pool term and outside variable), while the mutual-information
    splits carry the chain structure proofs are built from, and a chain
    with one missing link contributes nothing.  So when every
    mutual-information candidate fits in the budget they are all kept and
    only the monotonicity specs are subsampled; otherwise both kinds are
    weighted to parity.
    """
    if kappa <= 0 or not candidates:
        return []
    if len(candidates) <= kappa:
        return list(candidates)
    cmis = [s for s in candidates if s.kind == CMI_KIND]
    monos = [s for s in candidates if s.kind != CMI_KIND]

    def weighted_keys(specs, base):
        keyed = []
        for spec in specs:
            w = base
            if any(t in evidence_terms for t, _ in expand(spec).entropy):
                w *= 3.0
            keyed.append((rng.random() ** (1.0 / w), spec))
        keyed.sort(key=lambda kv: -kv[0])
        return keyed

    if cmis and len(cmis) <= kappa:
        picked = list(cmis)
        keyed = weighted_keys(monos, 1.0)
        picked.extend(spec for _, spec in keyed[:kappa - len(picked)])
        return picked
    cmi_weight = max(1.0, len(monos) / len(cmis)) if cmis else 1.0
    keyed = weighted_keys(cmis, cmi_weight) + weighted_keys(monos, 1.0)
    keyed.sort(key=lambda kv: -kv[0])
    return [spec for _, spec in keyed[:kappa]]


def _oracle_filter(specs, oracles):
    for oracle in oracles:
        specs = filter_by_oracle(specs, oracle)
    return specs


def _nested_equalities(problem: Problem) -> list[tuple[TermSet, TermSet]]:
    """Equality constraints of the shape H(T1) - H(T2) = 0 with T2 inside T1.

    Such a constraint says T1 \\ T2 is determined by T2 (repair-style
    determinism); the pairs feed the targeted candidate emission below.
    """
    nested = []
    for _, form in problem.constraints:
        if form.relation != EQ or len(form.entropy) != 2 or form.scalars:
            continue
        (ta, ca), (tb, cb) = form.entropy
        if ca == 1 and cb == -1 and tb.issubset(ta):
            nested.append((ta, tb))
        elif cb == 1 and ca == -1 and ta.issubset(tb):
            nested.append((tb, ta))
    return nested


def _determinism_candidates(nested, pool: TermPool, rng: random.Random,
                            max_pool: int, samples_per_pair: int = 6,
                            oracles=()) -> list[InequalitySpec]:
    """Candidates that let equality constraints act inside union chains.

    For an equality H(T1) = H(T2) with T2 inside T1, an accumulated term A
    is completed to cover T2 with singleton splits, then paired against T1;
    the resulting split I(T1\\A'; A'\\T1 | T1^A') plus the equality removes
    the determined part T1\\T2 from the chain at no entropy cost.  Random
    pair sampling essentially never produces these completions.
    """
    out: dict[InequalitySpec, None] = {}
    members = pool.members()
    if not members or not nested:
        return []
    for t1, t2 in nested:
        for _ in range(samples_per_pair):
            acc = members[rng.randrange(len(members))]
            if t1.issubset(acc):
                continue
            for x in sorted((t2 - acc).indices()):
                xs = TermSet.of([x])
                if not acc.issubset(xs):
                    spec = cmi(acc - xs, xs - acc, acc & xs)
                    if oracles and not _spec_tight(spec, oracles):
                        continue
                    out[spec] = None
                acc = acc | xs
                if len(pool) < max_pool:
                    pool.add(acc, GROWN)
            if not t1.issubset(acc) and not acc.issubset(t1):
                spec = cmi(t1 - acc, acc - t1, t1 & acc)
                if not oracles or _spec_tight(spec, oracles):
                    out[spec] = None
            if len(pool) < max_pool:
                pool.add(acc | t1, GROWN)
    return list(out)


def bootstrap_pool(problem: Problem, evidence: Evidence) -> TermPool:
    # The pool is never symmetry-collapsed: distinct members of one orbit
    # must stay samplable as different arguments of a single candidate
    # inequality.  Symmetry only collapses rows at LP assembly time.
    pool = TermPool()
    for t in problem.constraint_terms():
        pool.add(t, BOOTSTRAP)
    for t in evidence.terms():
        pool.add(t, EVIDENCE)
    return pool


def run_episode(problem: Problem, eta, pool: TermPool, evidence: Evidence,
                kappa: int, rng: random.Random, episode: int = 0,
                config: SearchConfig = SearchConfig(),
                symmetry: SymmetryGroup | None = None,
                problem_text: str | None = None):
    """One search episode.

    Returns (value, SolveResult, AssembledLP, pool, evidence, EpisodeStats).
    """
    t0 = time.monotonic()
    pool, candidates = grow_pool(pool, config.growth_rounds, config.max_pool,
                                 rng, config.pairs_per_round,
                                 config.walks_per_round,
                                 oracles=config.filter_oracles)
    extra = _determinism_candidates(_nested_equalities(problem), pool, rng,
                                    config.max_pool, config.det_samples,
                                    oracles=config.filter_oracles)
    seen = set(candidates)
    candidates.extend(s for s in extra if s not in seen)
    if config.filter_oracles:
        candidates = _oracle_filter(candidates, config.filter_oracles)
    candidates = [s for s in candidates if s not in evidence.specs]
    evidence_terms = set(evidence.terms())
    sampled = _sample_candidates(candidates, kappa, evidence_terms, rng)
    ip = list(evidence.specs) + sampled
    assembled = lpmod.assemble(ip, problem, eta, symmetry=symmetry,
                               problem_text=problem_text)
    result = None
    if config.float_steer:
        approx = lpmod.solve_float(assembled)
        if approx is not None:
            value_f, duals_f = approx
            best = evidence.best_bound
            if best is not None and value_f <= float(best) + 1e-7:
                # No improvement at float precision: keep the steering
                # duals for evidence but skip the exact solve.  The value
                # is approximate and must never update the best bound.
                result = lpmod.SolveResult(
                    "steered", Fraction(value_f).limit_denominator(10**9),
                    {i: Fraction(w) for i, w in duals_f.items()}, {}, {})
    if result is None:
        result = lpmod.solve(assembled, max_pivots=config.max_pivots)
    if result.status not in ("optimal", "steered"):
        raise SearchError(
            f"episode LP is {result.status}; the problem constraints are "
            "contradictory")
    effective = lpmod.effective_set(result, assembled)
    weights = {assembled.rows[i].spec: w for i, w in result.duals.items()
               if assembled.rows[i].origin == lpmod.ORIGIN_SHANNON}
    # Retain evidence that was effective within the stagnation window.
    kept: dict[InequalitySpec, SpecStats] = {}
    for spec in effective:
        stats = evidence.specs.get(spec)
        w = abs(weights[spec])
        if stats is None:
            kept[spec] = SpecStats(episode, episode, w)
        else:
            kept[spec] = SpecStats(stats.first_episode, episode,
                                   max(stats.max_weight, w))
    for spec, stats in evidence.specs.items():
        if spec not in kept and episode - stats.last_effective < config.stagnation:
            kept[spec] = stats
    evidence.specs = kept
    improved = (result.status == "optimal" and
                (evidence.best_bound is None or result.value > evidence.best_bound))
    if improved:
        evidence.best_bound = result.value
        evidence.best_certificate = lpmod.make_certificate(result, assembled)
    for t in evidence_terms:
        pool.add(t, EVIDENCE)
    stats = EpisodeStats(episode, result.value, len(ip), len(effective), kappa,
                         len(pool), time.monotonic() - t0, improved)
    return result.value, result, assembled, pool, evidence, stats


@dataclass
class SearchOutcome:
    bound: Fraction
    certificate: lpmod.ProofCertificate
    stats: list[EpisodeStats]
    evidence: Evidence


def run_search(problem: Problem | str, eta, config: SearchConfig,
               evidence: Evidence | None = None,
               stop_at: Fraction | None = None) -> SearchOutcome:
    """Run episodes with evidence carry-over and a doubling kappa schedule.

    The best bound is non-decreasing across episodes; the returned
    certificate has been independently verified.  When `stop_at` is given,
    the search returns as soon as the best bound reaches it (any returned
    bound is valid regardless, so callers with a known target can save the
    remaining episodes).
    """
    if isinstance(problem, str):
        problem_text = problem
        problem = lpmod.parse_problem(problem_text)
    else:
        from .problemfile import format_problem
        problem_text = format_problem(problem)
    eta = Fraction(eta)
    rng = random.Random(config.seed)
    symmetry = problem.symmetry_group() if config.symmetry else None
    if symmetry is not None and len(symmetry) == 1:
        symmetry = None
    evidence = evidence or Evidence()
    evidence.best_bound = None
    evidence.best_certificate = None
    pool = bootstrap_pool(problem, evidence)
    kappa = config.kappa_init
    since_improved = 0
    all_stats: list[EpisodeStats] = []
    for episode in range(config.max_episodes):
        try:
            (_, _, _, pool, evidence, stats) = run_episode(
                problem, eta, pool, evidence, kappa, rng, episode, config,
                symmetry, problem_text)
        except lpmod.UncertifiableError:
            continue
        all_stats.append(stats)
        if stop_at is not None and evidence.best_bound >= stop_at:
            break
        since_improved = 0 if stats.improved else since_improved + 1
        if since_improved >= config.stagnation and kappa < config.kappa_max:
            kappa = min(kappa * 2, config.kappa_max)
            since_improved = 0
            pool = bootstrap_pool(problem, evidence)
    if evidence.best_certificate is None:
        raise SearchError("no certifiable bound found")
    ok, diag = lpmod.verify_certificate(evidence.best_certificate, problem_text)
    if not ok:
        raise SearchError(f"best certificate failed verification: {diag}")
    return SearchOutcome(evidence.best_bound, evidence.best_certificate,
                         all_stats, evidence)


def sweep_eta(problem: Problem | str, etas, config: SearchConfig,
              warm_start: bool = True):
    """Independent searches along a list of eta values.

    Evidence specs (not their dual weights) are shared between adjacent eta
    values when warm_start is on.  Per-eta failures are reported in the
    result list and do not stop the sweep.
    """
    etas = [Fraction(e) for e in etas]
    if not etas:
        raise ValueError("empty eta list")
    if len(set(etas)) != len(etas):
        raise ValueError("eta values must be distinct")
    results = []
    carried: Evidence | None = None
    for idx, eta in enumerate(etas):
        cfg = replace(config, seed=config.seed * 1_000_003 + idx)
        evidence = None
        if warm_start and carried is not None:
            evidence = Evidence(specs={s: SpecStats(0, 0, st.max_weight)
                                       for s, st in carried.specs.items()})
        try:
            outcome = run_search(problem, eta, cfg, evidence=evidence)
        except SearchError as exc:
            results.append((eta, None, None, str(exc)))
            continue
        carried = outcome.evidence
        results.append((eta, outcome.bound, outcome.certificate, None))
    return results


def render_stats(stats: list[EpisodeStats]) -> str:
    header = "episode,value,ip_size,effective,kappa,pool,seconds,improved"
    rows = [header]
    for s in stats:
        rows.append(f"{s.episode},{s.value},{s.ip_size},{s.effective_size},"
                    f"{s.kappa},{s.pool_size},{s.wall_time:.3f},{int(s.improved)}")
    return "\n".join(rows) + "\n"

"""LP assembly, exact solving, dual extraction, and proof certificates.

Columns are lazily indexed joint-entropy terms (plus the two rate scalars);
rows are expanded Shannon inequalities, problem constraints, and baseline
nonnegativity rows.  Solving uses an optional floating-point pre-solve to
propose an active row set, then an exact rational row-generation loop: the
reported optimum, duals, and certificates are always exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from . import simplex
from .inequalities import InequalitySpec, encode_spec, expand, parse_spec
from .problemfile import Problem, parse_problem, problem_digest
from .terms import (ALPHA, BETA, EQ, GE, EncodingError, LinearForm,
                    SymmetryGroup, TermSet, format_rational, linear_form,
                    parse_linear_form, parse_rational)

try:
    import numpy as np
    from scipy.optimize import linprog
    from scipy.sparse import csr_matrix
    _HAVE_SCIPY = True
except ImportError:  # pragma: no cover
    _HAVE_SCIPY = False

ORIGIN_SHANNON = "shannon"
ORIGIN_PROBLEM = "problem"
ORIGIN_BASELINE = "baseline"


class AssemblyError(ValueError):
    pass


class UncertifiableError(RuntimeError):
    """An optimal solve could not be turned into a verifying certificate."""


@dataclass(frozen=True)
class LPRow:
    form: LinearForm
    origin: str                      # "shannon" | "problem <name>"
    spec: InequalitySpec | None = None


@dataclass
class AssembledLP:
    problem: Problem
    problem_text: str
    eta: Fraction
    symmetry: SymmetryGroup | None
    columns: dict[TermSet, int] = field(default_factory=dict)
    rows: list[LPRow] = field(default_factory=list)
    _row_index: dict[LinearForm, int] = field(default_factory=dict)

    @property
    def n_entropy_columns(self) -> int:
        return len(self.columns)

    @property
    def alpha_col(self) -> int:
        return len(self.columns)

    @property
    def beta_col(self) -> int:
        return len(self.columns) + 1

    def objective(self) -> LinearForm:
        return linear_form([], [(ALPHA, 1), (BETA, self.eta)], relation="obj")

    def _column(self, t: TermSet) -> int:
        got = self.columns.get(t)
        if got is None:
            got = len(self.columns)
            self.columns[t] = got
        return got

    def _canonical(self, form: LinearForm) -> LinearForm:
        return self.symmetry.canonical_form(form) if self.symmetry else form

    def add_row(self, form: LinearForm, origin: str,
                spec: InequalitySpec | None = None) -> int | None:
        """Add a constraint row; duplicate canonical forms are merged."""
        form = self._canonical(form)
        if form.relation not in (GE, EQ):
            raise AssemblyError("rows must be >= 0 or == 0 forms")
        existing = self._row_index.get(form)
        if existing is not None:
            return None
        for t, _ in form.entropy:
            if t.mask >> self.problem.universe.size:
                raise AssemblyError("row references terms outside the universe")
            self._column(t)
        idx = len(self.rows)
        self.rows.append(LPRow(form, origin, spec))
        self._row_index[form] = idx
        return idx

    def row_vector(self, form: LinearForm) -> dict[int, Fraction]:
        vec: dict[int, Fraction] = {}
        for t, c in form.entropy:
            vec[self.columns[t]] = c
        for s, c in form.scalars:
            vec[self.alpha_col if s == ALPHA else self.beta_col] = c
        return vec

    def baseline_forms(self) -> list[tuple[int, LinearForm]]:
        """Nonnegativity H(T) >= 0 per entropy column, then alpha, beta."""
        out = [(col, linear_form([(t, 1)], relation=GE))
               for t, col in self.columns.items()]
        out.append((self.alpha_col, linear_form([], [(ALPHA, 1)], relation=GE)))
        out.append((self.beta_col, linear_form([], [(BETA, 1)], relation=GE)))
        return out


def assemble(specs, problem: Problem | str, eta,
             symmetry: SymmetryGroup | None = None,
             problem_text: str | None = None) -> AssembledLP:
    """Build the LP for objective alpha + eta*beta from inequality specs plus
    the problem's own constraints."""
    eta = Fraction(eta)
    if eta < 0:
        raise AssemblyError("eta must be nonnegative")
    if isinstance(problem, str):
        problem_text = problem
        problem = parse_problem(problem_text)
    elif problem_text is None:
        from .problemfile import format_problem
        problem_text = format_problem(problem)
    lp = AssembledLP(problem, problem_text, eta, symmetry)
    for name, form in problem.constraints:
        lp.add_row(form, f"{ORIGIN_PROBLEM} {name}")
    for spec in specs:
        lp.add_row(expand(spec), ORIGIN_SHANNON, spec)
    return lp


@dataclass
class SolveResult:
    status: str
    value: Fraction | None
    duals: dict[int, Fraction]            # row index -> weight (zeros omitted)
    baseline_duals: dict[int, Fraction]   # column index -> weight
    primal: dict[int, Fraction]           # column index -> value (zeros omitted)


def _float_arrays(lp: AssembledLP, vectors):
    """scipy linprog arguments for the assembled LP plus row-index maps."""
    ncols = lp.n_entropy_columns + 2
    c = np.zeros(ncols)
    c[lp.alpha_col] = 1.0
    c[lp.beta_col] = float(lp.eta)
    ub_rows, eq_rows = [], []
    ub_data, eq_data = ([], [], []), ([], [], [])
    b_ub, b_eq = [], []
    for i, (vec, rhs, is_eq) in enumerate(vectors):
        if is_eq:
            r = len(b_eq)
            eq_rows.append(i)
            for j, v in vec.items():
                eq_data[0].append(float(v)); eq_data[1].append(r); eq_data[2].append(j)
            b_eq.append(float(rhs))
        else:
            r = len(b_ub)
            ub_rows.append(i)
            for j, v in vec.items():
                ub_data[0].append(-float(v)); ub_data[1].append(r); ub_data[2].append(j)
            b_ub.append(-float(rhs))
    kwargs = {}
    if b_ub:
        kwargs["A_ub"] = csr_matrix((ub_data[0], (ub_data[1], ub_data[2])),
                                    shape=(len(b_ub), ncols))
        kwargs["b_ub"] = np.array(b_ub)
    if b_eq:
        kwargs["A_eq"] = csr_matrix((eq_data[0], (eq_data[1], eq_data[2])),
                                    shape=(len(b_eq), ncols))
        kwargs["b_eq"] = np.array(b_eq)
    return c, kwargs, ub_rows, eq_rows


def solve_float(lp: AssembledLP, tol: float = 1e-9):
    """Floating-point optimum and dual support, for search steering only.

    Returns (value, {row_index: |dual weight|}) or None when the float
    solver is unavailable or fails.  The value is not certified; callers
    must re-solve exactly before reporting any bound built from it.
    """
    if not _HAVE_SCIPY:
        return None
    vectors = [(lp.row_vector(r.form), -r.form.constant, r.form.relation == EQ)
               for r in lp.rows]
    c, kwargs, ub_rows, eq_rows = _float_arrays(lp, vectors)
    try:
        res = linprog(c, bounds=(0, None), method="highs", **kwargs)
    except Exception:
        return None
    if not res.success:
        return None
    duals = {}
    if ub_rows:
        for r, i in enumerate(ub_rows):
            w = abs(res.ineqlin.marginals[r])
            if w > tol:
                duals[i] = w
    if eq_rows:
        for r, i in enumerate(eq_rows):
            w = abs(res.eqlin.marginals[r])
            if w > tol:
                duals[i] = w
    return float(res.fun), duals


def _float_active_set(lp: AssembledLP, vectors, tol: float = 1e-9) -> list[int]:
    """Rows flagged by a floating-point pre-solve as carrying dual weight."""
    if not _HAVE_SCIPY or not vectors:
        return [i for i, (_, _, is_eq) in enumerate(vectors) if is_eq]
    c, kwargs, ub_rows, eq_rows = _float_arrays(lp, vectors)
    try:
        res = linprog(c, bounds=(0, None), method="highs", **kwargs)
    except Exception:
        return [i for i, (_, _, is_eq) in enumerate(vectors) if is_eq]
    if not res.success:
        return [i for i, (_, _, is_eq) in enumerate(vectors) if is_eq]
    # Rows that are tight at the floating optimum (not merely the ones with
    # nonzero dual) make the exact restriction far more likely to pin the
    # true optimum in one shot on degenerate instances; but on heavily
    # degenerate LPs the tight set can be huge, so fall back to dual support.
    tight = list(eq_rows)
    support = list(eq_rows)
    if ub_rows:
        for r, i in enumerate(ub_rows):
            if abs(res.ineqlin.marginals[r]) > tol:
                tight.append(i)
                support.append(i)
            elif res.slack[r] < 1e-7:
                tight.append(i)
    if len(tight) <= 400:
        return sorted(tight)
    return sorted(support)


def solve(lp: AssembledLP, presolve: bool = True,
          max_pivots: int | None = None) -> SolveResult:
    """Exact optimum of the assembled LP.

    A floating pre-solve proposes the rows that matter; the exact simplex
    solves that restriction and violated rows are pulled in until the exact
    primal point satisfies every row.  Entropy columns and rates are
    nonnegative throughout, so the LP is never unbounded.

    `max_pivots` bounds the exact work per restricted solve (deterministic,
    unlike a wall clock); exceeding it raises UncertifiableError so callers
    can skip a pathologically degenerate instance instead of hanging.
    """
    vectors = [(lp.row_vector(r.form), -r.form.constant, r.form.relation == EQ)
               for r in lp.rows]
    ncols = lp.n_entropy_columns + 2
    objective = [Fraction(0)] * ncols
    objective[lp.alpha_col] = Fraction(1)
    objective[lp.beta_col] = Fraction(lp.eta)
    if presolve:
        active = _float_active_set(lp, vectors)
    else:
        active = [i for i, (_, _, is_eq) in enumerate(vectors) if is_eq]

    active_set = dict.fromkeys(active)
    for _ in range(len(vectors) + 2):
        act = list(active_set)
        used_cols: dict[int, None] = {}
        for i in act:
            for j in vectors[i][0]:
                used_cols.setdefault(j, None)
        used_cols.setdefault(lp.alpha_col, None)
        used_cols.setdefault(lp.beta_col, None)
        local = {j: k for k, j in enumerate(used_cols)}
        sub_rows = [({local[j]: v for j, v in vectors[i][0].items()},
                     vectors[i][1], vectors[i][2]) for i in act]
        sub_obj = [Fraction(0)] * len(local)
        for j, k in local.items():
            sub_obj[k] = objective[j]
        sol = simplex.solve_lp(sub_obj, sub_rows, max_pivots=max_pivots)
        if sol.status == simplex.STALLED:
            raise UncertifiableError(
                f"exact solve exceeded the pivot budget ({max_pivots})")
        if sol.status == simplex.INFEASIBLE:
            return SolveResult("infeasible", None, {}, {}, {})
        assert sol.status == simplex.OPTIMAL, "LP cannot be unbounded with x >= 0"
        x = {j: sol.x[k] for j, k in local.items() if sol.x[k] != 0}
        violated = []
        for i, (vec, rhs, is_eq) in enumerate(vectors):
            if i in active_set:
                continue
            val = sum((v * x[j] for j, v in vec.items() if j in x), Fraction(0))
            if val != rhs if is_eq else val < rhs:
                violated.append((abs(val - rhs), i))
        if violated:
            # pull in the worst offenders first; capping the wave keeps the
            # exact sub-LPs small on heavily degenerate instances
            violated.sort(key=lambda vi: (-vi[0], vi[1]))
            violated = [i for _, i in violated[:300]]
        if not violated:
            duals = {i: d for i, d in zip(act, sol.duals) if d != 0}
            baseline = {j: sol.reduced_costs[k]
                        for j, k in local.items() if sol.reduced_costs[k] != 0}
            return SolveResult("optimal", sol.value, duals, baseline, x)
        for i in violated:
            active_set[i] = None
    raise RuntimeError("row generation failed to converge")  # pragma: no cover


def effective_set(result: SolveResult, lp: AssembledLP) -> list[InequalitySpec]:
    """Shannon-origin rows with nonzero dual weight, heaviest first."""
    if result.status not in ("optimal", "steered"):
        raise ValueError("effective set needs a solved LP")
    weighted = [(abs(w), i) for i, w in result.duals.items()
                if lp.rows[i].origin == ORIGIN_SHANNON]
    weighted.sort(key=lambda t: (-t[0], t[1]))
    return [lp.rows[i].spec for _, i in weighted]


@dataclass(frozen=True)
class ProofCertificate:
    """A proved bound on alpha + eta*beta with exact dual weights."""

    problem_digest: str
    eta: Fraction
    bound: Fraction
    symmetric: bool
    lines: tuple[tuple[Fraction, str, str], ...]   # (weight, origin, encoding)

    def render(self) -> str:
        out = [
            "certificate-format: 1",
            f"problem-digest: {self.problem_digest}",
            f"eta: {format_rational(self.eta)}",
            f"bound: {format_rational(self.bound)}",
            f"symmetry: {'on' if self.symmetric else 'off'}",
        ]
        for weight, origin, encoding in self.lines:
            out.append(f"{format_rational(weight)} | {origin} | {encoding}")
        return "\n".join(out) + "\n"


def parse_certificate(text: str) -> ProofCertificate:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "certificate-format: 1":
        raise EncodingError("missing certificate-format header")
    header: dict[str, str] = {}
    body: list[tuple[Fraction, str, str]] = []
    for ln in lines[1:]:
        if "|" in ln:
            weight, origin, encoding = (p.strip() for p in ln.split("|", 2))
            body.append((parse_rational(weight), origin, encoding))
        else:
            key, _, rest = ln.partition(":")
            header[key.strip()] = rest.strip()
    try:
        return ProofCertificate(header["problem-digest"],
                                parse_rational(header["eta"]),
                                parse_rational(header["bound"]),
                                header.get("symmetry", "off") == "on",
                                tuple(body))
    except KeyError as exc:
        raise EncodingError(f"certificate missing header {exc}") from exc


def make_certificate(result: SolveResult, lp: AssembledLP) -> ProofCertificate:
    """Certificate lines are exactly the nonzero-weight rows of the solve."""
    if result.status != "optimal":
        raise ValueError("certificate needs an optimal solve")
    u = lp.problem.universe
    lines: list[tuple[Fraction, str, str]] = []
    for i in sorted(result.duals):
        row = lp.rows[i]
        if row.origin == ORIGIN_SHANNON:
            encoding = encode_spec(row.spec, u)
        else:
            encoding = row.form.encode(u)
        lines.append((result.duals[i], row.origin, encoding))
    for col, form in lp.baseline_forms():
        w = result.baseline_duals.get(col)
        if w:
            lines.append((w, ORIGIN_BASELINE, form.encode(u)))
    cert = ProofCertificate(problem_digest(lp.problem_text), lp.eta,
                            result.value, lp.symmetry is not None, tuple(lines))
    ok, diag = verify_certificate(cert, lp.problem_text)
    if not ok:
        raise UncertifiableError(f"certificate failed verification: {diag}")
    return cert


def _is_baseline_form(form: LinearForm) -> bool:
    if form.relation != GE or form.constant != 0:
        return False
    if form.entropy and not form.scalars:
        return len(form.entropy) == 1 and form.entropy[0][1] == 1
    if form.scalars and not form.entropy:
        return len(form.scalars) == 1 and form.scalars[0][1] == 1
    return False


def verify_certificate(cert: ProofCertificate | str, problem_text: str):
    """Independently check a certificate against its problem file.

    Re-expands every line from its textual encoding, checks weight signs and
    the exact weak-duality identity (weighted constraint vectors sum to the
    objective, weighted right-hand sides sum to the bound).  Shares nothing
    with the solver.  Returns (ok, diagnostic).
    """
    try:
        if isinstance(cert, str):
            cert = parse_certificate(cert)
        problem = parse_problem(problem_text)
    except EncodingError as exc:
        return False, str(exc)
    if cert.problem_digest != problem_digest(problem_text):
        return False, "problem digest mismatch"
    u = problem.universe
    group = problem.symmetry_group() if cert.symmetric else None

    def canon(form: LinearForm) -> LinearForm:
        return group.canonical_form(form) if group else form

    known_problem_forms = {canon(form): form.relation
                           for _, form in problem.constraints}
    total_entropy: dict[TermSet, Fraction] = {}
    total_scalars = {ALPHA: Fraction(0), BETA: Fraction(0)}
    total_rhs = Fraction(0)
    for k, (weight, origin, encoding) in enumerate(cert.lines):
        try:
            if origin == ORIGIN_SHANNON:
                form = canon(expand(parse_spec(encoding, u)))
                relation = GE
            elif origin.startswith(ORIGIN_PROBLEM):
                form = parse_linear_form(encoding, u)
                relation = known_problem_forms.get(canon(form))
                if relation is None:
                    return False, f"line {k}: not a constraint of this problem"
            elif origin == ORIGIN_BASELINE:
                form = parse_linear_form(encoding, u)
                if not _is_baseline_form(canon(form)):
                    return False, f"line {k}: not a baseline nonnegativity row"
                relation = GE
            else:
                return False, f"line {k}: unknown origin {origin!r}"
        except EncodingError as exc:
            return False, f"line {k}: {exc}"
        if relation == GE and weight < 0:
            return False, f"line {k}: negative weight on an inequality"
        for t, c in form.entropy:
            total_entropy[t] = total_entropy.get(t, Fraction(0)) + weight * c
        for s, c in form.scalars:
            total_scalars[s] += weight * c
        total_rhs += weight * -form.constant
    for t, c in total_entropy.items():
        if c != 0:
            return False, f"entropy term {u.format_term(t)} does not cancel ({c})"
    if total_scalars[ALPHA] != 1:
        return False, f"alpha coefficient is {total_scalars[ALPHA]}, expected 1"
    if total_scalars[BETA] != cert.eta:
        return False, f"beta coefficient is {total_scalars[BETA]}, expected eta"
    if total_rhs != cert.bound:
        return False, f"weighted right-hand sides give {total_rhs}, not the bound"
    return True, "ok"


def bound_in_rate_form(eta: Fraction, bound: Fraction) -> tuple[int, int, int]:
    """Clear denominators of alpha + eta*beta >= bound into integer form."""
    eta, bound = Fraction(eta), Fraction(bound)
    scale = lcm(eta.denominator, bound.denominator)
    a, b, c = scale, eta * scale, bound * scale
    from math import gcd
    g = gcd(gcd(int(a), int(b)), int(c)) or 1
    return int(a) // g, int(b) // g, int(c) // g

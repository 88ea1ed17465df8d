"""Converse-bound prover for entropy linear programs.

Computes information-theoretic outer bounds by episodic selection of small
Shannon-type inequality subsets, exact LP solving with dual-based evidence
carry-over, and equality filtering against candidate-optimal code
constructions; ships with the regenerating-code problem family and emits
independently verifiable exact proof certificates.
"""

__version__ = "0.1.0"

from .terms import (ALPHA, BETA, LinearForm, SymmetryGroup, TermSet,
                    VariableUniverse, apply_permutation, canonicalize,
                    linear_form, make_universe)
from .inequalities import (InequalitySpec, TermPool, cmi, count_elemental,
                           enumerate_elemental, expand, filter_by_oracle,
                           grow_pool, mono)
from .regen import (LayeredOracle, RegenSpec, build_regen, inner_bound_points,
                    layered_entropy, regen_symmetry)
from .problemfile import Problem, format_problem, parse_problem, problem_digest
from .lp import (AssembledLP, ProofCertificate, SolveResult, assemble,
                 effective_set, make_certificate, solve, verify_certificate)
from .search import Evidence, SearchConfig, run_episode, run_search, sweep_eta

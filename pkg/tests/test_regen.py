"""Tests for the storage-repair problem family and the layered-code oracle."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from entrobound.inequalities import enumerate_elemental, slack
from entrobound.regen import (LayeredOracle, build_regen, full_labels,
                              inner_bound_points, layered_entropy,
                              reduced_labels, reduced_universe,
                              regen_symmetry)
from entrobound.terms import ALPHA, BETA, EQ, GE, TermSet, apply_permutation


class TestProblemBuilder:
    def test_reduced_shape(self):
        spec = build_regen(3, "reduced")
        assert spec.universe.names == tuple(reduced_labels(3))
        assert spec.universe.size == 6
        names = [name for name, _ in spec.constraints]
        # n repair + n reconstruction + n storage + n(n-1) download
        assert len(names) == 3 + 3 + 3 + 6
        assert sum(n.startswith("repair_") for n in names) == 3
        assert sum(n.startswith("recon_without_") for n in names) == 3

    def test_full_shape(self):
        spec = build_regen(4, "full")
        assert spec.universe.names == tuple(full_labels(4))
        assert spec.universe.size == 4 + 12
        names = [name for name, _ in spec.constraints]
        assert sum(n.startswith("helper_gen_") for n in names) == 4
        assert len(names) == 4 + 4 + 4 + 12 + 4

    def test_relations_and_rates(self):
        spec = build_regen(3)
        by_name = dict(spec.constraints)
        assert by_name["repair_1"].relation == EQ
        assert by_name["recon_without_2"].relation == GE
        assert by_name["recon_without_2"].constant == -1
        assert by_name["storage_1"].scalar_dict() == {ALPHA: 1}
        assert by_name["download_1_2"].scalar_dict() == {BETA: 1}

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            build_regen(2)
        with pytest.raises(ValueError):
            build_regen(3, "compact")

    def test_to_problem_carries_symmetry(self):
        p = build_regen(3).to_problem()
        g = p.symmetry_group()
        assert len(g) == 6  # all node permutations from two generators
        assert len(build_regen(3).to_problem(include_symmetry=False)
                   .symmetry_group()) == 1


class TestSymmetryGroup:
    @pytest.mark.parametrize("n,rep", [(3, "reduced"), (3, "full"), (4, "reduced")])
    def test_group_order_and_constraint_invariance(self, n, rep):
        import math
        spec = build_regen(n, rep)
        g = regen_symmetry(n, rep)
        assert len(g) == math.factorial(n)
        assert g.is_closed()
        # the constraint set is invariant under every node permutation
        forms = {f.encode(spec.universe).split(": ")[-1] for _, f in spec.constraints}
        for p in g.perms:
            for _, f in spec.constraints:
                image = type(f)(
                    tuple(sorted(((apply_permutation(t, p), c) for t, c in f.entropy),
                                 key=lambda tc: tc[0].sort_key())),
                    f.scalars, f.constant, f.relation)
                assert image.encode(spec.universe) in forms

    def test_generators_generate_whole_group(self):
        from entrobound.terms import SymmetryGroup
        p = build_regen(4).to_problem()
        assert len(SymmetryGroup.from_generators(
            p.symmetry_generators, p.universe.size)) == 24


class TestLayeredOracle:
    def test_worked_example(self):
        oracle = LayeredOracle(n=5, r=3)
        u = oracle.universe
        assert oracle.message_size == 20
        assert oracle.eval(u.term("S_1_2", "S_2_1")) == Fraction(6, 20)
        assert layered_entropy(oracle, u.term("S_1_2", "S_2_1")) == Fraction(3, 10)

    def test_single_message_entropy_is_beta(self):
        for n in range(3, 7):
            for r in range(2, n + 1):
                oracle = LayeredOracle(n=n, r=r)
                t = oracle.universe.term("S_1_2")
                assert oracle.eval(t) == Fraction(r, n * (n - 1))

    def test_whole_universe_normalizes_to_one(self):
        for n in range(3, 7):
            for r in range(2, n + 1):
                oracle = LayeredOracle(n=n, r=r)
                assert oracle.eval(oracle.universe.full_term()) == 1

    def test_empty_term_and_bad_term(self):
        oracle = LayeredOracle(n=4, r=2)
        assert oracle.eval(TermSet(0)) == 0
        with pytest.raises(ValueError):
            oracle.raw_count(TermSet(1 << 12))
        with pytest.raises(ValueError):
            LayeredOracle(n=4, r=1)
        with pytest.raises(ValueError):
            LayeredOracle(n=4, r=5)

    @given(st.integers(3, 5), st.data())
    def test_monotone_and_submodular(self, n, data):
        r = data.draw(st.integers(2, n))
        oracle = LayeredOracle(n=n, r=r)
        size = oracle.universe.size
        a = TermSet(data.draw(st.integers(0, (1 << size) - 1)))
        b = TermSet(data.draw(st.integers(0, (1 << size) - 1)))
        ha, hb = oracle.eval(a), oracle.eval(b)
        assert oracle.eval(a | b) >= max(ha, hb)
        assert ha + hb >= oracle.eval(a | b) + oracle.eval(a & b)

    def test_oracle_is_node_symmetric(self):
        oracle = LayeredOracle(n=4, r=3)
        g = regen_symmetry(4, "reduced")
        t = oracle.universe.term("S_1_2", "S_3_4", "S_2_3")
        vals = {oracle.eval(apply_permutation(t, p)) for p in g.perms}
        assert len(vals) == 1

    def test_oracle_point_is_problem_feasible(self):
        # the layered code satisfies every problem constraint at its
        # achieved (alpha, beta) operating point
        for n in (3, 4, 5):
            problem = build_regen(n).to_problem()
            for r in range(2, n + 1):
                oracle = LayeredOracle(n=n, r=r)
                alpha, beta = inner_bound_points(n)[r - 2]
                rates = {ALPHA: alpha, BETA: beta}
                for name, form in problem.constraints:
                    v = form.evaluate(oracle.eval, rates=rates)
                    assert (v == 0 if form.relation == EQ else v >= 0), name


class TestInnerPoints:
    def test_known_values(self):
        assert inner_bound_points(6) == [
            (Fraction(2, 6), Fraction(2, 30)),
            (Fraction(3, 12), Fraction(3, 30)),
            (Fraction(4, 18), Fraction(4, 30)),
            (Fraction(5, 24), Fraction(5, 30)),
            (Fraction(6, 30), Fraction(6, 30)),
        ]
        assert inner_bound_points(4)[0] == (Fraction(1, 2), Fraction(1, 6))
        with pytest.raises(ValueError):
            inner_bound_points(1)

    def test_points_match_oracle_rates(self):
        # alpha = max node entropy, beta = single message entropy
        for n in (3, 4, 5):
            u = reduced_universe(n)
            for r in range(2, n + 1):
                oracle = LayeredOracle(n=n, r=r)
                alpha, beta = inner_bound_points(n)[r - 2]
                out1 = u.term(*(f"S_1_{j}" for j in range(2, n + 1)))
                assert oracle.eval(out1) == alpha
                assert oracle.eval(u.term("S_1_2")) == beta

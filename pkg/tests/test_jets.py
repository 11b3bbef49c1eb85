"""Jet-index combinatorics: sequences, projections, point-level checks."""

import numpy as np
import pytest

from jetconn import (
    JetPoint,
    JetSequence,
    SymbolUniverse,
    TangentCoordPoint,
    all_sequences,
    function_differentials,
    is_holonomic_point,
    is_semiholonomic_point,
    jet_points_close,
    nonzero_core,
    parse_expr,
    projections_agree,
    prolonged_projection,
    rho_projection,
    simplify,
    tangent_universe,
    target_projection,
    to_text,
)
from jetconn.expr import Sub, Const

from conftest import random_jet_point


class TestSequences:
    def test_odometer_order(self):
        seqs = all_sequences(2, 2)
        assert len(seqs) == 9
        assert seqs[0] == (0, 0)
        assert seqs[1] == (0, 1)
        assert seqs[2] == (0, 2)
        assert seqs[3] == (1, 0)
        assert seqs[-1] == (2, 2)

    def test_count(self):
        assert len(all_sequences(3, 2)) == 27
        assert len(all_sequences(0, 3)) == 1  # the empty sequence

    def test_bounds(self):
        with pytest.raises(ValueError):
            all_sequences(5, 1)
        with pytest.raises(ValueError):
            all_sequences(1, 4)

    def test_nonzero_core(self):
        assert nonzero_core((0, 2, 0, 1)) == (2, 1)
        assert nonzero_core((0, 0)) == ()
        assert nonzero_core(JetSequence((1, 0, 2), 2)) == (1, 2)

    def test_jet_sequence_validation(self):
        with pytest.raises(ValueError):
            JetSequence((0, 3), 2)  # entry exceeds base_dim


class TestJetPoint:
    def test_missing_entry_diagnosed(self):
        table = {(1, seq): 0.0 for seq in all_sequences(1, 2)}
        del table[(1, (2,))]
        with pytest.raises(ValueError, match="missing"):
            JetPoint(1, 2, 1, (0.0, 0.0), table)

    def test_extra_entry_diagnosed(self):
        table = {(1, seq): 0.0 for seq in all_sequences(1, 2)}
        table[(2, (0,))] = 1.0
        with pytest.raises(ValueError, match="unexpected"):
            JetPoint(1, 2, 1, (0.0, 0.0), table)

    def test_nonfinite_rejected(self):
        table = {(1, seq): 0.0 for seq in all_sequences(1, 1)}
        table[(1, (1,))] = float("nan")
        with pytest.raises(ValueError):
            JetPoint(1, 1, 1, (0.0,), table)

    def test_equality(self, rng):
        a = random_jet_point(rng, 2, 2, 1)
        b = JetPoint(a.order, a.base_dim, a.fiber_dim, a.base, dict(a.values))
        assert a == b
        assert jet_points_close(a, b, 0.0)


class TestHolonomyChecks:
    def test_forced_semiholonomic(self, rng):
        for _ in range(20):
            pt = random_jet_point(rng, 3, 2, 2, force_semiholonomic=True)
            assert is_semiholonomic_point(pt)

    def test_random_jet_is_rarely_semiholonomic(self, rng):
        # continuous values, so group collisions have probability zero
        hits = sum(
            is_semiholonomic_point(random_jet_point(rng, 2, 2, 1))
            for _ in range(50)
        )
        assert hits == 0

    def test_holonomic_needs_multiset_invariance(self):
        table = {(1, seq): 0.0 for seq in all_sequences(2, 2)}
        for seq in all_sequences(2, 2):
            core = nonzero_core(seq)
            table[(1, seq)] = float(sum(core))  # depends only on the multiset
        pt = JetPoint(2, 2, 1, (0.0, 0.0), table)
        assert is_semiholonomic_point(pt)
        assert is_holonomic_point(pt)
        # order-sensitive perturbation keeps semiholonomy, breaks holonomy
        table[(1, (1, 2))] = 10.0
        table[(1, (2, 1))] = 11.0
        pt2 = JetPoint(2, 2, 1, (0.0, 0.0), table)
        assert is_semiholonomic_point(pt2)
        assert not is_holonomic_point(pt2)

    def test_tolerance_groups(self):
        table = {(1, seq): 0.0 for seq in all_sequences(1, 2)}
        table[(1, (1,))] = 1.0
        table[(1, (2,))] = 1.0 + 5e-13  # inside the 1e-12 span
        pt = JetPoint(1, 2, 1, (0.0, 0.0), table)
        assert is_semiholonomic_point(pt)


class TestProjections:
    def test_target_projection_strips_trailing_zeros(self, rng):
        pt = random_jet_point(rng, 2, 2, 1)
        proj = target_projection(pt, 1)
        assert proj.order == 1
        assert proj.values[(1, (2,))] == pt.values[(1, (2, 0))]
        assert proj.base == pt.base

    def test_target_projection_to_zero(self, rng):
        pt = random_jet_point(rng, 2, 2, 1)
        proj = target_projection(pt, 0)
        assert proj.values[(1, ())] == pt.values[(1, (0, 0))]

    def test_prolonged_projection_drops_leading_slot(self, rng):
        # r=2, k=q=1: keep entries whose first slot is zero, (0,i) -> (i)
        pt = random_jet_point(rng, 2, 2, 1)
        proj = prolonged_projection(pt, 1, 1)
        assert proj.order == 1
        assert proj.values[(1, (2,))] == pt.values[(1, (0, 2))]

    def test_prolonged_full_is_identity(self, rng):
        pt = random_jet_point(rng, 2, 2, 1)
        proj = prolonged_projection(pt, 2, 2)
        assert proj == pt

    def test_agreement_iff_semiholonomic(self, rng):
        for _ in range(60):
            forced = bool(rng.random() < 0.5)
            r = int(rng.integers(1, 4))
            m = int(rng.integers(1, 3))
            pt = random_jet_point(rng, r, m, 1, force_semiholonomic=forced)
            assert projections_agree(pt) == is_semiholonomic_point(pt)


class TestRhoProjection:
    def test_drop_and_shift(self):
        # level 2, dim 1: subsets of {1,2} index the table
        values = {
            (): (1.0,),
            (1,): (2.0,),
            (2,): (3.0,),
            (1, 2): (4.0,),
        }
        pt = TangentCoordPoint(2, 1, values)
        low = rho_projection(pt, 1)
        assert low.level == 1
        assert low.values[()] == (1.0,)
        assert low.values[(1,)] == (3.0,)  # old label 2 shifts down

    def test_full_coverage_required(self):
        with pytest.raises(ValueError):
            TangentCoordPoint(2, 1, {(): (1.0,), (1,): (2.0,)})


class TestFunctionDifferentials:
    def test_level1_gradient_contraction(self):
        u = SymbolUniverse(2, 0)
        f = parse_expr("x1^2*x2", u)
        fd = function_differentials(f, 1, u)
        tu = tangent_universe(u, 1)
        expected = parse_expr("2*x1*x2*x1_1 + x1^2*x2_1", tu)
        assert simplify(Sub(fd.d1, expected)) == Const(0)
        assert fd.d2 is None
        assert fd.d12 is None

    def test_level2_mixed_term(self):
        u = SymbolUniverse(1, 0)
        f = parse_expr("x1^2", u)
        fd = function_differentials(f, 2, u)
        tu = tangent_universe(u, 2)
        assert simplify(Sub(fd.d1, parse_expr("2*x1*x1_1", tu))) == Const(0)
        assert simplify(Sub(fd.d2, parse_expr("2*x1*x1_2", tu))) == Const(0)
        expected = parse_expr("2*x1_1*x1_2 + 2*x1*x1_12", tu)
        assert simplify(Sub(fd.d12, expected)) == Const(0)

    def test_rejects_fiber_variables(self):
        u = SymbolUniverse(1, 1)
        with pytest.raises(ValueError):
            function_differentials(parse_expr("y1", u), 1, u)

    def test_tangent_universe_names(self):
        u = SymbolUniverse(2, 0)
        tu = tangent_universe(u, 2)
        for name in ("x1_1", "x1_2", "x1_12", "x2_12"):
            assert name in tu

"""Tests for fragment validation, until rewriting and robustness."""

import math
import os
import sys
import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

# Add parent directory to path
parent_dir = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, parent_dir)

from domain.exceptions import FragmentError, HorizonError, IntervalError, UnknownPredicateError
from domain.models.formula import (
    Always,
    Conjunction,
    Eventually,
    Predicate,
    TimeInterval,
    TrueFormula,
    Until,
)
from domain.models.predicate import Affine, ConcaveQuadratic
from domain.models.team import TeamPartition
from domain.models.trajectory import Trajectory
from service.stl.parser import parse_formula
from service.stl.semantics import (
    RobustnessEvaluator,
    bind_global_predicates,
    compile_global_formula,
    partition_indices,
    rewrite_untils,
    robustness,
    robustness_signal,
    until_rewrite,
    validate_fragment,
)

DT = 0.1
SAMPLES = 31


def scalar_bindings():
    """p reads x_1, q reads x_2 (both as identity affine functions)."""
    partition = TeamPartition([(1, 2)], [[1]])
    table = {
        "p": Affine([1.0], 0.0, [(1, 0)]),
        "q": Affine([1.0], 0.0, [(1, 1)]),
    }
    return bind_global_predicates(table, partition)


def brute_force(formula, values, k):
    """Robustness straight from the definitions on grid-aligned windows."""
    if isinstance(formula, TrueFormula):
        return math.inf
    if isinstance(formula, Predicate):
        v = values[formula.name][k]
        return -v if formula.negated else v
    if isinstance(formula, Conjunction):
        return min(brute_force(c, values, k) for c in formula.children)
    lo = k + int(round(formula.interval.a / DT))
    hi = k + int(round(formula.interval.b / DT))
    if isinstance(formula, Always):
        return min(brute_force(formula.child, values, j) for j in range(lo, hi + 1))
    if isinstance(formula, Eventually):
        return max(brute_force(formula.child, values, j) for j in range(lo, hi + 1))
    return max(
        min(
            brute_force(formula.right, values, j),
            min(brute_force(formula.left, values, i) for i in range(lo, j + 1)),
        )
        for j in range(lo, hi + 1)
    )


signals = st.lists(
    st.floats(min_value=-5, max_value=5, allow_nan=False, allow_infinity=False),
    min_size=SAMPLES,
    max_size=SAMPLES,
)


@st.composite
def grid_intervals(draw):
    a = draw(st.integers(min_value=0, max_value=15))
    b = draw(st.integers(min_value=a, max_value=SAMPLES - 1))
    return TimeInterval(a * DT, b * DT)


atoms = st.builds(Predicate, st.sampled_from(["p", "q"]), st.booleans())
fragment_terms = st.one_of(
    st.builds(Always, grid_intervals(), atoms),
    st.builds(Eventually, grid_intervals(), atoms),
    st.builds(Until, grid_intervals(), atoms, atoms),
)


class TestFragment(unittest.TestCase):
    """Test validate_fragment and partition_indices."""

    def test_conjunction_of_temporal_terms(self):
        report = validate_fragment(parse_formula("G[0,1] p and F[2,3] not q"))
        self.assertTrue(report.ok)
        self.assertTrue(bool(report))

    def test_single_temporal_formula(self):
        """A bare temporal formula is a one-conjunct conjunction."""
        self.assertTrue(validate_fragment(parse_formula("F[0,1] p")).ok)

    def test_bare_predicate_rejected(self):
        report = validate_fragment(parse_formula("G[0,1] p and q"))
        self.assertFalse(report)
        self.assertIn("conjunct 2", report.violations[0])

    def test_until_rejected_before_rewrite(self):
        report = validate_fragment(parse_formula("p U[0,1] q"))
        self.assertFalse(report.ok)
        with self.assertRaises(FragmentError):
            report.raise_if_invalid()

    def test_true_operand_rejected(self):
        self.assertFalse(validate_fragment(parse_formula("G[0,1] true")).ok)

    def test_nested_temporal_rejected(self):
        nested = Always(TimeInterval(0, 1), Eventually(TimeInterval(0, 1), Predicate("p")))
        self.assertFalse(validate_fragment(nested).ok)

    def test_partition_indices(self):
        indices = partition_indices(parse_formula("G[0,1] p and F[2,3] q and G[4,5] q"))
        self.assertEqual(indices.always, (1, 3))
        self.assertEqual(indices.eventually, (2,))
        self.assertEqual(indices.intervals[2], TimeInterval(2, 3))
        self.assertEqual(indices.count, 3)


class TestUntilRewrite(unittest.TestCase):
    """Test until_rewrite and rewrite_untils."""

    def test_rewrite_shape(self):
        rewritten = until_rewrite(Predicate("p"), Predicate("q"), TimeInterval(1, 4), 2.5)
        self.assertEqual(
            rewritten.children,
            (
                Always(TimeInterval(1, 2.5), Predicate("p")),
                Eventually(TimeInterval(2.5, 2.5), Predicate("q")),
            ),
        )

    def test_split_outside_interval(self):
        with self.assertRaises(IntervalError):
            until_rewrite(Predicate("p"), Predicate("q"), TimeInterval(1, 4), 5.0)

    def test_rewrite_untils_defaults_to_interval_start(self):
        formula = rewrite_untils(parse_formula("G[0,1] q and p U[2,3] q"))
        self.assertEqual(
            formula.children,
            (
                Always(TimeInterval(0, 1), Predicate("q")),
                Always(TimeInterval(2, 2), Predicate("p")),
                Eventually(TimeInterval(2, 2), Predicate("q")),
            ),
        )
        self.assertTrue(validate_fragment(formula).ok)

    def test_rewrite_untils_with_instant(self):
        formula = rewrite_untils(parse_formula("p U[2,3] q"), {1: 2.5})
        self.assertEqual(formula.children[1], Eventually(TimeInterval(2.5, 2.5), Predicate("q")))

    def test_formula_without_until_unchanged(self):
        formula = parse_formula("G[0,1] p")
        self.assertIs(rewrite_untils(formula), formula)

    @given(signals, signals, grid_intervals(), st.data())
    @settings(max_examples=200, deadline=None)
    def test_rewrite_is_sound(self, p_values, q_values, interval, data):
        """Robustness of the rewrite never exceeds the until it replaces."""
        lo = int(round(interval.a / DT))
        hi = int(round(interval.b / DT))
        t_star = data.draw(st.integers(min_value=lo, max_value=hi)) * DT
        x = Trajectory(np.column_stack([p_values, q_values]), DT)
        bindings = scalar_bindings()
        until = Until(interval, Predicate("p"), Predicate("q"))
        rewritten = until_rewrite(Predicate("p"), Predicate("q"), interval, t_star)
        self.assertGreaterEqual(
            robustness(until, x, 0.0, bindings) + 1e-12,
            robustness(rewritten, x, 0.0, bindings),
        )


class TestRobustness(unittest.TestCase):
    """Test RobustnessEvaluator against hand-computed and brute-force values."""

    def setUp(self):
        self.bindings = scalar_bindings()
        p = np.array([0.5, -1.0, 2.0, 0.1, 3.0])
        q = np.array([-2.0, -1.0, 1.0, 0.0, -0.5])
        self.x = Trajectory(np.column_stack([p, q]), 1.0)

    def test_predicate(self):
        self.assertEqual(robustness(Predicate("p"), self.x, 2.0, self.bindings), 2.0)
        self.assertEqual(robustness(Predicate("p", True), self.x, 2.0, self.bindings), -2.0)

    def test_always_and_eventually(self):
        interval = TimeInterval(1, 3)
        self.assertEqual(robustness(Always(interval, Predicate("p")), self.x, 0.0, self.bindings), -1.0)
        self.assertEqual(robustness(Eventually(interval, Predicate("p")), self.x, 0.0, self.bindings), 2.0)

    def test_shifted_evaluation_time(self):
        formula = Always(TimeInterval(0, 1), Predicate("p"))
        self.assertEqual(robustness(formula, self.x, 2.0, self.bindings), 0.1)

    def test_until_uses_window_start(self):
        # left must hold on [1, j]; q first positive at t=2 where min p over [1,2] is -1
        formula = Until(TimeInterval(1, 3), Predicate("p"), Predicate("q"))
        self.assertEqual(robustness(formula, self.x, 0.0, self.bindings), -1.0)

    def test_true(self):
        self.assertEqual(robustness(TrueFormula(), self.x, 0.0, self.bindings), math.inf)

    def test_conjunction(self):
        formula = Conjunction((Predicate("p"), Predicate("q")))
        self.assertEqual(robustness(formula, self.x, 0.0, self.bindings), -2.0)

    def test_horizon_too_short(self):
        with self.assertRaises(HorizonError):
            robustness(Always(TimeInterval(0, 5), Predicate("p")), self.x, 0.0, self.bindings)

    def test_off_grid_time(self):
        with self.assertRaises(HorizonError):
            robustness(Predicate("p"), self.x, 0.5, self.bindings)

    def test_window_snaps_outward(self):
        x = Trajectory(np.arange(6.0), 0.1)
        self.assertEqual(list(x.window(0.15, 0.25)), [1, 2, 3])
        self.assertEqual(list(x.window(0.1, 0.3)), [1, 2, 3])

    def test_missing_binding(self):
        with self.assertRaises(FragmentError):
            robustness(Predicate("r"), self.x, 0.0, self.bindings)

    def test_robustness_signal_marks_short_horizon(self):
        trace = robustness_signal(Always(TimeInterval(0, 2), Predicate("p")), self.x, self.bindings)
        self.assertEqual(trace[0], -1.0)
        self.assertTrue(np.isnan(trace[3]))
        self.assertTrue(np.isnan(trace[4]))

    def test_bindings_use_global_columns(self):
        """Footprints over several agents read the right columns of x."""
        partition = TeamPartition([(2, 1), (1, 2)], [[2], [1]])
        table = {"d": ConcaveQuadratic.difference(1.0, [1.0], [(1, 1), (2, 0)])}
        bindings = bind_global_predicates(table, partition)
        # x = (agent 1: 0.0, 0.5 | agent 2: 0.25)
        x = Trajectory([[0.0, 0.5, 0.25]], 1.0)
        self.assertAlmostEqual(robustness(Predicate("d"), x, 0.0, bindings), 1.0 - 0.0625)

    @given(signals, signals, fragment_terms)
    @settings(max_examples=300, deadline=None)
    def test_matches_brute_force(self, p_values, q_values, formula):
        x = Trajectory(np.column_stack([p_values, q_values]), DT)
        values = {"p": np.asarray(p_values), "q": np.asarray(q_values)}
        self.assertEqual(
            robustness(formula, x, 0.0, scalar_bindings()),
            brute_force(formula, values, 0),
        )

    @given(signals, grid_intervals())
    @settings(max_examples=200, deadline=None)
    def test_eventually_always_duality(self, p_values, interval):
        """rho(F not p) == -rho(G p)."""
        x = Trajectory(np.column_stack([p_values, p_values]), DT)
        evaluator = RobustnessEvaluator(x, scalar_bindings())
        self.assertEqual(
            evaluator.at(Eventually(interval, Predicate("p", True)), 0.0),
            -evaluator.at(Always(interval, Predicate("p")), 0.0),
        )


class TestCompileGlobalFormula(unittest.TestCase):
    """Test compile_global_formula."""

    def setUp(self):
        self.table = {
            "p": Affine([1.0], 0.0, [(1, 0)]),
            "q": Affine([1.0], 0.0, [(1, 0)]),
        }

    def test_until_is_rewritten(self):
        formula = compile_global_formula("G[0,1] p and p U[2,4] q", self.table, {2: 3.0})
        self.assertEqual(len(formula.children), 3)
        self.assertEqual(formula.children[2], Eventually(TimeInterval(3, 3), Predicate("q")))

    def test_unknown_name(self):
        with self.assertRaises(UnknownPredicateError):
            compile_global_formula("G[0,1] r", self.table)

    def test_past_horizon(self):
        with self.assertRaises(HorizonError) as ctx:
            compile_global_formula("G[0,1] p and F[8,12] q", self.table, horizon=10.0)
        self.assertIn("conjunct 2", str(ctx.exception))

    def test_outside_fragment(self):
        with self.assertRaises(FragmentError):
            compile_global_formula("G[0,1] p and q", self.table)


def run_tests():
    """Run all tests."""
    loader = unittest.TestLoader()
    suite = loader.loadTestsFromModule(sys.modules[__name__])
    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)
    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    sys.exit(0 if success else 1)

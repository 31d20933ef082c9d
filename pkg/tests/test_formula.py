"""Tests for the formula AST and the concrete grammar."""

import os
import sys
import unittest

from hypothesis import given, settings, strategies as st

# Add parent directory to path
parent_dir = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, parent_dir)

from domain.exceptions import FormulaSyntaxError, IntervalError, UnknownPredicateError
from domain.models.formula import (
    Always,
    Conjunction,
    Eventually,
    Predicate,
    TimeInterval,
    TrueFormula,
    Until,
    conjuncts,
    predicate_names,
)
from service.stl.parser import format_formula, parse_formula


class TestTimeInterval(unittest.TestCase):
    """Test TimeInterval validation."""

    def test_valid_interval(self):
        interval = TimeInterval(1, 2.5)
        self.assertEqual(interval.a, 1.0)
        self.assertEqual(interval.length, 1.5)
        self.assertTrue(interval.contains(2.5))
        self.assertFalse(interval.contains(2.6))

    def test_point_interval(self):
        """a == b is allowed."""
        self.assertEqual(TimeInterval(3, 3).length, 0.0)

    def test_reversed_bounds(self):
        with self.assertRaises(IntervalError):
            TimeInterval(2, 1)

    def test_negative_bound(self):
        with self.assertRaises(IntervalError):
            TimeInterval(-1, 1)

    def test_infinite_bound(self):
        with self.assertRaises(IntervalError):
            TimeInterval(0, float("inf"))

    def test_includes(self):
        self.assertTrue(TimeInterval(0, 10).includes(TimeInterval(2, 3)))
        self.assertFalse(TimeInterval(0, 10).includes(TimeInterval(9, 11)))


class TestParser(unittest.TestCase):
    """Test parse_formula."""

    def test_single_term(self):
        """A single term is not wrapped in a conjunction."""
        formula = parse_formula("G[0,2] p")
        self.assertEqual(formula, Always(TimeInterval(0, 2), Predicate("p")))

    def test_conjunction(self):
        formula = parse_formula("G[0,2] p and F[3, 7] not q")
        self.assertIsInstance(formula, Conjunction)
        self.assertEqual(
            formula.children,
            (
                Always(TimeInterval(0, 2), Predicate("p")),
                Eventually(TimeInterval(3, 7), Predicate("q", negated=True)),
            ),
        )

    def test_until_and_true(self):
        formula = parse_formula("p U[1,4] true")
        self.assertEqual(formula, Until(TimeInterval(1, 4), Predicate("p"), TrueFormula()))

    def test_whitespace_and_newlines(self):
        formula = parse_formula("G[0,1]\n   p\nand\tF[ 2 , 3 ] q")
        self.assertEqual(len(conjuncts(formula)), 2)

    def test_decimal_and_exponent_bounds(self):
        formula = parse_formula("F[.5,1e1] p")
        self.assertEqual(formula.interval, TimeInterval(0.5, 10.0))

    def test_syntax_error_position(self):
        with self.assertRaises(FormulaSyntaxError) as ctx:
            parse_formula("G[0,2] p and\n  F[3 7] q")
        self.assertEqual(ctx.exception.line, 2)
        self.assertEqual(ctx.exception.column, 7)

    def test_unexpected_character(self):
        with self.assertRaises(FormulaSyntaxError) as ctx:
            parse_formula("G[0,2] p & q")
        self.assertEqual(ctx.exception.column, 10)

    def test_trailing_tokens(self):
        with self.assertRaises(FormulaSyntaxError):
            parse_formula("G[0,2] p q")

    def test_reversed_interval(self):
        with self.assertRaises(IntervalError):
            parse_formula("G[3,2] p")

    def test_unknown_predicate(self):
        with self.assertRaises(UnknownPredicateError) as ctx:
            parse_formula("G[0,2] p and F[1,2] r", {"p": object()})
        self.assertIn("'r'", str(ctx.exception))

    def test_keyword_is_not_identifier(self):
        with self.assertRaises(FormulaSyntaxError):
            parse_formula("G[0,1] and")

    def test_predicate_names(self):
        formula = parse_formula("G[0,1] b and F[0,1] a and b U[0,1] c")
        self.assertEqual(predicate_names(formula), ("b", "a", "c"))


class TestFormatter(unittest.TestCase):
    """Test format_formula."""

    def test_format_conjunction(self):
        formula = parse_formula("G[0,2.1] near12 and F[3,7] not near45")
        self.assertEqual(format_formula(formula), "G[0.0,2.1] near12 and F[3.0,7.0] not near45")

    def test_nested_conjunction_not_printable(self):
        nested = Always(TimeInterval(0, 1), Conjunction((Predicate("p"), Predicate("q"))))
        with self.assertRaises(ValueError):
            format_formula(nested)


# Hypothesis strategies over the printable part of the grammar

names = st.sampled_from(["p", "q", "near12", "box_1_2", "h_x"])
atoms = st.one_of(
    st.just(TrueFormula()),
    st.builds(Predicate, names, st.booleans()),
)


@st.composite
def intervals(draw):
    a = draw(st.floats(min_value=0, max_value=50, allow_nan=False, allow_infinity=False))
    length = draw(st.floats(min_value=0, max_value=50, allow_nan=False, allow_infinity=False))
    return TimeInterval(a, a + length)


terms = st.one_of(
    atoms,
    st.builds(Always, intervals(), atoms),
    st.builds(Eventually, intervals(), atoms),
    st.builds(Until, intervals(), atoms, atoms),
)
formulas = st.one_of(
    terms,
    st.lists(terms, min_size=2, max_size=5).map(lambda children: Conjunction(tuple(children))),
)


class TestRoundTrip(unittest.TestCase):
    """parse(format(f)) == f for every printable formula."""

    @given(formulas)
    @settings(max_examples=300, deadline=None)
    def test_parse_format_round_trip(self, formula):
        self.assertEqual(parse_formula(format_formula(formula)), formula)


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

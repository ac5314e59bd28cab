# test/symexpr.py
# vim:ts=4:sw=4:noexpandtab

import sys

from fractions import Fraction
from unittest import TestCase, main

if '..' not in sys.path:
	sys.path.append('..')

from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.random import default_rng
from sympy import Integer, Lambda, Rational, cos, symbols

from fieldcov.symexpr import (Coord, ExprError, HARMONIC, Inconclusive, Interpretation, OrderOverflow, PoleHit,
                              base, canonicalize, coords, cov_base, cov_jet, equal_identically, eval_at, fiber,
                              jet, jet_order, opaque, param, partial, render, sample_point, substitute,
                              total_derivative)


class CoordTest(TestCase):

	def test_classification(self):
		c = jet('A', 1, [1, 0])
		self.assertEqual('jet', c.coord_kind)
		self.assertEqual('A', c.field_id)
		self.assertEqual(1, c.slot)
		self.assertEqual((0, 1), c.multi_index)
		self.assertEqual(2, c.jet_order)
		self.assertEqual(fiber('A', 1), c.lower())
		self.assertIs(False, c.covariant)
		self.assertIs(True, cov_jet('X', 0, [1]).covariant)
		self.assertEqual(cov_base('X', 0), cov_jet('X', 0, [1]).lower())

	def test_equality(self):
		self.assertEqual(jet('phi', None, [1, 0]), jet('phi', None, [0, 1]))
		self.assertEqual(jet('phi', None, [0, 1]), fiber('phi').prolong(1, 0))
		self.assertNotEqual(fiber('phi'), fiber('phi', 0))
		self.assertNotEqual(base(0), cov_base('X', 0))

	def test_errors(self):
		self.assertRaises(ExprError, Coord.make, 'tensor')
		self.assertRaises(ExprError, Coord.make, 'jet', 'phi')
		self.assertRaises(ExprError, Coord.make, 'fiber', 'phi', None, [0])
		self.assertRaises(OrderOverflow, jet, 'phi', None, [0, 0, 1])
		self.assertRaises(ExprError, base(0).prolong, 0)
		self.assertRaises(ExprError, param('m').prolong, 0)

	def test_order(self):
		e = param('m') * jet('q', None, [0]) + cov_jet('X', 0, [0]) * fiber('q') + base(0)
		self.assertEqual([base(0), cov_jet('X', 0, [0]), fiber('q'), jet('q', None, [0]), param('m')], coords(e))
		self.assertEqual(1, jet_order(e))
		self.assertEqual(0, jet_order(Integer(3)))


#: Coordinates the generated expressions are built from
POOL = [base(0), base(1), fiber('phi'), fiber('A', 0), jet('phi', None, [0]), jet('A', 1, [0, 1]),
        cov_jet('X', 1, [0]), param('m')]

#: The coordinates of POOL that still have a total derivative
FIRST = [c for c in POOL if c.jet_order < 2]

#: Nonzero exact values for POOL
VALUES = st.fractions(min_value=-4, max_value=4, max_denominator=6).filter(lambda f: f != 0)

def expressions(pool=POOL):
	numbers = st.fractions(min_value=-4, max_value=4, max_denominator=6).map(
	          lambda f: Rational(f.numerator, f.denominator))
	powers = st.tuples(st.sampled_from(pool), st.integers(-1, 3)).map(lambda p: p[0] ** p[1])
	leaves = st.sampled_from(pool) | powers | numbers

	def combine(children):
		return (st.tuples(children, children).map(lambda p: p[0] + p[1]) |
		        st.tuples(children, children).map(lambda p: p[0] * p[1]) |
		        children.map(lambda e: -e))

	return st.recursive(leaves, combine, max_leaves=8)


class CanonicalizeTest(TestCase):

	@settings(max_examples=10000, deadline=None)
	@given(expressions())
	def test_idempotent(self, e):
		c = canonicalize(e)
		self.assertEqual(c, canonicalize(c))

	def test_normal_form(self):
		phi, m = fiber('phi'), param('m')
		self.assertEqual(0, canonicalize((phi + m) ** 2 - phi ** 2 - 2 * phi * m - m ** 2))
		self.assertEqual(canonicalize(phi * (m + 1)), canonicalize(m * phi + phi))
		self.assertEqual(render(canonicalize((phi + 1) * (phi - 1))), render(canonicalize(phi ** 2 - 1)))

	def test_partial(self):
		phi, phi_t = fiber('phi'), jet('phi', None, [0])
		self.assertEqual(phi_t, partial(Rational(1, 2) * phi_t ** 2, phi_t))
		self.assertEqual(0, partial(phi_t ** 2, phi))

	@settings(max_examples=500, deadline=None)
	@given(expressions(), st.sampled_from(POOL), st.sampled_from(POOL))
	def test_partials_commute(self, e, a, b):
		self.assertEqual(partial(partial(e, a), b), partial(partial(e, b), a))


class TotalDerivativeTest(TestCase):

	def test_chain(self):
		phi, t = fiber('phi'), base(0)
		phi_t, phi_x = jet('phi', None, [0]), jet('phi', None, [1])
		self.assertEqual(canonicalize(2 * phi * phi_t), total_derivative(phi ** 2, 0))
		self.assertEqual(canonicalize(phi + t * phi_t), total_derivative(t * phi, 0))
		self.assertEqual(canonicalize(phi_t * jet('phi', None, [0, 1]) + phi_x * jet('phi', None, [0, 0])),
		                 total_derivative(phi_t * phi_x, 0))
		self.assertEqual(0, total_derivative(param('m') * base(1), 0))

	def test_commute(self):
		e = fiber('q', 0) ** 2 * fiber('q', 1) + base(0) * base(1) * fiber('q', 1)
		self.assertEqual(total_derivative(total_derivative(e, 0), 1), total_derivative(total_derivative(e, 1), 0))

	@settings(max_examples=500, deadline=None)
	@given(expressions(FIRST), expressions(FIRST), st.integers(0, 1))
	def test_leibniz(self, e, f, mu):
		product = canonicalize(total_derivative(e, mu) * f + e * total_derivative(f, mu))
		self.assertEqual(product, total_derivative(e * f, mu))

	def test_overflow(self):
		self.assertRaises(OrderOverflow, total_derivative, jet('phi', None, [0, 1]), 0)

	def test_opaque(self):
		phi = fiber('phi')
		d = total_derivative(opaque('V', (), [phi, base(0)]), 0)
		expected = opaque('V', (0,), [phi, base(0)]) * jet('phi', None, [0]) + opaque('V', (1,), [phi, base(0)])
		self.assertIs(True, equal_identically(expected, d))


class EvalTest(TestCase):

	def test_exact(self):
		phi, m = fiber('phi'), param('m')
		v = eval_at(Rational(1, 2) * m ** 2 * phi ** 2 - 1 / phi, {phi: Fraction(2, 3), m: 3})
		self.assertEqual(Fraction(1, 2), v)
		self.assertIsInstance(v, Fraction)

	@settings(max_examples=500, deadline=None)
	@given(expressions(), expressions(), st.lists(VALUES, min_size=len(POOL), max_size=len(POOL)))
	def test_sum_product(self, e, f, values):
		point = dict(zip(POOL, values))
		self.assertEqual(eval_at(e, point) + eval_at(f, point), eval_at(e + f, point))
		self.assertEqual(eval_at(e, point) * eval_at(f, point), eval_at(e * f, point))

	def test_float(self):
		phi = fiber('phi')
		self.assertAlmostEqual(1.0, eval_at(cos(phi), {phi: 0}))
		self.assertAlmostEqual(2 ** 0.5, eval_at(phi ** Rational(1, 2), {phi: 2}))

	def test_errors(self):
		phi = fiber('phi')
		self.assertRaises(PoleHit, eval_at, 1 / phi, {phi: 0})
		self.assertRaises(ExprError, eval_at, phi + param('m'), {phi: 1})
		self.assertRaises(Inconclusive, eval_at, opaque('V', (), [phi]), {phi: 1})

	def test_interpretation(self):
		phi, t = fiber('phi'), base(0)
		v = opaque('V', (), [phi, t])
		self.assertEqual(Fraction(5, 2), eval_at(v, {phi: 1, t: 2}, HARMONIC))
		self.assertEqual(Fraction(2), eval_at(opaque('V', (1,), [phi, t]), {phi: 1, t: 2}, HARMONIC))
		u = symbols('u')
		cube = Interpretation({'W': Lambda((u,), u ** 3)})
		self.assertEqual(Fraction(12), eval_at(opaque('W', (0,), [phi]), {phi: 2}, cube))
		self.assertEqual(canonicalize(phi ** 3), canonicalize(cube.apply(opaque('W', (), [phi]))))


class IdentityTest(TestCase):

	def test_rational(self):
		a, b = fiber('q', 0), fiber('q', 1)
		self.assertIs(True, equal_identically((a ** 2 - b ** 2) / (a - b), a + b))
		self.assertIs(False, equal_identically((a ** 2 - b ** 2) / (a - b), a - b))
		self.assertIs(True, equal_identically(a * b, b * a, trials=1))

	def test_opaque(self):
		phi = fiber('phi')
		v = opaque('V', (), [phi])
		self.assertIs(True, equal_identically(v * (phi + 1), v * phi + v))
		self.assertRaises(Inconclusive, equal_identically, v, phi ** 2 / 2)
		self.assertIs(True, equal_identically(v, phi ** 2 / 2, interp=HARMONIC))
		self.assertIs(False, equal_identically(v, phi ** 2, interp=HARMONIC))

	def test_trials(self):
		self.assertRaises(ExprError, equal_identically, fiber('phi'), 0, 0)

	def test_sample_point(self):
		syms = [fiber('phi'), param('m')]
		p1 = sample_point(syms, default_rng([7, 0]), 10)
		p2 = sample_point(syms, default_rng([7, 0]), 10)
		self.assertEqual(p1, p2)

		for v in p1.values():
			self.assertIsInstance(v, Fraction)
			self.assertLessEqual(abs(v), 10)


class RenderTest(TestCase):

	def test_render(self):
		names = ('t', 'x')
		self.assertEqual('D[phi;t,x]', render(jet('phi', None, [1, 0]), names))
		self.assertEqual('A[1]', render(fiber('A', 1), names))
		self.assertEqual('Xt', render(cov_base('X', 0), names))
		self.assertEqual('D[Xx;t]', render(cov_jet('X', 1, [0]), names))
		self.assertEqual('m^2', render(param('m') ** 2, names))
		self.assertEqual('1/phi^2', render(fiber('phi') ** -2, names))
		self.assertEqual('D[V;1](phi, t)', render(opaque('V', (1,), [fiber('phi'), base(0)]), names))

	def test_substitute(self):
		phi, m = fiber('phi'), param('m')
		self.assertEqual(canonicalize(m ** 2 + 2 * m), substitute(phi ** 2 + 2 * phi, {phi: m}))
		self.assertEqual(canonicalize(m + phi), substitute(phi + m, {phi: m, m: phi}))


if __name__ == '__main__':
	main()

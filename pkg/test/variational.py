# test/variational.py
# vim:ts=4:sw=4:noexpandtab

import sys

from unittest import TestCase, main

if '..' not in sys.path:
	sys.path.append('..')

from sympy import Rational

from fieldcov.covariantize import JacobianBundle, covariantize_horizontal, covariantize_vertical
from fieldcov.symexpr import (OrderOverflow, canonicalize, cov_jet, equal_identically, fiber, jet, opaque, param,
                              partial)
from fieldcov.theory import FieldDecl, TheorySpec, bundled
from fieldcov.variational import (ELSystem, SEMTensor, VariationalError, connection_equations, energy,
                                  euler_lagrange, euler_lagrange_all, piola_kirchhoff, piola_transform, sem_tensor)


class EulerLagrangeTest(TestCase):

	def test_oscillator(self):
		system = euler_lagrange(bundled('oscillator'), 'q')
		q, q_tt = fiber('q'), jet('q', None, [0, 0])
		self.assertEqual([('q', None)], system.keys())
		self.assertEqual(canonicalize(-q - q_tt), system['q', None])
		self.assertEqual(2, system.order)

	def test_kg1(self):
		system = euler_lagrange(bundled('kg1'), 'phi')
		m, phi = param('m'), fiber('phi')
		self.assertEqual(canonicalize(-m ** 2 * phi - 2 * jet('phi', None, [0, 1])), system['phi', None])
		self.assertEqual(['phi'], [label for label, text in system.render(bundled('kg1'))])

	def test_mechanics(self):
		spec = bundled('mechanics')
		system = euler_lagrange_all(spec)
		q0, q1 = fiber('q', 0), fiber('q', 1)
		q0_t, q1_t = jet('q', 0, [0]), jet('q', 1, [0])
		m = param('m')
		V0, V1 = opaque('V', (0,), [q0, q1]), opaque('V', (1,), [q0, q1])
		el0 = -V0 - m * (2 * q1 * q1_t * q0_t + (1 + q1 ** 2) * jet('q', 0, [0, 0]))
		el1 = m * q1 * q0_t ** 2 - V1 - m * jet('q', 1, [0, 0])
		self.assertEqual([('q', 0), ('q', 1)], system.keys())
		self.assertIs(True, equal_identically(el0, system['q', 0]))
		self.assertIs(True, equal_identically(el1, system['q', 1]))

	def test_second_order(self):
		q_tt = jet('q', None, [0, 0])
		spec = TheorySpec('stiff', ['t'], [FieldDecl('q')], [], q_tt ** 2 / 2 - fiber('q') ** 2)
		self.assertRaises(OrderOverflow, euler_lagrange, spec, 'q')

	def test_covariance(self):
		spec_tilde = covariantize_horizontal(bundled('oscillator'))
		system = euler_lagrange_all(spec_tilde)
		self.assertEqual([('q', None), ('X', 0)], system.keys())
		self.assertEqual(2, len(system))

	def test_errors(self):
		self.assertRaises(VariationalError, euler_lagrange, bundled('kg2'), 'g')
		self.assertRaises(VariationalError, euler_lagrange, bundled('kg1'), 'psi')
		self.assertRaises(KeyError, ELSystem([]).__getitem__, ('q', None))

	def test_connection(self):
		spec_tilde = covariantize_vertical(bundled('minimal-coupling'), 'minimal')
		system = connection_equations(spec_tilde)
		y0, y1 = fiber('y', 0), fiber('y', 1)
		A = [fiber('A', 0), fiber('A', 1)]
		D = dict(((i, nu), jet('y', i, [nu]) + A[nu] * (y0 if i == 1 else -y1)) for i in range(2) for nu in range(2))
		self.assertEqual([('A', 0), ('A', 1)], system.keys())
		self.assertIs(True, equal_identically(-D[0, 0] * y1 + D[1, 0] * y0, system['A', 0]))
		self.assertIs(True, equal_identically(D[0, 1] * y1 - D[1, 1] * y0, system['A', 1]))
		self.assertRaises(VariationalError, connection_equations, bundled('kg1'))


class SEMTest(TestCase):

	def test_kg1(self):
		spec = bundled('kg1')
		t = sem_tensor(spec)
		m, phi = param('m'), fiber('phi')
		phi_t, phi_x = jet('phi', None, [0]), jet('phi', None, [1])
		self.assertEqual(SEMTensor.CANONICAL, t.variant)
		self.assertEqual(canonicalize(-m ** 2 * phi ** 2 / 2), t[0, 0])
		self.assertEqual(canonicalize(-phi_x ** 2), t[0, 1])
		self.assertEqual(canonicalize(-phi_t ** 2), t[1, 0])
		self.assertEqual(canonicalize(-m ** 2 * phi ** 2 / 2), t[1, 1])
		self.assertEqual(['t^t_t', 't^t_x', 't^x_t', 't^x_x'], [label for label, text in t.render(spec)])

	def test_energy(self):
		spec = bundled('mechanics')
		q0, q1 = fiber('q', 0), fiber('q', 1)
		q0_t, q1_t = jet('q', 0, [0]), jet('q', 1, [0])
		expected = Rational(1, 2) * param('m') * ((1 + q1 ** 2) * q0_t ** 2 + q1_t ** 2) + opaque('V', (), [q0, q1])
		self.assertIs(True, equal_identically(expected, energy(spec)))

	def test_second_order(self):
		spec = TheorySpec('stiff', ['t'], [FieldDecl('q')], [], jet('q', None, [0, 0]) ** 2)
		self.assertRaises(OrderOverflow, sem_tensor, spec)

	def test_piola_kirchhoff(self):
		for name in ['oscillator', 'mechanics', 'kg1']:
			spec_tilde = covariantize_horizontal(bundled(name))
			p = piola_kirchhoff(spec_tilde)
			self.assertEqual(SEMTensor.PIOLA_KIRCHHOFF, p.variant)

			for mu in range(spec_tilde.base_dim):
				for a in range(spec_tilde.base_dim):
					momentum = partial(spec_tilde.lagrangian, cov_jet('X', a, [mu]))
					self.assertIs(True, equal_identically(momentum, p[mu, a]))

	def test_piola_errors(self):
		t = sem_tensor(bundled('kg1'))
		self.assertRaises(VariationalError, piola_transform, t, JacobianBundle('X', 3))
		p = piola_transform(t, JacobianBundle('X', 2))
		self.assertRaises(VariationalError, piola_transform, p, JacobianBundle('X', 2))
		self.assertRaises(VariationalError, piola_kirchhoff, bundled('kg1'))


if __name__ == '__main__':
	main()

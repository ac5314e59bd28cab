# test/theory.py
# vim:ts=4:sw=4:noexpandtab

import sys

from os import remove
from tempfile import mkstemp
from unittest import TestCase, main

if '..' not in sys.path:
	sys.path.append('..')

from sympy import Rational

from fieldcov.parser import TheorySyntaxError
from fieldcov.symexpr import base, canonicalize, cov_base, fiber, jet, param
from fieldcov.theory import (FieldDecl, TheoryFileError, TheorySpec, ValidationError, bundled, bundled_names,
                             jet_coords, load_theory, metric_slots, parse_theory, render_theory, validate)


class TheoryTest(TestCase):

	KG1 = '''theory kg1
base 2 (t, x)
param m
field phi : scalar variational
lagrangian D[phi;t]*D[phi;x] - (1/2)*m^2*phi^2
'''

	BUNDLED = ['chern-simons', 'kg1', 'kg2', 'mechanics', 'minimal-coupling', 'oscillator', 'proca',
	           'stueckelberg']

	def setUp(self):
		l, self.path = mkstemp(prefix='field-cov-test-theory-', suffix='.thy')

	def tearDown(self):
		remove(self.path)

	def test_parse(self):
		spec = parse_theory(TheoryTest.KG1)
		phi_t, phi_x = jet('phi', None, [0]), jet('phi', None, [1])
		self.assertEqual('kg1', spec.name)
		self.assertEqual(2, spec.base_dim)
		self.assertEqual(('t', 'x'), spec.coords)
		self.assertEqual(('m',), spec.params)
		self.assertEqual((FieldDecl('phi'),), spec.fields)
		self.assertEqual(1, spec.order)
		self.assertEqual(canonicalize(phi_t * phi_x - Rational(1, 2) * param('m') ** 2 * fiber('phi') ** 2), spec.lagrangian)

	def test_round_trip(self):
		for name in TheoryTest.BUNDLED:
			spec = bundled(name)
			self.assertEqual(spec, parse_theory(render_theory(spec)))

	def test_render(self):
		text = render_theory(parse_theory(TheoryTest.KG1))
		self.assertRegex(text, r'^theory kg1\nbase 2 \(t, x\)\nparam m\nfield phi : scalar variational\nlagrangian ')
		self.assertIs(True, text.endswith('\n'))

	def test_resolve(self):
		spec = TheorySpec('map', ['t', 'x'], [FieldDecl('X', 2, 'covariance'), FieldDecl('g', 3, 'background',
		                                                                            'metric_inverse')])
		self.assertEqual(spec.field('X'), spec.point_map())
		self.assertEqual(cov_base('X', 1), spec.resolve('Xx'))
		self.assertEqual(cov_base('X', 0), spec.resolve('X', 0))
		self.assertEqual(fiber('g', 2), spec.resolve('g', 2))
		self.assertEqual(base(1), spec.resolve('x'))
		self.assertIs(None, spec.resolve('Xy'))
		self.assertIs(None, spec.resolve('g'))
		self.assertEqual(fiber('vol(g)'), spec.volume('g'))
		self.assertIs(None, spec.volume('X'))

	def test_validate(self):
		phi = fiber('phi')
		fields = [FieldDecl('phi'), FieldDecl('g', 3, 'background', 'metric_inverse')]
		self.assertEqual([], validate(TheorySpec('ok', ['t', 'x'], fields, ['m'], param('m') * phi)))

		cases = [(TheorySpec('dup', ['t', 'phi'], [FieldDecl('phi')], [], phi), 'Name declared twice: phi'),
		         (TheorySpec('cov', ['t', 'x'], [FieldDecl('A', 3, geom='covector')], [], 0),
		          'Covector field A needs 2 components'),
		         (TheorySpec('met', ['t', 'x'], [FieldDecl('g', 2, 'background', 'metric_inverse')], [], 0),
		          'Metric field g needs 3 components'),
		         (TheorySpec('bg', ['t', 'x'], fields, [], jet('g', 0, [1])),
		          'Background field g is differentiated, it may appear only to zeroth order'),
		         (TheorySpec('par', ['t'], [FieldDecl('phi')], [], param('k') * phi), 'Undeclared parameter: k'),
		         (TheorySpec('und', ['t'], [FieldDecl('phi')], [], fiber('psi')), 'Undeclared field: psi'),
		         (TheorySpec('ord', ['t'], [FieldDecl('phi')], [], jet('phi', None, [0, 0]), 1),
		          'Lagrangian has jets of order 2 above its order 1'),
		         (TheorySpec('idx', ['t'], [FieldDecl('phi', diff_index=2)], [], phi),
		          'Field phi has differential index 2, at most 1 is supported'),
		         (TheorySpec('geo', ['t'], [FieldDecl('phi', geom='spinor')], [], phi),
		          'Unsupported transformation law of field phi: spinor')]

		for spec, diagnostic in cases:
			self.assertIn(diagnostic, validate(spec))

	def test_invalid(self):
		try:
			parse_theory(TheoryTest.KG1.replace('field phi : scalar variational',
			                                    'field phi : scalar variational\nfield m : scalar variational'))
			self.fail('no validation error')
		except ValidationError as e:
			self.assertEqual(['Name declared twice: m'], e.diagnostics)

		self.assertRaises(TheorySyntaxError, parse_theory, TheoryTest.KG1.replace('D[phi;t]', 'D[phi;y]'))

	def test_jet_coords(self):
		spec = parse_theory(TheoryTest.KG1)
		self.assertEqual([base(0), base(1), fiber('phi')], jet_coords(spec, 0))
		self.assertEqual([base(0), base(1), fiber('phi'), jet('phi', None, [0]), jet('phi', None, [1]),
		                  jet('phi', None, [0, 0]), jet('phi', None, [0, 1]), jet('phi', None, [1, 1])],
		                 jet_coords(spec, 2))
		self.assertEqual(3 + 2 * (1 + 3 + 6), len(jet_coords(bundled('mechanics').replace(coords=['t', 'x', 'y']), 2)))
		self.assertEqual([(0, 0), (0, 1), (1, 1)], metric_slots(2))

	def test_load(self):
		with open(self.path, 'w') as f:
			f.write(TheoryTest.KG1)

		self.assertEqual(parse_theory(TheoryTest.KG1), load_theory(self.path))
		self.assertRaises(TheoryFileError, load_theory, self.path + '.missing')

	def test_bundled(self):
		self.assertEqual(TheoryTest.BUNDLED, bundled_names())
		self.assertEqual(1, bundled('oscillator').base_dim)
		self.assertEqual(['g'], [f.name for f in bundled('kg2').fields_of('background')])
		self.assertRaises(TheoryFileError, bundled, 'nothing')


if __name__ == '__main__':
	main()

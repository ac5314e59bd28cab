# test/cli.py
# vim:ts=4:sw=4:noexpandtab

import sys

from contextlib import redirect_stdout
from io import StringIO
from os.path import join
from shutil import rmtree
from tempfile import mkdtemp
from unittest import TestCase, main

if '..' not in sys.path:
	sys.path.append('..')

from fieldcov.cli import run
from fieldcov.config import Config
from fieldcov.covariantize import covariantize_horizontal
from fieldcov.numerics import load_section
from fieldcov.theory import bundled, load_theory, render_theory


class CliTest(TestCase):

	def setUp(self):
		self.dir = mkdtemp(prefix='field-cov-test-cli-')
		self.out = join(self.dir, 'out')
		self.config = join(self.dir, 'config')

	def tearDown(self):
		rmtree(self.dir)

	def call(self, *argv):
		return run(['-o', self.out, '--config', self.config] + list(argv))

	def output(self):
		with open(self.out) as f:
			return f.read()

	def test_parse(self):
		self.assertEqual(0, self.call('parse', 'oscillator'))
		self.assertEqual(render_theory(bundled('oscillator')), self.output())

	def test_covariantize(self):
		self.assertEqual(0, self.call('covariantize', 'kg1'))
		self.assertEqual(covariantize_horizontal(bundled('kg1')), load_theory(self.out))

	def test_el(self):
		self.assertEqual(0, self.call('el', 'oscillator'))
		self.assertIs(True, self.output().startswith('q = '))

	def test_usage(self):
		self.assertEqual(0, run(['--version']))
		self.assertEqual(2, run(['frobnicate']))
		self.assertEqual(2, self.call('parse', '/nonexistent/x.thy'))
		self.assertEqual(2, self.call('parse', 'nothing'))
		self.assertEqual(2, self.call('sem', 'kg1', '--piola'))
		self.assertEqual(2, self.call('verify'))
		self.assertEqual(2, self.call('verify', 'kg1', '--checks', 'nothing'))

	def test_verify(self):
		self.assertEqual(0, self.call('verify', 'kg1', '--checks', 'round-trip,piola-identity', '--format', 'records'))
		self.assertEqual(['kg1:round-trip render-parse 0 pass', 'piola-identity dim-1 0 pass',
		                  'piola-identity dim-2 0 pass', 'piola-identity dim-3 0 pass'], self.output().splitlines())

	def test_verify_outcomes(self):
		self.assertEqual(0, self.call('verify', 'kg1', '--checks', 'covariance-control', '--samples', '5'))
		self.assertEqual(0, self.call('verify', 'proca', '--checks', 'gauge-shift,gauge-shift-broken'))
		self.assertEqual(1, self.call('verify', 'kg1', '--checks', 'energy-identity', '--format', 'records'))
		self.assertEqual(['kg1-horizontal:energy-identity - - inconclusive'], self.output().splitlines())

	def test_simulate(self):
		self.assertEqual(0, self.call('simulate', 'oscillator', '--span', '0,1', '--step', '1/100'))
		section, names = load_section(self.output())
		self.assertEqual(['t'], names)
		self.assertEqual(101, section.grid.extents[0])
		self.assertEqual(0, run(['--config', self.config, 'dump-section', self.out, '--theory', 'oscillator']))

	def test_ragged_section(self):
		with open(self.out, 'w') as f:
			f.write('# grid 1\n# origin 0\n# spacing 1\n# extents 2\n# columns t q\n0 1\n1\n')

		self.assertEqual(2, run(['--config', self.config, 'dump-section', self.out]))

	def test_help(self):
		text = StringIO()

		with redirect_stdout(text):
			self.assertEqual(0, run(['parse', '--help']))

		self.assertIn('.thy', text.getvalue())

		for name in ['oscillator', 'kg1', 'proca']:
			self.assertIn(name, text.getvalue())

	def test_config(self):
		self.assertEqual(0, self.call('config', 'kg1', '--set', 'samples=7', '--set', 'color=no'))
		self.assertEqual(['[kg1]', 'samples = 7', 'color = no'], self.output().splitlines())
		self.assertEqual(0, self.call('config', 'kg1', '--unset', 'color', '--set', 'checks=covariance, round-trip'))
		self.assertEqual(['[kg1]', 'samples = 7', 'checks = covariance round-trip'], self.output().splitlines())
		Config.init('kg1', self.config)
		self.assertEqual(7, Config.get('samples'))
		self.assertEqual(['covariance', 'round-trip'], Config.get('checks'))
		self.assertEqual(2, self.call('config', '--set', 'samples=many'))
		self.assertEqual(2, self.call('config', '--set', 'frobs=1'))
		self.assertEqual(2, self.call('config', '--set', 'samples'))
		Config.init('kg1', self.config)
		self.assertEqual(7, Config.get('samples'))


if __name__ == '__main__':
	main()

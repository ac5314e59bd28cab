# test/utils.py
# vim:ts=4:sw=4:noexpandtab

import sys

from fractions import Fraction
from unittest import TestCase, main

if '..' not in sys.path:
	sys.path.append('..')

from fieldcov.utils import FieldCovError, Humanizer, Utils


class UtilsTest(TestCase):

	def test_fraction(self):
		self.assertEqual(Fraction(3, 4), Utils.fraction('3/4'))
		self.assertEqual(Fraction(1, 2), Utils.fraction(' 0.5 '))
		self.assertEqual(Fraction(-2), Utils.fraction(-2))
		self.assertRaises(FieldCovError, Utils.fraction, 'half')

	def test_assignments(self):
		self.assertEqual({'m': Fraction(1), 'k': Fraction(1, 3)}, Utils.assignments(['m=1', 'k = 1/3']))
		self.assertEqual({}, Utils.assignments(None))
		self.assertRaises(FieldCovError, Utils.assignments, ['m'])

	def test_error(self):
		e = FieldCovError('broken')
		self.assertEqual('broken', e.message)
		self.assertEqual('broken', str(e))


class HumanizerTest(TestCase):

	INFO = [('check', 'covariance'),
	        ('worst', 0.5),
	        ('seed', None),
	        ('samples', [1, Fraction(1, 2)]),
	        ('ok', True)]

	def test_number(self):
		self.assertEqual('3/4', Humanizer.number(Fraction(3, 4)))
		self.assertEqual('2', Humanizer.number(Fraction(2)))
		self.assertEqual('1.000000e-09', Humanizer.number(1e-9))
		self.assertEqual('7', Humanizer.number(7))

	def test_info(self):
		lines = Humanizer.info(HumanizerTest.INFO).split('\n')
		self.assertEqual(['Check           covariance',
		                  'Worst residual  5.000000e-01',
		                  'Seed            -',
		                  'Samples         1 1/2',
		                  'ok              Yes'], lines)


if __name__ == '__main__':
	main()

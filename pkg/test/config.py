# test/config.py
# vim:ts=4:sw=4:noexpandtab

import sys

from os import remove
from os.path import join
from shutil import rmtree
from tempfile import mkdtemp, mkstemp
from unittest import TestCase, main

if '..' not in sys.path:
	sys.path.append('..')

from fieldcov.config import Config, ConfigError


class ConfigTest(TestCase):

	CONFIG = '''# field-cov-test-config
[all]
samples = 50
color = no
log = .log
checks = round-trip, covariance

[kg1]
samples = 200
seed = 7
tol = 1e-6
log = {path}/kg1.log
checks = covariance vacuous-el
	sem-identity'''

	def setUp(self):
		self.dir = mkdtemp(prefix='field-cov-test-dir-')
		l, self.conf = mkstemp(prefix='field-cov-test-conf-')

		with open(self.conf, 'w') as f:
			f.write(ConfigTest.CONFIG.format(path=self.dir))

		Config.init('kg1', path=self.conf)

	def tearDown(self):
		rmtree(self.dir)
		remove(self.conf)

	def test_get(self):
		self.assertEqual(200, Config.get('samples'))
		self.assertEqual(7, Config.get('seed'))
		self.assertEqual(1e-6, Config.get('tol'))
		self.assertIs(False, Config.get('color'))
		self.assertEqual(join(self.dir, 'kg1.log'), Config.get('log'))
		self.assertEqual(['covariance', 'vacuous-el', 'sem-identity'], Config.get('checks'))
		self.assertEqual(32, Config.get('trials'))
		self.assertIs(None, Config.get('nothing'))
		self.assertEqual('default', Config.get('nothing', 'default'))

	def test_select(self):
		Config.select('mechanics')
		self.assertEqual(50, Config.get('samples'))
		self.assertEqual(42, Config.get('seed'))
		self.assertEqual(['round-trip', 'covariance'], Config.get('checks'))
		self.assertIs(None, Config.get('tol'))

	def test_set(self):
		Config.set('samples', 10)
		self.assertEqual(10, Config.get('samples'))
		Config.set('color', True)
		self.assertIs(True, Config.get('color'))
		Config.set('checks', ['flatness', 'round-trip'])
		self.assertEqual(['flatness', 'round-trip'], Config.get('checks'))
		Config.set('something', [1, 2, 3])
		self.assertEqual('1 2 3', Config.get('something'))

	def test_typed(self):
		self.assertEqual(12, Config.typed('samples', '12'))
		self.assertEqual(1e-6, Config.typed('tol', '1e-6'))
		self.assertIs(False, Config.typed('color', 'No'))
		self.assertEqual(['flatness', 'round-trip'], Config.typed('checks', 'flatness, round-trip'))
		self.assertRaises(ConfigError, Config.typed, 'samples', 'many')
		self.assertRaises(ConfigError, Config.typed, 'color', 'perhaps')
		self.assertRaises(ConfigError, Config.typed, 'nothing', '1')

	def test_remove(self):
		Config.remove('samples')
		self.assertEqual(50, Config.get('samples'))
		Config.remove('seed')
		self.assertEqual(42, Config.get('seed'))
		Config.remove('tol')
		self.assertIs(None, Config.get('tol'))
		Config.select('mechanics')
		Config.remove('samples')
		self.assertEqual([], Config.items())

	def test_items(self):
		self.assertEqual('200', dict(Config.items())['samples'])
		self.assertEqual(['samples', 'seed', 'tol', 'log', 'checks'], [o for o, v in Config.items()])

	def test_save(self):
		Config.init('proca', path=self.conf)
		Config.set('samples', 12)
		Config.set('color', True)
		Config.set('log', '/some/fancy/path')
		Config.save(path=self.conf)
		Config.init('proca', path=self.conf)
		self.assertEqual(12, Config.get('samples'))
		self.assertIs(True, Config.get('color'))
		self.assertEqual('/some/fancy/path', Config.get('log'))

	def test_missing_file(self):
		Config.init('kg1', path=join(self.dir, 'nothing'))
		self.assertEqual(100, Config.get('samples'))
		self.assertEqual(42, Config.get('seed'))

	def test_broken_file(self):
		with open(self.conf, 'w') as f:
			f.write('samples = 3\n[')

		self.assertRaises(ConfigError, Config.init, 'kg1', self.conf)


if __name__ == '__main__':
	main()

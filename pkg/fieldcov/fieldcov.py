# fieldcov.py
# vim:ts=4:sw=4:noexpandtab

from os import sep
from os.path import isfile
from warnings import catch_warnings, simplefilter

import numpy as np

from fieldcov.utils import FieldCovError, Humanizer, Msg, Utils
from fieldcov.config import Config
from fieldcov.log import Log
from fieldcov.theory import TheoryFileError, ValidationError, bundled, bundled_names, load_theory, render_theory
from fieldcov.covariantize import covariantize
from fieldcov.variational import energy, euler_lagrange_all, piola_kirchhoff, sem_tensor
from fieldcov.numerics import (Grid, StiffnessWarning, dump_section, integrate_mechanics, load_section,
                               section_residuals, solve_kg_grid, worst)
from fieldcov.verify import CHECKS, CheckRunner

class FieldCov:
	''' The main class of the field-cov program '''

	#: Exit codes
	OK = 0
	FAILED = 1
	USAGE = 2
	INTERNAL = 3

	#: Covariantization and designated checks of the bundled theories
	THEORIES = {'mechanics': ('horizontal', None, ['round-trip', 'identity-recovery', 'covariance', 'vacuous-el',
	                                               'sem-identity', 'energy-identity', 'piola-kirchhoff']),
	            'oscillator': ('horizontal', None, ['round-trip', 'identity-recovery', 'covariance', 'vacuous-el',
	                                                'energy-identity', 'correspondence']),
	            'kg1': ('horizontal', None, ['round-trip', 'identity-recovery', 'covariance', 'covariance-control',
	                                         'vacuous-el', 'sem-identity', 'piola-identity', 'piola-kirchhoff',
	                                         'correspondence']),
	            'kg2': ('background', None, ['round-trip', 'identity-recovery', 'covariance', 'vacuous-el',
	                                         'sem-identity', 'reduction-kg', 'reduction-kg-euclidean',
	                                         'reduction-kg-massless']),
	            'chern-simons': ('vertical', 'shift', ['round-trip', 'identity-recovery', 'covariance', 'vacuous-el',
	                                                   'gauge-shift', 'sem-identity']),
	            'proca': ('vertical', 'shift', ['round-trip', 'identity-recovery', 'vacuous-el', 'gauge-shift',
	                                            'gauge-shift-broken', 'sem-identity']),
	            'stueckelberg': (None, None, ['round-trip', 'vacuous-el', 'gauge-shift', 'sem-identity']),
	            'minimal-coupling': ('vertical', 'minimal', ['round-trip', 'identity-recovery', 'vacuous-el',
	                                                         'gauge-minimal', 'flatness', 'sem-identity'])}

	#: Checks run on theories without a designation
	DEFAULT_CHECKS = ['round-trip', 'identity-recovery', 'covariance', 'vacuous-el', 'sem-identity']

	#: Output path, None means stdout
	_output = None

	@staticmethod
	def init(output=None, config_file=Config.CONFIGFILE):
		''' Loads the config, opens the log and sets the output path '''
		Config.init(Config.ALL, config_file)
		Log.init(Config.get('log'))
		Msg.color = Config.get('color', True)
		FieldCov._output = output

	@staticmethod
	def shutdown(status=OK):
		''' Cleans up and returns the exit status '''
		Log.close()
		return status

	@staticmethod
	def error(error):
		''' Prints and logs the error, returns the exit status it maps to '''
		if isinstance(error, ValidationError):
			for d in error.diagnostics:
				Msg.error(d)
				Log.error(d)
		else:
			Msg.error(error.message)
			Log.error(error.message)

		return FieldCov.shutdown(FieldCov.USAGE)

	@staticmethod
	def emit(text):
		''' Writes results to the output file, or prints them '''
		if FieldCov._output is None:
			Msg.info(text.rstrip('\n'))
			return

		try:
			with open(FieldCov._output, 'w', encoding='utf8') as f:
				f.write(text if text.endswith('\n') else text + '\n')
		except OSError:
			raise FieldCovError(_('Could not write output file: {0}').format(FieldCov._output))

	@staticmethod
	def load(path):
		''' Loads a theory file, or a bundled theory by name '''
		if isfile(path):
			return load_theory(path)

		if sep not in path and not path.endswith('.thy'):
			return bundled(path)

		raise TheoryFileError(_('No such theory file: {0}').format(path))

	@staticmethod
	def designation(spec, mode=None, action=None):
		''' Returns mode, action and checks for a theory, flags override the designation '''
		default = FieldCov.THEORIES.get(spec.name, ('horizontal', None, FieldCov.DEFAULT_CHECKS))
		return mode or default[0], action or default[1], default[2]

	@staticmethod
	def covariantized(spec, mode, action=None):
		''' Covariantizes a theory, theories already carrying covariance fields stay as they are '''
		if mode is None or spec.fields_of('covariance'):
			return spec

		Log.log(_('Covariantizing {0} ({1})').format(spec.name, mode))
		return covariantize(spec, mode, action)

	@staticmethod
	def parse(path):
		''' Prints the canonical form of a theory '''
		FieldCov.emit(render_theory(FieldCov.load(path)))

	@staticmethod
	def covariantize(path, mode=None, action=None):
		''' Prints the covariantized theory '''
		spec = FieldCov.load(path)
		mode, action, checks = FieldCov.designation(spec, mode, action)
		FieldCov.emit(render_theory(FieldCov.covariantized(spec, mode, action)))

	@staticmethod
	def el(path):
		''' Prints the Euler-Lagrange residuals of every varied field '''
		spec = FieldCov.load(path)
		lines = ['{0} = {1}'.format(label, text) for label, text in euler_lagrange_all(spec).render(spec)]
		FieldCov.emit('\n'.join(lines))

	@staticmethod
	def sem(path, piola=False):
		''' Prints the canonical stress-energy-momentum tensor, or its Piola transform '''
		spec = FieldCov.load(path)
		tensor = piola_kirchhoff(spec) if piola else sem_tensor(spec)
		FieldCov.emit('\n'.join('{0} = {1}'.format(label, text) for label, text in tensor.render(spec)))

	@staticmethod
	def energy(path):
		''' Prints the energy of a theory over one base coordinate '''
		spec = FieldCov.load(path)
		FieldCov.emit('E = {0}'.format(spec.render(energy(spec))))

	@staticmethod
	def options(theory, samples=None, seed=None, tol=None, trials=None):
		''' Check options: flags first, then the theory's config section, then the defaults '''
		Config.select(theory)
		o = {'samples': samples if samples is not None else Config.get('samples'),
		     'seed': seed if seed is not None else Config.get('seed'),
		     'trials': trials if trials is not None else Config.get('trials'),
		     'tol': tol if tol is not None else Config.get('tol')}
		Config.select(Config.ALL)
		return o

	@staticmethod
	def configure(path, theory=None, assignments=None, unset=None):
		''' Sets and removes options in the section of a theory, or in the global one, saves the
		config file and prints the section '''
		Config.select(theory or Config.ALL)

		for pair in assignments or ():
			if '=' not in pair:
				raise FieldCovError(_('Expected name=value: {0}').format(pair))

			option, val = (s.strip() for s in pair.split('=', 1))
			Config.set(option, Config.typed(option, val))

		for option in unset or ():
			Config.remove(option.strip())

		Config.save(path)
		Log.log(_('Saved section {0} of {1}').format(theory or Config.ALL, path))
		lines = ['[{0}]'.format(theory or Config.ALL)] + ['{0} = {1}'.format(*item) for item in Config.items()]
		Config.select(Config.ALL)
		FieldCov.emit('\n'.join(lines))

	@staticmethod
	def tasks(paths, checks=None, mode=None, action=None, flags=None):
		''' Builds (check, spec, spec_tilde, options) tasks for the theories '''
		tasks = []

		for path in paths:
			spec = FieldCov.load(path)
			mode_, action_, designated = FieldCov.designation(spec, mode, action)
			Config.select(spec.name)
			selected = checks or Config.get('checks', designated)
			Config.select(Config.ALL)

			for name in selected:
				if name not in CHECKS:
					raise FieldCovError(_('Unknown check: {0}').format(name))

			Msg.process(_('Preparing {0}').format(spec.name))
			spec_tilde = FieldCov.covariantized(spec, mode_, action_)
			o = FieldCov.options(spec.name, **(flags or {}))
			tasks.extend((name, spec, spec_tilde, o) for name in selected)

		return tasks

	@staticmethod
	def verify(paths, checks=None, mode=None, action=None, fmt='text', flags=None):
		''' Runs checks and prints the reports, returns the exit status '''
		if not paths:
			paths = bundled_names()

		tasks = FieldCov.tasks(paths, checks, mode, action, flags)
		Msg.process(_('Running {0} checks').format(len(tasks)))
		reports = CheckRunner.forge(tasks)

		if fmt == 'records':
			FieldCov.emit('\n'.join(line for r in reports for line in r.records()))
		else:
			FieldCov.emit('\n\n'.join(Humanizer.info(r.info()) for r in reports))

		failed = [r for r in reports if not r.ok]

		for r in failed:
			Msg.error(_('Unexpected outcome: {0} is {1}, expected {2}').format(r.label, r.status, r.expected))
			Log.error(_('Unexpected outcome: {0} is {1}, expected {2}').format(r.label, r.status, r.expected))

		Log.log(_('Ran {0} checks, {1} as expected').format(len(reports), len(reports) - len(failed)))
		return FieldCov.FAILED if failed else FieldCov.OK

	@staticmethod
	def _numbers(text, count=None):
		values = [Utils.fraction(v) for v in text.split(',')] if text else []

		if count is not None and len(values) != count:
			raise FieldCovError(_('Expected {0} comma separated numbers: {1}').format(count, text))

		return values

	@staticmethod
	def simulate(path, params=None, q0=None, qdot0=None, span='0,1', step='1/1000', wave='1,1/2', points=257):
		''' Integrates a mechanics theory or marches a two dimensional wave theory,
		prints a summary and writes the section '''
		spec = FieldCov.load(path)
		params = dict(params or {})

		if spec.base_dim == 1:
			count = sum(f.components for f in spec.fields_of('variational'))
			lower, upper = FieldCov._numbers(span, 2)
			h = FieldCov._numbers(step, 1)[0]
			start = FieldCov._numbers(q0, count) if q0 else [1] * count
			velocity = FieldCov._numbers(qdot0, count) if qdot0 else [0] * count
			Msg.process(_('Integrating {0} on [{1}, {2}]').format(spec.name, lower, upper))

			with catch_warnings(record=True) as caught:
				simplefilter('always', StiffnessWarning)
				section = integrate_mechanics(spec, [float(v) for v in start], [float(v) for v in velocity],
				                              (float(lower), float(upper)), float(h), params)

			for w in caught:
				Msg.error(str(w.message))
				Log.error(str(w.message))
		elif spec.base_dim == 2:
			omega, k = [float(v) for v in FieldCov._numbers(wave, 2)]
			grid = Grid.span([0, 0], [1, 1], [points, points])
			t, x = grid.axes()
			boundary = {'t': np.cos(omega * t), 'x': np.cos(k * x)}
			Msg.process(_('Marching {0} on a {1}x{1} grid').format(spec.name, points))
			section = solve_kg_grid(spec, grid, boundary, params)
		else:
			raise FieldCovError(_('Simulations need one or two base coordinates'))

		Log.log(_('Simulated {0}, residual {1}').format(spec.name, section.residual))
		text = dump_section(section, spec.coords)

		if FieldCov._output is None:
			Msg.info(text.rstrip('\n'))
			return

		FieldCov.emit(text)
		FieldCov.section_info(section, spec.coords)

	@staticmethod
	def section_info(section, names):
		grid = section.grid
		info = [('origin', [float(o) for o in grid.origin]),
		        ('spacing', [float(h) for h in grid.spacing]),
		        ('extents', list(grid.extents)),
		        ('fields', ' '.join(sorted('{0}[{1}]'.format(*k) if k[1] is not None else k[0]
		                                   for k in section.keys()))),
		        ('residual', section.residual)]
		Msg.info(Humanizer.info(info))

	@staticmethod
	def dump_section(path, theory=None, params=None):
		''' Prints the summary of a section file, with a theory also its residual '''
		try:
			with open(path, encoding='utf8') as f:
				section, names = load_section(f.read())
		except OSError:
			raise FieldCovError(_('Could not read section file: {0}').format(path))

		if theory is not None:
			spec = FieldCov.load(theory)
			section.residual = worst(section_residuals(spec, section, params=params))

		FieldCov.section_info(section, names)

# theory.py
# vim:ts=4:sw=4:noexpandtab

from os import listdir
from os.path import abspath, dirname, isdir, isfile, join
from sys import prefix as sys_prefix
from itertools import combinations_with_replacement

from sympy import sympify

from fieldcov.utils import FieldCovError
from fieldcov.parser import ExprParser, TheoryParser
from fieldcov.symexpr import (base, canonicalize, coords, cov_base, fiber, jet_order, param, render)

class ValidationError(FieldCovError):
	''' Handles theories violating their invariants '''

	def __init__(self, diagnostics):
		''' Sets the list of diagnostics '''
		super().__init__(_('Invalid theory: {0}').format('; '.join(diagnostics)))
		self._diagnostics = list(diagnostics)

	@property
	def diagnostics(self):
		''' Returns the diagnostics '''
		return self._diagnostics


class FieldDecl:
	''' A declared field: name, number of components, kind and geometry '''

	#: Field kinds
	KINDS = ('variational', 'background', 'covariance')

	#: Geometric types and their differential index
	GEOMS = {'scalar': 0,
	         'covector': 1,
	         'metric_inverse': 1,
	         'lie_oneform': 1}

	def __init__(self, name, components=1, kind='variational', geom='scalar', diff_index=None):
		''' Sets the declaration, the differential index follows from the geometry by default '''
		self._name = name
		self._components = int(components)
		self._kind = kind
		self._geom = geom
		self._diff_index = FieldDecl.GEOMS.get(geom, 0) if diff_index is None else int(diff_index)

	@property
	def name(self):
		return self._name

	@property
	def components(self):
		return self._components

	@property
	def kind(self):
		return self._kind

	@property
	def geom(self):
		return self._geom

	@property
	def diff_index(self):
		return self._diff_index

	def _key(self):
		return (self._name, self._components, self._kind, self._geom, self._diff_index)

	def __eq__(self, other):
		return isinstance(other, FieldDecl) and self._key() == other._key()

	def __hash__(self):
		return hash(self._key())

	def __repr__(self):
		return 'FieldDecl{0!r}'.format(self._key())


class TheorySpec:
	''' A declared field theory. Immutable, the Lagrangian is kept canonicalized '''

	def __init__(self, name, coords, fields=(), params=(), lagrangian=0, order=None):
		''' Sets the theory, order defaults to the jet order of the Lagrangian (at least 1) '''
		self._name = name
		self._coords = tuple(coords)
		self._fields = tuple(fields)
		self._params = tuple(params)
		self._lagrangian = canonicalize(sympify(lagrangian))
		self._order = max(1, jet_order(self._lagrangian)) if order is None else int(order)

	@property
	def name(self):
		return self._name

	@property
	def base_dim(self):
		''' Returns n+1, the dimension of the base '''
		return len(self._coords)

	@property
	def coords(self):
		''' Returns the base coordinate names '''
		return self._coords

	@property
	def fields(self):
		return self._fields

	@property
	def params(self):
		return self._params

	@property
	def lagrangian(self):
		return self._lagrangian

	@property
	def order(self):
		return self._order

	def replace(self, **changes):
		''' Returns a copy with some attributes changed '''
		attrs = {'name': self._name, 'coords': self._coords, 'fields': self._fields,
		         'params': self._params, 'lagrangian': self._lagrangian, 'order': None}
		attrs.update(changes)
		return TheorySpec(**attrs)

	def _key(self):
		return (self._name, self._coords, self._fields, self._params, self._order)

	def __eq__(self, other):
		return (isinstance(other, TheorySpec) and self._key() == other._key()
		        and self._lagrangian == other._lagrangian)

	def __hash__(self):
		return hash(self._key())

	def __repr__(self):
		return 'TheorySpec({0!r})'.format(self._name)

	def field(self, name):
		''' Returns the declaration of a field, None if there is none '''
		for f in self._fields:
			if f.name == name:
				return f
		return None

	def fields_of(self, *kinds):
		''' Returns the fields of the given kinds in declaration order '''
		return [f for f in self._fields if f.kind in kinds]

	def is_point_map(self, f):
		''' Covariance fields with one scalar component per base coordinate are maps of the base '''
		return f.kind == 'covariance' and f.geom == 'scalar' and f.components == self.base_dim

	def point_map(self):
		''' Returns the covariance field acting as a map of the base, None if there is none '''
		for f in self._fields:
			if self.is_point_map(f):
				return f
		return None

	def components(self, f):
		''' Returns the order zero coordinates of a field '''
		if isinstance(f, str):
			f = self.field(f)

		if self.is_point_map(f):
			return [cov_base(f.name, a) for a in range(f.components)]

		if f.components == 1:
			return [fiber(f.name)]

		return [fiber(f.name, i) for i in range(f.components)]

	def coord_index(self, name):
		''' Returns the index of a base coordinate '''
		try:
			return self._coords.index(name)
		except ValueError:
			return None

	def volume(self, name):
		''' Returns the volume coordinate sqrt|det g| of a metric background '''
		f = self.field(name)

		if f is None or f.geom != 'metric_inverse':
			return None

		return fiber('vol({0})'.format(name))

	def resolve(self, name, comp=None):
		''' Resolves a name of the theory format to a coordinate '''
		if comp is None and name in self._coords:
			return base(self._coords.index(name))

		if comp is None and name in self._params:
			return param(name)

		f = self.field(name)

		if f is not None:
			if comp is None:
				return self.components(f)[0] if f.components == 1 else None

			return self.components(f)[comp] if comp < f.components else None

		if comp is None:
			for f in self._fields:
				if self.is_point_map(f) and name.startswith(f.name) and name[len(f.name):] in self._coords:
					return cov_base(f.name, self._coords.index(name[len(f.name):]))

		return None

	def render(self, e):
		''' Renders an expression with this theory's coordinate names '''
		return render(e, self._coords)


def metric_slots(n):
	''' Index pairs (mu, nu), mu <= nu, of the stored components of a symmetric tensor '''
	return list(combinations_with_replacement(range(n), 2))


def validate(spec):
	''' Returns the list of violated invariants, empty for a valid theory '''
	diagnostics = []
	n = spec.base_dim
	names = list(spec.coords) + list(spec.params) + [f.name for f in spec.fields]

	if n < 1:
		diagnostics.append(_('Base dimension must be at least 1'))

	for name in sorted(set(names)):
		if names.count(name) > 1:
			diagnostics.append(_('Name declared twice: {0}').format(name))

	if spec.order not in (1, 2):
		diagnostics.append(_('Lagrangian order must be 1 or 2, not {0}').format(spec.order))

	for f in spec.fields:
		if f.kind not in FieldDecl.KINDS:
			diagnostics.append(_('Unknown kind of field {0}: {1}').format(f.name, f.kind))

		if f.geom not in FieldDecl.GEOMS:
			diagnostics.append(_('Unsupported transformation law of field {0}: {1}').format(f.name, f.geom))
			continue

		if f.components < 1:
			diagnostics.append(_('Field {0} needs at least one component').format(f.name))

		if f.diff_index > 1:
			diagnostics.append(_('Field {0} has differential index {1}, at most 1 is supported')
			                   .format(f.name, f.diff_index))
		elif f.diff_index != FieldDecl.GEOMS[f.geom]:
			diagnostics.append(_('Field {0}: {1} fields have differential index {2}')
			                   .format(f.name, f.geom, FieldDecl.GEOMS[f.geom]))

		if f.geom == 'covector' and f.components != n:
			diagnostics.append(_('Covector field {0} needs {1} components').format(f.name, n))

		if f.geom == 'metric_inverse' and f.components != len(metric_slots(n)):
			diagnostics.append(_('Metric field {0} needs {1} components').format(f.name, len(metric_slots(n))))

		if f.geom == 'lie_oneform' and f.components % n:
			diagnostics.append(_('Connection field {0} needs a multiple of {1} components').format(f.name, n))

		if f.kind == 'background' and f.geom == 'lie_oneform':
			diagnostics.append(_('Background field {0}: connections are not supported as backgrounds')
			                   .format(f.name))

		if f.kind == 'covariance' and f.geom == 'scalar' and f.components not in (1, n):
			diagnostics.append(_('Covariance field {0} needs {1} components, or 1 for a shift')
			                   .format(f.name, n))

		if f.kind == 'covariance' and f.geom in ('covector', 'metric_inverse'):
			diagnostics.append(_('Covariance field {0} must be a scalar or a connection').format(f.name))

	order = jet_order(spec.lagrangian)

	if order > spec.order:
		diagnostics.append(_('Lagrangian has jets of order {0} above its order {1}').format(order, spec.order))

	for c in coords(spec.lagrangian):
		kind, name = c.coord_kind, c.field_id

		if kind == 'base':
			if c.slot >= n:
				diagnostics.append(_('Unknown base coordinate index: {0}').format(c.slot))
			continue

		if kind == 'param':
			if name not in spec.params:
				diagnostics.append(_('Undeclared parameter: {0}').format(name))
			continue

		if name.startswith('vol(') and c.coord_kind == 'fiber':
			if spec.volume(name[4:-1]) != c:
				diagnostics.append(_('Volume of an undeclared metric: {0}').format(name))
			continue

		f = spec.field(name)

		if f is None:
			diagnostics.append(_('Undeclared field: {0}').format(name))
			continue

		if c.lower() not in spec.components(f):
			diagnostics.append(_('Field {0} has no component {1}').format(name, c.slot))

		if f.kind == 'background' and c.jet_order > 0:
			diagnostics.append(_('Background field {0} is differentiated, it may appear only to zeroth order')
			                   .format(name))

		if f.kind == 'covariance' and c.jet_order > 1:
			diagnostics.append(_('Covariance field {0} appears with jets of order {1}, at most 1 is supported')
			                   .format(name, c.jet_order))

	return diagnostics


def jet_coords(spec, upto):
	''' Enumerates base, fiber and jet coordinates through order upto. Fields come in
	declaration order; within a field all components of one order come before the
	next order, multi-indices in lexicographic order '''
	if not 0 <= upto <= 2:
		raise FieldCovError(_('Jet coordinates are available up to order 2'))

	n = spec.base_dim
	result = [base(mu) for mu in range(n)]

	for f in spec.fields:
		comps = spec.components(f)
		result.extend(comps)

		for s in range(1, upto + 1):
			for c in comps:
				result.extend(c.prolong(*multi) for multi in combinations_with_replacement(range(n), s))

	return result


def parse_theory(text):
	''' Parses and validates a theory source '''
	info = TheoryParser(text).parse()
	fields = [FieldDecl(name, comps, kind, geom) for name, comps, geom, kind in info['fields']]
	scope = TheorySpec(info['name'], info['coords'], fields, info['params'])
	source, line, column = info['lagrangian']
	lagrangian = ExprParser(source, scope, line, column).parse()
	spec = scope.replace(lagrangian=lagrangian)
	diagnostics = validate(spec)

	if diagnostics:
		raise ValidationError(diagnostics)

	return spec


def render_theory(spec):
	''' Renders a theory in the format read by parse_theory '''
	lines = ['theory {0}'.format(spec.name),
	         'base {0} ({1})'.format(spec.base_dim, ', '.join(spec.coords))]

	if spec.params:
		lines.append('param {0}'.format(', '.join(spec.params)))

	for f in spec.fields:
		comps = '[{0}]'.format(f.components) if f.components > 1 else ''
		lines.append('field {0}{1} : {2} {3}'.format(f.name, comps, f.geom, f.kind))

	lines.append('lagrangian {0}'.format(spec.render(spec.lagrangian)))
	return '\n'.join(lines) + '\n'


class TheoryFileError(FieldCovError):
	''' Handles unreadable theory files '''
	pass


#: Directories searched for bundled theories
THEORY_DIRS = [join(dirname(dirname(abspath(__file__))), 'share', 'theories'),
               join(sys_prefix, 'share', 'field-cov', 'theories'),
               '/usr/share/field-cov/theories']


def load_theory(path):
	''' Reads and parses a theory file '''
	try:
		with open(path, encoding='utf8') as f:
			text = f.read()
	except (OSError, UnicodeDecodeError):
		raise TheoryFileError(_('Could not read theory file: {0}').format(path))

	return parse_theory(text)


def bundled_path(name):
	''' Returns the path of a bundled theory '''
	for d in THEORY_DIRS:
		path = join(d, '{0}.thy'.format(name))

		if isfile(path):
			return path

	raise TheoryFileError(_('No bundled theory: {0}').format(name))


def bundled_names():
	''' Returns the names of the bundled theories '''
	for d in THEORY_DIRS:
		if isdir(d):
			return sorted(f[:-4] for f in listdir(d) if f.endswith('.thy'))

	return []


def bundled(name):
	''' Parses a bundled theory '''
	return load_theory(bundled_path(name))

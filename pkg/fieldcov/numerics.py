# numerics.py
# vim:ts=4:sw=4:noexpandtab

from fractions import Fraction
from itertools import product
from warnings import warn

import numpy as np
from sympy import Rational, diff, lambdify

from fieldcov.utils import FieldCovError
from fieldcov.symexpr import HARMONIC, base, canonicalize, coords, opaque_nodes, partial, substitute
from fieldcov.covariantize import spatial_map
from fieldcov.variational import residual, energy

class NumericsError(FieldCovError):
	''' Handles errors of the discrete solvers '''
	pass


class UnstableScheme(NumericsError):
	''' Raised when a marching residual grows far beyond its initial truncation estimate '''
	pass


class GridTooCoarse(NumericsError):
	''' Raised when the truncation error of a grid dominates a tolerance '''
	pass


class StiffnessWarning(UserWarning):
	''' Issued when the energy drifts by more than 1% in one step '''
	pass


class Grid:
	''' A uniform lattice: origin, spacing and number of points per axis '''

	def __init__(self, origin, spacing, extents):
		''' Sets the lattice, spacing must be positive and extents at least 1 '''
		self._origin = tuple(float(o) for o in origin)
		self._spacing = tuple(float(h) for h in spacing)
		self._extents = tuple(int(n) for n in extents)

		if not len(self._origin) == len(self._spacing) == len(self._extents):
			raise NumericsError(_('Origin, spacing and extents need one entry per axis'))

		if any(h <= 0 for h in self._spacing):
			raise NumericsError(_('Grid spacing must be positive'))

		if any(n < 1 for n in self._extents):
			raise NumericsError(_('Grid extents must be positive'))

	@staticmethod
	def span(lower, upper, points):
		''' Grid from per axis bounds, points per axis including both ends '''
		spacing = [(u - l) / (n - 1) for l, u, n in zip(lower, upper, points)]
		return Grid(lower, spacing, points)

	@property
	def origin(self):
		return self._origin

	@property
	def spacing(self):
		return self._spacing

	@property
	def extents(self):
		return self._extents

	@property
	def dim(self):
		return len(self._extents)

	@property
	def shape(self):
		return self._extents

	def axes(self):
		''' Returns the coordinate values along every axis '''
		return [o + h * np.arange(n) for o, h, n in zip(self._origin, self._spacing, self._extents)]

	def mesh(self):
		''' Returns the coordinate arrays of every grid point '''
		return np.meshgrid(*self.axes(), indexing='ij')

	def __eq__(self, other):
		return (isinstance(other, Grid) and self._origin == other._origin
		        and self._spacing == other._spacing and self._extents == other._extents)


class DiscreteSection:
	''' Field values on a grid, keyed by (field, component) '''

	def __init__(self, grid, values=None, boundary=None):
		''' Sets the grid, the value arrays and a record of the fixed boundary data '''
		self._grid = grid
		self._values = {}
		self._boundary = dict(boundary or {})
		self.residual = None

		for key, array in (values or {}).items():
			self[key] = array

	@property
	def grid(self):
		return self._grid

	@property
	def boundary(self):
		return self._boundary

	def keys(self):
		return list(self._values.keys())

	def items(self):
		return list(self._values.items())

	def __getitem__(self, key):
		return self._values[key]

	def __setitem__(self, key, array):
		array = np.asarray(array, dtype=float)

		if array.shape != self._grid.shape:
			raise NumericsError(_('Values of {0} have shape {1}, the grid has {2}')
			                    .format(_label(key), array.shape, self._grid.shape))

		self._values[key] = array

	def __contains__(self, key):
		return key in self._values

	def copy(self):
		section = DiscreteSection(self._grid, dict((k, v.copy()) for k, v in self._values.items()), self._boundary)
		section.residual = self.residual
		return section

	def shifted(self, bump, eps):
		''' Returns the section with eps * bump added '''
		section = self.copy()

		for key, array in bump.items():
			section[key] = section[key] + eps * np.asarray(array, dtype=float)

		return section


def _label(key):
	name, comp = key
	return name if comp is None else '{0}[{1}]'.format(name, comp)


def _key(label):
	if label.endswith(']') and '[' in label:
		name, comp = label[:-1].split('[', 1)
		return name, int(comp)

	return label, None


def _compile(e, params, interp):
	''' Returns the coordinates of e and a numpy function of them '''
	if opaque_nodes(e):
		e = (interp or HARMONIC).apply(e)

	values = {}

	for c in coords(e):
		if c.coord_kind != 'param':
			continue

		if c.field_id not in (params or {}):
			raise NumericsError(_('No value for parameter: {0}').format(c.field_id))

		v = params[c.field_id]
		values[c] = Rational(v.numerator, v.denominator) if isinstance(v, Fraction) else v

	e = e.xreplace(values)
	syms = coords(e)
	return syms, lambdify(syms, e, modules='numpy', dummify=True)


def _evaluate(e, arrays, shape, params, interp):
	syms, fn = _compile(e, params, interp)

	try:
		args = [arrays[s] for s in syms]
	except KeyError as err:
		raise NumericsError(_('No values for coordinate: {0}').format(err.args[0]))

	return np.broadcast_to(np.asarray(fn(*args), dtype=float), shape)


def _interior(f, shifts):
	return f[tuple(slice(1 + shifts.get(axis, 0), n - 1 + shifts.get(axis, 0)) for axis, n in enumerate(f.shape))]


def _difference(f, multi, spacing):
	''' Centred difference of f on the interior points for a multi-index of order 1 or 2 '''
	if len(multi) == 1:
		mu, = multi
		return (_interior(f, {mu: 1}) - _interior(f, {mu: -1})) / (2 * spacing[mu])

	mu, nu = multi

	if mu == nu:
		return (_interior(f, {mu: 1}) - 2 * _interior(f, {}) + _interior(f, {mu: -1})) / spacing[mu] ** 2

	return (_interior(f, {mu: 1, nu: 1}) - _interior(f, {mu: 1, nu: -1}) - _interior(f, {mu: -1, nu: 1})
	        + _interior(f, {mu: -1, nu: -1})) / (4 * spacing[mu] * spacing[nu])


def _interior_jets(spec, section, upto):
	''' Coordinate arrays on the interior points, jets by centred differences '''
	grid = section.grid

	if any(n < 3 for n in grid.extents):
		raise GridTooCoarse(_('Centred differences need at least 3 points per axis'))

	arrays = dict((base(mu), _interior(x, {})) for mu, x in enumerate(grid.mesh()))

	for f in spec.fields_of('variational', 'covariance', 'background'):
		for c in spec.components(f):
			key = (f.name, c.slot)

			if key not in section:
				continue

			values = section[key]
			arrays[c] = _interior(values, {})

			for s in range(1, upto + 1):
				for multi in product(range(grid.dim), repeat=s):
					if list(multi) == sorted(multi):
						arrays[c.prolong(*multi)] = _difference(values, multi, grid.spacing)

	return arrays


def section_residuals(spec, section, field=None, params=None, interp=None):
	''' Euler-Lagrange residuals on the interior of a section '''
	if spec.base_dim != section.grid.dim:
		raise NumericsError(_('Section and theory dimensions differ'))

	arrays = _interior_jets(spec, section, 2)
	shape = tuple(n - 2 for n in section.grid.extents)
	fields = [spec.field(field)] if field is not None else spec.fields_of('variational', 'covariance')
	residuals = {}

	for f in fields:
		for c in spec.components(f):
			residuals[f.name, c.slot] = _evaluate(residual(spec, c), arrays, shape, params, interp)

	return residuals


def pulled_back_residuals(spec, spec_tilde, body, params=None, interp=None):
	''' Euler-Lagrange residuals of the original theory at the images of the interior points of a
	body section of its horizontal covariantization.

	Spatial jets are rewritten into jets of the body fields and of the point map by the chain rule,
	so the section is never resampled '''
	if spec_tilde.base_dim != body.grid.dim:
		raise NumericsError(_('Section and theory dimensions differ'))

	mapping = spatial_map(spec_tilde, order=2)
	arrays = _interior_jets(spec_tilde, body, 2)
	shape = tuple(n - 2 for n in body.grid.extents)
	residuals = {}

	for f in spec.fields_of('variational'):
		for c in spec.components(f):
			e = substitute(residual(spec, c), mapping)
			residuals[f.name, c.slot] = _evaluate(e, arrays, shape, params, interp)

	return residuals


def worst(residuals):
	''' Largest absolute value over a dict of residual arrays '''
	return max([float(np.max(np.abs(r))) if r.size else 0.0 for r in residuals.values()] + [0.0])


def _prolong_fixed(fixed):
	''' Prolongs fixed values of dim 1 fields, given as expressions in t, to second jets '''
	t = base(0)
	mapping = {}

	for c, e in fixed.items():
		mapping[c] = e
		mapping[c.prolong(0)] = diff(e, t)
		mapping[c.prolong(0, 0)] = diff(e, t, 2)

	return mapping


def integrate_mechanics(spec, q0, qdot0, span, h, params=None, interp=None, fixed=None):
	''' Integrates the Euler-Lagrange equations of a dim 1 theory with fixed step RK4.

	fixed maps order zero coordinates of fields held fixed (covariance fields of a
	covariantized theory) to expressions in t '''
	if spec.base_dim != 1:
		raise NumericsError(_('Mechanics needs a theory over one base coordinate'))

	if h <= 0:
		raise NumericsError(_('Step size must be positive'))

	if spec.order > 1:
		raise NumericsError(_('Mechanics needs a first order Lagrangian'))

	fixed = dict(fixed or {})
	held = set(c.field_id for c in fixed)
	reduced = spec.replace(lagrangian=substitute(spec.lagrangian, _prolong_fixed(fixed)),
	                       fields=[f for f in spec.fields if f.name not in held])

	if reduced.fields_of('covariance'):
		raise NumericsError(_('Covariance fields must be fixed to integrate their theory'))

	q = [c for f in reduced.fields_of('variational') for c in reduced.components(f)]
	q0 = np.atleast_1d(np.asarray(q0, dtype=float))
	qdot0 = np.atleast_1d(np.asarray(qdot0, dtype=float))

	if len(q0) != len(q) or len(qdot0) != len(q):
		raise NumericsError(_('Initial data needs {0} values').format(len(q)))

	t = base(0)
	v = [c.prolong(0) for c in q]
	a = [c.prolong(0, 0) for c in q]
	residuals = [residual(reduced, c) for c in q]
	mass = [[partial(r, b) for b in a] for r in residuals]
	force = [substitute(r, dict((b, 0) for b in a)) for r in residuals]
	args = [t] + q + v
	mass_fn = [[_function(e, args, params, interp) for e in row] for row in mass]
	force_fn = [_function(e, args, params, interp) for e in force]

	def accel(time, x, xdot):
		point = [time] + list(x) + list(xdot)
		M = np.array([[fn(*point) for fn in row] for row in mass_fn], dtype=float)
		F = np.array([fn(*point) for fn in force_fn], dtype=float)

		try:
			return np.linalg.solve(M, -F)
		except np.linalg.LinAlgError:
			raise NumericsError(_('Degenerate Lagrangian at t = {0}').format(time))

	lower, upper = span
	steps = int(round((upper - lower) / h))
	times = lower + h * np.arange(steps + 1)
	X = np.zeros((steps + 1, len(q)))
	V = np.zeros((steps + 1, len(q)))
	X[0], V[0] = q0, qdot0

	energy_fn = None

	if t not in coords(reduced.lagrangian):
		energy_fn = _function(energy(reduced), args, params, interp)

	warned = False

	for i in range(steps):
		ti, x, xd = times[i], X[i], V[i]
		k1x, k1v = xd, accel(ti, x, xd)
		k2x, k2v = xd + h / 2 * k1v, accel(ti + h / 2, x + h / 2 * k1x, xd + h / 2 * k1v)
		k3x, k3v = xd + h / 2 * k2v, accel(ti + h / 2, x + h / 2 * k2x, xd + h / 2 * k2v)
		k4x, k4v = xd + h * k3v, accel(ti + h, x + h * k3x, xd + h * k3v)
		X[i + 1] = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
		V[i + 1] = xd + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)

		if energy_fn is not None and not warned:
			e0 = energy_fn(ti, *(list(x) + list(xd)))
			e1 = energy_fn(times[i + 1], *(list(X[i + 1]) + list(V[i + 1])))

			if abs(e1 - e0) > 0.01 * max(abs(e0), 1e-12):
				warn(_('Energy drifts by more than 1% at t = {0}').format(ti), StiffnessWarning)
				warned = True

	values = dict(((c.field_id, c.slot), X[:, i]) for i, c in enumerate(q))

	for c, e in fixed.items():
		values[c.field_id, c.slot] = np.broadcast_to(np.asarray(lambdify([t], e, 'numpy', dummify=True)(times),
		                                                        dtype=float), times.shape)

	boundary = {'q0': list(q0), 'qdot0': list(qdot0)}
	section = DiscreteSection(Grid([lower], [h], [steps + 1]), values, boundary)

	if steps >= 2:
		section.residual = worst(section_residuals(spec, section, params=params, interp=interp))

	return section


def _function(e, args, params, interp):
	''' Numeric function of the given coordinates '''
	syms, fn = _compile(canonicalize(e), params, interp)
	index = [args.index(s) for s in syms]

	def call(*point):
		return float(fn(*[point[i] for i in index]))

	return call


def _kg_coefficients(spec, params, interp):
	''' Splits the residual of a dim 2 scalar theory as a phi_tx + b phi with constant a, b '''
	fields = spec.fields_of('variational')

	if spec.base_dim != 2 or len(fields) != 1 or fields[0].components != 1:
		raise NumericsError(_('The grid solver needs one scalar field over two base coordinates'))

	phi = spec.components(fields[0])[0]
	el = residual(spec, phi)
	a, b = partial(el, phi.prolong(0, 1)), partial(el, phi)

	if canonicalize(el - a * phi.prolong(0, 1) - b * phi) != 0:
		raise NumericsError(_('Euler-Lagrange equation is not of the form a phi_tx + b phi = 0'))

	values = []

	for e in (a, b):
		syms, fn = _compile(e, params, interp)

		if syms:
			raise NumericsError(_('Coefficients of the Euler-Lagrange equation must be constant'))

		values.append(float(fn()))

	return (fields[0].name, phi.slot), values[0], values[1]


def solve_kg_grid(spec, grid, boundary, params=None, interp=None):
	''' Marches a phi_tx + b phi = 0 from data on the lines t = t0 and x = x0.

	boundary holds 't', the values along t at x0, and 'x', the values along x at t0.
	Each cell is closed by the box scheme centred in the cell '''
	key, a, b = _kg_coefficients(spec, params, interp)
	ht, hx = grid.spacing
	nt, nx = grid.extents
	along_t = np.asarray(boundary['t'], dtype=float)
	along_x = np.asarray(boundary['x'], dtype=float)

	if along_t.shape != (nt,) or along_x.shape != (nx,):
		raise NumericsError(_('Characteristic data must cover the grid lines'))

	if along_t[0] != along_x[0]:
		raise NumericsError(_('Characteristic data disagree at the corner'))

	scale = a / (ht * hx)
	pivot = scale + b / 4

	if pivot == 0:
		raise UnstableScheme(_('The box scheme is singular for this spacing'))

	phi = np.zeros((nt, nx))
	phi[:, 0] = along_t
	phi[0, :] = along_x

	for i in range(nt - 1):
		for j in range(nx - 1):
			B, C, D = phi[i + 1, j], phi[i, j + 1], phi[i, j]
			phi[i + 1, j + 1] = (scale * (B + C - D) - b * (B + C + D) / 4) / pivot

	section = DiscreteSection(grid, {key: phi}, {'t': list(along_t), 'x': list(along_x)})

	if nt < 3 or nx < 3:
		return section

	r = a * _difference(phi, (0, 1), grid.spacing) + b * _interior(phi, {})

	if not np.all(np.isfinite(r)):
		raise UnstableScheme(_('Marching produced non finite values'))

	estimate = max(np.max(np.abs(r[0, :])), np.max(np.abs(r[:, 0])), 1e-12 * max(1.0, np.max(np.abs(phi))))
	section.residual = float(np.max(np.abs(r)))

	if section.residual > 10 * estimate:
		raise UnstableScheme(_('Residual {0:.3e} exceeds ten times the truncation estimate {1:.3e}')
		                     .format(section.residual, estimate))

	return section


def _cells(spec, section):
	''' Coordinate arrays at the cell midpoints, first jets by cell differences '''
	grid = section.grid
	dim = grid.dim

	if any(n < 2 for n in grid.extents):
		raise GridTooCoarse(_('The midpoint rule needs at least 2 points per axis'))

	corners = list(product((0, 1), repeat=dim))

	def corner(f, offsets):
		return f[tuple(slice(o, n - 1 + o) for o, n in zip(offsets, f.shape))]

	def mean(f, selected):
		return sum(corner(f, c) for c in selected) / len(selected)

	arrays = {}

	for mu, x in enumerate(grid.mesh()):
		arrays[base(mu)] = mean(x, corners)

	for f in spec.fields_of('variational', 'covariance', 'background'):
		for c in spec.components(f):
			key = (f.name, c.slot)

			if key not in section:
				continue

			values = section[key]
			arrays[c] = mean(values, corners)

			for mu in range(dim):
				upper = [k for k in corners if k[mu] == 1]
				lower = [k for k in corners if k[mu] == 0]
				arrays[c.prolong(mu)] = (mean(values, upper) - mean(values, lower)) / grid.spacing[mu]

	return arrays


def discrete_action(spec, section, params=None, interp=None):
	''' Midpoint rule quadrature of the Lagrangian over the grid '''
	if spec.order > 1:
		raise NumericsError(_('The discrete action needs a first order Lagrangian'))

	arrays = _cells(spec, section)
	shape = tuple(n - 1 for n in section.grid.extents)
	density = _evaluate(spec.lagrangian, arrays, shape, params, interp)
	return float(np.sum(density) * np.prod(section.grid.spacing))


def action_variation(spec, section, bump, eps, params=None, interp=None):
	''' Centred difference (S(phi + eps b) - S(phi - eps b)) / 2 eps '''
	if eps <= 0:
		raise NumericsError(_('Variation step must be positive'))

	plus = discrete_action(spec, section.shifted(bump, eps), params, interp)
	minus = discrete_action(spec, section.shifted(bump, -eps), params, interp)
	return (plus - minus) / (2 * eps)


def bump(grid, center, width):
	''' A smooth bump exp(-1/(1-r^2)) of compact support inside the grid '''
	r2 = sum(((x - c) / w) ** 2 for x, c, w in zip(grid.mesh(), center, width))
	inside = r2 < 1
	values = np.zeros(grid.shape)
	values[inside] = np.exp(-1 / (1 - r2[inside]))
	return values


def convergence_order(spacings, errors):
	''' Least squares slope of log error against log spacing '''
	slope, intercept = np.polyfit(np.log(np.asarray(spacings, dtype=float)), np.log(np.asarray(errors, dtype=float)), 1)
	return float(slope)


class PointMap:
	''' A diffeomorphism of the base with a closed form inverse, acting on coordinate arrays '''

	def __init__(self, forward, inverse, description):
		''' forward and inverse take and return tuples of coordinate arrays '''
		self._forward = forward
		self._inverse = inverse
		self._description = description

	def __call__(self, x):
		return tuple(self._forward(tuple(x)))

	def inverse(self, x):
		return tuple(self._inverse(tuple(x)))

	def __str__(self):
		return self._description

	@staticmethod
	def identity():
		return PointMap(lambda x: x, lambda x: x, 'identity')

	@staticmethod
	def affine(matrix, shift):
		''' x -> A x + b '''
		A = np.asarray(matrix, dtype=float)
		b = np.asarray(shift, dtype=float)
		Ainv = np.linalg.inv(A)

		def apply(M, v, x):
			return [sum(M[i, j] * x[j] for j in range(len(x))) + v[i] for i in range(len(x))]

		return PointMap(lambda x: apply(A, b, x), lambda y: apply(Ainv, -Ainv.dot(b), y),
		                'affine {0} {1}'.format(A.tolist(), b.tolist()))

	@staticmethod
	def shear(alpha, target=0, source=1):
		''' x_target -> x_target + alpha x_source^2, other coordinates fixed '''
		def forward(x):
			y = list(x)
			y[target] = x[target] + alpha * x[source] ** 2
			return y

		def inverse(y):
			x = list(y)
			x[target] = y[target] - alpha * y[source] ** 2
			return x

		return PointMap(forward, inverse, 'shear {0} {1} {2}'.format(alpha, target, source))

	@staticmethod
	def cubic(c, axis=0):
		''' x_axis -> x_axis + c x_axis^3, monotone for c >= 0, inverted by Cardano's formula '''
		if c < 0:
			raise NumericsError(_('Cubic maps need a non negative coefficient'))

		def forward(x):
			y = list(x)
			y[axis] = x[axis] + c * x[axis] ** 3
			return y

		def inverse(y):
			x = list(y)

			if c == 0:
				return x

			p = np.asarray(y[axis], dtype=float) / (2 * c)
			root = np.sqrt(p ** 2 + 1 / (27 * c ** 3))
			x[axis] = np.cbrt(p + root) + np.cbrt(p - root)
			return x

		return PointMap(forward, inverse, 'cubic {0} {1}'.format(c, axis))


def dump_section(section, names=None):
	''' Renders a section as text: '#' header lines with the grid, then one line per grid
	point with the coordinates followed by the field values in column order '''
	grid = section.grid
	names = list(names or ['x{0}'.format(mu) for mu in range(grid.dim)])
	keys = section.keys()
	lines = ['# grid {0}'.format(grid.dim),
	         '# origin {0}'.format(' '.join(repr(float(o)) for o in grid.origin)),
	         '# spacing {0}'.format(' '.join(repr(float(h)) for h in grid.spacing)),
	         '# extents {0}'.format(' '.join(str(n) for n in grid.extents)),
	         '# columns {0}'.format(' '.join(names + [_label(k) for k in keys]))]

	for name, values in sorted(section.boundary.items()):
		lines.append('# boundary {0} {1}'.format(name, ' '.join(repr(float(v)) for v in np.atleast_1d(values))))

	mesh = grid.mesh()

	for index in np.ndindex(*grid.shape):
		row = [mesh[mu][index] for mu in range(grid.dim)] + [section[k][index] for k in keys]
		lines.append(' '.join(repr(float(v)) for v in row))

	return '\n'.join(lines) + '\n'


def load_section(text):
	''' Parses the text written by dump_section, returns the section and the coordinate names '''
	header = {}
	boundary = {}
	rows = []

	for lineno, line in enumerate(text.splitlines(), 1):
		line = line.strip()

		if not line:
			continue

		if line.startswith('#'):
			parts = line[1:].split()

			if not parts:
				continue

			if parts[0] == 'boundary' and len(parts) >= 2:
				try:
					boundary[parts[1]] = [float(v) for v in parts[2:]]
				except ValueError:
					raise NumericsError(_('Line {0}: not a number row').format(lineno))
			else:
				header[parts[0]] = parts[1:]

			continue

		try:
			rows.append((lineno, [float(v) for v in line.split()]))
		except ValueError:
			raise NumericsError(_('Line {0}: not a number row').format(lineno))

	try:
		dim = int(header['grid'][0])
		grid = Grid(header['origin'], header['spacing'], header['extents'])
		columns = header['columns']
	except (KeyError, IndexError, ValueError):
		raise NumericsError(_('Section header is incomplete'))

	if len(rows) != int(np.prod(grid.shape)):
		raise NumericsError(_('Expected {0} rows, found {1}').format(int(np.prod(grid.shape)), len(rows)))

	for lineno, row in rows:
		if len(row) != len(columns):
			raise NumericsError(_('Line {0}: expected {1} columns, found {2}').format(lineno, len(columns), len(row)))

	table = np.array([row for lineno, row in rows], dtype=float)
	values = dict((_key(label), table[:, dim + i].reshape(grid.shape)) for i, label in enumerate(columns[dim:]))
	return DiscreteSection(grid, values, boundary), columns[:dim]

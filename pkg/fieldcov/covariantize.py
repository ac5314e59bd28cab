# covariantize.py
# vim:ts=4:sw=4:noexpandtab

from sympy import Add, Matrix, powsimp, sympify, trigsimp, zeros

from fieldcov.utils import FieldCovError
from fieldcov.symexpr import (OrderOverflow, base, canonicalize, coords, cov_base, cov_jet, fiber,
                              jet_order, param, substitute, total_derivative)
from fieldcov.theory import FieldDecl, jet_coords, metric_slots

class CovariantizeError(FieldCovError):
	''' Handles covariantization errors '''
	pass


class UnsupportedIndex(CovariantizeError):
	''' Raised for fields whose transformation law needs more than first jets of the map '''
	pass


class AnsatzViolation(CovariantizeError):
	''' Raised when background fields are differentiated or transform with index above 1 '''
	pass


class UnsupportedAction(CovariantizeError):
	''' Raised for vertical group actions that are not implemented '''
	pass


class SingularEta(CovariantizeError):
	''' Raised when a group valued map is not invertible '''
	pass


class JacobianBundle:
	''' The Jacobian x^a_mu of a point map X with its determinant, cofactors and inverse.

	J[a, mu] is the covariance jet x^a_mu. The inverse x^mu_a is kept as
	cofactor times det J^-1, the cofactor C_a^mu being adj(J)[mu, a] '''

	def __init__(self, name, dim):
		''' Sets up the matrices for the point map called name on a base of dimension dim '''
		self._name = name
		self._dim = dim
		self._J = Matrix(dim, dim, lambda a, mu: cov_jet(name, a, (mu,)))
		self._det = canonicalize(self._J.det(method='berkowitz'))
		self._adj = self._J.adjugate(method='berkowitz').applyfunc(canonicalize)
		self._inverse = None

	@property
	def name(self):
		return self._name

	@property
	def dim(self):
		return self._dim

	@property
	def J(self):
		return self._J

	@property
	def det(self):
		''' Returns det J, Leibniz expanded '''
		return self._det

	def cofactor(self, a, mu):
		''' Returns C_a^mu, so that x^mu_a det J = C_a^mu '''
		return self._adj[mu, a]

	@property
	def inverse(self):
		''' Returns the matrix of x^mu_a, rows mu and columns a '''
		if self._inverse is None:
			inv = self._det ** -1
			self._inverse = self._adj.applyfunc(lambda c: canonicalize(c * inv))

		return self._inverse

	def identity(self):
		''' Returns the substitution setting J to the identity '''
		return dict((self._J[a, mu], 1 if a == mu else 0) for a in range(self._dim) for mu in range(self._dim))


def fresh_name(spec, name):
	''' Returns name, with a number appended when the theory already uses it '''
	taken = set(spec.coords) | set(spec.params) | set(f.name for f in spec.fields)
	candidate, i = name, 0

	while candidate in taken:
		i += 1
		candidate = '{0}{1}'.format(name, i)

	return candidate


#: Name suffixes marking the covariantization a theory came from
MODES = ('horizontal', 'background', 'shift', 'minimal')

def covariance_mode(spec):
	''' Tells which covariantization produced a theory, None for theories without covariance fields '''
	suffix = spec.name.rsplit('-', 1)[-1]

	if suffix in MODES:
		return suffix

	for f in spec.fields_of('covariance'):
		if spec.is_point_map(f):
			return 'horizontal'

		if f.geom == 'lie_oneform':
			return 'minimal'

		return 'shift'

	return None


def _point_map(spec):
	f = spec.point_map()

	if f is None:
		return fresh_name(spec, 'X'), None

	return f.name, f


def jacobian(spec):
	''' Returns the Jacobian bundle of the theory's point map, or of the map it would get '''
	return JacobianBundle(_point_map(spec)[0], spec.base_dim)


def chain_rule_jet(spec, field, jac=None, order=1):
	''' Expresses the jets of a field in spatial coordinates through jets in body coordinates.

	Maps y_a to y_mu x^mu_a and, for order 2, y_ab to D_nu(y_mu x^mu_a) x^nu_b '''
	if isinstance(field, str):
		field = spec.field(field)

	if field.diff_index > 1:
		raise UnsupportedIndex(_('Field {0} has differential index {1}').format(field.name, field.diff_index))

	if field.geom != 'scalar':
		raise UnsupportedIndex(_('Field {0}: only scalar fields transform by the chain rule alone')
		                       .format(field.name))

	if order not in (1, 2):
		raise OrderOverflow(_('Chain rule maps are available up to order 2'))

	jac = jac or jacobian(spec)
	n = spec.base_dim
	inv = jac.inverse
	mapping = {}

	for c in spec.components(field):
		first = {}

		for a in range(n):
			first[a] = canonicalize(Add(*[c.prolong(mu) * inv[mu, a] for mu in range(n)]))
			mapping[c.prolong(a)] = first[a]

		if order < 2:
			continue

		for a in range(n):
			for b in range(a, n):
				mapping[c.prolong(a, b)] = canonicalize(Add(*[total_derivative(first[a], nu) * inv[nu, b]
				                                              for nu in range(n)]))

	return mapping


def spatial_map(spec_tilde, order=1):
	''' The substitution expressing an original theory's base coordinates and jets through a
	horizontal covariantization: x^a to X^a, jets by the chain rule '''
	name, f = _point_map(spec_tilde)

	if f is None:
		raise CovariantizeError(_('Theory has no point map: {0}').format(spec_tilde.name))

	jac = JacobianBundle(name, spec_tilde.base_dim)
	mapping = dict((base(a), cov_base(name, a)) for a in range(spec_tilde.base_dim))

	for g in spec_tilde.fields_of('variational'):
		mapping.update(chain_rule_jet(spec_tilde, g, jac, order))

	return mapping


def _require_scalars(spec):
	if spec.fields_of('covariance'):
		raise CovariantizeError(_('Theory already has covariance fields: {0}').format(spec.name))

	if spec.order > 1 or jet_order(spec.lagrangian) > 1:
		raise OrderOverflow(_('Only first order Lagrangians can be covariantized'))

	for f in spec.fields_of('variational'):
		if f.geom != 'scalar' or f.diff_index > 0:
			raise UnsupportedIndex(_('Field {0} is not a scalar, covariantizing it needs second jets of the map')
			                       .format(f.name))


def covariantize_horizontal(spec):
	''' Adjoins a point map X and rewrites L(x, y, y_a) d^n x as
	L(X, y, y_mu x^mu_a) det J d^n x '''
	_require_scalars(spec)

	if spec.fields_of('background'):
		raise CovariantizeError(_('Theory has background fields, covariantize them with the background mode'))

	n = spec.base_dim
	name = fresh_name(spec, 'X')
	jac = JacobianBundle(name, n)
	mapping = dict((base(a), cov_base(name, a)) for a in range(n))

	for f in spec.fields_of('variational'):
		mapping.update(chain_rule_jet(spec, f, jac))

	lagrangian = canonicalize(substitute(spec.lagrangian, mapping) * jac.det)
	fields = spec.fields + (FieldDecl(name, n, 'covariance', 'scalar'),)
	return spec.replace(name='{0}-horizontal'.format(spec.name), fields=fields, lagrangian=lagrangian)


def bar_name(field, slot=None):
	''' Name of the parameter a background component is frozen to '''
	if slot is None:
		return '{0}bar'.format(field)

	return '{0}bar_{1}'.format(field, slot)


def background_parameters(spec):
	''' Maps every background coordinate of a theory to its parameter '''
	n = spec.base_dim
	mapping = {}

	for f in spec.fields_of('background'):
		comps = spec.components(f)

		if f.geom == 'metric_inverse':
			for c, (a, b) in zip(comps, metric_slots(n)):
				mapping[c] = param(bar_name(f.name, '{0}{1}'.format(a, b)))

			mapping[spec.volume(f.name)] = param(bar_name(f.name, 'vol'))
		elif len(comps) == 1 and f.geom == 'scalar':
			mapping[comps[0]] = param(bar_name(f.name))
		else:
			for i, c in enumerate(comps):
				mapping[c] = param(bar_name(f.name, i))

	return mapping


def covariantize_background(spec):
	''' Freezes the background fields to parameters on the spatial side and pulls them
	back through an adjoined point map X '''
	backgrounds = spec.fields_of('background')

	if not backgrounds:
		raise CovariantizeError(_('Theory has no background fields: {0}').format(spec.name))

	for f in backgrounds:
		if f.diff_index > 1:
			raise AnsatzViolation(_('Background field {0} has differential index {1}')
			                      .format(f.name, f.diff_index))

		if f.geom == 'lie_oneform':
			raise AnsatzViolation(_('Background field {0}: connections have no point map pull back')
			                      .format(f.name))

	for c in coords(spec.lagrangian):
		f = spec.field(c.field_id) if c.coord_kind == 'jet' else None

		if f is not None and f.kind == 'background':
			raise AnsatzViolation(_('Background field {0} appears differentiated').format(f.name))

	_require_scalars(spec)

	n = spec.base_dim
	name = fresh_name(spec, 'X')
	jac = JacobianBundle(name, n)
	frozen = background_parameters(spec)
	inv = jac.inverse
	mapping = {}

	for f in backgrounds:
		comps = spec.components(f)

		if f.geom == 'metric_inverse':
			slots = metric_slots(n)
			gbar = {}

			for c, (a, b) in zip(comps, slots):
				gbar[a, b] = gbar[b, a] = frozen[c]

			for c, (mu, nu) in zip(comps, slots):
				mapping[c] = canonicalize(Add(*[inv[mu, a] * inv[nu, b] * gbar[a, b]
				                                for a in range(n) for b in range(n)]))

			mapping[spec.volume(f.name)] = canonicalize(frozen[spec.volume(f.name)] * jac.det)
		elif f.geom == 'covector':
			for mu, c in enumerate(comps):
				mapping[c] = canonicalize(Add(*[frozen[comps[a]] * jac.J[a, mu] for a in range(n)]))
		else:
			for c in comps:
				mapping[c] = frozen[c]

	params = spec.params + tuple(p.field_id for p in sorted(set(frozen.values()), key=str))
	fields = tuple(f for f in spec.fields if f.kind != 'background') + (FieldDecl(name, n, 'covariance', 'scalar'),)
	return spec.replace(name='{0}-background'.format(spec.name), fields=fields, params=params,
	                    lagrangian=substitute(spec.lagrangian, mapping))


class AdditiveShift:
	''' The action (eta, A) -> (eta - f, A + df) of functions on a covector field and a scalar '''

	#: Name used on the command line
	NAME = 'shift'


class MinimalCoupling:
	''' A matrix Lie algebra acting on field multiplets, gauged by a connection '''

	#: Name used on the command line
	NAME = 'minimal'

	def __init__(self, rep=None):
		''' rep is a list of generator matrices, None means so(r) for the multiplet size r '''
		self._rep = None if rep is None else [Matrix(T) for T in rep]

	@property
	def rep(self):
		return self._rep

	def generators(self, r):
		''' Returns the generators, building the so(r) basis when none were given '''
		if self._rep is not None:
			return self._rep

		return so_basis(r)


def so_basis(r):
	''' The basis E_ij - E_ji, i < j, of so(r) '''
	basis = []

	for i in range(r):
		for j in range(i + 1, r):
			T = zeros(r, r)
			T[i, j], T[j, i] = -1, 1
			basis.append(T)

	return basis


def action_named(name):
	''' Returns the vertical action for its command line name '''
	if name == AdditiveShift.NAME:
		return AdditiveShift()

	if name == MinimalCoupling.NAME:
		return MinimalCoupling()

	raise UnsupportedAction(_('Unknown vertical action: {0}').format(name))


def _shift(spec):
	covectors = [f for f in spec.fields_of('variational') if f.geom == 'covector']

	if not covectors:
		raise CovariantizeError(_('The additive shift needs a covector field'))

	if spec.order > 1 or jet_order(spec.lagrangian) > 1:
		raise OrderOverflow(_('The additive shift needs a first order Lagrangian'))

	name = fresh_name(spec, 'eta')
	eta = fiber(name)
	mapping = {}

	for f in covectors:
		for mu, c in enumerate(spec.components(f)):
			mapping[c] = c + eta.prolong(mu)

			for nu in range(spec.base_dim):
				mapping[c.prolong(nu)] = c.prolong(nu) + eta.prolong(mu, nu)

	fields = spec.fields + (FieldDecl(name, 1, 'covariance', 'scalar'),)
	return spec.replace(name='{0}-shift'.format(spec.name), fields=fields,
	                    lagrangian=substitute(spec.lagrangian, mapping))


def _minimal(spec, action):
	n = spec.base_dim
	scalars = [f for f in spec.fields_of('variational') if f.geom == 'scalar']
	sizes = [f.components for f in scalars if f.components > 1]

	if action.rep is not None:
		r = action.rep[0].rows
	elif sizes:
		r = sizes[0]
	else:
		raise CovariantizeError(_('Minimal coupling needs a multiplet with more than one component'))

	rep = action.generators(r)

	for T in rep:
		if T.shape != (r, r):
			raise CovariantizeError(_('Generators must be {0}x{0} matrices').format(r))

	multiplets = [f for f in scalars if f.components == r]

	if not multiplets:
		raise CovariantizeError(_('No field multiplet with {0} components').format(r))

	name = fresh_name(spec, 'A')
	mapping = {}

	for f in multiplets:
		y = spec.components(f)

		for mu in range(n):
			for i, c in enumerate(y):
				coupling = [fiber(name, k * n + mu) * T[i, j] * y[j]
				            for k, T in enumerate(rep) for j in range(r) if T[i, j] != 0]
				mapping[c.prolong(mu)] = c.prolong(mu) + Add(*coupling)

	fields = spec.fields + (FieldDecl(name, len(rep) * n, 'covariance', 'lie_oneform'),)
	return spec.replace(name='{0}-minimal'.format(spec.name), fields=fields,
	                    lagrangian=substitute(spec.lagrangian, mapping))


def covariantize_vertical(spec, action):
	''' Adjoins covariance fields for a vertical group action '''
	if spec.fields_of('covariance'):
		raise CovariantizeError(_('Theory already has covariance fields: {0}').format(spec.name))

	if isinstance(action, str):
		action = action_named(action)

	if isinstance(action, AdditiveShift):
		return _shift(spec)

	if isinstance(action, MinimalCoupling):
		return _minimal(spec, action)

	raise UnsupportedAction(_('Unsupported vertical action: {0}').format(type(action).__name__))


def identity_covariance(spec_tilde):
	''' The substitution taking every covariance field to the trivial one: the identity
	map for point maps, zero for shifts and connections '''
	mapping = {}
	covariance = set(f.name for f in spec_tilde.fields_of('covariance'))

	for c in jet_coords(spec_tilde, 2):
		if c.coord_kind == 'base' or c.field_id not in covariance:
			continue

		if c.coord_kind == 'covbase':
			mapping[c] = base(c.slot)
		elif c.coord_kind == 'covjet' and c.jet_order == 1:
			mapping[c] = 1 if c.multi_index == (c.slot,) else 0
		else:
			mapping[c] = 0

	return mapping


def strip_covariance(spec_tilde):
	''' Recovers the uncovariantized theory by setting the covariance fields trivial '''
	mode = covariance_mode(spec_tilde)
	name = spec_tilde.name

	if mode is not None and name.endswith('-' + mode):
		name = name[:-len(mode) - 1]

	fields = tuple(f for f in spec_tilde.fields if f.kind != 'covariance')
	return spec_tilde.replace(name=name, fields=fields,
	                          lagrangian=substitute(spec_tilde.lagrangian, identity_covariance(spec_tilde)))


def _simplify(e):
	return canonicalize(trigsimp(powsimp(sympify(e))))


def flat_connection_from(eta, dim, rep=None):
	''' Returns A_mu = eta^-1 D_mu eta for a matrix (or scalar) valued map eta.

	With rep given, each A_mu is returned as its coefficients on the generators '''
	eta = Matrix(eta) if hasattr(eta, 'shape') or isinstance(eta, (list, tuple)) else Matrix([[eta]])

	if not eta.is_square:
		raise SingularEta(_('Group valued maps must be square matrices'))

	det = _simplify(eta.det(method='berkowitz'))

	if det == 0:
		raise SingularEta(_('The map is singular everywhere'))

	adj = eta.adjugate(method='berkowitz')
	connection = []

	for mu in range(dim):
		d = eta.applyfunc(lambda e: total_derivative(e, mu))
		connection.append((adj * d).applyfunc(lambda e: _simplify(e / det)))

	if rep is None:
		return connection

	return [coefficients(A, rep) for A in connection]


def coefficients(A, rep, simplify=True):
	''' Solves A = sum_k c_k T_k for the coefficients c_k '''
	rep = [Matrix(T) for T in rep]
	gram = Matrix(len(rep), len(rep), lambda k, l: (rep[k].T * rep[l]).trace())
	rhs = Matrix([(T.T * Matrix(A)).trace() for T in rep])
	normal = _simplify if simplify else canonicalize
	return [normal(c) for c in gram.LUsolve(rhs)]


def curvature(connection):
	''' F_mu,nu = D_mu A_nu - D_nu A_mu + [A_mu, A_nu] for every mu < nu '''
	dim = len(connection)
	result = {}

	for mu in range(dim):
		for nu in range(mu + 1, dim):
			A, B = Matrix(connection[mu]), Matrix(connection[nu])
			F = (B.applyfunc(lambda e: total_derivative(e, mu)) - A.applyfunc(lambda e: total_derivative(e, nu))
			     + A * B - B * A)
			result[mu, nu] = F.applyfunc(_simplify)

	return result


def covariantize(spec, mode, action=None):
	''' Dispatches to the covariantization named by mode '''
	if mode == 'horizontal':
		return covariantize_horizontal(spec)

	if mode == 'background':
		return covariantize_background(spec)

	if mode == 'vertical':
		return covariantize_vertical(spec, action or AdditiveShift())

	raise CovariantizeError(_('Unknown covariantization mode: {0}').format(mode))

# variational.py
# vim:ts=4:sw=4:noexpandtab

from itertools import combinations_with_replacement

from sympy import Add

from fieldcov.utils import FieldCovError
from fieldcov.symexpr import OrderOverflow, canonicalize, jet_order, partial, substitute, total_derivative
from fieldcov.covariantize import JacobianBundle, spatial_map, strip_covariance

class VariationalError(FieldCovError):
	''' Handles errors of the variational operators '''
	pass


class ELSystem:
	''' Euler-Lagrange residuals keyed by (field, component) '''

	def __init__(self, residuals):
		''' Sets the residuals, a list of ((field, component), expr) pairs in a fixed order '''
		self._residuals = [(key, canonicalize(e)) for key, e in residuals]
		self._order = max([jet_order(e) for key, e in self._residuals] + [0])

	@property
	def order(self):
		''' Returns the highest jet order appearing in the residuals '''
		return self._order

	def keys(self):
		return [key for key, e in self._residuals]

	def items(self):
		return list(self._residuals)

	def __getitem__(self, key):
		for k, e in self._residuals:
			if k == key:
				return e

		raise KeyError(key)

	def __len__(self):
		return len(self._residuals)

	def merge(self, other):
		''' Returns the system with the residuals of another one appended '''
		return ELSystem(self._residuals + other.items())

	def render(self, spec):
		''' Returns (label, text) pairs, labels as in the theory format '''
		result = []

		for (name, comp), e in self._residuals:
			label = name if comp is None else '{0}[{1}]'.format(name, comp)
			result.append((label, spec.render(e)))

		return result


class SEMTensor:
	''' Stress-energy-momentum density t^c_a, or its Piola-Kirchhoff transform p^mu_a '''

	#: Variants
	CANONICAL = 'canonical'
	PIOLA_KIRCHHOFF = 'piola-kirchhoff'

	def __init__(self, components, variant=CANONICAL):
		''' components is a square nested list, indexed [upper][lower] '''
		self._components = [[canonicalize(e) for e in row] for row in components]
		self._variant = variant

	@property
	def variant(self):
		return self._variant

	@property
	def dim(self):
		return len(self._components)

	@property
	def components(self):
		return self._components

	def __getitem__(self, index):
		upper, lower = index
		return self._components[upper][lower]

	def map(self, fn):
		''' Returns the tensor with fn applied to every entry '''
		return SEMTensor([[fn(e) for e in row] for row in self._components], self._variant)

	def render(self, spec):
		''' Returns (label, text) pairs, one per entry '''
		names = spec.coords
		return [('{0}^{1}_{2}'.format('t' if self._variant == SEMTensor.CANONICAL else 'p', names[c], names[a]),
		         spec.render(self._components[c][a]))
		        for c in range(self.dim) for a in range(self.dim)]


def _field(spec, field):
	f = spec.field(field) if isinstance(field, str) else field

	if f is None:
		raise VariationalError(_('Unknown field: {0}').format(field))

	return f


def residual(spec, c):
	''' dL/dy - D_mu dL/dy_mu + D_mu D_nu dL/dy_mu,nu, one term per symmetric index pair '''
	L = spec.lagrangian
	n = spec.base_dim
	terms = [partial(L, c)]

	for mu in range(n):
		p = partial(L, c.prolong(mu))

		if p != 0:
			terms.append(-total_derivative(p, mu))

	for mu, nu in combinations_with_replacement(range(n), 2):
		p = partial(L, c.prolong(mu, nu))

		if p != 0:
			terms.append(total_derivative(total_derivative(p, nu), mu))

	return canonicalize(Add(*terms))


def euler_lagrange(spec, field):
	''' Returns the ELSystem of one variational or covariance field '''
	f = _field(spec, field)

	if f.kind == 'background':
		raise VariationalError(_('Background field {0} is not varied').format(f.name))

	if spec.order > 2:
		raise OrderOverflow(_('Lagrangians of order {0} are not supported').format(spec.order))

	residuals = []

	for c in spec.components(f):
		residuals.append(((f.name, c.slot), residual(spec, c)))

	return ELSystem(residuals)


def euler_lagrange_all(spec):
	''' ELSystem of every variational and covariance field, in declaration order '''
	system = ELSystem([])

	for f in spec.fields_of('variational', 'covariance'):
		system = system.merge(euler_lagrange(spec, f))

	return system


def sem_tensor(spec):
	''' Canonical density t^c_a = L delta^c_a - (dL/dy^A_c) y^A_a, summed over the
	variational and covariance fields '''
	if spec.order > 1 or jet_order(spec.lagrangian) > 1:
		raise OrderOverflow(_('The stress-energy-momentum tensor of second order Lagrangians is not defined'))

	L = spec.lagrangian
	n = spec.base_dim
	comps = [c for f in spec.fields_of('variational', 'covariance') for c in spec.components(f)]
	rows = []

	for c in range(n):
		row = []

		for a in range(n):
			terms = [L] if a == c else []
			terms.extend(-partial(L, y.prolong(c)) * y.prolong(a) for y in comps)
			row.append(Add(*terms))

		rows.append(row)

	return SEMTensor(rows)


def piola_transform(sem, jac):
	''' p^mu_a = t^c_a x^mu_c det J, written with the cofactors C_c^mu '''
	if sem.variant != SEMTensor.CANONICAL:
		raise VariationalError(_('Only the canonical tensor has a Piola transform'))

	if sem.dim != jac.dim:
		raise VariationalError(_('Dimensions of tensor and Jacobian differ'))

	n = sem.dim
	rows = [[Add(*[sem[c, a] * jac.cofactor(c, mu) for c in range(n)]) for a in range(n)] for mu in range(n)]
	return SEMTensor(rows, SEMTensor.PIOLA_KIRCHHOFF)


def piola_kirchhoff(spec_tilde):
	''' The Piola-Kirchhoff tensor of a horizontally covariantized theory: the canonical
	tensor of the original theory, expressed through the point map and transformed '''
	f = spec_tilde.point_map()

	if f is None:
		raise VariationalError(_('Theory has no point map: {0}').format(spec_tilde.name))

	original = strip_covariance(spec_tilde)
	mapping = spatial_map(spec_tilde)
	sem = sem_tensor(original).map(lambda e: substitute(e, mapping))
	return piola_transform(sem, JacobianBundle(f.name, spec_tilde.base_dim))


def energy(spec):
	''' E = -t^0_0 '''
	if spec.base_dim < 1:
		raise VariationalError(_('Energy needs a time coordinate'))

	return canonicalize(-sem_tensor(spec)[0, 0])


def connection_equations(spec_tilde):
	''' Euler-Lagrange residuals of a minimally coupled theory with respect to its connection '''
	connections = [f for f in spec_tilde.fields_of('covariance') if f.geom == 'lie_oneform']

	if not connections:
		raise VariationalError(_('Theory has no connection field: {0}').format(spec_tilde.name))

	system = ELSystem([])

	for f in connections:
		system = system.merge(euler_lagrange(spec_tilde, f))

	return system

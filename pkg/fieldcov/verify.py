# verify.py
# vim:ts=4:sw=4:noexpandtab

from fractions import Fraction
from itertools import combinations_with_replacement, product
from threading import Thread

import numpy as np
from numpy.random import default_rng
from sympy import Add, Matrix, Mul, Rational, cos, default_sort_key, exp, eye, hessian, sin, symbols, sympify, zeros

from fieldcov.utils import FieldCovError
from fieldcov.symexpr import (HARMONIC, REDRAWS, Inconclusive, PoleHit, base, coords, cov_base, cov_jet,
                              equal_identically, eval_at, fiber, jet_order, opaque_nodes, param, partial, sample_point,
                              substitute, total_derivative)
from fieldcov.theory import bundled, jet_coords, parse_theory, render_theory
from fieldcov.covariantize import (JacobianBundle, background_parameters, bar_name, coefficients, covariance_mode,
                                   covariantize_background, covariantize_horizontal, curvature, flat_connection_from,
                                   fresh_name, identity_covariance, so_basis, spatial_map, strip_covariance)
from fieldcov.variational import energy, euler_lagrange, piola_kirchhoff, residual, sem_tensor
from fieldcov.numerics import (DiscreteSection, Grid, GridTooCoarse, PointMap, integrate_mechanics,
                              pulled_back_residuals, section_residuals, worst)

class VerifyError(FieldCovError):
	''' Handles checks that cannot run on a theory '''
	pass


class DegenerateSample(VerifyError):
	''' Raised when a sampled diffeomorphism is too close to singular '''
	pass


class Report:
	''' The outcome of one check on one theory, one record per case '''

	#: Statuses
	PASS = 'pass'
	FAIL = 'fail'
	INCONCLUSIVE = 'inconclusive'

	def __init__(self, check, theory=None, samples=0, seed=None, tol=0, expected=PASS):
		self._check = check
		self._theory = theory
		self._samples = samples
		self._seed = seed
		self._tol = tol
		self._expected = expected
		self._cases = []
		self._degenerate = 0
		self._note = None

	@staticmethod
	def inconclusive(check, theory, reason, expected=PASS):
		''' A report for a check that could not decide '''
		report = Report(check, theory, expected=expected)
		report.add('-', None, Report.INCONCLUSIVE)
		report.note = reason
		return report

	@property
	def check(self):
		return self._check

	@property
	def theory(self):
		return self._theory

	@property
	def samples(self):
		return self._samples

	@property
	def seed(self):
		return self._seed

	@property
	def tol(self):
		return self._tol

	@property
	def expected(self):
		return self._expected

	@expected.setter
	def expected(self, expected):
		self._expected = expected

	@property
	def cases(self):
		return list(self._cases)

	@property
	def degenerate(self):
		''' Returns how many samples were drawn again '''
		return self._degenerate

	@property
	def note(self):
		return self._note

	@note.setter
	def note(self, note):
		self._note = note

	def resampled(self):
		self._degenerate += 1

	def add(self, case, residual, status=None):
		''' Records a case; without a status it passes when the residual is within tolerance '''
		if status is None:
			status = Report.PASS if residual is not None and abs(residual) <= self._tol else Report.FAIL

		self._cases.append((case, residual, status))

	@property
	def status(self):
		statuses = [s for c, r, s in self._cases]

		if not statuses:
			return Report.INCONCLUSIVE

		if Report.FAIL in statuses:
			return Report.FAIL

		if Report.INCONCLUSIVE in statuses:
			return Report.INCONCLUSIVE

		return Report.PASS

	@property
	def worst(self):
		''' Returns the largest absolute residual, None when no case has one '''
		values = [abs(r) for c, r, s in self._cases if r is not None]
		return max(values) if values else None

	@property
	def ok(self):
		''' Tells whether the check came out as expected '''
		return self.status == self._expected

	@property
	def label(self):
		if self._theory is None:
			return self._check

		return '{0}:{1}'.format(self._theory, self._check)

	def info(self):
		''' Returns (key, value) pairs for the Humanizer '''
		info = [('check', self._check),
		        ('theory', self._theory),
		        ('status', self.status),
		        ('expected', self._expected),
		        ('worst', self.worst),
		        ('tolerance', self._tol),
		        ('samples', self._samples),
		        ('seed', self._seed)]

		if self._degenerate:
			info.append(('degenerate', self._degenerate))

		if self._note:
			info.append(('note', self._note))

		return info

	def records(self):
		''' One line per case: check, case, residual, status '''
		lines = []

		for case, r, status in self._cases:
			lines.append('{0} {1} {2} {3}'.format(self.label, case, '-' if r is None else _number(r), status))

		return lines


def _number(v):
	if isinstance(v, Fraction):
		return str(v)

	return '{0:.6e}'.format(float(v))


def _witness(e, seed, interp=None):
	''' Absolute value of a nonzero difference at its first usable sample '''
	e = sympify(e)

	if opaque_nodes(e):
		interp = interp or HARMONIC

	syms = sorted(e.free_symbols, key=default_sort_key)
	rng = default_rng([abs(int(seed)), 0])

	for attempt in range(REDRAWS):
		try:
			return abs(eval_at(e, sample_point(syms, rng), interp))
		except PoleHit:
			continue
		except FieldCovError:
			return None

	return None


def _symbolic(report, case, exprs, trials, seed, interp=None):
	''' Records a case passing when every expression vanishes identically '''
	if not isinstance(exprs, (list, tuple)):
		exprs = [exprs]

	for e in exprs:
		try:
			zero = equal_identically(e, 0, trials, seed, interp)
		except Inconclusive as err:
			report.add(case, None, Report.INCONCLUSIVE)
			report.note = err.message
			return

		if not zero:
			report.add(case, _witness(e, seed, interp), Report.FAIL)
			return

	report.add(case, Fraction(0), Report.PASS)


def _fraction(v):
	v = sympify(v)
	return Fraction(int(v.p), int(v.q))


def _rational(v):
	return Rational(v.numerator, v.denominator)


#: Bound on the numerators of the sampled diffeomorphism coefficients, over 2^12
COEFFICIENT_BOUND = 2 ** 10

#: Smallest accepted Jacobian determinant of a sampled diffeomorphism
MIN_DET = Fraction(1, 10)

#: Draws per sample before giving up
ATTEMPTS = 64

def monomials(n):
	''' Exponent tuples of the monomials of degree 1 to 3 in n variables '''
	return [e for e in product(range(4), repeat=n) if 1 <= sum(e) <= 3]


def polynomial_diffeo(n, rng, scale=1):
	''' Draws sigma(z) = z + scale * sum c_e z^e, returns the variables and sigma '''
	z = symbols('z0:{0}'.format(n))
	scale = sympify(scale)
	sigma = []

	for a in range(n):
		terms = []

		for e in monomials(n):
			c = Rational(int(rng.integers(-COEFFICIENT_BOUND, COEFFICIENT_BOUND + 1)), 4 * COEFFICIENT_BOUND)
			terms.append(c * Mul(*[v ** k for v, k in zip(z, e)]))

		sigma.append(z[a] + scale * Add(*terms))

	return z, Matrix(sigma)


def _frame(z, sigma, x):
	''' Image, Jacobian determinant, inverse Jacobian M and its derivative N at x '''
	n = len(z)
	point = dict((v, _rational(xi)) for v, xi in zip(z, x))
	Lam = sigma.jacobian(z).xreplace(point)
	det = _fraction(Lam.det())

	if det <= MIN_DET:
		raise DegenerateSample(_('Jacobian determinant {0} is too small').format(det))

	inv = Lam.inv()
	M = [[_fraction(inv[mu, nu]) for nu in range(n)] for mu in range(n)]
	H = [hessian(s, z).xreplace(point).applyfunc(_fraction) for s in sigma]
	N = [[[-sum(M[mu][a] * H[a][b, c] * M[b][nu] * M[c][rho] for a in range(n) for b in range(n) for c in range(n))
	       for rho in range(n)] for nu in range(n)] for mu in range(n)]
	image = [_fraction(s.xreplace(point)) for s in sigma]
	return image, det, M, N


def _draw_point(spec, L, rng, upto):
	''' Base points in [-1/2, 1/2], Jacobians near the identity, other values of height 64 '''
	point = {}

	for c in jet_coords(spec, upto):
		kind = c.coord_kind

		if kind == 'base':
			point[c] = Fraction(int(rng.integers(-32, 33)), 64)
		elif kind == 'covjet' and c.jet_order == 1:
			delta = 1 if c.multi_index == (c.slot,) else 0
			point[c] = delta + Fraction(int(rng.integers(-16, 17)), 64)
		else:
			point.update(sample_point([c], rng, 64))

	rest = [c for c in sorted(sympify(L).free_symbols, key=default_sort_key) if c not in point]
	point.update(sample_point(rest, rng, 64))
	return point


def _scalar_jets(point, moved, c, M, N, upto, n):
	if upto >= 1:
		for nu in range(n):
			moved[c.prolong(nu)] = sum(point[c.prolong(mu)] * M[mu][nu] for mu in range(n))

	if upto >= 2:
		for nu, rho in combinations_with_replacement(range(n), 2):
			second = sum(point[c.prolong(mu, kappa)] * M[mu][nu] * M[kappa][rho] for mu in range(n) for kappa in range(n))
			moved[c.prolong(nu, rho)] = second + sum(point[c.prolong(mu)] * N[mu][nu][rho] for mu in range(n))


def _covector_jets(point, moved, block, M, N, upto, n):
	if upto >= 2:
		raise VerifyError(_('Second jets of covector fields are not transformed'))

	for nu in range(n):
		moved[block[nu]] = sum(point[block[mu]] * M[mu][nu] for mu in range(n))

		if upto < 1:
			continue

		for rho in range(n):
			first = sum(point[block[mu].prolong(kappa)] * M[mu][nu] * M[kappa][rho] for mu in range(n) for kappa in range(n))
			moved[block[nu].prolong(rho)] = first + sum(point[block[mu]] * N[mu][nu][rho] for mu in range(n))


def transform_point(spec, point, image, M, N, upto):
	''' The prolonged action of a diffeomorphism on a jet point, backgrounds held fixed '''
	n = spec.base_dim
	moved = dict(point)

	for a in range(n):
		moved[base(a)] = image[a]

	for f in spec.fields_of('variational', 'covariance'):
		comps = spec.components(f)

		if f.geom == 'scalar':
			for c in comps:
				_scalar_jets(point, moved, c, M, N, upto, n)
		elif f.geom in ('covector', 'lie_oneform'):
			for k in range(0, len(comps), n):
				_covector_jets(point, moved, comps[k:k + n], M, N, upto, n)
		else:
			raise VerifyError(_('No transformation law for field {0}').format(f.name))

	return moved


def check_covariance(spec_tilde, samples=100, seed=42, tol=1e-9, interp=None, scale=1):
	''' Samples jet points and near identity polynomial diffeomorphisms sigma, compares
	L(sigma . gamma) det(d sigma) with L(gamma) '''
	report = Report('covariance', spec_tilde.name, samples, seed, tol)
	L = spec_tilde.lagrangian
	n = spec_tilde.base_dim
	upto = jet_order(L)

	if opaque_nodes(L):
		interp = interp or HARMONIC

	for i in range(samples):
		rng = default_rng([abs(int(seed)), i])

		for attempt in range(ATTEMPTS):
			z, sigma = polynomial_diffeo(n, rng, scale)
			point = _draw_point(spec_tilde, L, rng, upto)

			try:
				image, det, M, N = _frame(z, sigma, [point[base(a)] for a in range(n)])
				moved = transform_point(spec_tilde, point, image, M, N, upto)
				before = eval_at(L, point, interp)
				after = eval_at(L, moved, interp)
				break
			except (DegenerateSample, PoleHit):
				report.resampled()
		else:
			raise DegenerateSample(_('No usable sample after {0} draws').format(ATTEMPTS))

		report.add('sample-{0}'.format(i), abs(after * det - before) / (1 + abs(before)))

	return report


def check_identity_recovery(spec, spec_tilde, trials=32, seed=42):
	''' Setting the covariance fields trivial gives back the original Lagrangian '''
	report = Report('identity-recovery', spec_tilde.name, trials, seed)
	recovered = substitute(spec_tilde.lagrangian, identity_covariance(spec_tilde))
	original = spec.lagrangian

	if covariance_mode(spec_tilde) == 'background':
		original = substitute(original, background_parameters(spec))

	_symbolic(report, 'identity', recovered - original, trials, seed)
	return report


def _vacuous_horizontal(report, spec_tilde, trials, seed, interp):
	X = spec_tilde.point_map()
	n = spec_tilde.base_dim
	jac = JacobianBundle(X.name, n)
	original = strip_covariance(spec_tilde)
	mapping = spatial_map(spec_tilde, order=2)
	el_X = euler_lagrange(spec_tilde, X)
	spatial = [(c, substitute(residual(original, c), mapping))
	           for f in original.fields_of('variational') for c in original.components(f)]

	for a in range(n):
		terms = [el_X[X.name, a]]

		for c, el in spatial:
			terms.append(el * Add(*[c.prolong(mu) * jac.cofactor(a, mu) for mu in range(n)]))

		_symbolic(report, '{0}[{1}]'.format(X.name, a), Add(*terms), trials, seed, interp)


def _vacuous_background(report, spec_tilde, trials, seed, interp):
	n = spec_tilde.base_dim

	if any(c.coord_kind == 'base' for c in coords(spec_tilde.lagrangian)):
		raise VerifyError(_('The Noether identity needs a Lagrangian without explicit base coordinates'))

	comps = [c for f in spec_tilde.fields_of('variational', 'covariance') if f.geom == 'scalar'
	         for c in spec_tilde.components(f)]
	el = [residual(spec_tilde, c) for c in comps]

	for nu in range(n):
		_symbolic(report, 'noether[{0}]'.format(nu), Add(*[e * c.prolong(nu) for e, c in zip(el, comps)]),
		          trials, seed, interp)


def _shift_fields(spec):
	covectors = [f for f in spec.fields_of('variational') if f.geom == 'covector']
	shifts = [f for f in spec.fields_of('covariance') if f.geom == 'scalar' and f.components == 1]

	if not covectors or len(shifts) != 1:
		raise VerifyError(_('Additive shifts need covector fields and one scalar covariance field'))

	return covectors, shifts[0]


def _vacuous_shift(report, spec_tilde, trials, seed, interp):
	covectors, eta = _shift_fields(spec_tilde)
	L = spec_tilde.lagrangian
	n = spec_tilde.base_dim
	divergence = [residual(spec_tilde, spec_tilde.components(eta)[0])]
	antisymmetry = []

	for f in covectors:
		comps = spec_tilde.components(f)

		for mu in range(n):
			divergence.append(total_derivative(partial(L, comps[mu]), mu))

		for mu, nu in combinations_with_replacement(range(n), 2):
			antisymmetry.append(partial(L, comps[mu].prolong(nu)) + partial(L, comps[nu].prolong(mu)))

	_symbolic(report, 'antisymmetry', antisymmetry, trials, seed, interp)
	_symbolic(report, eta.name, Add(*divergence), trials, seed, interp)


def _connection(spec):
	connections = [f for f in spec.fields_of('covariance') if f.geom == 'lie_oneform']

	if len(connections) != 1:
		raise VerifyError(_('Minimal coupling checks need exactly one connection field'))

	return connections[0]


def generators_for(spec, connection, rep=None):
	''' The generators a connection is expanded on, so(r) matching its size by default '''
	if rep is not None:
		return [Matrix(T) for T in rep]

	count = connection.components // spec.base_dim

	for r in sorted(set(f.components for f in spec.fields_of('variational') if f.geom == 'scalar')):
		if r * (r - 1) // 2 == count:
			return so_basis(r)

	raise VerifyError(_('No multiplet fits a connection with {0} generators').format(count))


def _multiplets(spec, r):
	return [f for f in spec.fields_of('variational') if f.geom == 'scalar' and f.components == r]


def _vacuous_minimal(report, spec_tilde, trials, seed, interp, rep):
	A = _connection(spec_tilde)
	rep = generators_for(spec_tilde, A, rep)
	r = rep[0].rows
	n = spec_tilde.base_dim
	L = spec_tilde.lagrangian
	el = euler_lagrange(spec_tilde, A)

	for k, T in enumerate(rep):
		for mu in range(n):
			current = []

			for f in _multiplets(spec_tilde, r):
				y = spec_tilde.components(f)

				for i in range(r):
					current.append(partial(L, y[i].prolong(mu)) * Add(*[T[i, j] * y[j] for j in range(r)]))

			_symbolic(report, '{0}[{1}]'.format(A.name, k * n + mu), el[A.name, k * n + mu] - Add(*current),
			          trials, seed, interp)


def check_vacuous_el(spec_tilde, trials=32, seed=42, interp=None, rep=None):
	''' The Euler-Lagrange equations of the covariance fields hold off shell as a
	consequence of the others '''
	report = Report('vacuous-el', spec_tilde.name, trials, seed)
	mode = covariance_mode(spec_tilde)

	if mode == 'horizontal':
		_vacuous_horizontal(report, spec_tilde, trials, seed, interp)
	elif mode == 'background':
		_vacuous_background(report, spec_tilde, trials, seed, interp)
	elif mode == 'shift':
		_vacuous_shift(report, spec_tilde, trials, seed, interp)
	elif mode == 'minimal':
		_vacuous_minimal(report, spec_tilde, trials, seed, interp, rep)
	else:
		raise VerifyError(_('Theory has no covariance fields: {0}').format(spec_tilde.name))

	return report


def _explicit(spec, a):
	''' dL/dx^a including the dependence through background fields '''
	L = spec.lagrangian
	terms = [partial(L, base(a))]

	for f in spec.fields_of('background'):
		comps = list(spec.components(f))

		if f.geom == 'metric_inverse':
			comps.append(spec.volume(f.name))

		terms.extend(partial(L, c) * c.prolong(a) for c in comps)

	return Add(*terms)


def _el_flux(spec, a):
	return Add(*[residual(spec, c) * c.prolong(a) for f in spec.fields_of('variational', 'covariance')
	             for c in spec.components(f)])


def check_sem_identity(spec, trials=32, seed=42):
	''' dL/dx^a - D_b t^b_a + EL_A y^A_a vanishes identically '''
	report = Report('sem-identity', spec.name, trials, seed)
	t = sem_tensor(spec)

	for a in range(spec.base_dim):
		div = Add(*[total_derivative(t[b, a], b) for b in range(spec.base_dim)])
		_symbolic(report, spec.coords[a], _explicit(spec, a) - div + _el_flux(spec, a), trials, seed)

	return report


def check_energy_identity(spec, trials=32, seed=42):
	''' D_t E + dL/dt + EL_A q'^A vanishes identically '''
	if spec.base_dim != 1:
		raise VerifyError(_('The energy identity needs one base coordinate'))

	report = Report('energy-identity', spec.name, trials, seed)
	e = total_derivative(energy(spec), 0) + _explicit(spec, 0) + _el_flux(spec, 0)
	_symbolic(report, spec.coords[0], e, trials, seed)
	return report


def check_piola_identity(dims=(1, 2, 3), trials=32, seed=42):
	''' D_mu C_c^mu vanishes for every column of the cofactor matrix '''
	report = Report('piola-identity', samples=trials, seed=seed)

	for dim in dims:
		if not 1 <= dim <= 3:
			raise VerifyError(_('Piola identities are checked for dimensions 1 to 3'))

		jac = JacobianBundle('X', dim)
		divergence = [Add(*[total_derivative(jac.cofactor(c, mu), mu) for mu in range(dim)]) for c in range(dim)]
		_symbolic(report, 'dim-{0}'.format(dim), divergence, trials, seed)

	return report


def check_piola_kirchhoff(spec_tilde, trials=32, seed=42):
	''' The Piola transform of the original tensor equals dL~/dx^a_mu '''
	X = spec_tilde.point_map()

	if X is None:
		raise VerifyError(_('Theory has no point map: {0}').format(spec_tilde.name))

	report = Report('piola-kirchhoff', spec_tilde.name, trials, seed)
	p = piola_kirchhoff(spec_tilde)
	n = spec_tilde.base_dim

	for mu in range(n):
		for a in range(n):
			momentum = partial(spec_tilde.lagrangian, cov_jet(X.name, a, (mu,)))
			_symbolic(report, 'p[{0},{1}]'.format(mu, a), p[mu, a] - momentum, trials, seed)

	return report


#: Frozen inverse metrics of the reduction check
METRICS = {'lightcone': ((0, 1), (1, 0)),
           'euclidean': ((1, 0), (0, 1))}

def check_reduction_kg(metric='lightcone', massless=False, trials=32, seed=42, kg1=None, kg2=None):
	''' The background covariantization of the metric theory, frozen to a constant metric,
	against the horizontal covariantization of the lightcone theory '''
	kg1 = kg1 or bundled('kg1')
	kg2 = kg2 or bundled('kg2')
	metrics = [f for f in kg2.fields_of('background') if f.geom == 'metric_inverse']

	if len(metrics) != 1 or metric not in METRICS:
		raise VerifyError(_('The reduction needs one metric background and a known frozen metric'))

	g = metrics[0]
	matrix = METRICS[metric]
	frozen = dict((param(bar_name(g.name, '{0}{1}'.format(a, b))), matrix[a][b]) for a in range(2) for b in range(a, 2))
	frozen[param(bar_name(g.name, 'vol'))] = 1
	masses = {}

	if massless:
		masses = dict((param(p), 0) for p in set(kg1.params) | set(kg2.params) if p == 'm')

	left = substitute(substitute(covariantize_background(kg2).lagrangian, frozen), masses)
	right = substitute(covariantize_horizontal(kg1).lagrangian, masses)
	name = 'reduction-kg' + ('-massless' if massless else '' if metric == 'lightcone' else '-' + metric)
	report = Report(name, kg2.name, trials, seed)
	_symbolic(report, metric, left - right, trials, seed)
	return report


def check_gauge_shift(spec, trials=32, seed=42):
	''' Invariance under A -> A + df together with eta -> eta - f, where eta exists '''
	covectors = [f for f in spec.fields_of('variational') if f.geom == 'covector']

	if not covectors:
		raise VerifyError(_('Theory has no covector field: {0}').format(spec.name))

	if jet_order(spec.lagrangian) > 1:
		raise VerifyError(_('The gauge shift check needs a first order Lagrangian'))

	n = spec.base_dim
	f = fiber(fresh_name(spec, 'f'))
	mapping = {}

	for A in covectors:
		for mu, c in enumerate(spec.components(A)):
			mapping[c] = c + f.prolong(mu)

			for nu in range(n):
				mapping[c.prolong(nu)] = c.prolong(nu) + f.prolong(mu, nu)

	for eta in spec.fields_of('covariance'):
		if eta.geom != 'scalar' or eta.components != 1:
			continue

		c = spec.components(eta)[0]
		mapping[c] = c - f

		for mu in range(n):
			mapping[c.prolong(mu)] = c.prolong(mu) - f.prolong(mu)

			for nu in range(mu, n):
				mapping[c.prolong(mu, nu)] = c.prolong(mu, nu) - f.prolong(mu, nu)

	report = Report('gauge-shift', spec.name, trials, seed)
	_symbolic(report, 'shift', substitute(spec.lagrangian, mapping) - spec.lagrangian, trials, seed)
	return report


def cayley(W):
	''' Returns g = (1 - W)^-1 (1 + W) and its inverse '''
	I = eye(W.rows)
	P, Q = I - W, I + W
	g = (P.adjugate(method='berkowitz') * Q) / P.det(method='berkowitz')
	ginv = (Q.adjugate(method='berkowitz') * P) / Q.det(method='berkowitz')
	return g, ginv


def check_gauge_minimal(spec_tilde, rep=None, trials=32, seed=42):
	''' Invariance of a minimally coupled Lagrangian under local transformations
	y -> g y, A -> g A g^-1 - dg g^-1, g the Cayley transform of a symbolic field '''
	A = _connection(spec_tilde)
	rep = generators_for(spec_tilde, A, rep)
	r = rep[0].rows
	n = spec_tilde.base_dim
	w = fresh_name(spec_tilde, 'w')
	W = zeros(r, r)

	for k, T in enumerate(rep):
		W += fiber(w, k) * T

	g, ginv = cayley(W)
	dg = [g.applyfunc(lambda e: total_derivative(e, mu)) for mu in range(n)]
	mapping = {}

	for f in _multiplets(spec_tilde, r):
		y = Matrix(spec_tilde.components(f))
		gy = g * y

		for i in range(r):
			mapping[y[i]] = gy[i]

		for mu in range(n):
			image = dg[mu] * y + g * y.applyfunc(lambda c: c.prolong(mu))

			for i in range(r):
				mapping[y[i].prolong(mu)] = image[i]

	for mu in range(n):
		Amu = zeros(r, r)

		for k, T in enumerate(rep):
			Amu += fiber(A.name, k * n + mu) * T

		image = g * Amu * ginv - dg[mu] * ginv

		for k, c in enumerate(coefficients(image, rep, simplify=False)):
			mapping[fiber(A.name, k * n + mu)] = c

	report = Report('gauge-minimal', spec_tilde.name, trials, seed)
	L = spec_tilde.lagrangian
	_symbolic(report, 'rotation', substitute(L, mapping) - L, trials, seed)
	return report


def check_flatness(samples=100, seed=42, tol=1e-9, trials=32):
	''' Curvature of eta^-1 d eta for abelian, rotation valued and general 2x2 maps '''
	report = Report('flatness', samples=samples, seed=seed, tol=tol)

	f = fiber('f')
	F = curvature(flat_connection_from(exp(f), 2))
	_symbolic(report, 'abelian', [e for m in F.values() for e in m], trials, seed)

	theta = fiber('theta')
	rotation = Matrix([[cos(theta), -sin(theta)], [sin(theta), cos(theta)]])
	entries = [e for m in curvature(flat_connection_from(rotation, 2)).values() for e in m]
	syms = sorted(set().union(*[sympify(e).free_symbols for e in entries]), key=default_sort_key)
	largest = 0.0

	for i in range(samples):
		point = sample_point(syms, default_rng([abs(int(seed)), i]), 64)
		largest = max([largest] + [abs(float(eval_at(e, point))) for e in entries])

	report.add('rotation', largest)

	u = Matrix(2, 2, [fiber('u', i) for i in range(4)])
	F = curvature(flat_connection_from(u, 2))
	_symbolic(report, 'general', [e for m in F.values() for e in m], trials, seed)
	return report


def check_round_trip(spec):
	''' Rendering and parsing a theory gives it back '''
	report = Report('round-trip', spec.name)
	again = parse_theory(render_theory(spec))
	report.add('render-parse', Fraction(0) if again == spec else None,
	           Report.PASS if again == spec else Report.FAIL)
	return report


def check_solution_correspondence(spec, spec_tilde, point_map, solution, grid, tol, spatial_grid=None,
                                  params=None, interp=None, body=None):
	''' Solutions of the original theory composed with a point map solve the covariantized one,
	and body sections of the covariantized theory pulled back through their point map solve the
	original again.

	solution takes a tuple of spatial coordinate arrays and returns the original fields,
	point_map takes body coordinates to spatial ones. body is the section to pull back, by
	default the composed one '''
	X = spec_tilde.point_map()

	if X is None:
		raise VerifyError(_('Theory has no point map: {0}').format(spec_tilde.name))

	report = Report('correspondence', spec_tilde.name, seed=None, tol=tol)
	spatial_grid = spatial_grid or grid
	original = DiscreteSection(spatial_grid, solution(spatial_grid.mesh()))
	r = worst(section_residuals(spec, original, params=params, interp=interp))

	if r > tol / 10:
		raise GridTooCoarse(_('Residual {0:.3e} of the original solution is above a tenth of {1:.3e}').format(r, tol))

	report.add('original', r)

	image = point_map(grid.mesh())

	if not all(np.allclose(z, y) for z, y in zip(point_map.inverse(image), grid.mesh())):
		raise VerifyError(_('Point map is not invertible on the body grid'))

	values = dict(solution(image))

	for a in range(spec_tilde.base_dim):
		values[X.name, a] = image[a]

	composed = DiscreteSection(grid, values)
	report.add('forward', worst(section_residuals(spec_tilde, composed, params=params, interp=interp)))

	if body is None:
		body = composed

	for a in range(spec_tilde.base_dim):
		if (X.name, a) not in body:
			raise VerifyError(_('Body section has no values for {0}[{1}]').format(X.name, a))

	report.add('reverse', worst(pulled_back_residuals(spec, spec_tilde, body, params=params, interp=interp)))
	return report


def _oscillator_body(spec_tilde):
	''' The covariantized oscillator integrated along X = 2t '''
	X = spec_tilde.point_map()
	return integrate_mechanics(spec_tilde, [1], [0], (0, 3), 5e-4, fixed={cov_base(X.name, 0): 2 * base(0)})


#: Fixtures of the correspondence check, by theory name
CORRESPONDENCE = {
	'oscillator': {'map': PointMap.affine([[2]], [0]),
	               'solution': lambda x: {('q', None): np.cos(x[0])},
	               'grid': Grid.span([0], [3], [6001]),
	               'spatial': Grid.span([0], [6], [6001]),
	               'body': _oscillator_body,
	               'tol': 1e-5,
	               'params': {}},
	'kg1': {'map': PointMap.shear(0.125, 0, 1),
	        'solution': lambda x: {('phi', None): np.cos(x[0] + x[1] / 2)},
	        'grid': Grid.span([0, 0], [1, 1], [257, 257]),
	        'spatial': None,
	        'body': None,
	        'tol': 1e-4,
	        'params': {'m': 1}},
}

def correspondence(spec, spec_tilde, interp=None):
	''' Runs the correspondence check with the fixture for the theory '''
	fixture = CORRESPONDENCE.get(spec.name)

	if fixture is None:
		raise VerifyError(_('No solution fixture for theory: {0}').format(spec.name))

	body = fixture['body'](spec_tilde) if fixture['body'] else None
	return check_solution_correspondence(spec, spec_tilde, fixture['map'], fixture['solution'], fixture['grid'],
	                                     fixture['tol'], fixture['spatial'], fixture['params'], interp, body)


#: Checks by name: a function of (spec, spec_tilde, options) and the expected status
CHECKS = {
	'round-trip':
		(lambda s, t, o: check_round_trip(s), Report.PASS),
	'identity-recovery':
		(lambda s, t, o: check_identity_recovery(s, t, o['trials'], o['seed']), Report.PASS),
	'covariance':
		(lambda s, t, o: check_covariance(t, o['samples'], o['seed'], o['tol'] or 1e-9, o['interp']), Report.PASS),
	'covariance-control':
		(lambda s, t, o: check_covariance(s, o['samples'], o['seed'], o['tol'] or 1e-9, o['interp']), Report.FAIL),
	'vacuous-el':
		(lambda s, t, o: check_vacuous_el(t, o['trials'], o['seed'], o['interp']), Report.PASS),
	'sem-identity':
		(lambda s, t, o: check_sem_identity(s, o['trials'], o['seed']), Report.PASS),
	'energy-identity':
		(lambda s, t, o: check_energy_identity(s, o['trials'], o['seed']), Report.PASS),
	'piola-identity':
		(lambda s, t, o: check_piola_identity(trials=o['trials'], seed=o['seed']), Report.PASS),
	'piola-kirchhoff':
		(lambda s, t, o: check_piola_kirchhoff(t, o['trials'], o['seed']), Report.PASS),
	'reduction-kg':
		(lambda s, t, o: check_reduction_kg('lightcone', False, o['trials'], o['seed']), Report.PASS),
	'reduction-kg-euclidean':
		(lambda s, t, o: check_reduction_kg('euclidean', False, o['trials'], o['seed']), Report.FAIL),
	'reduction-kg-massless':
		(lambda s, t, o: check_reduction_kg('lightcone', True, o['trials'], o['seed']), Report.PASS),
	'gauge-shift':
		(lambda s, t, o: check_gauge_shift(t, o['trials'], o['seed']), Report.PASS),
	'gauge-shift-broken':
		(lambda s, t, o: check_gauge_shift(s, o['trials'], o['seed']), Report.FAIL),
	'gauge-minimal':
		(lambda s, t, o: check_gauge_minimal(t, None, o['trials'], o['seed']), Report.PASS),
	'flatness':
		(lambda s, t, o: check_flatness(o['samples'], o['seed'], o['tol'] or 1e-9, o['trials']), Report.PASS),
	'correspondence':
		(lambda s, t, o: correspondence(s, t, o['interp']), Report.PASS),
}

#: Options of run_check and their defaults
OPTIONS = {'samples': 100, 'seed': 42, 'tol': None, 'trials': 32, 'interp': None}

def run_check(name, spec, spec_tilde, options=None):
	''' Runs a check by name; errors of the package make the report inconclusive '''
	if name not in CHECKS:
		raise VerifyError(_('Unknown check: {0}').format(name))

	fn, expected = CHECKS[name]
	o = dict(OPTIONS, **(options or {}))

	try:
		report = fn(spec, spec_tilde, o)
	except FieldCovError as e:
		return Report.inconclusive(name, (spec_tilde or spec).name, e.message, expected)

	report.expected = expected
	return report


class CheckRunner(Thread):
	''' Runs one check in its own thread '''

	def __init__(self, name, spec, spec_tilde, options):
		''' Sets the check name, the theories and the options '''
		Thread.__init__(self)
		self._check = name
		self._spec = spec
		self._spec_tilde = spec_tilde
		self._options = options
		self._report = None
		self._error = None

	@staticmethod
	def forge(tasks):
		''' Runs (name, spec, spec_tilde, options) tasks concurrently, returns the reports in task order '''
		runners = [CheckRunner(name, spec, spec_tilde, options) for name, spec, spec_tilde, options in tasks]

		for r in runners:
			r.start()

		reports = []
		errors = []

		for r in runners:
			r.join()

			if r.error is not None:
				errors.append(r.error)
			else:
				reports.append(r.report)

		if errors:
			raise errors[0]

		return reports

	@property
	def report(self):
		return self._report

	@property
	def error(self):
		return self._error

	def run(self):
		''' Runs the check, anything but a package error is kept for the caller '''
		try:
			self._report = run_check(self._check, self._spec, self._spec_tilde, self._options)
		except Exception as e:
			self._error = e

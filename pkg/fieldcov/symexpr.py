# symexpr.py
# vim:ts=4:sw=4:noexpandtab

from fractions import Fraction

from numpy.random import default_rng
from sympy import (Add, Derivative, Dummy, Function, Lambda, Rational, Subs, Symbol, cos, default_sort_key,
                   diff, exp, expand, sin, sympify, symbols)
from sympy.core.function import AppliedUndef
from sympy.printing.precedence import precedence
from sympy.printing.str import StrPrinter

from fieldcov.utils import FieldCovError

class ExprError(FieldCovError):
	''' Handles expression errors '''
	pass


class OrderOverflow(ExprError):
	''' Raised when a result would need jets beyond the supported order '''
	pass


class Inconclusive(ExprError):
	''' Raised when opaque functions block an exact decision '''
	pass


class PoleHit(ExprError):
	''' Raised when a denominator evaluates to zero '''
	pass


class Coord(Symbol):
	''' A classified coordinate on jet space.

	The symbol name encodes kind, field, slot and the sorted multi-index, so two
	coordinates are equal exactly when their classification is. Names sort by kind
	first, which fixes the canonical order: base < covbase < covjet < fiber < jet < param '''

	__slots__ = ()

	#: Coordinate kinds
	KINDS = ('base', 'covbase', 'covjet', 'fiber', 'jet', 'param')

	#: Kinds carrying a multi-index
	JETS = ('covjet', 'jet')

	#: Highest supported derivative order
	MAX_ORDER = 2

	@staticmethod
	def make(kind, field=None, slot=None, multi=()):
		''' Creates a coordinate, the multi-index is stored sorted '''
		if kind not in Coord.KINDS:
			raise ExprError(_('Unknown coordinate kind: {0}').format(kind))

		multi = tuple(sorted(int(m) for m in multi))

		if (kind in Coord.JETS) != bool(multi):
			raise ExprError(_('Multi-index does not fit coordinate kind: {0}').format(kind))

		if len(multi) > Coord.MAX_ORDER:
			raise OrderOverflow(_('Jets of order {0} exceed the supported order {1}').format(len(multi), Coord.MAX_ORDER))

		return Coord('{0}:{1}:{2}:{3}'.format(kind, field or '', '' if slot is None else int(slot),
		                                      ','.join(str(m) for m in multi)))

	def _parts(self):
		return self.name.split(':')

	@property
	def coord_kind(self):
		''' Returns the kind of the coordinate '''
		return self._parts()[0]

	@property
	def field_id(self):
		''' Returns the field (or parameter) name '''
		return self._parts()[1] or None

	@property
	def slot(self):
		''' Returns the base index for base coordinates, the component otherwise '''
		slot = self._parts()[2]
		return int(slot) if slot else None

	@property
	def multi_index(self):
		''' Returns the sorted multi-index of a jet '''
		multi = self._parts()[3]
		return tuple(int(m) for m in multi.split(',')) if multi else ()

	@property
	def jet_order(self):
		return len(self.multi_index)

	@property
	def covariant(self):
		return self.coord_kind in ('covbase', 'covjet')

	def lower(self):
		''' Returns the order zero coordinate of a jet '''
		if self.coord_kind == 'jet':
			return Coord.make('fiber', self.field_id, self.slot)

		if self.coord_kind == 'covjet':
			return Coord.make('covbase', self.field_id, self.slot)

		return self

	def prolong(self, *mu):
		''' Returns the jet coordinate with the base indices mu added '''
		if self.coord_kind in ('base', 'param'):
			raise ExprError(_('Coordinate has no jets: {0}').format(self.name))

		kind = 'covjet' if self.covariant else 'jet'
		return Coord.make(kind, self.field_id, self.slot, self.multi_index + tuple(mu))


def base(mu):
	''' Base coordinate x^mu '''
	return Coord.make('base', slot=mu)

def fiber(field, comp=None):
	''' Fiber coordinate y^A, comp is None for single component fields '''
	return Coord.make('fiber', field, comp)

def jet(field, comp, multi):
	''' Jet coordinate y^A_I '''
	return Coord.make('jet', field, comp, multi)

def cov_base(field, a):
	''' Covariance coordinate x^a '''
	return Coord.make('covbase', field, a)

def cov_jet(field, a, multi):
	''' Covariance jet x^a_I '''
	return Coord.make('covjet', field, a, multi)

def param(name):
	''' Named constant '''
	return Coord.make('param', name)

def coords(e):
	''' Returns the coordinates occurring in e in canonical order '''
	return sorted((s for s in sympify(e).free_symbols if isinstance(s, Coord)), key=default_sort_key)

def jet_order(e):
	''' Returns the highest jet order occurring in e '''
	return max([c.jet_order for c in coords(e)] + [0])


def opaque_tag(name, positions=()):
	''' Tag of an opaque function or of one of its formal derivatives '''
	if not positions:
		return name

	return 'D[{0};{1}]'.format(name, ','.join(str(p) for p in positions))

def split_tag(tag):
	''' Inverse of opaque_tag '''
	if not tag.startswith('D['):
		return tag, ()

	name, positions = tag[2:-1].split(';')
	return name, tuple(int(p) for p in positions.split(','))

def opaque(name, positions=(), args=()):
	''' Builds an opaque function application, or its formal derivative with respect to
	the argument positions '''
	f = Function(name)

	if not positions:
		return f(*args)

	xi = [Dummy('xi') for a in args]
	d = Derivative(f(*xi), *[xi[p] for p in sorted(positions)])
	return d.subs(list(zip(xi, args)))

def opaque_parts(node):
	''' Returns (name, positions, args) of an opaque node, None for other nodes '''
	if isinstance(node, AppliedUndef):
		return node.func.__name__, (), tuple(node.args)

	if isinstance(node, Derivative) and isinstance(node.expr, AppliedUndef):
		f = node.expr
		positions = []

		for v, n in node.variable_count:
			positions.extend([f.args.index(v)] * int(n))

		return f.func.__name__, tuple(sorted(positions)), tuple(f.args)

	if isinstance(node, Subs) and opaque_parts(node.expr) is not None:
		name, positions, args = opaque_parts(node.expr)
		point = dict(zip(node.variables, node.point))
		return name, positions, tuple(a.xreplace(point) for a in args)

	return None

def opaque_nodes(e):
	''' Returns the outermost opaque nodes of e '''
	found = set()

	def walk(node):
		if opaque_parts(node) is not None:
			found.add(node)
			return

		for arg in node.args:
			walk(arg)

	walk(sympify(e))
	return sorted(found, key=default_sort_key)


def canonicalize(e):
	''' Deterministic normal form: flattened, sorted and collected monomials over exact
	rationals, with syntactically identical factors cancelled '''
	return expand(sympify(e), power_base=False, power_exp=False, log=False)

def partial(e, c):
	''' Formal partial derivative, every coordinate is independent '''
	return canonicalize(diff(sympify(e), c))

def total_derivative(e, mu, spec=None):
	''' D_mu e = de/dx^mu + sum over fiber and jet coordinates of y_{I+mu} de/dy_I '''
	e = sympify(e)

	if spec is not None and not 0 <= mu < spec.base_dim:
		raise ExprError(_('No base coordinate with index {0}').format(mu))

	terms = []

	for c in coords(e):
		kind = c.coord_kind

		if kind == 'param':
			continue

		if kind == 'base':
			if c.slot == mu:
				terms.append(diff(e, c))
			continue

		if c.jet_order >= Coord.MAX_ORDER:
			raise OrderOverflow(_('Total derivative of {0} needs jets of order {1}').format(render(c), c.jet_order + 1))

		terms.append(c.prolong(mu) * diff(e, c))

	return canonicalize(Add(*terms))

def substitute(e, mapping):
	''' Simultaneous substitution followed by canonicalization '''
	e = sympify(e)
	mapping = dict((k, sympify(v)) for k, v in mapping.items())

	if e.has(Derivative, Subs):
		return canonicalize(e.subs(mapping, simultaneous=True))

	return canonicalize(e.xreplace(mapping))


class Interpretation:
	''' Assigns symbolic bodies to opaque functions. Works as a substitution on
	expressions and as a tag to numeric function lookup for eval_at '''

	def __init__(self, functions=None, default=None):
		''' functions maps names to sympy Lambdas, default builds a Lambda from an arity '''
		self._functions = dict(functions or {})
		self._default = default
		self._bodies = {}

	def function(self, name, arity):
		''' Returns the Lambda for a function name '''
		if name in self._functions:
			return self._functions[name]

		if self._default is None:
			raise Inconclusive(_('No interpretation for opaque function: {0}').format(name))

		return self._default(arity)

	def body(self, name, positions, arity):
		''' Returns the variables and the differentiated body of an opaque function '''
		key = (name, positions, arity)

		if key not in self._bodies:
			lam = self.function(name, arity)
			body = lam.expr

			if positions:
				body = diff(body, *[lam.variables[p] for p in positions])

			self._bodies[key] = (lam.variables, body)

		return self._bodies[key]

	def get(self, tag, default=None):
		''' Returns an exact numeric callable for an opaque tag '''
		name, positions = split_tag(tag)

		if name not in self._functions and self._default is None:
			return default

		def call(*args):
			variables, body = self.body(name, positions, len(args))
			return eval_at(body, dict(zip(variables, args)))

		return call

	def apply(self, e):
		''' Replaces every opaque node by its interpretation '''
		e = sympify(e)
		mapping = {}

		for node in opaque_nodes(e):
			name, positions, args = opaque_parts(node)
			args = [self.apply(a) for a in args]
			variables, body = self.body(name, positions, len(args))
			mapping[node] = body.xreplace(dict(zip(variables, args)))

		return e.xreplace(mapping)


def _harmonic(arity):
	u = symbols('u0:{0}'.format(arity))
	return Lambda(u, Rational(1, 2) * Add(*[v ** 2 for v in u]))

#: Opaque functions read as half the sum of squared arguments, exact on rationals
HARMONIC = Interpretation(default=_harmonic)

#: Numeric functions known to eval_at
NUMERIC = {'sin': sin, 'cos': cos, 'exp': exp}


def _number(v):
	''' Normalizes point values: exact rationals become Fractions, the rest floats '''
	if isinstance(v, Fraction):
		return v

	if isinstance(v, int):
		return Fraction(v)

	v = sympify(v)

	if v.is_Rational:
		return Fraction(int(v.p), int(v.q))

	return float(v)

def _evaluate(e, point, interp):
	if e.is_Symbol:
		try:
			return point[e]
		except KeyError:
			raise ExprError(_('No value for coordinate: {0}').format(render(e)))

	if e.is_Rational:
		return Fraction(int(e.p), int(e.q))

	if e.is_Float or e.is_NumberSymbol:
		return float(e)

	if e.is_Add:
		return sum(_evaluate(a, point, interp) for a in e.args)

	if e.is_Mul:
		value = Fraction(1)

		for a in e.args:
			value = value * _evaluate(a, point, interp)

		return value

	if e.is_Pow:
		b = _evaluate(e.base, point, interp)

		if e.exp.is_Integer:
			n = int(e.exp)

			if n < 0 and b == 0:
				raise PoleHit(_('Pole at {0}').format(render(e.base)))

			return b ** n

		x = _evaluate(e.exp, point, interp)

		if b == 0 and x < 0:
			raise PoleHit(_('Pole at {0}').format(render(e.base)))

		return float(b) ** float(x)

	parts = opaque_parts(e)

	if parts is not None:
		name, positions, args = parts
		fn = interp.get(opaque_tag(name, positions)) if interp is not None else None

		if fn is None:
			raise Inconclusive(_('No numeric interpretation for {0}').format(opaque_tag(name, positions)))

		return _number(fn(*[_evaluate(a, point, interp) for a in args]))

	name = e.func.__name__

	if name in NUMERIC and len(e.args) == 1:
		fn = interp.get(name) if interp is not None else None
		arg = float(_evaluate(e.args[0], point, interp))
		return float(fn(arg) if fn is not None else NUMERIC[name](arg))

	raise ExprError(_('Cannot evaluate: {0}').format(render(e)))

def eval_at(e, point, interp=None):
	''' Evaluates e at a point (Coord -> number). The result is an exact Fraction when
	every input is rational and no transcendental function is involved '''
	point = dict((k, _number(v)) for k, v in point.items())
	return _evaluate(sympify(e), point, interp)


#: Coefficient height of sampled rationals
HEIGHT = 2 ** 16

#: Redraws per trial when a sample hits a pole
REDRAWS = 8

#: Relative tolerance for samples that could only be evaluated in floating point
FLOAT_TOL = 1e-9

def sample_point(syms, rng, height=HEIGHT):
	''' Draws an exact rational for every symbol '''
	return dict((s, Fraction(int(rng.integers(-height, height + 1)), int(rng.integers(1, height + 1))))
	            for s in syms)

def _sampled_zero(d, trials, seed, interp):
	syms = sorted(d.free_symbols, key=default_sort_key)
	terms = d.args if d.is_Add else (d,)

	for trial in range(trials):
		rng = default_rng([abs(int(seed)), trial])

		for attempt in range(REDRAWS):
			try:
				point = sample_point(syms, rng)
				values = [eval_at(t, point, interp) for t in terms]
				break
			except PoleHit:
				continue
		else:
			raise Inconclusive(_('Every sample hit a pole after {0} redraws').format(REDRAWS))

		total = sum(values)

		if isinstance(total, Fraction):
			if total != 0:
				return False
		elif abs(total) > FLOAT_TOL * (1 + max(abs(v) for v in values)):
			return False

	return True

def equal_identically(e1, e2, trials=32, seed=0, interp=None):
	''' Probabilistic identity test: canonical zero first, then exact rational sampling '''
	if trials < 1:
		raise ExprError(_('At least one trial is needed'))

	d = canonicalize(sympify(e1) - sympify(e2))

	if d == 0:
		return True

	nodes = opaque_nodes(d)

	if nodes and interp is None:
		unknowns = dict((n, Symbol('_opaque{0}'.format(i))) for i, n in enumerate(nodes))
		d = canonicalize(d.xreplace(unknowns))

		if d == 0:
			return True

		if _sampled_zero(d, trials, seed, None):
			return True

		if d.free_symbols & set(unknowns.values()):
			raise Inconclusive(_('Opaque functions prevent an exact decision'))

		return False

	return _sampled_zero(d, trials, seed, interp)


class ExprPrinter(StrPrinter):
	''' Canonical text form: explicit '*' and '^', jets as D[f;mu,...], re-parseable '''

	_default_settings = dict(StrPrinter._default_settings, coords=())

	def _coord_name(self, mu):
		names = self._settings['coords']
		return names[mu] if mu < len(names) else 'x{0}'.format(mu)

	def _print_Coord(self, c):
		kind = c.coord_kind

		if kind == 'base':
			return self._coord_name(c.slot)

		if kind == 'param':
			return c.field_id

		if c.covariant:
			name = c.field_id + self._coord_name(c.slot)
		elif c.slot is None:
			name = c.field_id
		else:
			name = '{0}[{1}]'.format(c.field_id, c.slot)

		if not c.multi_index:
			return name

		return 'D[{0};{1}]'.format(name, ','.join(self._coord_name(m) for m in c.multi_index))

	def _print_Pow(self, expr, rational=False):
		prec = precedence(expr)
		b = self.parenthesize(expr.base, prec, strict=True)

		if expr.exp.is_Integer:
			n = int(expr.exp)

			if n == -1:
				return '1/{0}'.format(b)

			if n < 0:
				return '1/{0}^{1}'.format(b, -n)

			return '{0}^{1}'.format(b, n)

		return '{0}^({1})'.format(b, self._print(expr.exp))

	def _print_opaque(self, expr):
		name, positions, args = opaque_parts(expr)
		return '{0}({1})'.format(opaque_tag(name, positions), ', '.join(self._print(a) for a in args))

	def _print_Derivative(self, expr):
		if opaque_parts(expr) is None:
			return super()._print_Derivative(expr)
		return self._print_opaque(expr)

	def _print_Subs(self, expr):
		if opaque_parts(expr) is None:
			return super()._print_Subs(expr)
		return self._print_opaque(expr)

def render(e, coords=()):
	''' Canonical text rendering, coords names the base coordinates '''
	return ExprPrinter({'coords': tuple(coords)}).doprint(sympify(e))

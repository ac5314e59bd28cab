# parser.py
# vim:ts=4:sw=4:noexpandtab

from re import compile as compile_pattern

from sympy import Integer, cos, exp, sin, sqrt

from fieldcov.utils import FieldCovError
from fieldcov.symexpr import ExprError, opaque

class ParserError(FieldCovError):
	''' Handles parser errors '''
	pass


class TheorySyntaxError(ParserError):
	''' Handles syntax errors, knows where they happened '''

	def __init__(self, msg, line, column):
		''' Sets the message and the position '''
		super().__init__(_('{0}:{1}: {2}').format(line, column, msg))
		self._line = line
		self._column = column
		self._reason = msg

	@property
	def line(self):
		''' Returns the line number, starting at 1 '''
		return self._line

	@property
	def column(self):
		''' Returns the column, starting at 1 '''
		return self._column

	@property
	def reason(self):
		''' Returns the message without position '''
		return self._reason


class Parser:
	''' The base parser class '''

	def __init__(self, data):
		''' Sets the data string '''
		self._data = data

	def parse(self):
		''' Must be implemented in the child classes. Do not use this class directly.'''
		raise NotImplementedError('Must be implemented in the child class')


class ExprParser(Parser):
	''' Recursive descent parser for Lagrangian expressions.

	Identifiers are resolved through a scope providing resolve(name, comp),
	coord_index(name) and volume(name), usually a TheorySpec '''

	#: Pattern matches one token
	TOKEN = compile_pattern(r'\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))')

	#: Builtin functions
	FUNCTIONS = {'cos': cos, 'exp': exp, 'sin': sin, 'sqrt': sqrt}

	def __init__(self, data, scope, line=1, column=1):
		''' Sets the expression, the scope and the position of the expression in its file '''
		super().__init__(data)
		self._scope = scope
		self._line = line
		self._column = column
		self._tokens = self._tokenize()
		self._pos = 0

	def _tokenize(self):
		tokens = []
		pos = 0

		while pos < len(self._data):
			m = ExprParser.TOKEN.match(self._data, pos)

			if m is None:
				break

			kind = ('num', 'ident', 'punct')[m.lastindex - 1]
			tokens.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
			pos = m.end()

		tokens.append(('end', '', len(self._data.rstrip())))
		return tokens

	def _error(self, msg, token=None):
		token = token or self._peek()
		raise TheorySyntaxError(msg, self._line, self._column + token[2])

	def _peek(self, ahead=0):
		return self._tokens[min(self._pos + ahead, len(self._tokens) - 1)]

	def _next(self):
		token = self._peek()
		self._pos += 1
		return token

	def _accept(self, value):
		if self._peek()[0] != 'end' and self._peek()[1] == value:
			return self._next()
		return None

	def _expect(self, value):
		token = self._accept(value)

		if token is None:
			found = self._peek()[1] or _('end of line')
			self._error(_('Expected {0!r}, found {1!r}').format(value, found))

		return token

	def _ident(self):
		token = self._next()

		if token[0] != 'ident':
			self._error(_('Expected a name'), token)

		return token

	def _number(self):
		token = self._next()

		if token[0] != 'num':
			self._error(_('Expected a number'), token)

		return int(token[1])

	def parse(self):
		''' Parses the expression into a sympy expression '''
		e = self._expr()

		if self._peek()[0] != 'end':
			self._error(_('Unexpected token: {0}').format(self._peek()[1]))

		return e

	def _expr(self):
		e = self._term()

		while True:
			if self._accept('+'):
				e = e + self._term()
			elif self._accept('-'):
				e = e - self._term()
			else:
				return e

	def _term(self):
		e = self._unary()

		while True:
			if self._accept('*'):
				e = e * self._unary()
			elif self._peek()[1] == '/' and self._peek()[0] == 'punct':
				token = self._next()
				d = self._unary()

				if d == 0:
					self._error(_('Division by zero'), token)

				e = e / d
			else:
				return e

	def _unary(self):
		if self._accept('-'):
			return -self._unary()

		if self._accept('+'):
			return self._unary()

		return self._power()

	def _power(self):
		e = self._atom()
		token = self._accept('^')

		if token is None:
			return e

		x = self._unary()

		if not x.is_Rational:
			self._error(_('Exponents must be rational constants'), token)

		if e == 0 and x < 0:
			self._error(_('Division by zero'), token)

		return e ** x

	def _atom(self):
		token = self._peek()

		if token[0] == 'num':
			return Integer(self._number())

		if self._accept('('):
			e = self._expr()
			self._expect(')')
			return e

		if token[0] != 'ident':
			self._error(_('Unexpected token: {0}').format(token[1] or _('end of line')))

		if token[1] == 'D' and self._peek(1)[1] == '[':
			return self._jet()

		self._next()

		if self._peek()[1] == '(':
			return self._call(token)

		comp = self._component()
		return self._resolve(token, comp)

	def _component(self):
		if not self._accept('['):
			return None

		comp = self._number()
		self._expect(']')
		return comp

	def _resolve(self, token, comp):
		coord = self._scope.resolve(token[1], comp)

		if coord is None:
			name = token[1] if comp is None else '{0}[{1}]'.format(token[1], comp)
			self._error(_('Unknown name: {0}').format(name), token)

		return coord

	def _args(self):
		self._expect('(')
		args = [self._expr()]

		while self._accept(','):
			args.append(self._expr())

		self._expect(')')
		return args

	def _call(self, token):
		name = token[1]

		if name == 'vol' and self._peek(1)[0] == 'ident' and self._peek(2)[1] == ')':
			coord = self._scope.volume(self._peek(1)[1])

			if coord is not None:
				self._pos += 3
				return coord

		args = self._args()

		if name in ExprParser.FUNCTIONS:
			if len(args) != 1:
				self._error(_('{0} takes one argument').format(name), token)
			return ExprParser.FUNCTIONS[name](args[0])

		return opaque(name, (), args)

	def _jet(self):
		start = self._next()
		self._expect('[')
		target = self._ident()
		comp = self._component()
		self._expect(';')
		indices = [self._next()]

		while self._accept(','):
			indices.append(self._next())

		self._expect(']')

		if self._peek()[1] == '(':
			if comp is not None or any(t[0] != 'num' for t in indices):
				self._error(_('Derivatives of functions are taken by argument position'), start)
			return opaque(target[1], tuple(int(t[1]) for t in indices), self._args())

		coord = self._resolve(target, comp)
		mu = []

		for t in indices:
			index = self._scope.coord_index(t[1]) if t[0] == 'ident' else None

			if index is None:
				self._error(_('Unknown base coordinate: {0}').format(t[1]), t)

			mu.append(index)

		try:
			return coord.prolong(*mu)
		except ExprError as e:
			self._error(e.message, start)


class TheoryParser(Parser):
	''' Parses the line oriented theory format into an info dict '''

	#: Pattern matches 'theory <name>'
	THEORY = compile_pattern(r'theory\s+([A-Za-z0-9_\-]+)\s*$')

	#: Pattern matches 'base <n> (<coord>, ...)'
	BASE = compile_pattern(r'base\s+(\d+)\s*\(([^)]*)\)\s*$')

	#: Pattern matches 'param <name>, ...'
	PARAM = compile_pattern(r'param\s+(.+?)\s*$')

	#: Pattern matches 'field <name>[<n>] : <geom> <kind>'
	FIELD = compile_pattern(r'field\s+([A-Za-z_][A-Za-z_0-9]*)\s*(?:\[\s*(\d+)\s*\])?\s*:\s*([a-z_]+)\s+([a-z]+)\s*$')

	#: Pattern matches 'lagrangian <expr>'
	LAGRANGIAN = compile_pattern(r'lagrangian\s+(\S.*?)\s*$')

	#: Pattern matches an identifier
	NAME = compile_pattern(r'[A-Za-z_][A-Za-z_0-9]*$')

	#: Translations from the file format to field declarations
	GEOMS = {'scalar': 'scalar',
	         'covector': 'covector',
	         'metric_inverse': 'metric_inverse',
	         'lie_oneform': 'lie_oneform'}

	#: Field kinds
	KINDS = ('variational', 'background', 'covariance')

	def _names(self, text, lineno, column):
		names = [n.strip() for n in text.split(',')]

		for n in names:
			if not TheoryParser.NAME.match(n):
				raise TheorySyntaxError(_('Not a name: {0!r}').format(n), lineno, column)

		return names

	def parse(self):
		''' Parses the theory source, self._data must be the text '''
		info = {'name': None, 'base_dim': None, 'coords': [], 'params': [], 'fields': [], 'lagrangian': None}

		for lineno, raw in enumerate(self._data.splitlines(), 1):
			line = raw.split('#', 1)[0].rstrip()
			stripped = line.lstrip()

			if not stripped:
				continue

			column = len(line) - len(stripped) + 1
			keyword = stripped.split(None, 1)[0]

			if keyword == 'theory':
				m = TheoryParser.THEORY.match(stripped)

				if m is None:
					raise TheorySyntaxError(_('Expected: theory <name>'), lineno, column)

				info['name'] = m.group(1)

			elif keyword == 'base':
				m = TheoryParser.BASE.match(stripped)

				if m is None:
					raise TheorySyntaxError(_('Expected: base <n> (<coord>, ...)'), lineno, column)

				info['base_dim'] = int(m.group(1))
				info['coords'] = self._names(m.group(2), lineno, column + m.start(2))

				if info['base_dim'] != len(info['coords']):
					raise TheorySyntaxError(_('Base dimension {0} does not match {1} coordinates')
					                        .format(info['base_dim'], len(info['coords'])), lineno, column)

			elif keyword == 'param':
				m = TheoryParser.PARAM.match(stripped)

				if m is None:
					raise TheorySyntaxError(_('Expected: param <name>, ...'), lineno, column)

				info['params'].extend(self._names(m.group(1), lineno, column + m.start(1)))

			elif keyword == 'field':
				m = TheoryParser.FIELD.match(stripped)

				if m is None:
					raise TheorySyntaxError(_('Expected: field <name>[<n>] : <geometry> <kind>'), lineno, column)

				name, comps, geom, kind = m.groups()

				if geom not in TheoryParser.GEOMS:
					raise TheorySyntaxError(_('Unknown geometry: {0}').format(geom), lineno, column + m.start(3))

				if kind not in TheoryParser.KINDS:
					raise TheorySyntaxError(_('Unknown field kind: {0}').format(kind), lineno, column + m.start(4))

				info['fields'].append((name, int(comps or 1), TheoryParser.GEOMS[geom], kind))

			elif keyword == 'lagrangian':
				m = TheoryParser.LAGRANGIAN.match(stripped)

				if m is None:
					raise TheorySyntaxError(_('Expected: lagrangian <expression>'), lineno, column)

				if info['lagrangian'] is not None:
					raise TheorySyntaxError(_('Only one lagrangian per theory'), lineno, column)

				info['lagrangian'] = (m.group(1), lineno, column + m.start(1))

			else:
				raise TheorySyntaxError(_('Unknown section: {0}').format(keyword), lineno, column)

		if info['name'] is None:
			raise TheorySyntaxError(_('Missing theory line'), 1, 1)

		if info['base_dim'] is None:
			raise TheorySyntaxError(_('Missing base line'), 1, 1)

		if info['lagrangian'] is None:
			raise TheorySyntaxError(_('Missing lagrangian line'), 1, 1)

		return info

# utils.py
# vim:ts=4:sw=4:noexpandtab

from sys import stderr, stdout
from fractions import Fraction

class FieldCovError(Exception):
	''' Base exception used by all field-cov errors '''

	def __init__(self, msg):
		''' Sets the error message '''
		super().__init__(msg)
		self._msg = msg

	@property
	def message(self):
		''' Returns the error message '''
		return self._msg

	def __str__(self):
		''' Returns the error message '''
		return self._msg


class Utils:
	''' Some simple utilities '''

	@staticmethod
	def fraction(val):
		''' Parses 'p', 'p/q' or a decimal string into a Fraction '''
		try:
			return Fraction(str(val).strip())
		except:
			raise FieldCovError(_('Not a number: {0}').format(val))

	@staticmethod
	def assignments(pairs):
		''' Turns a list of 'name=value' strings into a dict of Fractions '''
		values = {}

		for pair in pairs or ():
			if '=' not in pair:
				raise FieldCovError(_('Expected name=value: {0}').format(pair))

			name, val = pair.split('=', 1)
			values[name.strip()] = Utils.fraction(val)

		return values


class Msg:
	''' A simple class with some static methods for fancy colored output '''

	#: Color map
	COLORS = {'reset':    '\033[0m',
	          'blue':     '\033[0;34m',
	          'bred':     '\033[1;31m'}

	#: Colors are only used on terminals, and can be switched off
	color = True

	@staticmethod
	def colorize(msg, color):
		return Msg.COLORS[color] + msg + Msg.COLORS['reset']

	@staticmethod
	def msg(msg, color=None, stream=None):
		''' Prints a fancy colored message to a file stream '''
		stream = stream or stdout
		msg = ' '.join((str(m) for m in msg)) if type(msg) is tuple else str(msg)

		if color and Msg.color and stream.isatty():
			msg = Msg.colorize(msg, color)

		print(msg, file=stream)

	@staticmethod
	def process(*args):
		''' Prints process messages '''
		Msg.msg(('>',) + args, color='blue', stream=stderr)

	@staticmethod
	def error(*args):
		''' Prints error messages '''
		Msg.msg(args, color='bred', stream=stderr)

	@staticmethod
	def info(*args):
		''' Prints info messages '''
		Msg.msg(args)


class Humanizer:
	''' A collection of methods converting data into human readable strings '''

	#: Translations
	TRANS = {'check':     _('Check'),
	         'degenerate': _('Degenerate samples'),
	         'expected':  _('Expected'),
	         'extents':   _('Extents'),
	         'fields':    _('Fields'),
	         'note':      _('Note'),
	         'origin':    _('Origin'),
	         'residual':  _('Residual'),
	         'samples':   _('Samples'),
	         'seed':      _('Seed'),
	         'spacing':   _('Spacing'),
	         'status':    _('Status'),
	         'theory':    _('Theory'),
	         'tolerance': _('Tolerance'),
	         'worst':     _('Worst residual')}

	@staticmethod
	def number(v):
		''' Formats exact and floating results the same way on every run '''
		if isinstance(v, Fraction):
			return str(v.numerator) if v.denominator == 1 else '{0}/{1}'.format(v.numerator, v.denominator)

		if isinstance(v, float):
			return '{0:.6e}'.format(v)

		return str(v)

	@staticmethod
	def info(info):
		''' Turns a list of (key, value) pairs into a human readable info string '''
		max = 0
		nice = []

		for k, v in info:
			if type(v) is bool:
				v = _('Yes') if v else _('No')
			elif type(v) in (list, tuple):
				v = ' '.join((Humanizer.number(i) for i in v))
			elif v is None:
				v = '-'
			else:
				v = Humanizer.number(v)

			k = Humanizer.TRANS.get(k, k)

			if len(k) > max:
				max = len(k)

			nice.append((k, v))

		return '\n'.join(('{0:{1}}  {2}'.format(k, max, v) for k, v in nice))

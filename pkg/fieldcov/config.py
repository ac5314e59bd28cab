# config.py
# vim:ts=4:sw=4:noexpandtab

from os import makedirs
from os.path import abspath, dirname, exists, expanduser, isdir, join
from configparser import ConfigParser

from fieldcov.utils import FieldCovError

class ConfigError(FieldCovError):
	''' The config error class '''
	pass


class Config:
	''' A wrapper for the ConfigParser class '''

	#: Path to the config file
	CONFIGFILE = expanduser(join('~', '.config', 'field-cov'))

	#: Name of the global section
	ALL = 'all'

	#: Data types
	TYPES = {'checks': list,
	         'color': bool,
	         'log': str,
	         'samples': int,
	         'seed': int,
	         'tol': float,
	         'trials': int}

	#: Built-in defaults, so bare invocations are reproducible
	DEFAULTS = {'samples': 100,
	            'seed': 42,
	            'trials': 32}

	#: The ConfigParser instance
	_parser = ConfigParser()

	#: The selected theory section
	_section = ALL

	@staticmethod
	def init(section=ALL, path=CONFIGFILE):
		''' Selects the theory section and loads the config file '''
		Config._parser = ConfigParser()
		Config._section = section
		path = abspath(path)

		if not exists(path):
			return

		try:
			f = open(path)
		except:
			raise ConfigError(_('Could not open config file: {0}').format(path))

		try:
			Config._parser.read_file(f)
		except:
			raise ConfigError(_('Could not parse config file: {0}').format(path))
		finally:
			f.close()

	@staticmethod
	def select(section):
		''' Switches to the section of another theory '''
		Config._section = section

	@staticmethod
	def _get(section, option):
		''' Returns an option in the correct datatype '''
		datatype = Config.TYPES.get(option, str)

		if datatype is bool:
			return Config._parser.getboolean(section, option)

		if datatype is int:
			return Config._parser.getint(section, option)

		if datatype is float:
			return Config._parser.getfloat(section, option)

		if datatype is list:
			return Config._parser.get(section, option).replace(',', ' ').split()

		return Config._parser.get(section, option)

	@staticmethod
	def typed(option, val):
		''' Converts the text of an option to its datatype '''
		if option not in Config.TYPES:
			raise ConfigError(_('Unknown option: {0}').format(option))

		datatype = Config.TYPES[option]

		try:
			if datatype is bool:
				return ConfigParser.BOOLEAN_STATES[val.lower()]

			if datatype is list:
				return val.replace(',', ' ').split()

			return datatype(val)
		except (KeyError, ValueError):
			raise ConfigError(_('Invalid value for {0}: {1}').format(option, val))

	@staticmethod
	def get(option, default=None):
		''' Returns an option '''
		try:
			return Config._get(Config._section, option)
		except:
			pass

		try:
			return Config._get(Config.ALL, option)
		except:
			pass

		return Config.DEFAULTS.get(option, default) if default is None else default

	@staticmethod
	def set(option, val):
		''' Sets an option '''
		if not Config._parser.has_section(Config._section):
			Config._parser.add_section(Config._section)

		if type(val) is bool:
			Config._parser.set(Config._section, option, 'yes' if val else 'no')
		elif type(val) in (list, tuple):
			Config._parser.set(Config._section, option, ' '.join((str(v) for v in val)))
		else:
			Config._parser.set(Config._section, option, str(val))

	@staticmethod
	def remove(option):
		''' Removes an option '''
		if Config._parser.has_section(Config._section):
			Config._parser.remove_option(Config._section, option)

	@staticmethod
	def items():
		''' Returns the options set in the selected section '''
		if not Config._parser.has_section(Config._section):
			return []

		options = Config._parser.options(Config._section)
		return [(option, Config._parser.get(Config._section, option)) for option in options]

	@staticmethod
	def save(path=CONFIGFILE):
		''' Saves options to config file '''
		try:
			if not isdir(dirname(path)):
				makedirs(dirname(path), mode=0o755, exist_ok=True)

			with open(path, 'w') as f:
				Config._parser.write(f)
		except:
			raise ConfigError(_('Could not save config file: {0}').format(path))

# __init__.py
# vim:ts=4:sw=4:noexpandtab

import builtins

from os.path import dirname, exists, join
from gettext import bindtextdomain, textdomain, gettext

__all__ = ['cli', 'config', 'covariantize', 'fieldcov', 'log', 'numerics', 'parser', 'symexpr',
           'theory', 'utils', 'variational', 'verify']

locale = join(dirname(dirname(__file__)), 'share', 'locale')

if not exists(locale):
	locale = '/usr/share/locale'

bindtextdomain('fieldcov', locale)
textdomain('fieldcov')
builtins._ = gettext

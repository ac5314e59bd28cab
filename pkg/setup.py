#!/usr/bin/env python3
# vim:ts=4:sw=4:noexpandtab

from setuptools import setup
from os.path import dirname, isdir, join
from subprocess import call
from glob import glob

if isdir(join('share', 'translations')) and call([join('share', 'po.sh'), 'compile']) != 0:
	print('Language compiling failed')
	exit(1)

msg = glob(join('share', 'locale', '*', 'LC_MESSAGES', 'fieldcov.mo'))
theories = glob(join('share', 'theories', '*.thy'))

setup(name='field-cov',
      version='0.3.0',
      description='Covariantization of classical field theories with symbolic and numerical checks',
      scripts=['field-cov'],
      packages=['fieldcov'],
      install_requires=['sympy', 'numpy'],
      extras_require={'test': ['hypothesis']},
      data_files=[(dirname(f), [f]) for f in msg] + [(join('share', 'field-cov', 'theories'), theories)])

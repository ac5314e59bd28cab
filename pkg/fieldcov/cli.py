# cli.py
# vim:ts=4:sw=4:noexpandtab

from argparse import ArgumentParser

from fieldcov.utils import FieldCovError, Msg, Utils
from fieldcov.config import Config
from fieldcov.log import Log
from fieldcov.theory import bundled_names
from fieldcov.fieldcov import FieldCov

#: Version string
VERSION = '0.3.0'

def parser():
	''' Builds the argument parser '''
	p = ArgumentParser(prog='field-cov', description=_('Covariantizes classical field theories and checks the result'))
	p.add_argument('--version', action='version', version='%(prog)s ' + VERSION)
	p.add_argument('-o', '--output', dest='output', default=None, metavar='PATH', help=_('write results to PATH'))
	p.add_argument('--config', dest='config', default=Config.CONFIGFILE, metavar='PATH', help=_('config file'))
	sub = p.add_subparsers(dest='command', metavar='COMMAND')
	sub.required = True
	theory = _('a .thy file or the name of a bundled theory ({0})').format(', '.join(bundled_names()))

	parse = sub.add_parser('parse', help=_('print the canonical form of a theory'))
	parse.add_argument('theory', help=theory)

	cov = sub.add_parser('covariantize', help=_('print the covariantized theory'))
	cov.add_argument('theory', help=theory)
	cov.add_argument('--mode', choices=['horizontal', 'background', 'vertical'], default=None)
	cov.add_argument('--action', choices=['shift', 'minimal'], default=None)

	el = sub.add_parser('el', help=_('print the Euler-Lagrange residuals'))
	el.add_argument('theory', help=theory)

	sem = sub.add_parser('sem', help=_('print the stress-energy-momentum tensor'))
	sem.add_argument('theory', help=theory)
	sem.add_argument('--piola', action='store_true', default=False,
	                 help=_('Piola-Kirchhoff form of a covariantized theory'))

	energy = sub.add_parser('energy', help=_('print the energy of a mechanical theory'))
	energy.add_argument('theory', help=theory)

	verify = sub.add_parser('verify', help=_('run checks'))
	verify.add_argument('theories', nargs='*', metavar='theory', help=theory)
	verify.add_argument('--mode', choices=['horizontal', 'background', 'vertical'], default=None)
	verify.add_argument('--action', choices=['shift', 'minimal'], default=None)
	verify.add_argument('--checks', default=None, metavar='LIST', help=_('comma separated checks'))
	verify.add_argument('--all', action='store_true', default=False, help=_('run the designated checks'))
	verify.add_argument('--samples', type=int, default=None)
	verify.add_argument('--seed', type=int, default=None)
	verify.add_argument('--tol', type=float, default=None)
	verify.add_argument('--trials', type=int, default=None)
	verify.add_argument('--format', dest='fmt', choices=['text', 'records'], default='text')

	simulate = sub.add_parser('simulate', help=_('integrate a mechanics theory or march a wave theory'))
	simulate.add_argument('theory', help=theory)
	simulate.add_argument('--param', action='append', default=[], metavar='NAME=VALUE')
	simulate.add_argument('--q0', default=None, metavar='LIST')
	simulate.add_argument('--qdot0', default=None, metavar='LIST')
	simulate.add_argument('--span', default='0,1', metavar='T0,T1')
	simulate.add_argument('--step', default='1/1000', metavar='H')
	simulate.add_argument('--wave', default='1,1/2', metavar='OMEGA,K')
	simulate.add_argument('--points', type=int, default=257)

	dump = sub.add_parser('dump-section', help=_('summarize a section file'))
	dump.add_argument('section')
	dump.add_argument('--theory', default=None, help=theory)
	dump.add_argument('--param', action='append', default=[], metavar='NAME=VALUE')

	config = sub.add_parser('config', help=_('set or remove options and save the config file'))
	config.add_argument('section', nargs='?', default=None, help=_('a theory name, the global section by default'))
	config.add_argument('--set', dest='assignments', action='append', default=[], metavar='NAME=VALUE')
	config.add_argument('--unset', action='append', default=[], metavar='NAME')
	return p


def dispatch(args):
	''' Runs the subcommand, returns the exit status '''
	if args.command == 'parse':
		FieldCov.parse(args.theory)
	elif args.command == 'covariantize':
		FieldCov.covariantize(args.theory, args.mode, args.action)
	elif args.command == 'el':
		FieldCov.el(args.theory)
	elif args.command == 'sem':
		FieldCov.sem(args.theory, args.piola)
	elif args.command == 'energy':
		FieldCov.energy(args.theory)
	elif args.command == 'verify':
		checks = [c.strip() for c in args.checks.split(',') if c.strip()] if args.checks else None
		flags = {'samples': args.samples, 'seed': args.seed, 'tol': args.tol, 'trials': args.trials}

		if not args.theories and not args.all:
			raise FieldCovError(_('Name theories or use --all'))

		return FieldCov.verify(args.theories, checks, args.mode, args.action, args.fmt, flags)
	elif args.command == 'simulate':
		FieldCov.simulate(args.theory, Utils.assignments(args.param), args.q0, args.qdot0, args.span, args.step,
		                  args.wave, args.points)
	elif args.command == 'dump-section':
		FieldCov.dump_section(args.section, args.theory, Utils.assignments(args.param))
	elif args.command == 'config':
		FieldCov.configure(args.config, args.section, args.assignments, args.unset)

	return FieldCov.OK


def run(argv=None):
	''' Runs the program, returns 0 on success, 1 on unexpected check outcomes,
	2 on usage and input errors and 3 on internal errors '''
	try:
		args = parser().parse_args(argv)
	except SystemExit as e:
		return e.code if isinstance(e.code, int) else FieldCov.USAGE

	try:
		FieldCov.init(args.output, args.config)
		return FieldCov.shutdown(dispatch(args))
	except FieldCovError as e:
		return FieldCov.error(e)
	except KeyboardInterrupt:
		Msg.error(_('Execution cancelled by user'))
		return FieldCov.shutdown(FieldCov.FAILED)
	except Exception as e:
		Msg.error(_('Internal error: {0}').format(e))
		Log.error(_('Internal error: {0}').format(e))
		return FieldCov.shutdown(FieldCov.INTERNAL)

import argparse
import sys
from typing import Optional, Sequence

from sqfree_cover.cli.service import Commands
from sqfree_cover.cli.views import EXIT_USAGE


def _add_engine_options(parser: argparse.ArgumentParser) -> None:
	parser.add_argument('config', nargs='?', help='JSON engine configuration')
	source = parser.add_mutually_exclusive_group()
	source.add_argument('--reference-defaults', '--paper-defaults', dest='reference_defaults', action='store_true', help='C0 = 118, N = 10^6 and the reference schedule')
	source.add_argument('--reference-schedule', '--paper-defaults-schedule', dest='reference_schedule', action='store_true', help='reference schedule with the given --C0')
	parser.add_argument('--C0', type=int, help='norm threshold')
	parser.add_argument('--N', type=int, help='last index summed before the tail bound')
	parser.add_argument('--schedule', help='JSON schedule: [[start, delta], ...]')
	parser.add_argument('--truncate-schedule', action='store_true', help='set δ_j = 1/2 for every j > N')
	parser.add_argument('--K-exact', dest='K_exact', type=int, help='first index evaluated with MPFR')
	parser.add_argument('--precision', type=int, help='MPFR precision in bits')
	parser.add_argument('--parallel', type=int, metavar='W', help='worker processes')


def build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(prog='sqfree-cover', description='Covering systems with squarefree moduli')
	subparsers = parser.add_subparsers(dest='command', help='Available commands')

	verify = subparsers.add_parser('verify', help='Decide whether a system covers the integers')
	verify.add_argument('path', help='text (`a m` per line) or .json system')
	verify.add_argument('--format', choices=['text', 'structured'], help='override the suffix-based format')
	verify.add_argument('--limit', type=int, help='largest L swept directly')
	verify.add_argument('--workers', type=int, default=1, help='sweep threads')

	bound = subparsers.add_parser('bound', help='Run the certified distortion bound')
	_add_engine_options(bound)
	bound.add_argument('--format', choices=['text', 'structured'], default='text', help='report format')
	bound.add_argument('--output', help='also save the structured report here')

	search = subparsers.add_parser('search', help='Least C0 in [lo, hi] with a certificate')
	_add_engine_options(search)
	search.add_argument('--lo', type=int, required=True)
	search.add_argument('--hi', type=int, required=True)

	simulate = subparsers.add_parser('simulate', help='Exact weight simulation with all checks')
	simulate.add_argument('fixture', nargs='?', help='JSON oracle fixture')
	simulate.add_argument('--seed', type=int, default=0, help='seed for --random')
	simulate.add_argument('--random', type=int, metavar='COUNT', help='random non-parallel family of COUNT hyperplanes')
	simulate.add_argument('--sizes', type=int, nargs='+', help='sizes for --random (default 2 3 5 7)')
	simulate.add_argument('--budget', type=int, help='largest number of tuples enumerated')

	compose = subparsers.add_parser('compose', help='Compose class-wise covers')
	compose.add_argument('spec', help='JSON composition spec')
	compose.add_argument('--partial', action='store_true', help='report missing classes instead of failing')

	return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
	parser = build_parser()
	args = parser.parse_args(argv)
	if not args.command:
		parser.print_help()
		return EXIT_USAGE

	params = {k: v for k, v in vars(args).items() if k != 'command' and v is not None}
	result = Commands().run(args.command, params)
	if result.extracted_content:
		print(result.extracted_content)
	if result.error and result.error != result.extracted_content:
		print(result.error, file=sys.stderr)
	return result.exit_code


if __name__ == '__main__':
	sys.exit(main())

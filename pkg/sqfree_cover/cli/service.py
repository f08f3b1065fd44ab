import json
import logging
import random
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from sqfree_cover.cli.registry.service import Registry
from sqfree_cover.cli.views import (
	EXIT_CAPACITY,
	EXIT_FAILURE,
	EXIT_USAGE,
	BoundCommand,
	CommandResult,
	ComposeCommand,
	EngineOptions,
	SearchCommand,
	SimulateCommand,
	VerifyCommand,
)
from sqfree_cover.composer.service import compose_disjoint, compose_partial
from sqfree_cover.composer.views import CompositionSpec
from sqfree_cover.covering.formats import dump_text, load_system
from sqfree_cover.covering.service import check_covering, min_modulus
from sqfree_cover.covering.views import CapacityError, ParseError, SqfreeCoverError
from sqfree_cover.crt.service import covers_q, tuple_to_int
from sqfree_cover.crt.views import HyperplaneError
from sqfree_cover.engine.service import run_certificate, search_threshold
from sqfree_cover.engine.views import BoundReport, ConfigurationError, EngineConfig, ceil_decimal
from sqfree_cover.oracle.fixtures import load_fixture, random_fixture
from sqfree_cover.oracle.service import check_bound_chain, check_fiber_preservation, evolve_weights
from sqfree_cover.oracle.views import OracleError
from sqfree_cover.primes.service import get_prime_table

logger = logging.getLogger(__name__)

DEFAULT_RANDOM_SIZES = [2, 3, 5, 7]


def exit_code_for(error: BaseException) -> int:
	if isinstance(error, CapacityError):
		return EXIT_CAPACITY
	if isinstance(error, (ValidationError, ParseError, ConfigurationError, HyperplaneError, OracleError, OSError, ValueError)):
		return EXIT_USAGE
	return EXIT_FAILURE


def engine_config(options: EngineOptions) -> EngineConfig:
	"""EngineConfig from a config file or the built-in defaults, then the command-line overrides"""
	data: dict[str, Any] = {}
	if options.config is not None:
		data = json.loads(Path(options.config).read_text(encoding='utf-8'))
	elif options.reference_schedule:
		if options.C0 is None:
			raise ConfigurationError('--reference-schedule needs --C0')
		data = {'schedule': 'default'}

	overrides = {
		'C0': options.C0,
		'N': options.N,
		'K_exact': options.K_exact,
		'precision': options.precision,
		'workers': options.parallel,
	}
	data.update({k: v for k, v in overrides.items() if v is not None})
	if options.schedule is not None:
		data['schedule'] = json.loads(Path(options.schedule).read_text(encoding='utf-8'))

	config = EngineConfig.model_validate(data)
	if options.truncate_schedule:
		config = config.model_copy(update={'schedule': config.schedule.truncated(config.N)})
	return config


def render_report(report: BoundReport) -> str:
	head = (
		f'= {report.head_sum.numerator}/{report.head_sum.denominator}'
		if report.head_exact
		else f'≤ {ceil_decimal(report.head_sum)}'
	)
	lines = [
		f'C0 = {report.config["C0"]}, N = {report.config["N"]}',
		f'head (k ≤ {report.head_last}) {head}',
		f'mid  ≤ {ceil_decimal(report.mid_sum)}',
		f'tail ≤ {ceil_decimal(report.tail)}',
		f'total ≤ {ceil_decimal(report.total)}',
	]
	if report.relaxed_count:
		lines.append(f'{report.relaxed_count} indices used a relaxed threshold')
	lines.append('verdict: certified, total < 1' if report.verdict else 'verdict: no certificate, total ≥ 1')
	return '\n'.join(lines)


class Commands:
	def __init__(self, exclude_commands: list[str] = []):
		self.registry = Registry(exclude_commands)
		self._register_default_commands()

	def _register_default_commands(self):
		@self.registry.command('Decide whether a system of congruences covers the integers', param_model=VerifyCommand)
		def verify(params: VerifyCommand):
			system = load_system(params.path, params.format)
			verdict = check_covering(system, limit=params.limit, workers=params.workers)
			lines = [
				f'congruences: {len(system)}',
				f'L = {system.lcm}',
				f'minimum modulus: {min_modulus(system)}',
				f'distinct moduli: {system.is_distinct}',
				f'squarefree moduli: {system.is_squarefree}',
			]
			if system.duplicates:
				lines.append(f'duplicates: {", ".join(str(c) for c in system.duplicates)}')
			if verdict.covered:
				lines.append(f'verdict: covering ({verdict.method})')
				return CommandResult(extracted_content='\n'.join(lines))
			lines.append(f'verdict: not covering, {verdict.witness} is uncovered ({verdict.method})')
			return CommandResult.failure(f'{verdict.witness} is uncovered', EXIT_FAILURE, content='\n'.join(lines))

		@self.registry.command('Run the certified distortion bound', param_model=BoundCommand)
		def bound(params: BoundCommand):
			report = run_certificate(engine_config(params))
			if params.output:
				report.save_to_file(params.output)
				logger.info(f'Report saved to {params.output}')
			if params.format == 'structured':
				content = json.dumps(report.to_document(), indent=2, ensure_ascii=False)
			else:
				content = render_report(report)
			if report.verdict:
				return CommandResult(extracted_content=content)
			return CommandResult.failure(f'total ≤ {ceil_decimal(report.total)} is not below 1', EXIT_FAILURE, content=content)

		@self.registry.command('Least C0 in a range whose certificate holds', param_model=SearchCommand)
		def search(params: SearchCommand):
			found = search_threshold(engine_config(params), params.lo, params.hi)
			if found is None:
				return CommandResult.failure(f'no C0 in [{params.lo}, {params.hi}] is certified', EXIT_FAILURE)
			return CommandResult(extracted_content=f'least certified C0 in [{params.lo}, {params.hi}]: {found}')

		@self.registry.command('Simulate the exact weights and check every bound', param_model=SimulateCommand)
		def simulate(params: SimulateCommand):
			if params.fixture is not None:
				fixture = load_fixture(params.fixture)
			else:
				rng = random.Random(params.seed)
				fixture = random_fixture(rng, params.sizes or DEFAULT_RANDOM_SIZES, params.random)
				norms = [h.norm for h in fixture.build_hyperplanes()]
				fixture = fixture.model_copy(update={'C0': min(norms) - 1})
			hyperplanes = fixture.build_hyperplanes()

			simulation = evolve_weights(hyperplanes, fixture.sizes, fixture.schedule, budget=params.budget)
			fiber = check_fiber_preservation(simulation.tables)
			chain = check_bound_chain(simulation, hyperplanes, fixture.schedule, fixture.C0)
			mass = simulation.covered_mass

			lines = [
				f'sizes: {list(fixture.sizes)}, hyperplanes: {len(hyperplanes)}, C0 = {fixture.C0}',
				f'covered mass Σ w_k(B_k) = {mass} ≈ {float(mass):.12f}',
				f'fiber preservation: {"ok" if fiber.ok else f"fails at level {fiber.level}, x = {fiber.witness}"}',
				'checks: ' + ', '.join(f'{name} {count}' for name, count in chain.counts.items()),
			]
			lines += [f'skipped: {reason}' for reason in chain.skipped]
			lines += [f'violation ({v.check}, k = {v.k}): {v.detail}' for v in chain.violations]

			ok = fiber.ok and chain.ok
			if mass < 1:
				q = covers_q(hyperplanes, len(fixture.sizes), fixture.sizes, budget=params.budget)
				if q.covered:
					ok = False
					lines.append('violation: covered mass < 1 but the hyperplanes cover Q')
				else:
					primes = tuple(get_prime_table(len(fixture.sizes)).first(len(fixture.sizes)))
					point = f'{q.witness} (integer {tuple_to_int(q.witness)})' if fixture.sizes == primes else str(q.witness)
					lines.append(f'uncovered point: {point}')
			content = '\n'.join(lines)
			if ok:
				return CommandResult(extracted_content=content)
			return CommandResult.failure('some distortion checks failed', EXIT_FAILURE, content=content)

		@self.registry.command('Compose class-wise covers into one covering system', param_model=ComposeCommand)
		def compose(params: ComposeCommand):
			spec = CompositionSpec.model_validate_json(Path(params.spec).read_text(encoding='utf-8'))
			composition = compose_partial(spec.classes) if params.partial else compose_disjoint(spec.classes)
			lines = [
				f'head moduli {list(composition.head_moduli)}, M = {composition.M}, classes {composition.classes}',
				f'tail moduli all above m_k = {composition.m_k}: {composition.tails_above_head}',
				dump_text(composition.congruences).rstrip('\n'),
			]
			if composition.covered:
				lines.append('verdict: covering')
				return CommandResult(extracted_content='\n'.join(lines))
			lines.append(f'verdict: not covering, {composition.witness} is uncovered')
			return CommandResult.failure(f'{composition.witness} is uncovered', EXIT_FAILURE, content='\n'.join(lines))

	def run(self, command_name: str, params: dict) -> CommandResult:
		try:
			return self.registry.execute_command(command_name, params)
		except ValidationError as e:
			first = e.errors()[0]
			where = '.'.join(str(p) for p in first['loc'])
			return CommandResult.failure(f'invalid {where or "arguments"}: {first["msg"]}', EXIT_USAGE)
		except (SqfreeCoverError, OSError, ValueError) as e:
			logger.debug(f'{command_name} failed: {type(e).__name__}: {e}')
			return CommandResult.failure(str(e), exit_code_for(e))

import json
from pathlib import Path
from typing import Iterable, Literal, Union

from pydantic import BaseModel, StrictInt, ValidationError

from sqfree_cover.covering.views import Congruence, CoveringSystem, ParseError

Format = Literal['text', 'structured']


class StructuredDocument(BaseModel):
	congruences: list[tuple[StrictInt, StrictInt]]


def parse_text(text: str) -> CoveringSystem:
	"""One `a m` pair per line; `#` starts a comment"""
	pairs = []
	for lineno, raw in enumerate(text.splitlines(), start=1):
		line = raw.split('#', 1)[0].strip()
		if not line:
			continue
		fields = line.split()
		if len(fields) != 2:
			raise ParseError(f'expected "a m", got {raw.strip()!r}', line=lineno)
		try:
			a, m = int(fields[0]), int(fields[1])
		except ValueError as e:
			raise ParseError(f'non-integer field in {raw.strip()!r}', line=lineno) from e
		if m < 1:
			raise ParseError(f'modulus must be ≥ 1, got {m}', line=lineno)
		pairs.append((a, m))
	return CoveringSystem.from_pairs(pairs)


def parse_structured(text: str) -> CoveringSystem:
	try:
		data = json.loads(text)
	except json.JSONDecodeError as e:
		raise ParseError(f'invalid JSON: {e.msg}', line=e.lineno) from e
	try:
		doc = StructuredDocument.model_validate(data)
	except ValidationError as e:
		raise ParseError(f'invalid congruence document: {e.errors()[0]["msg"]}') from e
	for i, (a, m) in enumerate(doc.congruences):
		if m < 1:
			raise ParseError(f'congruence #{i + 1}: modulus must be ≥ 1, got {m}')
	return CoveringSystem.from_pairs(doc.congruences)


def detect_format(path: Union[str, Path]) -> Format:
	return 'structured' if Path(path).suffix.lower() == '.json' else 'text'


def load_system(path: Union[str, Path], fmt: Union[Format, None] = None) -> CoveringSystem:
	path = Path(path)
	text = path.read_text(encoding='utf-8')
	if (fmt or detect_format(path)) == 'structured':
		return parse_structured(text)
	return parse_text(text)


def dump_text(congruences: Iterable[Congruence], header: str = '') -> str:
	lines = [f'# {line}' for line in header.splitlines()]
	lines += [f'{c.residue} {c.modulus}' for c in congruences]
	return '\n'.join(lines) + '\n'


def dump_structured(congruences: Iterable[Congruence]) -> str:
	return json.dumps({'congruences': [[c.residue, c.modulus] for c in congruences]}, indent=2)


def save_system(congruences: Iterable[Congruence], path: Union[str, Path], fmt: Union[Format, None] = None) -> None:
	path = Path(path)
	path.parent.mkdir(parents=True, exist_ok=True)
	if (fmt or detect_format(path)) == 'structured':
		path.write_text(dump_structured(congruences), encoding='utf-8')
	else:
		path.write_text(dump_text(congruences), encoding='utf-8')

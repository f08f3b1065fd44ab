from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from sqfree_cover.covering.formats import Format

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3


class CommandResult(BaseModel):
	"""Outcome of one command; `error` is set whenever exit_code is non-zero"""

	extracted_content: Optional[str] = None
	error: Optional[str] = None
	exit_code: int = EXIT_OK

	@classmethod
	def failure(cls, message: str, exit_code: int, content: Optional[str] = None) -> 'CommandResult':
		msg = f'❌ {message}'
		return cls(extracted_content=content if content is not None else msg, error=msg, exit_code=exit_code)


class VerifyCommand(BaseModel):
	path: str
	format: Optional[Format] = None
	limit: Optional[int] = Field(default=None, ge=1)
	workers: int = Field(default=1, ge=1)


class EngineOptions(BaseModel):
	"""Where the engine configuration comes from, plus field overrides"""

	config: Optional[str] = None
	reference_defaults: bool = False
	reference_schedule: bool = False
	C0: Optional[int] = Field(default=None, ge=0)
	N: Optional[int] = None
	schedule: Optional[str] = None
	truncate_schedule: bool = False
	K_exact: Optional[int] = None
	precision: Optional[int] = None
	parallel: Optional[int] = Field(default=None, ge=1)

	@model_validator(mode='after')
	def _one_source(self) -> 'EngineOptions':
		sources = [self.config is not None, self.reference_defaults, self.reference_schedule]
		if sum(sources) > 1:
			raise ValueError('give at most one of CONFIG, --reference-defaults and --reference-schedule')
		return self


class BoundCommand(EngineOptions):
	format: Literal['text', 'structured'] = 'text'
	output: Optional[str] = None


class SearchCommand(EngineOptions):
	lo: int = Field(ge=0)
	hi: int = Field(ge=0)


class SimulateCommand(BaseModel):
	fixture: Optional[str] = None
	seed: int = 0
	random: Optional[int] = Field(default=None, ge=1)
	sizes: Optional[list[int]] = None
	budget: Optional[int] = Field(default=None, ge=1)

	@model_validator(mode='after')
	def _needs_input(self) -> 'SimulateCommand':
		if self.fixture is None and self.random is None:
			raise ValueError('give a FIXTURE or --random COUNT')
		return self


class ComposeCommand(BaseModel):
	spec: str
	partial: bool = False

from inspect import signature
from typing import Any, Callable, Optional, Type

from pydantic import BaseModel, create_model

from sqfree_cover.cli.registry.views import CommandModel, CommandRegistry, RegisteredCommand


class Registry:
	"""Service for registering and running batch commands"""

	def __init__(self, exclude_commands: Optional[list[str]] = None):
		self.registry = CommandRegistry()
		self.exclude_commands = exclude_commands or []

	def _create_param_model(self, function: Callable) -> Type[BaseModel]:
		"""Creates a Pydantic model from function signature"""
		sig = signature(function)
		params = {
			name: (param.annotation, ... if param.default == param.empty else param.default)
			for name, param in sig.parameters.items()
		}
		return create_model(
			f'{function.__name__}_parameters',
			__base__=CommandModel,
			**params,  # type: ignore
		)

	def command(self, description: str, param_model: Optional[Type[BaseModel]] = None):
		"""Decorator for registering commands"""

		def decorator(func: Callable):
			if func.__name__ in self.exclude_commands:
				return func

			self.registry.commands[func.__name__] = RegisteredCommand(
				name=func.__name__,
				description=description,
				function=func,
				param_model=param_model or self._create_param_model(func),
			)
			return func

		return decorator

	def validate(self, command_name: str, params: dict) -> BaseModel:
		"""Validated parameter model; raises pydantic.ValidationError"""
		if command_name not in self.registry.commands:
			raise ValueError(f'Command {command_name} not found')
		return self.registry.commands[command_name].param_model(**params)

	def execute_command(self, command_name: str, params: dict) -> Any:
		validated = self.validate(command_name, params)
		command = self.registry.commands[command_name]

		parameters = list(signature(command.function).parameters.values())
		is_pydantic = parameters and isinstance(parameters[0].annotation, type) and issubclass(parameters[0].annotation, BaseModel)
		if is_pydantic:
			return command.function(validated)
		return command.function(**validated.model_dump())

	def get_help_description(self) -> str:
		return self.registry.get_help_description()

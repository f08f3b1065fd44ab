from typing import Callable, Dict, Type

from pydantic import BaseModel, ConfigDict


class RegisteredCommand(BaseModel):
	"""Model for a registered command"""

	name: str
	description: str
	function: Callable
	param_model: Type[BaseModel]

	model_config = ConfigDict(arbitrary_types_allowed=True)

	def help_description(self) -> str:
		skip_keys = ['title']
		properties = self.param_model.model_json_schema().get('properties', {})
		params = {k: {sub_k: sub_v for sub_k, sub_v in v.items() if sub_k not in skip_keys} for k, v in properties.items()}
		return f'{self.name}: {self.description}\n  {params}'


class CommandModel(BaseModel):
	"""Base model for parameter models built from command signatures"""

	model_config = ConfigDict(extra='forbid')


class CommandRegistry(BaseModel):
	commands: Dict[str, RegisteredCommand] = {}

	def get_help_description(self) -> str:
		return '\n'.join(command.help_description() for command in self.commands.values())

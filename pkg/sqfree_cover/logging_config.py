import logging
import sys

from sqfree_cover.settings import get_settings


def addLoggingLevel(levelName, levelNum, methodName=None):
	"""
	Adds a new logging level to the `logging` module and the currently
	configured logging class.

	`levelName` becomes an attribute of the `logging` module with the value
	`levelNum`. `methodName` becomes a convenience method for both `logging`
	itself and the logger class (defaults to `levelName.lower()`).

	Raises `AttributeError` if the level or method name is already taken.

	Example
	-------
	>>> addLoggingLevel('RESULT', 35)
	>>> logging.getLogger(__name__).result('total <= 0.99938506')
	"""
	if not methodName:
		methodName = levelName.lower()

	if hasattr(logging, levelName):
		raise AttributeError('{} already defined in logging module'.format(levelName))
	if hasattr(logging, methodName):
		raise AttributeError('{} already defined in logging module'.format(methodName))
	if hasattr(logging.getLoggerClass(), methodName):
		raise AttributeError('{} already defined in logger class'.format(methodName))

	def logForLevel(self, message, *args, **kwargs):
		if self.isEnabledFor(levelNum):
			self._log(levelNum, message, args, **kwargs)

	def logToRoot(message, *args, **kwargs):
		logging.log(levelNum, message, *args, **kwargs)

	logging.addLevelName(levelNum, levelName)
	setattr(logging, levelName, levelNum)
	setattr(logging.getLoggerClass(), methodName, logForLevel)
	setattr(logging, methodName, logToRoot)


class SqfreeCoverFormatter(logging.Formatter):
	"""Shortens `sqfree_cover.engine.service` to `engine`."""

	def format(self, record):
		if record.name.startswith('sqfree_cover.') and record.name.count('.') >= 2:
			record.name = record.name.split('.')[-2]
		return super().format(record)


def setup_logging():
	try:
		addLoggingLevel('RESULT', 35)  # between WARNING and ERROR
	except AttributeError:
		pass

	log_type = get_settings().logging_level

	if logging.getLogger().hasHandlers():
		return

	root = logging.getLogger()
	root.handlers = []

	console = logging.StreamHandler(sys.stdout)
	if log_type == 'result':
		console.setLevel('RESULT')
		console.setFormatter(SqfreeCoverFormatter('%(message)s'))
	else:
		console.setFormatter(SqfreeCoverFormatter('%(levelname)-8s [%(name)s] %(message)s'))

	root.addHandler(console)

	if log_type == 'result':
		root.setLevel('RESULT')
	elif log_type == 'debug':
		root.setLevel(logging.DEBUG)
	else:
		root.setLevel(logging.INFO)

	package_logger = logging.getLogger('sqfree_cover')
	package_logger.propagate = False
	package_logger.addHandler(console)
	package_logger.setLevel(root.level)

	package_logger.debug('sqfree_cover logging setup complete with level %s', log_type)

	for name in ['concurrent.futures']:
		third_party = logging.getLogger(name)
		third_party.setLevel(logging.ERROR)
		third_party.propagate = False

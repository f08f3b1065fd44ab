from sqfree_cover.logging_config import setup_logging

setup_logging()

from sqfree_cover.composer.service import compose_disjoint as compose_disjoint
from sqfree_cover.composer.service import shift_tail as shift_tail
from sqfree_cover.covering.service import check_covering as check_covering
from sqfree_cover.covering.service import is_covering as is_covering
from sqfree_cover.covering.views import Congruence as Congruence
from sqfree_cover.covering.views import CoveringSystem as CoveringSystem
from sqfree_cover.crt.service import covers_q as covers_q
from sqfree_cover.engine.schedule import DeltaSchedule as DeltaSchedule
from sqfree_cover.engine.service import DistortionEngine as DistortionEngine
from sqfree_cover.engine.service import run_certificate as run_certificate
from sqfree_cover.engine.views import BoundReport as BoundReport
from sqfree_cover.engine.views import EngineConfig as EngineConfig
from sqfree_cover.oracle.service import evolve_weights as evolve_weights

__all__ = [
	'Congruence',
	'CoveringSystem',
	'check_covering',
	'is_covering',
	'covers_q',
	'DeltaSchedule',
	'EngineConfig',
	'DistortionEngine',
	'BoundReport',
	'run_certificate',
	'evolve_weights',
	'shift_tail',
	'compose_disjoint',
]

"""Function algebras built from length-indexed recurrences, and their circuit counterparts.

Modules: ``expr`` (step expressions), ``engine`` (programs, schemas,
evaluation, validation), ``syntax`` (program text format), ``stdlib``
(counting and bounded-search builders), ``circuit`` (layered circuits),
``xlate`` (compilers in both directions), ``oracle`` (reference functions
and differential testing) and ``cli``.
"""

from .engine import Evaluator, FunctionDef, Program, eval_program, run_recurrence, validate
from .errors import OdeAlgebraError

__all__ = ["Evaluator", "FunctionDef", "Program", "eval_program", "run_recurrence",
           "validate", "OdeAlgebraError"]
__version__ = "0.1.0"

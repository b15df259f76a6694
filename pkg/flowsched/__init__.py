"""
FLOWSCHED
Preemptive weighted flow time scheduling: EDF, Lawler-Moore, the dyadic
dynamic programs for one machine, a QPTAS for unrelated machines and exact
oracles for small instances.
"""
from .costs import approximation_factor, poly_guarantee
from .deadlines import DeadlineSets, DeltaGrid, build_deadlines
from .dp_poly import PolyResult, solve_cell_poly, solve_poly
from .dp_pseudo import PseudoResult, solve_cell, solve_pseudo
from .edf import EdfResult, density_feasible, edf_schedule
from .errors import (FlowschedError, InstanceFormatError, InvariantViolation, OracleBudgetExceeded,
                     ResourceBudgetExceeded, ScheduleValidationError, StateBudgetExceeded)
from .gen import AdversarialKind, GenSpec, gen_adversarial, gen_random
from .lawler_moore import LatestStart, LmJob, LmProblem, LmProfile, LmSolution, lawler_moore, lm_latest_start
from .models import INF, CostMode, CostModel, DeadlineAssignment, Instance, Job, Schedule, Slot
from .oracle import OracleResult, oracle_multi, oracle_single
from .qptas import GuessVector, LoadVector, QptasResult, solve_qptas
from .storage import (read_deadlines, read_instance, read_schedule, write_deadlines, write_instance,
                      write_schedule)
from .validation import ValidationReport, Violation, objective, report_value, validate_schedule

__version__ = "1.0.0"

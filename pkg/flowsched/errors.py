"""
Exception hierarchy for flowsched.

Each exception carries the CLI exit code it maps to.
"""
from typing import Optional


class FlowschedError(Exception):
    """Base class for every error raised by the library"""
    exit_code = 3


class InstanceFormatError(FlowschedError):
    """Malformed instance, deadline or schedule document"""
    exit_code = 1

    def __init__(self, message: str, position: Optional[str] = None):
        self.position = position
        super().__init__(f"{position}: {message}" if position else message)


class ScheduleValidationError(FlowschedError):
    """A produced schedule violates a schedule invariant"""

    def __init__(self, report):
        self.report = report
        super().__init__(f"schedule failed validation: {report.first}")


class ResourceBudgetExceeded(FlowschedError):
    """An exact or quasi-polynomial search outgrew its configured budget"""
    exit_code = 2


class OracleBudgetExceeded(ResourceBudgetExceeded):
    def __init__(self, detail: str):
        super().__init__(f"instance too large for oracle ({detail})")


class StateBudgetExceeded(ResourceBudgetExceeded):
    pass


class InvariantViolation(FlowschedError):
    """An internal identity of one of the dynamic programs did not hold"""

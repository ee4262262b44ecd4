"""
Exception hierarchy. Every user-facing failure carries the exit code
the command line returns for it.
"""

from typing import Optional


class SumsolveError(Exception):
    """Base class for all sumsolve failures"""

    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class UsageError(SumsolveError):
    """Bad flags, unknown presets, out-of-range overrides"""

    exit_code = 2


class PreconditionError(SumsolveError):
    """An operation was called outside its admissible input range"""

    exit_code = 3


class InstanceFormatError(SumsolveError):
    """Malformed instance text"""

    exit_code = 3

    def __init__(self, detail: str, line: Optional[int] = None, column: Optional[int] = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(f"{where}{detail}")
        self.line = line
        self.column = column


class WeightOverflowError(InstanceFormatError):
    """A weight or the target does not fit below 2^63"""


class CountMismatchError(InstanceFormatError):
    """The weights line does not hold exactly n values"""


class OvTableBudgetError(PreconditionError):
    """The OV certificate table would exceed its cell budget"""

    def __init__(self, cells: int, budget: int):
        super().__init__(f"OV table needs {cells} cells, budget is {budget}")
        self.cells = cells
        self.budget = budget

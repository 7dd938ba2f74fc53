"""Exception types shared across the package."""


class CoteError(Exception):
    pass


class ParseError(CoteError):
    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
            if column is not None:
                where += f"{column}:"
        super().__init__(f"{where} {message}" if where else message)


class SearchBudgetExceeded(CoteError):
    """A single subsumption search ran out of backtracks or time."""

    def __init__(self, steps):
        self.steps = steps
        super().__init__(f"subsumption search gave up after {steps} steps")


class CompressionAborted(CoteError):
    """The global time budget of a compression run ran out.

    ``phase`` names the stage that was running; ``progress`` holds whatever
    statistics were collected before the abort.
    """

    def __init__(self, phase, progress=None):
        self.phase = phase
        self.progress = dict(progress or {})
        super().__init__(f"time budget exceeded during {phase}")

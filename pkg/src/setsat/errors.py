"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SetsatError(Exception):
    """Base class for every error raised by this package."""


class ResourceLimitError(SetsatError):
    """A configured size limit would be exceeded by the requested computation."""


class ParseError(SetsatError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.message = message
        self.line = line
        self.column = column


class Violation(SetsatError):
    """A checked structural condition failed.

    ``label`` names the condition (for example ``"chain.ii"`` or ``"(iv)"``);
    ``step`` is the offending step index when one applies.
    """

    def __init__(self, label: str, detail: str = "", step: int | None = None):
        where = f" at step {step}" if step is not None else ""
        text = f"{label}{where}"
        if detail:
            text += f": {detail}"
        super().__init__(text)
        self.label = label
        self.detail = detail
        self.step = step


class ProcessViolation(Violation):
    pass


class MarkingViolation(Violation):
    pass


class ChainViolation(Violation):
    pass


class SimulationViolation(Violation):
    pass


class ImitationViolation(Violation):
    pass


class WitnessViolation(Violation):
    pass


class PumpError(Violation):
    """The pumping construction could not produce a process meeting its postconditions."""

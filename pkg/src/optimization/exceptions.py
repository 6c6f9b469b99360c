"""
Exceptions raised by the optimization package.
"""


class InvalidInputError(ValueError):
    """Malformed input: wrong lengths, invalid indices, bad parameters..."""


class CapacityExceededError(ValueError):
    """A dense state or an exhaustive enumeration would exceed the configured cap."""


class DegenerateProjectionError(ArithmeticError):
    """The post-selected branch has (numerically) zero weight."""


class RepetitionLimitError(RuntimeError):
    """The repeat-until-success loop hit its repetition cutoff."""

    def __init__(self, max_repetitions: int, trial_index: int | None = None):
        self.max_repetitions = max_repetitions
        self.trial_index = trial_index
        message = f"post-selection did not succeed within {max_repetitions} repetitions"
        if trial_index is not None:
            message += f" (trial {trial_index})"
        super().__init__(message)


class ThermodynamicsError(ArithmeticError):
    """A thermodynamic quantity is undefined or failed its cross-check."""

class LandmarkError(Exception):
    """Base class for errors raised by the landmark heuristic toolkit"""


class GraphFormatError(LandmarkError, ValueError):
    """Raised when a graph file cannot be parsed"""

    def __init__(self, message: str, line_number: int = None):
        """Initialize with the offending line number when known"""
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ComponentError(LandmarkError, ValueError):
    """Raised when a vertex lies outside the designated component"""


class BudgetError(LandmarkError, ValueError):
    """Raised when a bytes-per-vertex budget cannot be split into label counts"""


class TrainingDivergedError(LandmarkError, RuntimeError):
    """Raised when selector training produces a non-finite loss"""

    def __init__(self, message: str, report=None):
        """Keep the partial training report for inspection"""
        self.report = report
        super().__init__(message)


class StatsInputError(LandmarkError, ValueError):
    """Raised on malformed input to the statistical tests"""


class ManifestError(LandmarkError, ValueError):
    """Raised when an experiment manifest cannot be resolved"""

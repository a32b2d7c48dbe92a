"""Exception types shared across the package."""


class JagError(Exception):
    """Base class for package errors."""


class ParseError(JagError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ResolutionError(JagError):
    """A community file references node labels unknown to the label map."""


class CapacityError(JagError):
    """A bounded computation (enumeration, rejection budget, ...) ran out of room."""


class SamplingExhausted(CapacityError):
    def __init__(self, message: str, achieved: int = 0):
        self.achieved = achieved
        super().__init__(f"{message} (achieved {achieved})")


class ProposalExhausted(CapacityError):
    """No legal membership move exists for the current assignment."""


class EmptyReportError(JagError):
    """An experiment found nothing to report on."""

"""Exception hierarchy shared by every module."""


class RisPlannerError(Exception):
    """Base class for all planner errors."""


class ValidationError(RisPlannerError, ValueError):
    """Input rejected before any computation; the CLI maps it to exit code 2.

    ``field`` and ``line`` locate the offending scenario entry when known.
    """

    def __init__(self, message="", field=None, line=None):
        self.field = field
        self.line = line
        self.detail = message
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + str(message))

    def located(self, field, line=None):
        """Same error type, tagged with a scenario location."""
        return type(self)(self.detail, field=field, line=line)


class InvalidGrid(ValidationError):
    pass


class InvalidCell(ValidationError):
    pass


class InvalidReflector(ValidationError):
    pass


class InvalidReflectorPair(ValidationError):
    pass


class InvalidDevice(ValidationError):
    pass


class PairOutOfRange(InvalidDevice):
    pass


class InvalidBudget(ValidationError):
    pass


class InstanceTooLarge(ValidationError):
    pass


class DegenerateGeometry(ValidationError):
    pass


class ZeroThroughput(ValidationError):
    pass


class Unsupported(ValidationError):
    pass


class InvalidConfiguration(ValidationError):
    pass


class ScenarioError(ValidationError):
    """Scenario file could not be parsed or has an invalid structure."""


class GenerationFailed(RisPlannerError):
    pass

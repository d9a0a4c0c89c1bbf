"""Exception hierarchy shared by the planning, routing and simulation layers."""


class FieldCoverError(Exception):
    """Base class for all library errors."""


class InvalidField(FieldCoverError, ValueError):
    """A field description violates one of its invariants."""


class InterruptedLane(FieldCoverError):
    """A lane slice intersects the field interior in more than one piece."""


class DegenerateField(FieldCoverError):
    """The headland erosion leaves no usable interior."""


class EntranceOffHeadland(FieldCoverError):
    """Entrance or exit point cannot be snapped onto the headland path."""


class PlanFieldMismatch(FieldCoverError):
    """A coverage plan was built for a different field/graph."""


class Unreachable(FieldCoverError):
    """No admissible route connects the requested positions."""


class TurnInfeasible(FieldCoverError):
    """Adjacent-lane turn is impossible for the given turning radius."""


class Stranded(FieldCoverError):
    """The tank ran empty at a position with no admissible way back."""


class UnsupportedCase(FieldCoverError):
    """Closed-form result requested outside its domain of validity."""


class InvalidParams(FieldCoverError, ValueError):
    """Invalid parameters for a fixture generator."""


class FieldFileError(FieldCoverError):
    """Syntax or content error in a field file."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f"line {line}" + (f", col {col}" if col is not None else "") + ": "
        super().__init__(where + message)

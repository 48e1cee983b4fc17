"""Exception hierarchy shared by every module."""


class MecError(Exception):
    """Base class for all errors raised by this package."""


class FieldError(MecError):
    pass


class ParseError(MecError):
    pass


class StructureError(MecError):
    """An access tree, access structure or quorum system is malformed."""


class CapacityError(MecError):
    """A size cap (universe, column count, etc.) would be exceeded."""


class CodeError(MecError):
    pass


class LpError(MecError):
    pass


class ConstructionError(MecError):
    pass


class ScenarioError(MecError):
    pass


class InternalError(MecError):
    """An internal invariant failed; this indicates a bug."""

"""Exception types shared across the package."""


class LanescriptError(Exception):
    pass


class ScriptSyntaxError(LanescriptError):
    """Malformed script or condition text, with source location."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", col {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ScriptReferenceError(LanescriptError):
    """A condition references an actor that does not exist in the script."""


class UnitError(LanescriptError):
    """A physical quantity violates its sign/unit constraint."""


class MissingActor(LanescriptError):
    """An actor referenced during evaluation is absent from the view."""


class UnknownActor(LanescriptError):
    pass


class MissingControl(LanescriptError):
    pass


class BackendUnavailable(LanescriptError):
    pass


class MalformedToolCall(LanescriptError):
    pass


class CassetteMismatch(LanescriptError):
    pass


class PastFinalStep(LanescriptError):
    """The final step's termination condition holds; the agent is done."""


class UnparseableMaster(LanescriptError):
    pass


class UnparseableSubscript(LanescriptError):
    pass


class UnknownChecker(LanescriptError):
    pass


class EmptyTrace(LanescriptError):
    pass


class EmptyFinal(LanescriptError):
    pass

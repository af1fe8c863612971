"""Exception hierarchy shared by every module of the workbench."""


class InfForceError(Exception):
    pass


class ParseError(InfForceError, ValueError):
    """Malformed formula text. ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class UndeclaredSymbol(ParseError):
    pass


class ArityMismatch(ParseError):
    pass


class SignatureError(InfForceError, ValueError):
    pass


class FreeVariableError(InfForceError, ValueError):
    pass


class DanglingParameter(InfForceError, ValueError):
    """A ``#param`` names no element of the structure it is evaluated in."""


class ClassValidationError(InfForceError, ValueError):
    """A class/multiverse document failed schema or embedding-law checks."""


class UnknownNode(InfForceError, LookupError):
    pass


class NoPathError(InfForceError, ValueError):
    pass


class ResourceExhausted(InfForceError, RuntimeError):
    pass


class DepthExhausted(ResourceExhausted):
    """A dense family cannot be met inside the working depth."""


class PreconditionViolated(InfForceError, ValueError):
    pass


class InternalConsistencyError(InfForceError, RuntimeError):
    pass

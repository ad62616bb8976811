"""Exception types shared by the tensor kernels, model format, engine and boundary."""


class TnwpError(Exception):
    """Base class for all library-raised errors."""


class ShapeMismatchError(TnwpError):
    """Operands disagree on extents, or a flat buffer length does not match its shape."""


class ValidationError(TnwpError):
    """A graph, layer or input value violates a structural invariant."""


class FormatError(TnwpError):
    """A model container file is malformed (magic, version, header, truncation)."""


class UsageError(TnwpError):
    """An API object was used outside its contract (e.g. a tampered forward trace)."""

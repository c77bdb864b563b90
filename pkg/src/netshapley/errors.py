"""Exception types shared across the package."""


class NetShapleyError(Exception):
    """Base class for all library errors."""


class InputError(NetShapleyError):
    """Malformed input: unknown vertex, invalid path, bad parameter."""


class ConnectivityError(NetShapleyError):
    """An operation required a connected graph (or pair) and got none."""


class CapacityError(NetShapleyError):
    """An exact solver or enumerator was asked to exceed its stated limits."""


class PremiseError(NetShapleyError):
    """A certificate premise failed: non-optimal OPT, non-Nash NASH, wrong instance shape."""


class ParseError(NetShapleyError):
    """An instance or report file could not be parsed."""


class InternalError(NetShapleyError):
    """An invariant the library guarantees was violated; signals a bug."""

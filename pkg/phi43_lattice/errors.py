from typing import Any, Dict, Optional


class Phi43Exception(Exception):
    """
    Base exception, carries a readable message and a json serializable payload describing the failing input.
    """

    def __init__(self, message: str, data: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.data = data if data is not None else {}

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'exception': type(self).__name__,
            'message': self.message,
            'data': self.data
        }


class InvalidParameterException(Phi43Exception):
    """A parameter is outside its admissible range (negative time, N < 1, zero triple, ...)."""


class InvalidDataException(Phi43Exception):
    """Field values are not finite or have the wrong shape."""


class SymmetryViolationException(Phi43Exception):
    """A spectral field that must represent a real function is not Hermitian."""


class UnsupportedBandException(Phi43Exception):
    """A single fold no longer maps the band back onto the lattice."""


class QuadratureFailureException(Phi43Exception):
    """The sigma quadrature did not converge between refinement levels."""


class ResultIOException(Phi43Exception):
    """A field container, constants table or result file could not be read or written."""

class ParameterError(ValueError):
    """Invalid parameter value or combination."""


class MalformedSymbolError(ValueError):
    """Encoded symbol references indices outside the source block."""


class CalibrationError(RuntimeError):
    """Overhead calibration did not reach the target quantile."""

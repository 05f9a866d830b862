"""Exceptions raised by the Reeb dynamics toolkit.

All errors derive from ReebError, which carries a human readable message and
a dictionary serialization so the command line tool can emit machine readable
error records.
"""


# ------------------------------------------------------------------------------
# Exceptions
# ------------------------------------------------------------------------------

class ReebError(Exception):
    """Base class for all toolkit exceptions."""
    def __init__(self, message, **details):
        """Initialize error message and optional details.

        Parameters
        ----------
        message : string
            Error message.
        details : dict, optional
            Additional JSON-serializable context (e.g., offending point,
            branch label, or numeric margin).
        """
        Exception.__init__(self, message)
        self.message = message
        self.details = details

    def __str__(self):
        return self.message

    def to_dict(self):
        """Dictionary representation of the exception.

        Returns
        -------
        Dictionary
        """
        obj = {'type': type(self).__name__, 'message': self.message}
        if self.details:
            obj['details'] = self.details
        return obj


class DomainError(ReebError, ValueError):
    """Point outside of the chart box of a contact model."""
    pass


class SingularityError(ReebError):
    """Contact volume vanishes; the profile set does not define a contact
    form at the given point.
    """
    pass


class StiffnessError(ReebError):
    """Integrator step size underflow."""
    pass


class TangencyError(ReebError):
    """Trajectory crosses a section (almost) tangentially."""
    pass


class FrameError(ReebError):
    """Symplectic frame of the contact planes degenerates."""
    pass


class ResolutionError(ReebError):
    """Sampled symplectic path too coarse for continuous angle unwrapping."""
    pass


class DegeneracyError(ReebError):
    """Degenerate endpoint (eigenvalue one, or trace equal to +/-2)."""
    pass


class BoundaryError(ReebError):
    """Action bound coincides with the action of a word."""
    pass


class ParameterError(ReebError, ValueError):
    """Infeasible parameter combination."""
    pass


class HypothesisError(ReebError):
    """Sampled certification of a fixed point theorem hypothesis failed."""
    pass


class NumericalError(ReebError):
    """Iterative solver did not converge."""
    pass


class PreconditionError(ReebError, ValueError):
    """Operation invoked outside of its precondition."""
    pass


class HistoryError(ReebError):
    """Chord diagram without a recorded bypass attachment history."""
    pass


class ConfigError(ReebError, ValueError):
    """Invalid command line or configuration file value."""
    pass


# ------------------------------------------------------------------------------
# Helper methods
# ------------------------------------------------------------------------------

def format_point(p):
    """Text of a point for error messages, with coordinates converted to
    plain floats.

    Parameters
    ----------
    p : iterable(float)

    Returns
    -------
    string
    """
    return str(tuple([float(v) for v in p]))

"""Exception hierarchy shared across the toolkit."""


class PadxError(Exception):
    """Base class for all toolkit errors."""


class BoundsError(PadxError, ValueError):
    """A box or region reaches outside the raster it is attached to."""


class DatasetError(PadxError, ValueError):
    """Annotation file fails to parse or violates a dataset invariant."""


class ImageIOError(PadxError, OSError):
    """An image file cannot be read or written."""


class BoundaryViolationError(PadxError, ValueError):
    """Blend region touches the target border, so no Dirichlet ring exists."""


class ConvergenceError(PadxError, RuntimeError):
    """Iterative solver failed to reach the requested residual."""


class PlacementInfeasibleError(PadxError):
    """No valid placement exists for this (host, patch) pairing.

    Raised as a skip signal: callers resample a different host or record
    the pairing as skipped, they never abort the whole run on it.
    """

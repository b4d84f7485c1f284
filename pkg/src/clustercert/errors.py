"""Exception types raised by clustercert."""


class ClusterCertError(ValueError):
    """Base class for all validation failures in the toolkit."""


class AlignmentError(ClusterCertError):
    """A partition depth does not divide the grid resolution."""


class ResolutionError(ClusterCertError):
    """The grid is too coarse for the requested finite-difference operator."""


class SearchInfeasibleError(ClusterCertError):
    """No admissible partition depth exists for the certificate search."""

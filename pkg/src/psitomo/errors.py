"""Exception types shared across the package."""


class TomographyError(Exception):
    """Base class for every error this package raises on purpose."""


class ZeroVector(TomographyError):
    """All amplitudes are numerically zero, so there is nothing to normalize."""


class DimensionMismatch(TomographyError):
    """Operands live in Hilbert spaces of different dimension."""


class BadIndex(TomographyError):
    """Slit or step index outside its valid range."""


class ConfigMismatch(TomographyError):
    """Optical configuration is inconsistent with the requested operation."""


class DegenerateFringe(TomographyError):
    """Fringe modulation too small to recover a phase."""


class NonpositiveReference(TomographyError):
    """Visibility needs a strictly positive mean intensity."""


class ZeroResultant(TomographyError):
    """Circular mean is undefined because the resultant vector vanishes."""


class WeakReference(TomographyError):
    """Reference-slit population too small to anchor a reconstruction."""


class AllZero(TomographyError):
    """Populations are all zero."""


class Unattainable(TomographyError):
    """Calibration target is outside the reachable photon bracket."""

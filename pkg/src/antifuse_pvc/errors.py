"""Exception types shared across the toolkit."""


class FuseError(Exception):
    """Base class for all toolkit errors."""


class AddressRangeError(FuseError, ValueError):
    """An address, bit index, plane or value is outside its legal range."""


class DumpFormatError(FuseError, ValueError):
    """A fuse dump line could not be parsed."""

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class DuplicateRowError(DumpFormatError):
    """The same fuse row appears twice in a dump."""


class OTPViolationError(FuseError):
    """A write would need to clear an already programmed fuse bit."""


class MitigationConflictError(FuseError):
    """Complement programming is impossible for a pair of fuse words."""

    def __init__(self, message, row=None, partner=None, bit=None):
        self.row = row
        self.partner = partner
        self.bit = bit
        super().__init__(message)


class InconsistentObservationError(FuseError):
    """Analysis assumptions contradict the observed OR values."""


class PatternError(FuseError, ValueError):
    """Invalid pattern kind or parameters."""


class ArtError(FuseError, ValueError):
    """ASCII art could not be converted to a fuse memory."""


class LayoutError(ArtError):
    """ASCII art dimensions do not match the physical render frame."""


class PlacementError(ArtError):
    """ASCII art programs a cell that is not part of the address map."""


class ObservationFormatError(FuseError, ValueError):
    """A serialized PVC observation is malformed."""


class ImageFormatError(FuseError, ValueError):
    """A PGM image is malformed or truncated."""


class VisionError(FuseError):
    """Base class for image analysis failures."""


class GridNotFoundError(VisionError):
    """No regular contact lattice could be located in the image."""


class NoContrastError(VisionError):
    """The image does not separate into two intensity classes."""

    def __init__(self, message, contrast=None):
        self.contrast = contrast
        super().__init__(message)


class SynthParamsError(FuseError, ValueError):
    """Synthetic image parameters violate their invariants."""


class DumpRangeError(DumpFormatError, AddressRangeError):
    """A dump line names a row or value outside the fuse array."""

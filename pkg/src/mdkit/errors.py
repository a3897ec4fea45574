"""Domain error types.

Every raisable condition of the library is a subclass of :class:`KitError`
so the CLI can map domain failures to a single exit code while keeping the
error name in the message.
"""


class KitError(Exception):
    """Base class for all mdkit domain errors."""


# -- scene geometry -----------------------------------------------------------

class EmptyMesh(KitError):
    pass


class DegenerateTriangle(KitError):
    def __init__(self, index: int):
        super().__init__(f"triangle {index} has (near-)zero area")
        self.index = index


class NonWatertightMesh(KitError):
    pass


class SignUndecidable(KitError):
    pass


class GridTooSmall(KitError):
    pass


class CropOutsideVolume(KitError):
    pass


# -- body model ---------------------------------------------------------------

class DegenerateRotation6D(KitError):
    pass


class NotARotation(KitError):
    pass


class DimensionMismatch(KitError):
    pass


# -- mutual distances ---------------------------------------------------------

class InvalidCount(KitError):
    pass


class InvalidRadius(KitError):
    pass


class EmptySurface(KitError):
    pass


# -- spectral codec -----------------------------------------------------------

class InvalidLength(KitError):
    pass


class LengthMismatch(KitError):
    pass


class EmptyHistory(KitError):
    pass


# -- compute graph / networks -------------------------------------------------

class ShapeMismatch(KitError):
    pass


class ResolutionMismatch(KitError):
    pass


class NotAScalarLoss(KitError):
    pass


class GraphCycle(KitError):
    pass


# -- training -----------------------------------------------------------------

class NonFiniteLoss(KitError):
    pass


# -- file formats -------------------------------------------------------------

class FormatError(KitError):
    pass

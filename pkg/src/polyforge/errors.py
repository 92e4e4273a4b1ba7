"""Exception types shared across the package."""


class PolyforgeError(Exception):
    """Base class for all polyforge errors."""


class OverlapError(PolyforgeError):
    """A block path revisited an occupied lattice cell."""


class DegenerateCut(PolyforgeError):
    """A cut line missed the polygon or produced an empty/disconnected side."""


class ResampleExhausted(PolyforgeError):
    """Rejection sampling hit its retry cap; indicates a bug or pathological config."""


class AmbiguousProblem(PolyforgeError):
    """A problem does not have exactly one answer under the oracle."""


class SearchBudgetExceeded(PolyforgeError):
    """Brute-force tiling search exceeded its budget."""


class CorruptManifest(PolyforgeError):
    """A dataset manifest is missing, unreadable, or inconsistent."""


class MissingImage(PolyforgeError):
    """A manifest references an image file that does not exist on disk."""

"""Exception types shared across the package."""


class WordwipeError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(WordwipeError):
    """Invalid or inconsistent configuration."""


class ShapeError(WordwipeError):
    """Array dimensions violate an operation's contract."""


class RegionError(WordwipeError):
    """A metric was requested over an empty pixel region."""


class AnnotationError(WordwipeError):
    """Word annotations are inconsistent with the image geometry."""


class AssetError(WordwipeError):
    """A required asset (e.g. a font file) is missing or unreadable."""


class GenerationError(WordwipeError):
    """Sample generation cannot proceed (e.g. canvas too small)."""


class DatasetError(WordwipeError):
    """Dataset on disk is missing, incomplete, or schema-incompatible."""


class StateError(WordwipeError):
    """Training state or checkpoint is missing or corrupt."""


class InputError(WordwipeError):
    """CLI-level input that cannot be acted on (maps to a usage error)."""

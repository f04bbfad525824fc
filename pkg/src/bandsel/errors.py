"""Exception hierarchy for the bandsel package.

Every error raised by the library derives from :class:`BandselError` so
callers (and the CLI) can map failure classes to exit codes.
"""


class BandselError(Exception):
    """Base class for all bandsel errors."""


class ValidationError(BandselError):
    """A value or configuration violates a documented invariant."""


# --- spectral core -----------------------------------------------------------

class PassbandOutOfRange(BandselError):
    """A filter passband exits the wavelength grid coverage."""


class ZeroRow(BandselError):
    """A filter responds with exactly zero to every object spectrum."""


class EmptyObject(BandselError):
    """An object id has no sample spectra."""


# --- dataset I/O -------------------------------------------------------------

class ParseError(BandselError):
    """A dataset file is malformed; message carries the line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GridMismatch(BandselError):
    """Wavelength header does not form (or match) the expected uniform grid."""


class NegativeValue(BandselError):
    """Negative spectral value encountered and not explicitly allowed."""


class DuplicateFilter(BandselError):
    """Two catalog entries share the same (center, bandwidth)."""


class EmptyCatalog(BandselError):
    """No feasible filter exists for the requested catalog parameters."""


# --- selection ----------------------------------------------------------------

class ZeroVector(BandselError):
    """Spectral angle is undefined for an all-zero response vector."""


class InvalidN(BandselError):
    """Requested selection size is out of range for the candidate pool."""


class TooManyCombinations(BandselError):
    """Full search would exceed the configured combination cap."""


# --- SNR ----------------------------------------------------------------------

class TooFewSamples(BandselError):
    """SNR needs at least two samples."""


class TooFewReplicates(BandselError):
    """Per-object SNR needs at least two replicates per object."""


class UndefinedSnr(BandselError):
    """Mean and standard deviation are both zero."""


class AllBandsPruned(BandselError):
    """SNR pruning removed every candidate filter."""


class NotEnoughSurvivors(BandselError):
    """Fewer filters survived pruning than the selection needs."""


# --- classification -----------------------------------------------------------

class SingleClass(BandselError):
    """Training data contains only one class."""


class EmptyFeatures(BandselError):
    """Feature matrix has no rows or no columns."""


class FeatureCountMismatch(BandselError):
    """Prediction-time feature count differs from training."""


class TooFewSamplesPerClass(BandselError):
    """A class has fewer samples than the number of folds."""

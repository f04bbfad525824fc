"""Wavelength grids, bandpass filter curves, and integrated filter responses.

A filter response is the box-filter integral of a spectrum over the filter
passband, evaluated with the rectangle rule on the dataset's uniform grid.
Each grid point at wavelength ``l`` represents the cell ``[l, l + step)``,
so a passband may legally end up to one step past the last grid sample and
adjacent filters never double-count a shared edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyObject, PassbandOutOfRange, ValidationError, ZeroRow

_EDGE_EPS = 1e-9


@dataclass(frozen=True)
class WavelengthGrid:
    """Uniform, strictly increasing wavelength sampling in nanometres."""

    start_nm: float
    step_nm: float
    count: int

    def __post_init__(self):
        if not np.isfinite(self.start_nm) or self.start_nm <= 0:
            raise ValidationError(f"grid start must be finite and > 0, got {self.start_nm}")
        if not np.isfinite(self.step_nm) or self.step_nm <= 0:
            raise ValidationError(f"grid step must be finite and > 0, got {self.step_nm}")
        if self.count < 2:
            raise ValidationError(f"grid needs at least 2 samples, got {self.count}")

    @property
    def end_nm(self) -> float:
        """Wavelength of the last grid sample."""
        return self.start_nm + (self.count - 1) * self.step_nm

    @property
    def coverage_end_nm(self) -> float:
        """Exclusive end of the last rectangle cell."""
        return self.start_nm + self.count * self.step_nm

    def wavelengths(self) -> np.ndarray:
        return self.start_nm + self.step_nm * np.arange(self.count)


@dataclass(frozen=True)
class Spectrum:
    """A single spectrum sampled on some :class:`WavelengthGrid`."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValidationError("spectrum values must be 1-D")
        if not np.all(np.isfinite(values)):
            raise ValidationError("spectrum values must be finite")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class FilterCurve:
    """Ideal rectangular bandpass filter with unit transmittance."""

    center_nm: float
    bandwidth_nm: float
    id: int

    def __post_init__(self):
        if not np.isfinite(self.center_nm):
            raise ValidationError("filter center must be finite")
        if not np.isfinite(self.bandwidth_nm) or self.bandwidth_nm <= 0:
            raise ValidationError(f"filter bandwidth must be > 0, got {self.bandwidth_nm}")

    @property
    def lo_nm(self) -> float:
        return self.center_nm - self.bandwidth_nm / 2.0

    @property
    def hi_nm(self) -> float:
        return self.center_nm + self.bandwidth_nm / 2.0


@dataclass(frozen=True)
class FilterCatalog:
    """Ordered pool of candidate filters on a shared grid.

    ``source_ids`` tracks provenance through pruning: entry ``i`` is the id
    the ``i``-th filter had in the original, unpruned catalog.
    """

    filters: tuple[FilterCurve, ...]
    grid: WavelengthGrid
    source_ids: tuple[int, ...] = field(default=())

    def __post_init__(self):
        filters = tuple(self.filters)
        if len(filters) < 1:
            raise ValidationError("catalog needs at least one filter")
        for pos, f in enumerate(filters):
            if f.id != pos:
                raise ValidationError(f"filter ids must equal list position ({f.id} at {pos})")
            _passband_indices(f, self.grid)  # raises PassbandOutOfRange
        source = tuple(self.source_ids) if self.source_ids else tuple(range(len(filters)))
        if len(source) != len(filters):
            raise ValidationError("source_ids length must match filter count")
        object.__setattr__(self, "filters", filters)
        object.__setattr__(self, "source_ids", source)

    def __len__(self) -> int:
        return len(self.filters)

    def centers(self) -> np.ndarray:
        return np.array([f.center_nm for f in self.filters])

    def bandwidths(self) -> np.ndarray:
        return np.array([f.bandwidth_nm for f in self.filters])


@dataclass(frozen=True)
class FilterMatrix:
    """Filters-by-objects matrix of bandwidth-normalized responses."""

    entries: np.ndarray
    filter_ids: tuple[int, ...]
    object_ids: tuple[int, ...]

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2:
            raise ValidationError("filter matrix must be 2-D")
        if entries.shape != (len(self.filter_ids), len(self.object_ids)):
            raise ValidationError("filter matrix shape must be (n_filters, n_objects)")
        if not np.all(np.isfinite(entries)):
            raise ValidationError("filter matrix entries must be finite")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "filter_ids", tuple(self.filter_ids))
        object.__setattr__(self, "object_ids", tuple(self.object_ids))


@dataclass(frozen=True)
class NormalizationParams:
    """Per-feature z-score parameters fitted on training rows only."""

    per_feature_mean: np.ndarray
    per_feature_std: np.ndarray
    degenerate: np.ndarray  # True where the raw std was 0 and got replaced by 1


def _passband_indices(curve: FilterCurve, grid: WavelengthGrid) -> tuple[int, int]:
    """Half-open grid index range [k_lo, k_hi) covered by the passband."""
    tol = _EDGE_EPS * max(1.0, abs(grid.coverage_end_nm))
    if curve.lo_nm < grid.start_nm - tol or curve.hi_nm > grid.coverage_end_nm + tol:
        raise PassbandOutOfRange(
            f"filter {curve.id} passband [{curve.lo_nm}, {curve.hi_nm}) exits grid "
            f"coverage [{grid.start_nm}, {grid.coverage_end_nm})"
        )
    a = (curve.lo_nm - grid.start_nm) / grid.step_nm
    b = (curve.hi_nm - grid.start_nm) / grid.step_nm
    k_lo = max(0, int(np.ceil(a - _EDGE_EPS)))
    k_hi = min(grid.count, int(np.ceil(b - _EDGE_EPS)))
    return k_lo, k_hi


def filter_response(curve: FilterCurve, spectrum: Spectrum, grid: WavelengthGrid) -> float:
    """Rectangle-rule integral of the spectrum over the filter passband."""
    k_lo, k_hi = _passband_indices(curve, grid)
    return float(spectrum.values[k_lo:k_hi].sum() * grid.step_nm)


def bandwidth_normalized_response(curve: FilterCurve, spectrum: Spectrum, grid: WavelengthGrid) -> float:
    """Mean in-band value: the passband integral divided by the bandwidth."""
    return filter_response(curve, spectrum, grid) / curve.bandwidth_nm


def response_matrix(catalog: FilterCatalog, values: np.ndarray) -> np.ndarray:
    """Bandwidth-normalized responses of many spectra through every filter.

    Parameters
    ----------
    values : (n_spectra, grid.count) array of spectral samples.

    Returns
    -------
    (n_spectra, n_filters) array; column ``i`` matches
    ``bandwidth_normalized_response(catalog.filters[i], ...)`` row by row.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] != catalog.grid.count:
        raise ValidationError("values must be (n_spectra, grid.count)")
    prefix = np.zeros((values.shape[0], catalog.grid.count + 1))
    np.cumsum(values, axis=1, out=prefix[:, 1:])
    out = np.empty((values.shape[0], len(catalog)))
    step = catalog.grid.step_nm
    for i, f in enumerate(catalog.filters):
        k_lo, k_hi = _passband_indices(f, catalog.grid)
        out[:, i] = (prefix[:, k_hi] - prefix[:, k_lo]) * (step / f.bandwidth_nm)
    return out


def build_filter_matrix(catalog: FilterCatalog, object_spectra: list[Spectrum]) -> FilterMatrix:
    """Assemble the filters-by-objects response matrix.

    Rejects any filter whose response is exactly zero for every object:
    such a row has no direction and breaks angle computations downstream.
    """
    if len(object_spectra) < 2:
        raise ValidationError("need at least 2 object spectra")
    for j, s in enumerate(object_spectra):
        if len(s) != catalog.grid.count:
            raise ValidationError(f"object spectrum {j} is not on the catalog grid")
    stacked = np.stack([s.values for s in object_spectra])
    entries = response_matrix(catalog, stacked).T
    zero_rows = np.flatnonzero(~entries.any(axis=1))
    if zero_rows.size:
        raise ZeroRow(f"filters {zero_rows.tolist()} respond 0 to every object")
    return FilterMatrix(
        entries=entries,
        filter_ids=tuple(f.id for f in catalog.filters),
        object_ids=tuple(range(len(object_spectra))),
    )


def representative_spectra(dataset) -> list[Spectrum]:
    """One spectrum per object: the mean over that object's replicates.

    Objects are returned in ascending object-id order.
    """
    by_object: dict[int, list[np.ndarray]] = {}
    for rec in dataset.samples:
        by_object.setdefault(rec.object_id, []).append(rec.spectrum.values)
    out = []
    for oid in sorted(by_object):
        reps = by_object[oid]
        if not reps:
            raise EmptyObject(f"object {oid} has no samples")
        out.append(Spectrum(np.mean(reps, axis=0)))
    return out


def fit_normalization(features: np.ndarray) -> NormalizationParams:
    """Fit per-column z-score parameters (population std, 1/N)."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.size == 0:
        raise ValidationError("features must be a non-empty 2-D matrix")
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    degenerate = std == 0.0
    std = np.where(degenerate, 1.0, std)
    return NormalizationParams(mean, std, degenerate)


def apply_normalization(params: NormalizationParams, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[1] != params.per_feature_mean.size:
        raise ValidationError("feature count does not match normalization params")
    return (features - params.per_feature_mean) / params.per_feature_std


def denormalize(params: NormalizationParams, features: np.ndarray) -> np.ndarray:
    """Inverse of :func:`apply_normalization`."""
    return np.asarray(features, dtype=float) * params.per_feature_std + params.per_feature_mean

"""Labeled spectral datasets: CSV/JSON I/O, synthetic generation, catalogs.

The synthetic generator produces class signatures whose discriminative
structure lives in the upper part of the wavelength range while replicate
noise grows with wavelength. That combination is what makes SNR pruning a
meaningful trade-off: pruning the noisy top end removes real information,
and over-pruning leaves only the flat low-wavelength region where classes
are indistinguishable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateFilter,
    EmptyCatalog,
    GridMismatch,
    NegativeValue,
    ParseError,
    ValidationError,
)
from .spectral import FilterCatalog, FilterCurve, Spectrum, WavelengthGrid

DEFAULT_GRID = WavelengthGrid(start_nm=316.0, step_nm=1.0, count=476)  # 316..791 nm
DEFAULT_BANDWIDTHS_NM = (10.0, 50.0)
DEFAULT_CENTER_STEP_NM = 5.0

# Fraction of the wavelength span (from the low end) that carries no class
# information; class and object structure only appears above it. Bump
# amplitudes stay small against the baseline so per-band SNR is governed by
# the noise ramp, not by which class signature happens to peak in a band.
_PLAIN_FRACTION = 0.3
_BASELINE = 1.0
_CLASS_AMP = (0.12, 0.40)
_CLASS_WIDTH_NM = (18.0, 70.0)
_OBJECT_AMP = (0.03, 0.08)
_OBJECT_WIDTH_NM = (15.0, 50.0)


@dataclass(frozen=True)
class SampleRecord:
    object_id: int
    class_label: str
    spectrum: Spectrum


@dataclass(frozen=True)
class LabeledDataset:
    """Replicate spectra with object ids and class labels on one grid."""

    grid: WavelengthGrid
    samples: tuple[SampleRecord, ...]
    classes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        samples = tuple(self.samples)
        if not samples:
            raise ValidationError("dataset has no samples")
        seen: dict[int, str] = {}
        for rec in samples:
            if len(rec.spectrum) != self.grid.count:
                raise ValidationError(f"object {rec.object_id} spectrum is not on the dataset grid")
            before = seen.setdefault(rec.object_id, rec.class_label)
            if before != rec.class_label:
                raise ValidationError(
                    f"object {rec.object_id} appears in classes {before!r} and {rec.class_label!r}"
                )
        present = sorted(set(seen.values()))
        classes = tuple(self.classes) if self.classes else tuple(present)
        if sorted(classes) != present:
            raise ValidationError("declared classes do not match labels present in samples")
        if len(classes) < 2:
            raise ValidationError("dataset needs at least 2 classes")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "classes", classes)

    def labels(self) -> list[str]:
        return [rec.class_label for rec in self.samples]

    def object_ids(self) -> list[int]:
        return [rec.object_id for rec in self.samples]

    def spectra_matrix(self) -> np.ndarray:
        """(n_samples, grid.count) stack of all replicate spectra."""
        return np.stack([rec.spectrum.values for rec in self.samples])


@dataclass(frozen=True)
class SyntheticConfig:
    n_classes: int = 5
    objects_per_class: int = 10
    replicates_per_object: int = 100
    grid: WavelengthGrid = DEFAULT_GRID
    noise_base: float = 0.04
    noise_slope: float = 0.30
    signature_bumps_per_class: int = 4
    seed: int = 0

    def __post_init__(self):
        for name in ("n_classes", "objects_per_class", "replicates_per_object",
                     "signature_bumps_per_class"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if self.noise_base < 0 or self.noise_slope < 0:
            raise ValidationError("noise_base and noise_slope must be >= 0")
        if self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")


def _gaussian_bump(wavelengths: np.ndarray, center: float, width: float, amp: float) -> np.ndarray:
    return amp * np.exp(-0.5 * ((wavelengths - center) / width) ** 2)


def noise_sigma(grid: WavelengthGrid, noise_base: float, noise_slope: float) -> np.ndarray:
    """Per-wavelength replicate noise std: linear ramp from base to base+slope."""
    frac = (grid.wavelengths() - grid.start_nm) / (grid.end_nm - grid.start_nm)
    return noise_base + noise_slope * frac


def generate_synthetic(config: SyntheticConfig) -> LabeledDataset:
    """Deterministically generate a labeled replicate dataset."""
    rng = np.random.default_rng(config.seed)
    grid = config.grid
    wl = grid.wavelengths()
    span = grid.end_nm - grid.start_nm
    lo = grid.start_nm + _PLAIN_FRACTION * span
    sigma = noise_sigma(grid, config.noise_base, config.noise_slope)

    samples: list[SampleRecord] = []
    width = len(str(config.n_classes - 1)) if config.n_classes > 1 else 1
    for c in range(config.n_classes):
        label = f"class{c:0{max(2, width)}d}"
        signature = np.full(grid.count, _BASELINE)
        for _ in range(config.signature_bumps_per_class):
            center = rng.uniform(lo, grid.end_nm)
            bw = rng.uniform(*_CLASS_WIDTH_NM)
            amp = rng.uniform(*_CLASS_AMP)
            signature = signature + _gaussian_bump(wl, center, bw, amp)
        for o in range(config.objects_per_class):
            center = rng.uniform(lo, grid.end_nm)
            bw = rng.uniform(*_OBJECT_WIDTH_NM)
            amp = rng.uniform(*_OBJECT_AMP) * rng.choice((-1.0, 1.0))
            base = signature + _gaussian_bump(wl, center, bw, amp)
            oid = c * config.objects_per_class + o
            for _ in range(config.replicates_per_object):
                values = base + rng.standard_normal(grid.count) * sigma
                np.clip(values, 0.0, None, out=values)
                samples.append(SampleRecord(oid, label, Spectrum(values)))
    return LabeledDataset(grid=grid, samples=tuple(samples))


# --- dataset CSV ---------------------------------------------------------------

def save_dataset_csv(dataset: LabeledDataset, path: str | Path) -> None:
    """Write the canonical CSV form: object_id,class,<wavelength columns>."""
    wl = dataset.grid.wavelengths()
    lines = ["object_id,class," + ",".join(str(float(w)) for w in wl)]
    for rec in dataset.samples:
        row = ",".join(str(float(v)) for v in rec.spectrum.values)
        lines.append(f"{rec.object_id},{rec.class_label},{row}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _grid_from_header(columns: list[str]) -> WavelengthGrid:
    try:
        wl = np.array([float(c) for c in columns])
    except ValueError as exc:
        raise GridMismatch(f"non-numeric wavelength column: {exc}") from None
    if wl.size < 2:
        raise GridMismatch("header needs at least 2 wavelength columns")
    diffs = np.diff(wl)
    if np.any(diffs <= 0):
        raise GridMismatch("wavelength columns must be strictly ascending")
    step = (wl[-1] - wl[0]) / (wl.size - 1)
    if np.any(np.abs(diffs - step) > 1e-6 * step):
        raise GridMismatch("wavelength columns are not uniformly spaced")
    return WavelengthGrid(start_nm=float(wl[0]), step_nm=float(step), count=int(wl.size))


def load_dataset_csv(
    path: str | Path,
    *,
    classes: list[str] | None = None,
    allow_negative: bool = False,
    expected_grid: WavelengthGrid | None = None,
) -> LabeledDataset:
    """Parse a dataset CSV, rejecting ragged rows, NaNs and negatives."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    header = lines[0].split(",")
    if len(header) < 4 or header[0] != "object_id" or header[1] != "class":
        raise ParseError("header must start with 'object_id,class,' + wavelengths", line=1)
    grid = _grid_from_header(header[2:])
    if expected_grid is not None and (
        grid.start_nm != expected_grid.start_nm
        or grid.step_nm != expected_grid.step_nm
        or grid.count != expected_grid.count
    ):
        raise GridMismatch(f"file grid {grid} does not match expected {expected_grid}")

    samples: list[SampleRecord] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2 + grid.count:
            raise ParseError(
                f"expected {2 + grid.count} columns, found {len(parts)}", line=lineno
            )
        try:
            oid = int(parts[0])
        except ValueError:
            raise ParseError(f"bad object_id {parts[0]!r}", line=lineno) from None
        label = parts[1]
        if classes is not None and label not in classes:
            raise ParseError(f"unknown class {label!r}", line=lineno)
        try:
            values = np.array([float(v) for v in parts[2:]])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if np.any(~np.isfinite(values)):
            raise ParseError("non-finite spectral value", line=lineno)
        if not allow_negative and np.any(values < 0):
            raise NegativeValue(f"line {lineno}: negative spectral value")
        samples.append(SampleRecord(oid, label, Spectrum(values)))
    if not samples:
        raise ParseError("no data rows", line=2)
    return LabeledDataset(grid=grid, samples=tuple(samples),
                          classes=tuple(classes) if classes else ())


# --- filter catalogs -------------------------------------------------------------

def generate_catalog(
    grid: WavelengthGrid,
    bandwidths_nm: list[float] | tuple[float, ...] = DEFAULT_BANDWIDTHS_NM,
    center_step_nm: float = DEFAULT_CENTER_STEP_NM,
) -> FilterCatalog:
    """All feasible (bandwidth, center) filters, ordered by bandwidth then center.

    For each bandwidth the centers run from the lowest feasible center to the
    highest in steps of ``center_step_nm``; the highest feasible center is
    always included even when it is off-step.
    """
    if not bandwidths_nm:
        raise ValidationError("bandwidths_nm must be non-empty")
    if center_step_nm <= 0:
        raise ValidationError("center_step_nm must be > 0")
    filters: list[FilterCurve] = []
    for bw in sorted(float(b) for b in bandwidths_nm):
        lo = grid.start_nm + bw / 2.0
        hi = grid.end_nm - bw / 2.0
        if hi < lo - 1e-9:
            continue
        centers = list(np.arange(lo, hi + 1e-9, center_step_nm))
        if not centers or abs(centers[-1] - hi) > 1e-9:
            centers.append(hi)
        for c in centers:
            filters.append(FilterCurve(center_nm=float(c), bandwidth_nm=bw, id=len(filters)))
    if not filters:
        raise EmptyCatalog(
            f"no bandwidth in {sorted(bandwidths_nm)} fits the grid span "
            f"[{grid.start_nm}, {grid.end_nm}]"
        )
    return FilterCatalog(filters=tuple(filters), grid=grid)


def save_catalog_json(catalog: FilterCatalog, path: str | Path) -> None:
    doc = {
        "grid": {
            "start_nm": catalog.grid.start_nm,
            "step_nm": catalog.grid.step_nm,
            "count": catalog.grid.count,
        },
        "filters": [
            {"center_nm": f.center_nm, "bandwidth_nm": f.bandwidth_nm}
            for f in catalog.filters
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_catalog_json(path: str | Path) -> FilterCatalog:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    try:
        g = doc["grid"]
        grid = WavelengthGrid(float(g["start_nm"]), float(g["step_nm"]), int(g["count"]))
        entries = [(float(f["center_nm"]), float(f["bandwidth_nm"])) for f in doc["filters"]]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"catalog JSON missing field: {exc}") from None
    seen = set()
    for center, bw in entries:
        if (center, bw) in seen:
            raise DuplicateFilter(f"duplicate filter (center={center}, bandwidth={bw})")
        seen.add((center, bw))
    if not entries:
        raise EmptyCatalog("catalog JSON lists no filters")
    filters = tuple(
        FilterCurve(center_nm=c, bandwidth_nm=b, id=i) for i, (c, b) in enumerate(entries)
    )
    return FilterCatalog(filters=filters, grid=grid)


def subset_catalog(catalog: FilterCatalog, keep_positions: list[int]) -> FilterCatalog:
    """Reindexed catalog of the kept positions, provenance composed."""
    if not keep_positions:
        raise EmptyCatalog("subset would be empty")
    filters = tuple(
        replace(catalog.filters[p], id=i) for i, p in enumerate(keep_positions)
    )
    source = tuple(catalog.source_ids[p] for p in keep_positions)
    return FilterCatalog(filters=filters, grid=catalog.grid, source_ids=source)

"""Per-band signal-to-noise estimation and catalog pruning.

The SNR of a band is mean over standard deviation of its response samples
(population std, 1/M). For a replicate dataset the responses of a single
object differ only by measurement noise, so the per-object ratio estimates
the band's true SNR; the profile aggregates per-object ratios as a median
over objects, which a single odd object cannot drag around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import LabeledDataset, subset_catalog
from .errors import AllBandsPruned, TooFewReplicates, TooFewSamples, UndefinedSnr, ValidationError
from .spectral import FilterCatalog, response_matrix


@dataclass(frozen=True)
class BandSnr:
    filter_id: int
    mu: float
    sigma: float
    m: int
    snr: float


@dataclass(frozen=True)
class SnrProfile:
    per_filter: tuple[BandSnr, ...]
    aggregation: str = "median_over_objects"

    def snr_values(self) -> np.ndarray:
        return np.array([b.snr for b in self.per_filter])


def _snr_of(mu: float, sigma: float) -> float:
    if sigma > 0.0:
        return mu / sigma
    if mu == 0.0:
        raise UndefinedSnr("mean and standard deviation are both zero")
    return math.inf if mu > 0.0 else -math.inf


def band_snr(values, *, filter_id: int = -1) -> BandSnr:
    """SNR of one band's samples: population mean over population std."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ValidationError("band values must be 1-D")
    if values.size < 2:
        raise TooFewSamples(f"SNR needs at least 2 samples, got {values.size}")
    mu = float(values.mean())
    sigma = float(values.std())
    return BandSnr(filter_id=filter_id, mu=mu, sigma=sigma, m=values.size, snr=_snr_of(mu, sigma))


def snr_profile(dataset: LabeledDataset, catalog: FilterCatalog) -> SnrProfile:
    """Median-over-objects SNR for every catalog filter.

    For each filter, the SNR is computed per object over that object's
    replicate responses, then aggregated as the median across objects.
    """
    responses = response_matrix(catalog, dataset.spectra_matrix())
    object_ids = np.array(dataset.object_ids())
    groups = []
    for oid in np.unique(object_ids):
        rows = np.flatnonzero(object_ids == oid)
        if rows.size < 2:
            raise TooFewReplicates(f"object {oid} has {rows.size} replicate(s), need >= 2")
        groups.append(rows)

    per_filter = []
    for k in range(len(catalog)):
        ratios = np.empty(len(groups))
        mus = np.empty(len(groups))
        sigmas = np.empty(len(groups))
        m_total = 0
        for g, rows in enumerate(groups):
            vals = responses[rows, k]
            mus[g] = vals.mean()
            sigmas[g] = vals.std()
            ratios[g] = _snr_of(float(mus[g]), float(sigmas[g]))
            m_total += rows.size
        per_filter.append(
            BandSnr(
                filter_id=catalog.filters[k].id,
                mu=float(np.median(mus)),
                sigma=float(np.median(sigmas)),
                m=m_total,
                snr=float(np.median(ratios)),
            )
        )
    return SnrProfile(per_filter=tuple(per_filter))


def prune_bands(
    catalog: FilterCatalog,
    profile: SnrProfile,
    snr_th: float,
    *,
    drop: str = "below",
) -> FilterCatalog:
    """Remove catalog filters on one side of the SNR threshold.

    ``drop="below"`` keeps filters with SNR >= ``snr_th`` (noisy bands go);
    ``drop="above"`` keeps SNR <= ``snr_th``, the opposite reading.
    """
    if snr_th < 0:
        raise ValidationError("snr_th must be >= 0")
    if len(profile.per_filter) != len(catalog):
        raise ValidationError("profile does not cover this catalog")
    if drop == "below":
        keep = [k for k, b in enumerate(profile.per_filter) if b.snr >= snr_th]
    elif drop == "above":
        keep = [k for k, b in enumerate(profile.per_filter) if b.snr <= snr_th]
    else:
        raise ValidationError(f"drop must be 'below' or 'above', got {drop!r}")
    if not keep:
        raise AllBandsPruned(
            f"no filter satisfies SNR {'>=' if drop == 'below' else '<='} {snr_th}"
        )
    return subset_catalog(catalog, keep)


def save_snr_profile_csv(profile: SnrProfile, catalog: FilterCatalog, path: str | Path) -> None:
    """Write ``filter_id,center_nm,bandwidth_nm,mu,sigma,snr`` rows."""
    if len(profile.per_filter) != len(catalog):
        raise ValidationError("profile does not cover this catalog")
    lines = ["filter_id,center_nm,bandwidth_nm,mu,sigma,snr"]
    for band, f in zip(profile.per_filter, catalog.filters):
        lines.append(
            f"{band.filter_id},{f.center_nm},{f.bandwidth_nm},"
            f"{band.mu},{band.sigma},{band.snr}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

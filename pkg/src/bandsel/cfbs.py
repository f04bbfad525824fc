"""Conditional filter band selection: SNR-pruned FBS plus minimal growth.

Pipeline: estimate per-band SNR, prune the catalog at the SNR threshold,
run the max-min angle selection on what survives, then grow the smallest
subset of the selected filters whose cross-validation score reaches the
requested threshold. Growth starts from the best of all pairs and adds the
best-scoring remaining filter per step, stopping at the threshold, at a
perfect score, or when no addition improves the score.

All cross-validation evaluations for a subset are deterministic functions
of (subset, classifier spec, folds, seed), so a sweep over threshold grids
shares one evaluation cache across cells without changing any result.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .classify import ClassifierSpec, CvReport, FoldPlan, cross_val_score, make_folds
from .dataset import LabeledDataset, subset_catalog
from .errors import NotEnoughSurvivors, ValidationError
from .selection import (
    SelectionVector,
    build_adjacency,
    fbs_select,
    min_pairwise_angle,
)
from .snr import prune_bands, snr_profile
from .spectral import FilterCatalog, build_filter_matrix, representative_spectra, response_matrix

RECOMMENDED_SNR_TH = (0.0, 30.0)
RECOMMENDED_CVS_TH = (0.90, 0.98)


@dataclass(frozen=True)
class CfbsConfig:
    snr_th: float = 0.0
    cvs_th: float = 0.95
    n_fbs: int = 9
    classifier: ClassifierSpec = field(default_factory=ClassifierSpec.random_forest)
    k_folds: int = 5
    seed: int = 0
    snr_drop: str = "below"  # which side of snr_th gets pruned

    def __post_init__(self):
        if self.snr_th < 0:
            raise ValidationError("snr_th must be >= 0")
        if not 0.0 <= self.cvs_th <= 1.0:
            raise ValidationError("cvs_th must lie in [0, 1]")
        if self.n_fbs < 2:
            raise ValidationError("n_fbs must be >= 2 (growth starts from a pair)")
        if self.k_folds < 2:
            raise ValidationError("k_folds must be >= 2")
        if self.snr_drop not in ("below", "above"):
            raise ValidationError("snr_drop must be 'below' or 'above'")
        if not RECOMMENDED_SNR_TH[0] <= self.snr_th <= RECOMMENDED_SNR_TH[1]:
            warnings.warn(
                f"snr_th = {self.snr_th} is outside the recommended range "
                f"{RECOMMENDED_SNR_TH}", stacklevel=2,
            )
        if not RECOMMENDED_CVS_TH[0] <= self.cvs_th <= RECOMMENDED_CVS_TH[1]:
            warnings.warn(
                f"cvs_th = {self.cvs_th} is outside the recommended range "
                f"{RECOMMENDED_CVS_TH}", stacklevel=2,
            )

    def to_json_dict(self) -> dict:
        return {
            "snr_th": self.snr_th,
            "cvs_th": self.cvs_th,
            "n_fbs": self.n_fbs,
            "k_folds": self.k_folds,
            "seed": self.seed,
            "snr_drop": self.snr_drop,
            "classifier": {
                "kind": self.classifier.kind,
                "n_trees": self.classifier.n_trees,
                "max_depth": self.classifier.max_depth,
                "min_samples_split": self.classifier.min_samples_split,
                "learning_rate": self.classifier.learning_rate,
                "features_per_split": self.classifier.features_per_split,
                "seed": self.classifier.seed,
            },
        }


@dataclass(frozen=True)
class MinimalSelection:
    """CFBS output; all filter ids refer to the original (unpruned) catalog."""

    selection: SelectionVector
    achieved_cvs: float
    n: int
    trace: tuple[tuple[tuple[int, ...], float], ...]
    config: CfbsConfig
    min_pairwise_angle_rad: float
    fbs_ids: tuple[int, ...]
    survivor_ids: tuple[int, ...]
    theta_star: float

    def to_json_dict(self, catalog: FilterCatalog) -> dict:
        return {
            "method": "cfbs",
            "config": self.config.to_json_dict(),
            "filters": [
                {
                    "id": i,
                    "center_nm": catalog.filters[i].center_nm,
                    "bandwidth_nm": catalog.filters[i].bandwidth_nm,
                }
                for i in self.selection.ids()
            ],
            "achieved_cvs": self.achieved_cvs,
            "n": self.n,
            "min_pairwise_angle_rad": self.min_pairwise_angle_rad,
            "trace": [{"ids": list(ids), "cvs": cvs} for ids, cvs in self.trace],
        }


def _evaluate_subset(
    subset: tuple[int, ...],
    features_all: np.ndarray,
    labels: list[str],
    catalog: FilterCatalog,
    spec: ClassifierSpec,
    plan: FoldPlan,
    fold_seed: int,
    cache: dict | None,
) -> CvReport:
    key = (
        tuple(catalog.source_ids[i] for i in subset),
        spec.fingerprint(),
        plan.k,
        fold_seed,
    )
    if cache is not None and key in cache:
        return cache[key]
    report = cross_val_score(features_all[:, list(subset)], labels, spec, plan)
    if cache is not None:
        cache[key] = report
    return report


def greedy_expand(
    fbs_sel: SelectionVector,
    dataset: LabeledDataset,
    catalog: FilterCatalog,
    config: CfbsConfig,
    *,
    features_all: np.ndarray | None = None,
    plan: FoldPlan | None = None,
    eval_cache: dict | None = None,
) -> tuple[SelectionVector, float, tuple[tuple[tuple[int, ...], float], ...]]:
    """Grow the smallest subset of the FBS filters meeting the cvs threshold.

    Stage 1 scores every pair of FBS filters and keeps the best. Stage 2
    repeatedly adds the best-scoring remaining FBS filter while the score is
    below the threshold, stopping early at a perfect score or as soon as no
    addition strictly improves the score. Returns the best subset found, its
    score, and the full (subset, cvs) evaluation trace.
    """
    ids = fbs_sel.ids()
    if len(ids) < 2:
        raise ValidationError("growth needs at least 2 candidate filters")
    labels = dataset.labels()
    if features_all is None:
        features_all = response_matrix(catalog, dataset.spectra_matrix())
    if plan is None:
        plan = make_folds(labels, config.k_folds, config.seed)

    def score(subset: tuple[int, ...]) -> float:
        report = _evaluate_subset(
            subset, features_all, labels, catalog,
            config.classifier, plan, config.seed, eval_cache,
        )
        return report.cvs

    trace: list[tuple[tuple[int, ...], float]] = []
    current: tuple[int, ...] | None = None
    current_cvs = -1.0
    for pair in itertools.combinations(ids, 2):
        cvs = score(pair)
        trace.append((pair, cvs))
        if cvs > current_cvs:
            current, current_cvs = pair, cvs

    while current_cvs < config.cvs_th and current_cvs < 1.0:
        remaining = [i for i in ids if i not in current]
        if not remaining:
            break
        best_aug: tuple[int, ...] | None = None
        best_cvs = -1.0
        for cand in remaining:
            subset = tuple(sorted(current + (cand,)))
            cvs = score(subset)
            trace.append((subset, cvs))
            if cvs > best_cvs:
                best_aug, best_cvs = subset, cvs
        if best_cvs <= current_cvs:
            break  # no strict improvement
        current, current_cvs = best_aug, best_cvs

    sel = SelectionVector(selected=frozenset(current), K=len(catalog))
    return sel, current_cvs, tuple(trace)


def cfbs_select(
    dataset: LabeledDataset,
    catalog: FilterCatalog,
    config: CfbsConfig,
    *,
    eval_cache: dict | None = None,
) -> MinimalSelection:
    """Run the full conditional selection pipeline on one dataset."""
    profile = snr_profile(dataset, catalog)
    pruned = prune_bands(catalog, profile, config.snr_th, drop=config.snr_drop)
    if len(pruned) < config.n_fbs:
        raise NotEnoughSurvivors(
            f"{len(pruned)} filters survive snr_th = {config.snr_th}, "
            f"need n_fbs = {config.n_fbs}"
        )
    matrix = build_filter_matrix(pruned, representative_spectra(dataset))
    graph = build_adjacency(matrix)
    fbs = fbs_select(graph, config.n_fbs)

    labels = dataset.labels()
    features_all = response_matrix(pruned, dataset.spectra_matrix())
    plan = make_folds(labels, config.k_folds, config.seed)
    sel_pruned, achieved, trace_pruned = greedy_expand(
        fbs.selection, dataset, pruned, config,
        features_all=features_all, plan=plan, eval_cache=eval_cache,
    )
    if achieved < config.cvs_th:
        warnings.warn(
            f"cvs_th = {config.cvs_th} unreachable; best subset scored {achieved:.4f}",
            stacklevel=2,
        )

    to_orig = pruned.source_ids
    selection = SelectionVector(
        selected=frozenset(to_orig[i] for i in sel_pruned.ids()), K=len(catalog)
    )
    return MinimalSelection(
        selection=selection,
        achieved_cvs=achieved,
        n=len(selection),
        trace=tuple(
            (tuple(to_orig[i] for i in ids), cvs) for ids, cvs in trace_pruned
        ),
        config=config,
        min_pairwise_angle_rad=min_pairwise_angle(graph, sel_pruned.ids()),
        fbs_ids=tuple(to_orig[i] for i in fbs.selection.ids()),
        survivor_ids=to_orig,
        theta_star=fbs.theta_star,
    )


def evaluate_selection(
    selection: SelectionVector,
    dataset: LabeledDataset,
    catalog: FilterCatalog,
    spec: ClassifierSpec,
    k: int,
    seed: int,
    *,
    eval_cache: dict | None = None,
) -> CvReport:
    """Cross-validate a selection: features are the per-replicate responses."""
    ids = selection.ids()
    if not ids:
        raise ValidationError("selection is empty")
    if selection.K != len(catalog):
        raise ValidationError("selection does not index this catalog")
    labels = dataset.labels()
    key = (
        tuple(catalog.source_ids[i] for i in ids),
        spec.fingerprint(),
        k,
        seed,
    )
    if eval_cache is not None and key in eval_cache:
        return eval_cache[key]
    plan = make_folds(labels, k, seed)
    sub = subset_catalog(catalog, ids)
    features = response_matrix(sub, dataset.spectra_matrix())
    report = cross_val_score(features, labels, spec, plan)
    if eval_cache is not None:
        eval_cache[key] = report
    return report


@dataclass(frozen=True)
class SweepCell:
    snr_th: float
    cvs_th: float
    n: int | None
    wco: int | None
    cvs: float | None
    theta_min: float | None
    status: str


def sweep(
    dataset: LabeledDataset,
    catalog: FilterCatalog,
    snr_list,
    cvs_list,
    base_config: CfbsConfig,
) -> list[SweepCell]:
    """CFBS plus evaluation over the threshold grid; errors stay in-grid."""
    snr_list = list(snr_list)
    cvs_list = list(cvs_list)
    if not snr_list or not cvs_list:
        raise ValidationError("threshold lists must be non-empty")
    cells: list[SweepCell] = []
    cache: dict = {}
    for snr_th in snr_list:
        for cvs_th in cvs_list:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")  # grid cells may sit off-envelope
                    config = replace(base_config, snr_th=float(snr_th), cvs_th=float(cvs_th))
                    result = cfbs_select(dataset, catalog, config, eval_cache=cache)
                    report = evaluate_selection(
                        result.selection, dataset, catalog,
                        config.classifier, config.k_folds, config.seed,
                        eval_cache=cache,
                    )
                cells.append(SweepCell(
                    snr_th=float(snr_th),
                    cvs_th=float(cvs_th),
                    n=result.n,
                    wco=report.wco,
                    cvs=result.achieved_cvs,
                    theta_min=result.min_pairwise_angle_rad,
                    status="ok",
                ))
            except Exception as exc:  # recorded per cell, not fatal
                cells.append(SweepCell(
                    snr_th=float(snr_th),
                    cvs_th=float(cvs_th),
                    n=None, wco=None, cvs=None, theta_min=None,
                    status=type(exc).__name__,
                ))
    return cells


def save_sweep_csv(cells: list[SweepCell], path: str | Path) -> None:
    def fmt(v) -> str:
        if v is None:
            return ""
        if isinstance(v, float):
            return str(v) if math.isfinite(v) else ("inf" if v > 0 else "-inf")
        return str(v)

    lines = ["snr_th,cvs_th,n,wco,cvs,theta_min,status"]
    for c in cells:
        lines.append(",".join([
            fmt(c.snr_th), fmt(c.cvs_th), fmt(c.n), fmt(c.wco),
            fmt(c.cvs), fmt(c.theta_min), c.status,
        ]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

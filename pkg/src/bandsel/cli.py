"""Command-line interface: gen / select / evaluate / sweep.

Every command is deterministic given its inputs, flags and seed. Each
output file gets a ``<name>.manifest.json`` sidecar recording the command,
the resolved configuration, SHA-256 hashes of the input files, the seed and
the tool version, so reruns are auditable. The data outputs themselves
contain no timestamps: rerunning with identical inputs reproduces them
byte for byte.

Exit codes: 0 success; 2 usage; 3 input parsing; 4 validation;
5 SNR pruning left too little; 6 full-search combination cap.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import math
import sys
from pathlib import Path

from . import __version__
from . import errors as err
from .cfbs import CfbsConfig, cfbs_select, evaluate_selection, save_sweep_csv, sweep
from .classify import ClassifierSpec
from .dataset import (
    DEFAULT_GRID,
    LabeledDataset,
    SyntheticConfig,
    generate_catalog,
    generate_synthetic,
    load_catalog_json,
    load_dataset_csv,
    save_catalog_json,
    save_dataset_csv,
)
from .selection import (
    SelectionVector,
    build_adjacency,
    fbs_select,
    full_search_select,
    uniform_select,
)
from .spectral import WavelengthGrid, build_filter_matrix, representative_spectra

_EXIT_PARSE = 3
_EXIT_VALIDATION = 4
_EXIT_PRUNING = 5
_EXIT_COMBINATIONS = 6

_PARSE_ERRORS = (err.ParseError, err.GridMismatch, err.NegativeValue,
                 err.DuplicateFilter, FileNotFoundError, json.JSONDecodeError)
_PRUNING_ERRORS = (err.AllBandsPruned, err.NotEnoughSurvivors)


def _sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _write_manifest(command: str, config: dict, inputs: dict[str, str],
                    seed: int, outputs: list[str | Path]) -> None:
    manifest = {
        "command": command,
        "config": {k: _jsonable(v) for k, v in sorted(config.items())},
        "inputs": {name: _sha256(p) for name, p in sorted(inputs.items())},
        "seed": seed,
        "version": __version__,
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    for out in outputs:
        _write_json(manifest, str(out) + ".manifest.json")


def _classifier_from_args(args) -> ClassifierSpec:
    kw = dict(n_trees=args.n_trees, seed=args.seed)
    if args.max_depth is not None:
        kw["max_depth"] = None if args.max_depth == 0 else args.max_depth
    if args.classifier == "rf":
        return ClassifierSpec.random_forest(**kw)
    kw.setdefault("max_depth", 3)
    return ClassifierSpec.gradient_boosting(learning_rate=args.learning_rate, **kw)


def _load_inputs(args) -> tuple[LabeledDataset, "FilterCatalog"]:
    catalog = load_catalog_json(args.catalog)
    dataset = load_dataset_csv(args.data, allow_negative=args.allow_negative,
                               expected_grid=catalog.grid)
    return dataset, catalog


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _selection_doc(method: str, result, catalog, config: dict) -> dict:
    return {
        "method": method,
        "config": {k: _jsonable(v) for k, v in sorted(config.items())},
        "filters": [
            {
                "id": i,
                "center_nm": catalog.filters[i].center_nm,
                "bandwidth_nm": catalog.filters[i].bandwidth_nm,
            }
            for i in result.selection.ids()
        ],
        "n": len(result.selection),
        "min_pairwise_angle_rad": _jsonable(result.min_pairwise_angle),
        "theta_star": _jsonable(result.theta_star),
        "iterations": result.iterations,
    }


def cmd_gen(args) -> int:
    grid = WavelengthGrid(args.grid_start, args.grid_step, args.grid_count)
    config = SyntheticConfig(
        n_classes=args.classes,
        objects_per_class=args.objects_per_class,
        replicates_per_object=args.replicates,
        grid=grid,
        noise_base=args.noise_base,
        noise_slope=args.noise_slope,
        signature_bumps_per_class=args.bumps,
        seed=args.seed,
    )
    dataset = generate_synthetic(config)
    catalog = generate_catalog(grid, args.bandwidths, args.center_step)
    save_dataset_csv(dataset, args.out)
    save_catalog_json(catalog, args.catalog)
    conf = {
        "classes": args.classes, "objects_per_class": args.objects_per_class,
        "replicates": args.replicates, "grid_start": args.grid_start,
        "grid_step": args.grid_step, "grid_count": args.grid_count,
        "noise_base": args.noise_base, "noise_slope": args.noise_slope,
        "bumps": args.bumps, "bandwidths": args.bandwidths,
        "center_step": args.center_step,
    }
    _write_manifest("gen", conf, {}, args.seed, [args.out, args.catalog])
    print(f"gen: {args.classes} classes x {args.objects_per_class} objects x "
          f"{args.replicates} replicates = {len(dataset.samples)} samples; "
          f"K = {len(catalog)} filters -> {args.out}, {args.catalog}")
    return 0


def cmd_select(args) -> int:
    dataset, catalog = _load_inputs(args)
    conf = {
        "method": args.method, "n": args.n, "snr_th": args.snr_th,
        "cvs_th": args.cvs_th, "classifier": args.classifier,
        "k_folds": args.k_folds, "snr_direction": args.snr_direction,
        "combination_cap": args.combination_cap,
    }
    inputs = {"data": args.data, "catalog": args.catalog}

    if args.method == "cfbs":
        config = CfbsConfig(
            snr_th=args.snr_th,
            cvs_th=args.cvs_th,
            n_fbs=args.n,
            classifier=_classifier_from_args(args),
            k_folds=args.k_folds,
            seed=args.seed,
            snr_drop=args.snr_direction,
        )
        result = cfbs_select(dataset, catalog, config)
        doc = result.to_json_dict(catalog)
        summary = (f"cfbs: n = {result.n}, cvs = {result.achieved_cvs:.4f}, "
                   f"theta_min = {result.min_pairwise_angle_rad:.4f} rad")
    else:
        graph = build_adjacency(build_filter_matrix(catalog, representative_spectra(dataset)))
        if args.method == "fbs":
            result = fbs_select(graph, args.n)
        elif args.method == "full":
            result = full_search_select(graph, args.n, args.combination_cap)
        else:
            result = uniform_select(catalog, args.n, graph=graph)
        doc = _selection_doc(args.method, result, catalog, conf)
        angle = result.min_pairwise_angle
        summary = (f"{args.method}: n = {len(result.selection)}, "
                   f"min angle = {angle if angle is None else round(angle, 4)} rad")

    _write_json(doc, args.out)
    _write_manifest("select", conf, inputs, args.seed, [args.out])
    print(summary + f" -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    dataset, catalog = _load_inputs(args)
    sel_doc = json.loads(Path(args.selection).read_text(encoding="utf-8"))
    ids = [f["id"] for f in sel_doc.get("filters", [])]
    if not ids:
        raise err.ValidationError(f"selection file {args.selection} lists no filters")
    selection = SelectionVector(selected=frozenset(ids), K=len(catalog))
    spec = _classifier_from_args(args)
    report = evaluate_selection(selection, dataset, catalog, spec,
                                args.k_folds, args.seed)
    doc = {
        "classifier": args.classifier,
        "k_folds": args.k_folds,
        "seed": args.seed,
        "selection_ids": selection.ids(),
        "fold_accuracies": list(report.fold_accuracies),
        "cvs": report.cvs,
        "wco": report.wco,
        "classes": list(report.classes),
        "confusion": report.confusion.tolist(),
    }
    _write_json(doc, args.out)
    outputs = [args.out]
    if args.confusion_csv:
        lines = ["true\\pred," + ",".join(report.classes)]
        for i, cls in enumerate(report.classes):
            lines.append(cls + "," + ",".join(str(int(v)) for v in report.confusion[i]))
        Path(args.confusion_csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
        outputs.append(args.confusion_csv)
    conf = {"classifier": args.classifier, "k_folds": args.k_folds,
            "selection": str(args.selection)}
    inputs = {"data": args.data, "catalog": args.catalog, "selection": args.selection}
    _write_manifest("evaluate", conf, inputs, args.seed, outputs)
    print(f"evaluate: cvs = {report.cvs:.4f}, wco = {report.wco} -> {args.out}")
    return 0


def cmd_sweep(args) -> int:
    dataset, catalog = _load_inputs(args)
    base = CfbsConfig(
        snr_th=0.0,
        cvs_th=0.95,
        n_fbs=args.n,
        classifier=_classifier_from_args(args),
        k_folds=args.k_folds,
        seed=args.seed,
        snr_drop=args.snr_direction,
    )
    cells = sweep(dataset, catalog, args.snr_th_list, args.cvs_th_list, base)
    save_sweep_csv(cells, args.out)
    conf = {"snr_th": args.snr_th_list, "cvs_th": args.cvs_th_list, "n": args.n,
            "classifier": args.classifier, "k_folds": args.k_folds,
            "snr_direction": args.snr_direction}
    inputs = {"data": args.data, "catalog": args.catalog}
    _write_manifest("sweep", conf, inputs, args.seed, [args.out])
    ok = sum(c.status == "ok" for c in cells)
    print(f"sweep: {len(cells)} cells ({ok} ok) -> {args.out}")
    return 0


def _add_classifier_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--classifier", choices=("rf", "gb"), default="rf",
                   help="random forest or gradient boosting (default rf)")
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=None,
                   help="tree depth limit; 0 means unlimited")
    p.add_argument("--learning-rate", type=float, default=0.1,
                   help="gradient boosting shrinkage")
    p.add_argument("--k-folds", type=int, default=5)


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--catalog", required=True, help="filter catalog JSON")
    p.add_argument("--allow-negative", action="store_true",
                   help="accept negative spectral values on load")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bandsel",
        description="Noise-aware minimal bandpass-filter selection for "
                    "multispectral classification.",
        epilog="BANDSEL_THREADS caps internal parallelism; results do not "
               "depend on it.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset and catalog")
    g.add_argument("--out", required=True, help="dataset CSV to write")
    g.add_argument("--catalog", required=True, help="catalog JSON to write")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--classes", type=int, default=5)
    g.add_argument("--objects-per-class", type=int, default=10)
    g.add_argument("--replicates", type=int, default=100)
    g.add_argument("--grid-start", type=float, default=DEFAULT_GRID.start_nm)
    g.add_argument("--grid-step", type=float, default=DEFAULT_GRID.step_nm)
    g.add_argument("--grid-count", type=int, default=DEFAULT_GRID.count)
    g.add_argument("--noise-base", type=float, default=0.04)
    g.add_argument("--noise-slope", type=float, default=0.30)
    g.add_argument("--bumps", type=int, default=4)
    g.add_argument("--bandwidths", type=_float_list, default=[10.0, 50.0],
                   help="comma-separated bandwidths in nm")
    g.add_argument("--center-step", type=float, default=5.0)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("select", help="select filters (fbs | cfbs | uniform | full)")
    _add_data_flags(s)
    s.add_argument("--method", choices=("fbs", "cfbs", "uniform", "full"),
                   default="fbs")
    s.add_argument("--n", type=int, default=9,
                   help="filters to select (FBS pool size for cfbs)")
    s.add_argument("--snr-th", type=float, default=0.0)
    s.add_argument("--cvs-th", type=float, default=0.95)
    s.add_argument("--snr-direction", choices=("below", "above"), default="below",
                   help="which side of snr-th gets pruned (cfbs)")
    s.add_argument("--combination-cap", type=int, default=10_000_000)
    s.add_argument("--seed", type=int, default=0)
    _add_classifier_flags(s)
    s.add_argument("--out", required=True, help="selection JSON to write")
    s.set_defaults(func=cmd_select)

    e = sub.add_parser("evaluate", help="cross-validate a saved selection")
    _add_data_flags(e)
    e.add_argument("--selection", required=True, help="selection JSON")
    e.add_argument("--seed", type=int, default=0)
    _add_classifier_flags(e)
    e.add_argument("--out", required=True, help="report JSON to write")
    e.add_argument("--confusion-csv", default=None,
                   help="also write the summed confusion matrix as CSV")
    e.set_defaults(func=cmd_evaluate)

    w = sub.add_parser("sweep", help="CFBS over an SNR x cvs threshold grid")
    _add_data_flags(w)
    w.add_argument("--snr-th", dest="snr_th_list", type=_float_list,
                   default=[0.0, 5.0, 10.0, 15.0, 20.0, 30.0, 50.0])
    w.add_argument("--cvs-th", dest="cvs_th_list", type=_float_list,
                   default=[0.90, 0.92, 0.95, 0.98])
    w.add_argument("--n", type=int, default=9)
    w.add_argument("--snr-direction", choices=("below", "above"), default="below")
    w.add_argument("--seed", type=int, default=0)
    _add_classifier_flags(w)
    w.add_argument("--out", required=True, help="sweep CSV to write")
    w.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _PRUNING_ERRORS as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return _EXIT_PRUNING
    except err.TooManyCombinations as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return _EXIT_COMBINATIONS
    except _PARSE_ERRORS as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return _EXIT_PARSE
    except err.BandselError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return _EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

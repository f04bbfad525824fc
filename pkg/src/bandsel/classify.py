"""From-scratch tree ensembles and k-fold cross-validation.

Random forest: bootstrap-sampled Gini CART trees, a fresh random feature
subset at every node, majority vote with lexicographic class tie-break.
Gradient boosting: per-class softmax boosting with depth-limited regression
trees on the residuals and shrinkage.

Everything is deterministic given the spec seed: tree t draws from a
dedicated stream derived from (seed, t), so fitting trees in parallel
yields bit-identical ensembles. Normalization parameters are fitted inside
``fit`` on exactly the rows it sees, which keeps fold evaluation free of
training/test leakage.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _tree
from ._threads import thread_budget
from .errors import (
    EmptyFeatures,
    FeatureCountMismatch,
    SingleClass,
    TooFewSamplesPerClass,
    ValidationError,
)
from .spectral import NormalizationParams, apply_normalization, fit_normalization

RANDOM_FOREST = "random_forest"
GRADIENT_BOOSTING = "gradient_boosting"


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    learning_rate: float = 0.1
    features_per_split: str = "sqrt"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (RANDOM_FOREST, GRADIENT_BOOSTING):
            raise ValidationError(f"unknown classifier kind {self.kind!r}")
        if self.n_trees < 1:
            raise ValidationError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValidationError("max_depth must be >= 1 or None")
        if self.min_samples_split < 2:
            raise ValidationError("min_samples_split must be >= 2")
        if self.kind == GRADIENT_BOOSTING and not 0.0 < self.learning_rate <= 1.0:
            raise ValidationError("learning_rate must be in (0, 1]")
        if self.features_per_split not in ("sqrt", "all"):
            raise ValidationError("features_per_split must be 'sqrt' or 'all'")
        if self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")

    @classmethod
    def random_forest(cls, **kw) -> "ClassifierSpec":
        return cls(kind=RANDOM_FOREST, **kw)

    @classmethod
    def gradient_boosting(cls, **kw) -> "ClassifierSpec":
        kw.setdefault("max_depth", 3)
        kw.setdefault("features_per_split", "all")
        return cls(kind=GRADIENT_BOOSTING, **kw)

    def fingerprint(self) -> tuple:
        return (self.kind, self.n_trees, self.max_depth, self.min_samples_split,
                self.learning_rate, self.features_per_split, self.seed)


@dataclass
class TrainedModel:
    kind: str
    classes: tuple[str, ...]
    n_features: int
    normalization: NormalizationParams
    trees: list
    gb_init: np.ndarray | None = None
    learning_rate: float = 0.1


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray  # sample index -> fold index

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


@dataclass(frozen=True)
class CvReport:
    fold_accuracies: tuple[float, ...]
    cvs: float
    confusion: np.ndarray  # true class x predicted class, summed over folds
    wco: int
    classes: tuple[str, ...] = field(default=())


def _prepare(features, labels):
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise EmptyFeatures("features must be a non-empty 2-D matrix")
    labels = list(labels)
    if len(labels) != X.shape[0]:
        raise ValidationError("labels length must match feature rows")
    classes = tuple(sorted(set(labels)))
    if len(classes) < 2:
        raise SingleClass(f"training data has a single class {classes[0]!r}")
    index = {c: i for i, c in enumerate(classes)}
    codes = np.array([index[l] for l in labels], dtype=np.int64)
    return X, codes, classes


def _m_try(d: int, features_per_split: str) -> int:
    return d if features_per_split == "all" else max(1, math.isqrt(d))


def _presort(Xn: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.argsort(Xn, axis=0, kind="stable").T.astype(np.int32))


def _map_trees(fn, args_list):
    budget = thread_budget()
    if budget <= 1 or len(args_list) <= 1:
        return [fn(*a) for a in args_list]
    with ThreadPoolExecutor(max_workers=budget) as pool:
        return list(pool.map(lambda a: fn(*a), args_list))


def fit(spec: ClassifierSpec, features, labels) -> TrainedModel:
    """Fit normalization plus the requested ensemble on these rows only."""
    X, codes, classes = _prepare(features, labels)
    params = fit_normalization(X)
    Xn = np.asfortranarray(apply_normalization(params, X))
    n, d = Xn.shape
    order = _presort(Xn)
    depth = spec.max_depth if spec.max_depth is not None else _tree.UNLIMITED_DEPTH
    m_try = _m_try(d, spec.features_per_split)

    if spec.kind == RANDOM_FOREST:
        args = []
        for t in range(spec.n_trees):
            rng = np.random.default_rng((spec.seed, t))
            boot = rng.integers(0, n, n)
            counts = np.bincount(boot, minlength=n)
            offsets = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(counts, out=offsets[1:])
            inst2samp = np.repeat(np.arange(n, dtype=np.int32), counts)
            y_inst = np.repeat(codes, counts)
            feat_seed = np.uint64(rng.integers(0, 2**63))
            args.append((Xn, y_inst, inst2samp, order, offsets,
                         len(classes), depth, spec.min_samples_split, m_try, feat_seed))
        trees = _map_trees(_tree.grow_classification_tree, args)
        return TrainedModel(RANDOM_FOREST, classes, d, params, trees)

    # gradient boosting: one regression tree per class per round
    n_classes = len(classes)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), codes] = 1.0
    priors = np.bincount(codes, minlength=n_classes) / n
    gb_init = np.log(priors)
    raw = np.tile(gb_init, (n, 1))
    offsets = np.arange(n + 1, dtype=np.int64)
    factor = (n_classes - 1) / n_classes
    trees = []
    pred = np.empty(n)
    for m in range(spec.n_trees):
        shifted = raw - raw.max(axis=1, keepdims=True)
        expd = np.exp(shifted)
        prob = expd / expd.sum(axis=1, keepdims=True)
        args = []
        for c in range(n_classes):
            g = onehot[:, c] - prob[:, c]
            h = prob[:, c] * (1.0 - prob[:, c])
            feat_seed = np.uint64(
                np.random.default_rng((spec.seed, m, c)).integers(0, 2**63)
            )
            args.append((Xn, g, h, order, offsets,
                         depth, spec.min_samples_split, m_try, feat_seed, factor))
        round_trees = _map_trees(_tree.grow_regression_tree, args)
        for c, tree in enumerate(round_trees):
            _tree.predict_leaf_values(*tree, Xn, pred)
            raw[:, c] += spec.learning_rate * pred
        trees.append(round_trees)
    return TrainedModel(GRADIENT_BOOSTING, classes, d, params, trees,
                        gb_init=gb_init, learning_rate=spec.learning_rate)


def predict(model: TrainedModel, features) -> list[str]:
    """Predict one class label per feature row."""
    X = np.asarray(features, dtype=float)
    if X.ndim != 2:
        raise ValidationError("features must be 2-D")
    if X.shape[1] != model.n_features:
        raise FeatureCountMismatch(
            f"model expects {model.n_features} features, got {X.shape[1]}"
        )
    Xn = np.ascontiguousarray(apply_normalization(model.normalization, X))
    n = Xn.shape[0]
    n_classes = len(model.classes)

    if model.kind == RANDOM_FOREST:
        votes = np.zeros((n, n_classes), dtype=np.int64)
        out = np.empty(n, dtype=np.int64)
        rows = np.arange(n)
        for tree in model.trees:
            _tree.predict_class_codes(*tree, Xn, out)
            votes[rows, out] += 1
        codes = votes.argmax(axis=1)  # ties: lowest code = lexicographic
    else:
        raw = np.tile(model.gb_init, (n, 1))
        pred = np.empty(n)
        for round_trees in model.trees:
            for c, tree in enumerate(round_trees):
                _tree.predict_leaf_values(*tree, Xn, pred)
                raw[:, c] += model.learning_rate * pred
        codes = raw.argmax(axis=1)
    return [model.classes[c] for c in codes]


def make_folds(labels, k: int, seed: int) -> FoldPlan:
    """Stratified fold assignment: per-class seeded shuffle, then round-robin."""
    labels = list(labels)
    if k < 2:
        raise ValidationError("k must be >= 2")
    arr = np.array(labels, dtype=object)
    assignments = np.full(len(labels), -1, dtype=np.int64)
    rng = np.random.default_rng(seed)
    for cls in sorted(set(labels)):
        idx = np.flatnonzero(arr == cls)
        if idx.size < k:
            raise TooFewSamplesPerClass(
                f"class {cls!r} has {idx.size} samples but k = {k}"
            )
        perm = rng.permutation(idx)
        assignments[perm] = np.arange(perm.size) % k
    return FoldPlan(k=k, assignments=assignments)


def cross_val_score(features, labels, spec: ClassifierSpec, plan: FoldPlan) -> CvReport:
    """Per-fold fit and evaluation; the score is the mean fold accuracy."""
    X = np.asarray(features, dtype=float)
    labels = list(labels)
    if plan.assignments.size != len(labels):
        raise ValidationError("fold plan does not match the label count")
    classes = tuple(sorted(set(labels)))
    index = {c: i for i, c in enumerate(classes)}
    arr = np.array(labels, dtype=object)
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    accs = []
    for fold in range(plan.k):
        train = plan.train_indices(fold)
        test = plan.test_indices(fold)
        model = fit(spec, X[train], arr[train].tolist())
        preds = predict(model, X[test])
        truth = arr[test].tolist()
        hits = 0
        for t, p in zip(truth, preds):
            confusion[index[t], index[p]] += 1
            hits += t == p
        accs.append(hits / test.size)
    cvs = float(sum(accs) / plan.k)
    wco = int(confusion.sum() - np.trace(confusion))
    return CvReport(
        fold_accuracies=tuple(accs),
        cvs=cvs,
        confusion=confusion,
        wco=wco,
        classes=classes,
    )

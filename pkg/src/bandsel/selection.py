"""Max-min spectral-angle filter selection.

The selection problem: pick N of K filters maximizing the minimal pairwise
spectral angle between their response rows. Feasibility at a tested angle
threshold is a maximum-independent-set question on the conflict graph whose
edges join filter pairs closer than the threshold. Because the objective is
a step function with breakpoints only at the observed pairwise angles, the
search bisects the sorted unique angle values and terminates exactly.

The independent-set solver is exact: branch and bound on the complement
graph (max clique) with a greedy-coloring upper bound, followed by a
lexicographic reconstruction pass so ties always resolve to the smallest
id set. Vertex sets are Python ints used as bitmasks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidN, TooManyCombinations, ValidationError, ZeroVector
from .spectral import FilterCatalog, FilterMatrix

DEFAULT_COMBINATION_CAP = 10_000_000


# --- spectral angle ------------------------------------------------------------

def spectral_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle in [0, pi] between two response vectors, scale invariant.

    Uses the numerically stable 2*atan2 form, which stays accurate near 0
    and pi where the arccos of a normalized dot product loses all precision.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValidationError("vectors must be 1-D and the same length")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("spectral angle is undefined for a zero vector")
    uh = u / nu
    vh = v / nv
    return float(2.0 * np.arctan2(np.linalg.norm(uh - vh), np.linalg.norm(uh + vh)))


@dataclass(frozen=True)
class AngleGraph:
    """Symmetric K-by-K matrix of pairwise spectral angles (radians)."""

    angles: np.ndarray
    K: int

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != self.K:
            raise ValidationError("angles must be a K-by-K matrix")
        if not np.array_equal(a, a.T):
            raise ValidationError("angles must be exactly symmetric")
        off = a[~np.eye(self.K, dtype=bool)]
        if off.size and (off.min() < -1e-12 or off.max() > math.pi + 1e-12):
            raise ValidationError("angles must lie in [0, pi]")
        object.__setattr__(self, "angles", a)

    def edge_weights(self) -> np.ndarray:
        """Sorted unique off-diagonal angle values."""
        iu = np.triu_indices(self.K, k=1)
        return np.unique(self.angles[iu])


def build_adjacency(matrix: FilterMatrix) -> AngleGraph:
    """Pairwise spectral angles between all filter response rows."""
    rows = matrix.entries
    norms = np.linalg.norm(rows, axis=1)
    unit = rows / norms[:, None]
    k = rows.shape[0]
    angles = np.zeros((k, k))
    for i in range(k):
        d = np.linalg.norm(unit[i] - unit[i + 1:], axis=1)
        s = np.linalg.norm(unit[i] + unit[i + 1:], axis=1)
        angles[i, i + 1:] = 2.0 * np.arctan2(d, s)
    angles = angles + angles.T
    return AngleGraph(angles=angles, K=k)


@dataclass(frozen=True)
class SelectionVector:
    """A subset of filter ids out of K candidates."""

    selected: frozenset[int]
    K: int

    def __post_init__(self):
        sel = frozenset(int(i) for i in self.selected)
        if any(i < 0 or i >= self.K for i in sel):
            raise ValidationError(f"selected ids must lie in [0, {self.K})")
        object.__setattr__(self, "selected", sel)

    def ids(self) -> list[int]:
        return sorted(self.selected)

    def __len__(self) -> int:
        return len(self.selected)


@dataclass
class BinarySearchState:
    """Bounds of the discrete bisection over the sorted angle values."""

    theta_min: float
    theta_max: float
    theta_curr: float
    candidate_weights: np.ndarray


@dataclass(frozen=True)
class SelectionResult:
    selection: SelectionVector
    min_pairwise_angle: float | None
    method: str
    iterations: int
    theta_star: float | None = None


def min_pairwise_angle(graph: AngleGraph, ids) -> float:
    """Smallest angle over all pairs in ``ids``; +inf for fewer than 2."""
    ids = sorted(ids)
    if len(ids) < 2:
        return math.inf
    sub = graph.angles[np.ix_(ids, ids)]
    return float(sub[np.triu_indices(len(ids), k=1)].min())


# --- exact maximum independent set ----------------------------------------------

def _conflict_masks(graph: AngleGraph, theta: float) -> list[int]:
    """Bitmask adjacency of the conflict graph: edge iff angle < theta."""
    conflict = graph.angles < theta
    np.fill_diagonal(conflict, False)
    masks = []
    for i in range(graph.K):
        m = 0
        for j in np.flatnonzero(conflict[i]):
            m |= 1 << int(j)
        masks.append(m)
    return masks


def _complement_masks(conflict: list[int]) -> list[int]:
    k = len(conflict)
    full = (1 << k) - 1
    return [(~conflict[i]) & full & ~(1 << i) for i in range(k)]


def _color_sort(adj: list[int], cand: int) -> tuple[list[int], list[int]]:
    """Greedy coloring of the candidate set; returns vertices with bounds."""
    order: list[int] = []
    bounds: list[int] = []
    uncolored = cand
    color = 0
    while uncolored:
        color += 1
        q = uncolored
        while q:
            v = (q & -q).bit_length() - 1
            bit = 1 << v
            uncolored &= ~bit
            q &= ~bit & ~adj[v]
            order.append(v)
            bounds.append(color)
    return order, bounds


def _max_clique_size(adj: list[int], cand: int) -> int:
    best = 0

    def expand(size: int, cand: int) -> None:
        nonlocal best
        if cand == 0:
            if size > best:
                best = size
            return
        order, bounds = _color_sort(adj, cand)
        for i in range(len(order) - 1, -1, -1):
            if size + bounds[i] <= best:
                return
            v = order[i]
            expand(size + 1, cand & adj[v])
            cand &= ~(1 << v)

    expand(0, cand)
    return best


def _clique_feasible(adj: list[int], cand: int, target: int) -> bool:
    """True iff a clique of at least ``target`` vertices exists in ``cand``."""
    if target <= 0:
        return True
    found = False

    def expand(size: int, cand: int) -> None:
        nonlocal found
        if found:
            return
        if size >= target:
            found = True
            return
        if cand == 0:
            return
        order, bounds = _color_sort(adj, cand)
        for i in range(len(order) - 1, -1, -1):
            if found or size + bounds[i] < target:
                return
            v = order[i]
            expand(size + 1, cand & adj[v])
            cand &= ~(1 << v)

    expand(0, cand)
    return found


def max_independent_set(graph: AngleGraph, theta: float) -> SelectionVector:
    """Exact maximum independent set of the conflict graph at ``theta``.

    Among all optimal sets, returns the lexicographically smallest id set
    (found by fixing ids in ascending order against a feasibility check).
    """
    if not math.isfinite(theta):
        raise ValidationError("theta must be finite")
    comp = _complement_masks(_conflict_masks(graph, theta))
    full = (1 << graph.K) - 1
    size = _max_clique_size(comp, full)
    chosen: list[int] = []
    cand = full
    need = size
    for v in range(graph.K):
        if need == 0:
            break
        bit = 1 << v
        if not cand & bit:
            continue
        if _clique_feasible(comp, cand & comp[v], need - 1):
            chosen.append(v)
            cand &= comp[v]
            need -= 1
        else:
            cand &= ~bit
    return SelectionVector(selected=frozenset(chosen), K=graph.K)


def independent_set_feasible(graph: AngleGraph, theta: float, n: int) -> bool:
    """True iff some ``n`` filters are pairwise at angle >= ``theta``."""
    comp = _complement_masks(_conflict_masks(graph, theta))
    return _clique_feasible(comp, (1 << graph.K) - 1, n)


# --- selection methods ------------------------------------------------------------

def trim_to_n(sel: SelectionVector, graph: AngleGraph, n: int) -> SelectionVector:
    """Shrink a selection to exactly ``n`` by dropping the most crowded member.

    Each round removes the member whose minimum angle to the remaining
    members is smallest (ties: the larger id goes). The minimum pairwise
    angle of the survivors never decreases.
    """
    ids = sel.ids()
    if len(ids) < n:
        raise InvalidN(f"cannot trim {len(ids)} filters up to {n}")
    while len(ids) > n:
        worst = None
        worst_angle = None
        for x in ids:
            m = min(graph.angles[x, y] for y in ids if y != x)
            if worst is None or m < worst_angle or (m == worst_angle and x > worst):
                worst = x
                worst_angle = m
        ids.remove(worst)
    return SelectionVector(selected=frozenset(ids), K=sel.K)


def fbs_select(graph: AngleGraph, n: int) -> SelectionResult:
    """Max-min angle selection by bisecting the discrete angle values.

    Finds the largest observed angle value ``theta*`` at which an
    independent set of at least ``n`` filters exists in the conflict graph,
    takes the exact maximum independent set there and trims it to ``n``.
    """
    if n < 1 or n > graph.K:
        raise InvalidN(f"n must be in [1, {graph.K}], got {n}")
    weights = graph.edge_weights()
    if weights.size == 0:
        # single filter: nothing to bisect
        sel = SelectionVector(selected=frozenset(range(n)), K=graph.K)
        return SelectionResult(sel, math.inf, "fbs", 0, theta_star=math.inf)

    probes = 0

    def feasible(i: int) -> bool:
        nonlocal probes
        probes += 1
        return independent_set_feasible(graph, float(weights[i]), n)

    state = BinarySearchState(
        theta_min=float(weights[0]),
        theta_max=float(weights[-1]),
        theta_curr=float(weights[0]),
        candidate_weights=weights,
    )
    lo, hi = 0, weights.size - 1
    if feasible(hi):
        lo = hi
    else:
        # invariant: feasible at lo (no pair is below the smallest angle),
        # infeasible at hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            state.theta_curr = float(weights[mid])
            if feasible(mid):
                lo = mid
                state.theta_min = state.theta_curr
            else:
                hi = mid
                state.theta_max = state.theta_curr
    theta_star = float(weights[lo])

    mis = max_independent_set(graph, theta_star)
    sel = trim_to_n(mis, graph, n)
    return SelectionResult(
        selection=sel,
        min_pairwise_angle=min_pairwise_angle(graph, sel.ids()),
        method="fbs",
        iterations=probes,
        theta_star=theta_star,
    )


def full_search_select(
    graph: AngleGraph, n: int, combination_cap: int = DEFAULT_COMBINATION_CAP
) -> SelectionResult:
    """Exhaustive max-min selection over all n-subsets (lexicographic ties)."""
    if n < 1 or n > graph.K:
        raise InvalidN(f"n must be in [1, {graph.K}], got {n}")
    total = math.comb(graph.K, n)
    if total > combination_cap:
        raise TooManyCombinations(
            f"C({graph.K}, {n}) = {total} exceeds the cap of {combination_cap}"
        )
    angles = graph.angles
    best_ids = None
    best_angle = -math.inf
    count = 0
    for combo in itertools.combinations(range(graph.K), n):
        count += 1
        m = math.inf
        for a, b in itertools.combinations(combo, 2):
            w = angles[a, b]
            if w < m:
                m = w
                if m <= best_angle:
                    break
        if m > best_angle:
            best_angle = m
            best_ids = combo
    sel = SelectionVector(selected=frozenset(best_ids), K=graph.K)
    return SelectionResult(
        selection=sel,
        min_pairwise_angle=min_pairwise_angle(graph, sel.ids()),
        method="full",
        iterations=count,
        theta_star=None,
    )


def uniform_select(
    catalog: FilterCatalog, n: int, *, graph: AngleGraph | None = None
) -> SelectionResult:
    """Evenly spaced filters from the widest-bandwidth family.

    Targets are ``n`` equally spaced centers between the lowest and highest
    feasible centers of the widest family (the midpoint for ``n = 1``); each
    target takes the nearest not-yet-chosen filter, ties to the lower center.
    """
    if n < 1:
        raise InvalidN("n must be >= 1")
    widest = max(f.bandwidth_nm for f in catalog.filters)
    family = sorted(
        (f for f in catalog.filters if f.bandwidth_nm == widest),
        key=lambda f: (f.center_nm, f.id),
    )
    if n > len(family):
        raise InvalidN(
            f"n = {n} exceeds the {len(family)} filters of the widest family ({widest} nm)"
        )
    lo = family[0].center_nm
    hi = family[-1].center_nm
    targets = [0.5 * (lo + hi)] if n == 1 else list(np.linspace(lo, hi, n))
    chosen: list[int] = []
    used = set()
    for t in targets:
        pick = min(
            (f for f in family if f.id not in used),
            key=lambda f: (abs(f.center_nm - t), f.center_nm),
        )
        used.add(pick.id)
        chosen.append(pick.id)
    sel = SelectionVector(selected=frozenset(chosen), K=len(catalog))
    angle = min_pairwise_angle(graph, chosen) if graph is not None else None
    return SelectionResult(
        selection=sel,
        min_pairwise_angle=angle,
        method="uniform",
        iterations=0,
        theta_star=None,
    )

"""Selecting N of K filters: exhaustive search, binary search, uniform spacing.

The max-min objective: keep the N filters whose closest pair is as far
apart (in spectral angle) as possible. Full search enumerates every
N-subset. The binary search bisects the sorted distinct angle values,
asking at each value whether N mutually-compatible filters exist (an
exact maximum-independent-set query), and provably lands on the same
optimum at a fraction of the cost.
"""

import math
import time

from bandsel import (
    SyntheticConfig,
    WavelengthGrid,
    build_adjacency,
    build_filter_matrix,
    fbs_select,
    full_search_select,
    generate_catalog,
    generate_synthetic,
    representative_spectra,
    uniform_select,
)

config = SyntheticConfig(
    n_classes=4, objects_per_class=4, replicates_per_object=10,
    grid=WavelengthGrid(316.0, 5.0, 96), seed=3,
)
dataset = generate_synthetic(config)
catalog = generate_catalog(dataset.grid, [10.0, 50.0], 25.0)
graph = build_adjacency(build_filter_matrix(catalog, representative_spectra(dataset)))
K, N = len(catalog), 5
print(f"pool: K = {K} filters; selecting N = {N}")
print(f"full search must score C({K},{N}) = {math.comb(K, N):,} subsets\n")

t0 = time.perf_counter()
full = full_search_select(graph, N)
t_full = time.perf_counter() - t0

t0 = time.perf_counter()
fbs = fbs_select(graph, N)
t_fbs = time.perf_counter() - t0

uni = uniform_select(catalog, N, graph=graph)

for name, res, dt in (
    ("full search", full, t_full),
    ("binary search", fbs, t_fbs),
    ("uniform", uni, None),
):
    centers = [catalog.filters[i].center_nm for i in res.selection.ids()]
    timing = f", {dt*1e3:8.1f} ms, {res.iterations} evaluations" if dt else ""
    print(f"{name:14s}: min angle = {res.min_pairwise_angle:.4f} rad, "
          f"centers = {centers}{timing}")

assert fbs.min_pairwise_angle == full.min_pairwise_angle
print("\nbinary search reproduces the full-search optimum exactly;")
print("uniform spacing covers the range but ignores what the filters see.")

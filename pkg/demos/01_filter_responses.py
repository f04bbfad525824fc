"""Filter curves and integrated responses.

A bandpass filter integrates a spectrum over its passband; dividing by the
bandwidth gives the mean in-band value, so wide and narrow filters become
comparable. The spectral angle between two filters' response rows measures
how redundant the filters are for a given set of objects.
"""

import numpy as np

from bandsel import (
    FilterCatalog,
    FilterCurve,
    Spectrum,
    WavelengthGrid,
    bandwidth_normalized_response,
    build_filter_matrix,
    filter_response,
    spectral_angle,
)

grid = WavelengthGrid(start_nm=400.0, step_nm=1.0, count=100)
wl = grid.wavelengths()

# two toy "materials": a broad reflectance hump and a red-edge style ramp
hump = Spectrum(1.0 + np.exp(-0.5 * ((wl - 430.0) / 15.0) ** 2))
ramp = Spectrum(0.5 + 1.5 / (1.0 + np.exp(-(wl - 460.0) / 6.0)))

narrow = FilterCurve(center_nm=430.0, bandwidth_nm=10.0, id=0)
wide = FilterCurve(center_nm=460.0, bandwidth_nm=50.0, id=1)

print("raw passband integrals (scale with bandwidth):")
for name, f in (("narrow@430", narrow), ("wide@460", wide)):
    print(f"  {name}: hump={filter_response(f, hump, grid):7.2f}   "
          f"ramp={filter_response(f, ramp, grid):7.2f}")

print("bandwidth-normalized responses (mean in-band value):")
for name, f in (("narrow@430", narrow), ("wide@460", wide)):
    print(f"  {name}: hump={bandwidth_normalized_response(f, hump, grid):7.3f}   "
          f"ramp={bandwidth_normalized_response(f, ramp, grid):7.3f}")

# the filter matrix stacks one response row per filter, one column per object
catalog = FilterCatalog(
    tuple(FilterCurve(c, 10.0, i) for i, c in enumerate((410.0, 430.0, 450.0, 470.0))),
    grid,
)
matrix = build_filter_matrix(catalog, [hump, ramp])
print("\nfilter matrix (rows = filters at 410/430/450/470 nm):")
print(np.array_str(matrix.entries, precision=3))

print("\npairwise spectral angles (rad) between filter rows:")
for i in range(4):
    for j in range(i + 1, 4):
        a = spectral_angle(matrix.entries[i], matrix.entries[j])
        print(f"  filters {i}-{j}: {a:.4f}")
print("neighbouring filters see nearly the same mixture -> tiny angles;")
print("filters straddling the ramp edge respond differently -> large angles.")

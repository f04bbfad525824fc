import numpy as np
import pytest

from bandsel import (
    ClassifierSpec,
    LabeledDataset,
    SampleRecord,
    Spectrum,
    SyntheticConfig,
    WavelengthGrid,
    generate_catalog,
    generate_synthetic,
)


@pytest.fixture
def tiny_grid():
    return WavelengthGrid(start_nm=400.0, step_nm=1.0, count=10)


def make_dataset(grid, groups):
    """groups: list of (object_id, class_label, [spectrum arrays])."""
    samples = []
    for oid, label, spectra in groups:
        for values in spectra:
            samples.append(SampleRecord(oid, label, Spectrum(np.asarray(values, float))))
    return LabeledDataset(grid=grid, samples=tuple(samples))


@pytest.fixture(scope="session")
def default_dataset():
    """The full-size synthetic default: 5 classes x 10 objects x 100 replicates."""
    return generate_synthetic(SyntheticConfig())


@pytest.fixture(scope="session")
def default_catalog(default_dataset):
    return generate_catalog(default_dataset.grid)


@pytest.fixture(scope="session")
def lownoise_dataset():
    """Small separable dataset: low flat noise, classes easy to tell apart."""
    config = SyntheticConfig(
        n_classes=5,
        objects_per_class=4,
        replicates_per_object=20,
        grid=WavelengthGrid(316.0, 5.0, 96),
        noise_base=0.004,
        noise_slope=0.0,
        seed=11,
    )
    return generate_synthetic(config)


@pytest.fixture(scope="session")
def lownoise_catalog(lownoise_dataset):
    return generate_catalog(lownoise_dataset.grid, [10.0, 50.0], 25.0)


@pytest.fixture
def small_rf():
    return ClassifierSpec.random_forest(n_trees=15, seed=5)

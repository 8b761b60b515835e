"""Shared fixtures: the ramp / anti-ramp toy dataset and random series generators."""
import numpy as np
import pytest

from src.config import PipelineConfig
from src.ingest.ucr import Dataset, TimeSeriesSample, write_ucr

TOY_LENGTH = 20
TOY_PER_CLASS = 10


def ramp_dataset(per_class: int = TOY_PER_CLASS, length: int = TOY_LENGTH, name: str = "toy") -> Dataset:
    """Class "A": ascending unit-slope ramps, class "B": descending ones, offsets vary."""
    samples = []
    steps = np.arange(length, dtype=np.float64)
    for i in range(per_class):
        offset = 0.5 * i
        samples.append(TimeSeriesSample(2 * i, offset + steps, "A"))
        samples.append(TimeSeriesSample(2 * i + 1, offset - steps, "B"))
    return Dataset(name, samples)


def random_series(rng: np.random.Generator, length: int) -> np.ndarray:
    """Noise, trend, random walk or a sine, picked at random."""
    t = np.arange(length, dtype=np.float64)
    kind = rng.integers(4)
    if kind == 0:
        return rng.normal(0.0, 1.0, length)
    if kind == 1:
        return rng.normal(0.0, 0.3, length) + rng.uniform(-0.2, 0.2) * t
    if kind == 2:
        return np.cumsum(rng.normal(0.0, 0.5, length))
    return np.sin(t * rng.uniform(0.05, 0.5)) * rng.uniform(0.5, 3.0) + rng.normal(0.0, 0.1, length)


@pytest.fixture
def toy_dataset() -> Dataset:
    return ramp_dataset()


@pytest.fixture
def toy_file(tmp_path, toy_dataset) -> str:
    path = tmp_path / "toy.tsv"
    write_ucr(toy_dataset, str(path))
    return str(path)


@pytest.fixture
def toy_config(tmp_path) -> PipelineConfig:
    return PipelineConfig(rt=0.1, ctype="sorting_based", ct=0.1, wsize=1, wstep=1, tsize=0.2, seed=7,
                          output_dir=str(tmp_path / "results"))


@pytest.fixture(scope="session")
def random_samples():
    """200 series of length 10..500 with mixed noise and trend."""
    rng = np.random.Generator(np.random.PCG64(2024))
    return [TimeSeriesSample(i, random_series(rng, int(rng.integers(10, 501)))) for i in range(200)]

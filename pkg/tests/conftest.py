import numpy as np
import pytest

from restriction_lab import LabConfig, RestrictionLab, WeightedSamples


@pytest.fixture
def lab(monkeypatch, tmp_path):
    monkeypatch.delenv("RESTRICTION_LAB_SEED", raising=False)
    monkeypatch.delenv("RESTRICTION_LAB_WORKERS", raising=False)
    return RestrictionLab(config=LabConfig(seed=0, workers=1, out_dir=str(tmp_path)))


def random_samples(seed, size=24):
    rng = np.random.default_rng(seed)
    values = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return WeightedSamples(values, rng.uniform(0.1, 2.0, size))

import pytest

from services.opcalc import sample_points
from services.params import TwoBodyParams


@pytest.fixture
def params():
    return TwoBodyParams.equal_mass(1.0)


@pytest.fixture
def unequal_params():
    return TwoBodyParams.unequal_mass(1.0, 2.0)


@pytest.fixture
def points(params):
    return sample_points(params, 6, 0x5EED)


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    for name in ('SEED', 'POINTS', 'TOL', 'ARCHIVE_URL', 'CSV_DIR'):
        monkeypatch.delenv(f'TWOBODY_{name}', raising=False)

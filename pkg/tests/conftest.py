import os

import pytest
from hypothesis import HealthCheck, settings

from roadtwin.osm_ingest import build_graph, parse_osm_extract

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "..", "fixtures", "minicity")
FIXTURE_DIR = os.path.abspath(FIXTURE_DIR)
MINICITY_CENTER = (40.45, -3.69)


@pytest.fixture(scope="session")
def minicity_dir():
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def minicity_raw():
    return parse_osm_extract(os.path.join(FIXTURE_DIR, "minicity.osm"))


@pytest.fixture(scope="session")
def minicity_graph(minicity_raw):
    return build_graph(minicity_raw, center=MINICITY_CENTER, radius_m=2000.0)

import pytest

from app import QilineApp
from models.verdicts import SampleGrid


@pytest.fixture
def app(tmp_path):
    """An application whose config file does not exist yet, so every setting is a default."""
    return QilineApp(str(tmp_path / "config.json"))


@pytest.fixture
def homeo(app):
    return app.homeo_controller


@pytest.fixture
def metrics(app):
    return app.metrics_controller


@pytest.fixture
def generators(app):
    return app.generator_controller


@pytest.fixture
def ordering(app):
    return app.ordering_controller


@pytest.fixture
def actions(app):
    return app.action_controller


@pytest.fixture
def reports(app):
    return app.report_controller


@pytest.fixture
def grid():
    return SampleGrid(1.0, 2.0, 40)


@pytest.fixture
def float_grid():
    """x in [1, 2^26]: stays in double precision."""
    return SampleGrid(1.0, 2.0, 27)

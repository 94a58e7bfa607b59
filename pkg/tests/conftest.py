"""
Pytest configuration and fixtures for the experiment toolkit tests.
"""
import os
import pytest

from app import create_app
from models.run import RunConfig
from utils.core import RngStream
from utils.problems import make_problem
from utils.providers import MockProvider


@pytest.fixture(scope='session')
def _app(tmp_path_factory):
    """
    Create Flask application for testing.
    Runs launched through the API write into a throwaway directory.
    """
    # Set test environment
    os.environ['FLASK_ENV'] = 'testing'

    # Create app with test configuration
    test_app = create_app('testing')
    test_app.config['OUTPUT_DIR'] = str(tmp_path_factory.mktemp('api-runs'))

    yield test_app


@pytest.fixture(scope='function')
def client(_app):
    """
    Flask test client for making API requests.
    """
    with _app.app_context():
        yield _app.test_client()


@pytest.fixture
def rng():
    """
    Fixed-seed random stream.
    """
    return RngStream(12345)


@pytest.fixture
def zdt1():
    """
    ZDT1 at its default 30 dimensions.
    """
    return make_problem('ZDT1')


@pytest.fixture
def mock_provider():
    """
    Deterministic offline provider.
    """
    return MockProvider()


@pytest.fixture
def small_config():
    """
    A run small enough for unit tests: 20 individuals, 400 evaluations.
    """
    return RunConfig(
        problem='ZDT1',
        algorithm='nsga2-llm',
        N=20,
        N_max=400,
        l=5,
        s=3,
        delta=0.1,
        seed=1,
        pf_samples=500,
        plot=False,
    )

# tests/conftest.py
import pytest
from fastapi.testclient import TestClient

from app.config.settings import SAMPLES_DIR
from app.main import app
from app.services.model_library import builtin_source
from app.services.parser import parse_model


@pytest.fixture
def client():
    return TestClient(app)


@pytest.fixture
def samples_dir():
    return SAMPLES_DIR


@pytest.fixture(scope="session")
def pendulum_model():
    return parse_model(builtin_source("pendulum"))


@pytest.fixture(scope="session")
def double_pendulum_model():
    return parse_model(builtin_source("double_pendulum"))


@pytest.fixture(scope="session")
def quadcopter_model():
    return parse_model(builtin_source("quadcopter"))

"""
Shared pytest configuration for BornLens
"""

import pytest

import bornlens  # noqa: F401  registers models and studies


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance-scale tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale run, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    """Keep BORNLENS_* settings and any .env file out of the tests"""
    for key in ("BORNLENS_THREADS", "BORNLENS_OUTPUT_DIR", "BORNLENS_VERBOSE", "BORNLENS_LOG_LEVEL"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)

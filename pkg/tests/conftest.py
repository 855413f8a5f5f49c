import pytest


@pytest.fixture
def no_mutation(monkeypatch):
    monkeypatch.delenv("RESTART_AGD_MUTATION", raising=False)

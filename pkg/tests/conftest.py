from pathlib import Path

import pytest


@pytest.fixture(autouse=True)
def _repo_root_cwd(monkeypatch):
    # corpus/ paths in tests are relative to the repository root
    monkeypatch.chdir(Path(__file__).resolve().parent.parent)

from pathlib import Path

import pytest

from reflex.config import SessionConfig, Task, load_bundle

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def listening_bundle():
    return load_bundle(SessionConfig())


@pytest.fixture(scope="session")
def interview_bundle():
    return load_bundle(SessionConfig(task=Task.INTERVIEW))


@pytest.fixture(scope="session")
def fixture_corpus_path():
    return DATA / "fixture_session.jsonl"

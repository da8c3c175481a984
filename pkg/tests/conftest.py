import pytest

from models.word import Word
from setup_config import CONFIG_ENV
from logging_config import LOG_DIR_ENV


def word_of(text: str, ell=None) -> Word:
    """Character-encoded word, alphabet inferred (at least binary) unless given."""
    letters = [int(ch, 36) for ch in text]
    return Word.of(letters, ell)


@pytest.fixture(autouse=True)
def _isolated_environment(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    monkeypatch.delenv(LOG_DIR_ENV, raising=False)

import pytest

from wordsteer.lexicon import load_shipped_grammar


@pytest.fixture(scope="session")
def grammar():
    return load_shipped_grammar()

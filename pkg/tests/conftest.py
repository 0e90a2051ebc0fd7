import time
from pathlib import Path

import pytest

from termkit.corpus_io import (
    filter_corpus_by_length,
    filter_dictionary,
    load_corpus,
    load_dictionary,
)
from termkit.corrupter import CorruptionConfig, corrupt_sentences
from termkit.matcher import build_matched_corpus

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_matched():
    """The bundled 50-sentence corpus run through the standard match pipeline."""
    corpus = load_corpus(FIXTURES / "corpus.de", FIXTURES / "corpus.en")
    corpus = filter_corpus_by_length(corpus, 80)
    dictionary = filter_dictionary(load_dictionary(FIXTURES / "terms.tsv"))
    return build_matched_corpus(corpus, dictionary)


@pytest.fixture(scope="session")
def bulk_corruptions():
    """100k corruptions of a length-80 sentence with the default settings.

    Shared between the statistical property tests and the acceptance suite;
    returns (config, results, elapsed seconds).
    """
    cfg = CorruptionConfig(vocabulary=tuple(f"v{i}" for i in range(50)), seed=42)
    sentence = tuple(f"w{i}" for i in range(80))
    start = time.monotonic()
    results = corrupt_sentences([(i, sentence) for i in range(100_000)], cfg)
    elapsed = time.monotonic() - start
    return cfg, results, elapsed

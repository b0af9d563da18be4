import pytest

from stylokit.annotation import ReplayClient, StyleGenomeDataset, build_dataset
from stylokit.corpus import Corpus

from helpers import build_transcript, tiny_documents


@pytest.fixture(scope="session")
def tiny_corpus() -> Corpus:
    return Corpus(tiny_documents())


@pytest.fixture(scope="session")
def tiny_transcript() -> dict:
    return build_transcript(tiny_documents())


@pytest.fixture(scope="session")
def tiny_dataset(tiny_corpus, tiny_transcript) -> StyleGenomeDataset:
    return build_dataset(tiny_corpus, ReplayClient(tiny_transcript))

from importlib import resources
from pathlib import Path

import pytest

from irfkit import corpus_io, index


TOY_DIR = Path(str(resources.files("irfkit").joinpath("data/toy")))


@pytest.fixture(scope="session")
def stoplist():
    return corpus_io.default_stoplist()


@pytest.fixture(scope="session")
def toy_paths():
    return {
        "corpus": TOY_DIR / "corpus.trectext",
        "topics": TOY_DIR / "topics.tsv",
        "qrels": TOY_DIR / "qrels.txt",
    }


@pytest.fixture(scope="session")
def toy_index(stoplist, toy_paths):
    raw = corpus_io.parse_trec_collection(toy_paths["corpus"])
    seqs = corpus_io.normalize_collection(raw, stoplist)
    return index.build_index(seqs, {"stemmer": "krovetz", "stoplist": sorted(stoplist)})


@pytest.fixture(scope="session")
def toy_topic(stoplist, toy_paths):
    return corpus_io.parse_topics(toy_paths["topics"], "tsv", stoplist)[0]


@pytest.fixture(scope="session")
def toy_qrels(toy_paths):
    return corpus_io.parse_qrels(toy_paths["qrels"])


@pytest.fixture
def two_doc_index():
    docs = [
        corpus_io.TermSequence("D1", ("a", "b", "a")),
        corpus_io.TermSequence("D2", ("b",)),
    ]
    return index.build_index(docs)

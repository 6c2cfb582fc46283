import shutil
from pathlib import Path

import pytest

from sublex.grammar import load_grammar
from sublex.parser import ChartParser
from sublex.relations import load_exceptions, load_patterns
from sublex.tagging import Source, Tagger, TextLexicon

RESOURCES = Path(__file__).resolve().parents[1] / "src" / "sublex" / "resources"
DATA = Path(__file__).resolve().parents[1] / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def grammar():
    return load_grammar(RESOURCES / "default.grammar")


@pytest.fixture(scope="session")
def parser(grammar):
    return ChartParser(grammar)


@pytest.fixture(scope="session")
def closed_class():
    return TextLexicon.from_path(RESOURCES / "closed_class.txt", Source.CLOSED)


@pytest.fixture(scope="session")
def tagger(closed_class):
    return Tagger(closed_class)


@pytest.fixture(scope="session")
def patterns():
    return load_patterns(RESOURCES / "patterns.txt")


@pytest.fixture(scope="session")
def exceptions():
    return load_exceptions(RESOURCES / "exceptions.txt")


def copy_corpus(name: str, target: Path) -> Path:
    """Fresh working copy of a bundled demo corpus (runs write a store)."""
    dest = target / name
    shutil.copytree(DATA / name, dest)
    return dest


@pytest.fixture()
def demo_dir(tmp_path):
    return copy_corpus("demo_corpus", tmp_path)


@pytest.fixture()
def ext_dir(tmp_path):
    return copy_corpus("demo_corpus_ext", tmp_path)

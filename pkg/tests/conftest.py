import pytest

from tnwp.fixtures import write_fixture_corpus

CORPUS_SEED = 0


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """Golden fixture corpus on disk, built once per session."""
    out = tmp_path_factory.mktemp("corpus")
    write_fixture_corpus(out, CORPUS_SEED)
    return out


@pytest.fixture(scope="session")
def corpus_paths(corpus_dir):
    return {p.stem: p for p in sorted(corpus_dir.glob("*.tnwp"))}

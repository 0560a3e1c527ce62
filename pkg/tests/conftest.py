from pathlib import Path

import numpy as np
import pytest

from encsearch.embeddings import EmbeddingTable
from encsearch.text import Corpus

DATA = Path(__file__).resolve().parents[1] / "data"

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def toy_corpus():
    return Corpus.from_texts(
        [
            ("d1", "apple apple banana"),
            ("d2", "banana cherry"),
            ("d3", "cherry cherry date"),
        ]
    )


@pytest.fixture
def toy_table():
    return EmbeddingTable(
        ("apple", "banana", "cherry"),
        np.array([[1.0, 0, 0, 0], [0, 2.0, 0, 0], [1.0, 1, 1, 1]]),
    )

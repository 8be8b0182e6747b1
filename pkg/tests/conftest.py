from pathlib import Path

import pytest

from udsgraph import graph_from_sentence, parse_conllu
from udsgraph.syntax import build_syntax_graph

DATA = Path(__file__).parent / "data"


def load_sentence(name, split="train"):
    return parse_conllu((DATA / f"{name}.conllu").read_text(), split)[0]


@pytest.fixture
def gave_sentence():
    return load_sentence("gave")


@pytest.fixture
def gave_syntax(gave_sentence):
    return build_syntax_graph(gave_sentence)


@pytest.fixture
def gave():
    return graph_from_sentence(load_sentence("gave"))


@pytest.fixture
def thought():
    return graph_from_sentence(load_sentence("thought"))


@pytest.fixture
def copula():
    return graph_from_sentence(load_sentence("copula"))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

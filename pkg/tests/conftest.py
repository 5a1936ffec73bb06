import random
import sys

import pytest
from hypothesis import strategies as st

from qmforms.words import Word, commutator, conjugate


@st.composite
def words(draw, rank=2, max_len=8):
    letters = draw(
        st.lists(
            st.integers(1, rank).flatmap(lambda i: st.sampled_from((i, -i))),
            max_size=max_len,
        )
    )
    return Word(letters, rank)


@st.composite
def commutator_elements(draw, rank=2, max_len=4):
    w = commutator(draw(words(rank, max_len)), draw(words(rank, max_len)))
    if draw(st.booleans()):
        w = w * commutator(draw(words(rank, max_len)), draw(words(rank, max_len)))
    return conjugate(w, draw(words(rank, max_len)))


@pytest.fixture
def rng():
    return random.Random(20240517)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)

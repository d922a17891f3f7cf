import itertools
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from twoanswer.game import GameSpec
from twoanswer.group_algebra import AlgebraElement, GaussianRational, GroupWord

X3, Y3 = 3, 3


def party_letters(count, max_len=6):
    return st.lists(st.integers(0, count - 1), max_size=max_len)


@st.composite
def words(draw, x_count=X3, y_count=Y3, max_len=6):
    return GroupWord.from_letters(draw(party_letters(x_count, max_len)), draw(party_letters(y_count, max_len)))


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=12)


@st.composite
def gaussian(draw):
    return GaussianRational(draw(rationals), draw(rationals))


@st.composite
def elements(draw, x_count=X3, y_count=Y3, max_terms=4, real=False):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        w = draw(words(x_count, y_count, max_len=3))
        terms[w] = GaussianRational(draw(rationals)) if real else draw(gaussian())
    return AlgebraElement(terms, x_count, y_count)


def brute_reduced_words(d, x_count, y_count):
    """Every reduced word pair of total length <= d by filtering all letter strings."""
    out = set()
    for la in range(d + 1):
        for alice in itertools.product(range(x_count), repeat=la):
            if any(p == q for p, q in zip(alice, alice[1:])):
                continue
            for lb in range(d - la + 1):
                for bob in itertools.product(range(y_count), repeat=lb):
                    if any(p == q for p, q in zip(bob, bob[1:])):
                        continue
                    out.add(GroupWord(alice, bob))
    return out


def random_game(rng, x_count=2, y_count=2, p_forbid=0.3):
    return GameSpec(x_count, y_count, rng.random((x_count, y_count, 2, 2)) >= p_forbid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


__all__ = ["words", "elements", "gaussian", "brute_reduced_words", "random_game", "Fraction"]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])

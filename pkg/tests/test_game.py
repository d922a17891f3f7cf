import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import elements, random_game
from twoanswer import data_path
from twoanswer.formats import FormatError, game_to_dict, load_game, save_game
from twoanswer.game import (
    ClassicalStrategy,
    GameSpec,
    SearchBoundError,
    classical_value,
    enumerate_perfect,
    invalid_set,
    is_perfect_classical,
    one_dim_rep_eval,
    rho_word,
    search_classical,
)
from twoanswer.group_algebra import AlgebraElement, GaussianRational, GroupWord


def all_strategies(x_count, y_count):
    for index in range(1 << (x_count + y_count)):
        yield ClassicalStrategy.from_index(index, x_count, y_count)


def brute_value(g):
    best = 0
    for s in all_strategies(g.x_count, g.y_count):
        score = sum(g.wins(x, y, s.u[x], s.v[y]) for x in range(g.x_count) for y in range(g.y_count))
        best = max(best, score)
    return Fraction(best, g.x_count * g.y_count)


def test_chsh_has_value_three_quarters():
    g = GameSpec.chsh()
    assert classical_value(g) == Fraction(3, 4)
    assert search_classical(g) is None
    assert len(g.forbidden) == 8


def test_equality_game_first_strategy_is_all_zero():
    s = search_classical(GameSpec.equality())
    assert s == ClassicalStrategy((0, 0), (0, 0))
    assert classical_value(GameSpec.equality(3, 2)) == 1


def test_shipped_games_load():
    assert load_game(data_path("chsh.game")) == GameSpec.chsh()
    assert load_game(data_path("equality.game")) == GameSpec.equality()
    g = load_game(data_path("allforbidden.game"))
    assert g.forbidden == [(0, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0), (0, 0, 1, 1)]
    assert classical_value(g) == Fraction(3, 4)


def test_index_encoding_round_trip():
    for index in range(32):
        s = ClassicalStrategy.from_index(index, 3, 2)
        assert s.index() == index
    assert ClassicalStrategy.from_index(1, 2, 2) == ClassicalStrategy((1, 0), (0, 0))
    assert ClassicalStrategy.from_index(4, 2, 2) == ClassicalStrategy((0, 0), (1, 0))


def test_enumeration_order_matches_brute_force(rng):
    for _ in range(40):
        x_count, y_count = rng.integers(1, 4, size=2)
        g = random_game(rng, int(x_count), int(y_count), p_forbid=0.2)
        expected = [s for s in all_strategies(g.x_count, g.y_count) if is_perfect_classical(g, s)]
        assert list(enumerate_perfect(g)) == expected
        assert search_classical(g) == (expected[0] if expected else None)


def test_value_matches_brute_force(rng):
    for _ in range(40):
        x_count, y_count = rng.integers(1, 4, size=2)
        g = random_game(rng, int(x_count), int(y_count), p_forbid=0.4)
        v = classical_value(g)
        assert v == brute_value(g)
        assert (v == 1) == (search_classical(g) is not None)


def test_search_bound():
    g = GameSpec.equality(13, 12)
    with pytest.raises(SearchBoundError):
        search_classical(g)
    assert search_classical(g, bound=25) is not None


def test_perfect_iff_rho_kills_invalid_set(rng):
    # exhaustive over all 16 strategies for sampled forbidden sets
    for _ in range(60):
        g = random_game(rng, 2, 2, p_forbid=rng.random())
        ns = invalid_set(g)
        for s in all_strategies(2, 2):
            kills = all(one_dim_rep_eval(s, n) == 0 for n in ns)
            assert is_perfect_classical(g, s) == kills


def test_invalid_set_is_projector_product():
    g = GameSpec.from_forbidden(2, 2, [(1, 0, 1, 0)])
    (n,) = invalid_set(g)
    assert str(n) == "1/4*1 - 1/4*A1 + 1/4*B0 - 1/4*A1 B0"


@given(elements(2, 2), elements(2, 2), st.integers(0, 15))
@settings(max_examples=80)
def test_rho_is_star_homomorphism(a, b, index):
    s = ClassicalStrategy.from_index(index, 2, 2)
    assert one_dim_rep_eval(s, a * b) == one_dim_rep_eval(s, a) * one_dim_rep_eval(s, b)
    assert one_dim_rep_eval(s, a + b) == one_dim_rep_eval(s, a) + one_dim_rep_eval(s, b)
    assert one_dim_rep_eval(s, a.star()) == one_dim_rep_eval(s, a).conjugate()
    assert one_dim_rep_eval(s, AlgebraElement.one(2, 2)) == 1


def test_rho_word_sign():
    s = ClassicalStrategy((1, 0), (1, 1))
    assert rho_word(s, GroupWord((0, 1, 0), (0, 1))) == 1
    assert rho_word(s, GroupWord((0, 1, 0), (1,))) == -1
    assert rho_word(s, GroupWord((0,), ())) == -1


def test_one_dim_rep_float_and_exact():
    s = ClassicalStrategy((1, 0), (0, 0))
    a = AlgebraElement({GroupWord((0,), ()): GaussianRational(1, 2)}, 2, 2)
    assert one_dim_rep_eval(s, a) == GaussianRational(-1, -2)
    assert one_dim_rep_eval(s, a.to_float()) == pytest.approx(-1 - 2j)
    with pytest.raises(ValueError):
        one_dim_rep_eval(ClassicalStrategy((0,), (0,)), a)


def test_size_mismatch():
    with pytest.raises(ValueError):
        is_perfect_classical(GameSpec.chsh(), ClassicalStrategy((0,), (0, 0)))


def test_game_construction_errors():
    with pytest.raises(ValueError):
        GameSpec.from_forbidden(2, 2, [(0, 2, 0, 0)])
    with pytest.raises(ValueError):
        GameSpec.from_forbidden(2, 2, [(0, 0, 0, 0), (0, 0, 0, 0)])
    with pytest.raises(ValueError):
        GameSpec(2, 2, np.ones((2, 3, 2, 2)))
    with pytest.raises(ValueError):
        ClassicalStrategy((2,), (0,))


def test_game_file_round_trip(tmp_path, rng):
    for i in range(10):
        g = random_game(rng, 3, 2)
        p = save_game(g, tmp_path / f"g{i}.game")
        text = p.read_bytes()
        assert load_game(p) == g
        save_game(load_game(p), p)
        assert p.read_bytes() == text
        assert game_to_dict(g)["forbidden"] == [list(t) for t in g.forbidden]


@pytest.mark.parametrize(
    "text, needle",
    [
        ('{"x_count": 2, "y_count": 2', "line 1"),
        ('{"x_count": 2, "forbidden": []}', "'y_count'"),
        ('{"x_count": 0, "y_count": 2, "forbidden": []}', "'x_count'"),
        ('{"x_count": 2, "y_count": 2, "forbidden": [[0, 0, 0]]}', "forbidden[0]"),
        ('{"x_count": 2, "y_count": 2, "forbidden": [[0, 0, 0, 2]]}', "out of range"),
        ('{"x_count": 2, "y_count": 2, "forbidden": [[0, 0, 0, 1], [0, 0, 0, 1]]}', "duplicate"),
        ("[]", "top level"),
    ],
)
def test_game_format_errors(tmp_path, text, needle):
    p = tmp_path / "bad.game"
    p.write_text(text)
    with pytest.raises(FormatError, match=needle.replace("[", r"\[").replace("]", r"\]")):
        load_game(p)

"""Two-answer games, classical strategies and their one-dimensional representations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

from .group_algebra import (
    AlgebraElement,
    GaussianRational,
    GroupWord,
    projector,
)

__all__ = [
    "GameSpec",
    "ClassicalStrategy",
    "SearchBoundError",
    "invalid_set",
    "is_perfect_classical",
    "search_classical",
    "enumerate_perfect",
    "classical_value",
    "one_dim_rep_eval",
    "rho_word",
    "DEFAULT_SEARCH_BOUND",
]

DEFAULT_SEARCH_BOUND = 24
_CHUNK = 1 << 14


class SearchBoundError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GameSpec:
    """A two-answer nonlocal game given by its scoring table.

    ``allowed[x, y, a, b]`` is 1 when answers ``(a, b)`` win on questions
    ``(x, y)``. The forbidden index set is derived from the zero entries.
    """

    x_count: int
    y_count: int
    allowed: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.x_count < 1 or self.y_count < 1:
            raise ValueError("question counts must be positive")
        table = np.asarray(self.allowed)
        if table.shape != (self.x_count, self.y_count, 2, 2):
            raise ValueError(
                f"scoring table has shape {table.shape}, expected {(self.x_count, self.y_count, 2, 2)}"
            )
        if not np.isin(table, (0, 1)).all():
            raise ValueError("scoring table entries must be 0 or 1")
        table = table.astype(bool)
        table.setflags(write=False)
        object.__setattr__(self, "allowed", table)

    @classmethod
    def from_forbidden(cls, x_count: int, y_count: int, forbidden: Iterable[Iterable[int]]) -> "GameSpec":
        table = np.ones((x_count, y_count, 2, 2), dtype=bool)
        seen = set()
        for entry in forbidden:
            t = tuple(int(i) for i in entry)
            if len(t) != 4:
                raise ValueError(f"forbidden entry {t} must have four indices")
            x, y, a, b = t
            if not (0 <= x < x_count and 0 <= y < y_count and a in (0, 1) and b in (0, 1)):
                raise ValueError(f"forbidden entry {t} out of range")
            if t in seen:
                raise ValueError(f"duplicate forbidden entry {t}")
            seen.add(t)
            table[t] = False
        return cls(x_count, y_count, table)

    @classmethod
    def from_predicate(cls, x_count: int, y_count: int, wins: Callable[[int, int, int, int], bool]) -> "GameSpec":
        table = np.zeros((x_count, y_count, 2, 2), dtype=bool)
        for x, y, a, b in itertools.product(range(x_count), range(y_count), (0, 1), (0, 1)):
            table[x, y, a, b] = bool(wins(x, y, a, b))
        return cls(x_count, y_count, table)

    @classmethod
    def chsh(cls) -> "GameSpec":
        return cls.from_predicate(2, 2, lambda x, y, a, b: (a ^ b) == (x & y))

    @classmethod
    def equality(cls, x_count: int = 2, y_count: int = 2) -> "GameSpec":
        return cls.from_predicate(x_count, y_count, lambda x, y, a, b: a == b)

    @property
    def forbidden(self) -> list[tuple[int, int, int, int]]:
        """Losing tuples in lexicographic order; positions index :func:`invalid_set`."""
        return [tuple(int(i) for i in idx) for idx in np.argwhere(~self.allowed)]

    def wins(self, x: int, y: int, a: int, b: int) -> bool:
        return bool(self.allowed[x, y, a, b])

    def __eq__(self, other):
        if not isinstance(other, GameSpec):
            return NotImplemented
        return (self.x_count, self.y_count) == (other.x_count, other.y_count) and bool(
            (self.allowed == other.allowed).all()
        )

    def __hash__(self):
        return hash((self.x_count, self.y_count, self.allowed.tobytes()))


@dataclass(frozen=True)
class ClassicalStrategy:
    """Deterministic answer maps ``u: X -> {0,1}`` and ``v: Y -> {0,1}``."""

    u: tuple[int, ...]
    v: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(int(a) for a in self.u))
        object.__setattr__(self, "v", tuple(int(b) for b in self.v))
        if not all(a in (0, 1) for a in self.u + self.v):
            raise ValueError("answers must be 0 or 1")

    @classmethod
    def from_index(cls, index: int, x_count: int, y_count: int) -> "ClassicalStrategy":
        """Decode the enumeration index: bit ``x`` is ``u(x)``, bit ``x_count + y`` is ``v(y)``."""
        u = tuple((index >> x) & 1 for x in range(x_count))
        v = tuple((index >> (x_count + y)) & 1 for y in range(y_count))
        return cls(u, v)

    def index(self) -> int:
        bits = self.u + self.v
        return sum(b << i for i, b in enumerate(bits))


def _check_sizes(g: GameSpec, s: ClassicalStrategy):
    if len(s.u) != g.x_count or len(s.v) != g.y_count:
        raise ValueError(
            f"strategy sizes ({len(s.u)}, {len(s.v)}) do not match game ({g.x_count}, {g.y_count})"
        )


def invalid_set(g: GameSpec) -> list[AlgebraElement]:
    """The exact elements ``e_a^x f_b^y`` for every losing tuple, in ``g.forbidden`` order."""
    X, Y = g.x_count, g.y_count
    return [
        projector("alice", x, a, X, Y) * projector("bob", y, b, X, Y) for x, y, a, b in g.forbidden
    ]


def is_perfect_classical(g: GameSpec, s: ClassicalStrategy) -> bool:
    _check_sizes(g, s)
    return all(
        g.allowed[x, y, s.u[x], s.v[y]] for x in range(g.x_count) for y in range(g.y_count)
    )


def _check_bound(g: GameSpec, bound: int):
    if g.x_count + g.y_count > bound:
        raise SearchBoundError(
            f"{g.x_count + g.y_count} questions exceed the search bound {bound}"
        )


def _bits(start: int, stop: int, width: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    return ((idx[:, None] >> np.arange(width)) & 1).astype(np.intp)


def _alice_options(g: GameSpec, start: int, stop: int) -> np.ndarray:
    """``ok[k, x, a]``: answer ``a`` to ``x`` wins against every ``y`` when Bob plays assignment ``start + k``."""
    V = _bits(start, stop, g.y_count)
    ys = np.arange(g.y_count)
    # allowed[x, y, a, V[k, y]] -> (k, x, y, a)
    picked = g.allowed[:, ys, :, V]  # (k, y, x, a)
    return picked.all(axis=1)


def enumerate_perfect(g: GameSpec, bound: int = DEFAULT_SEARCH_BOUND) -> Iterator[ClassicalStrategy]:
    """Yield every perfect classical strategy in enumeration order.

    The order treats ``u`` then ``v`` as one binary counter with ``u(0)``
    as the least significant bit.
    """
    _check_bound(g, bound)
    total = 1 << g.y_count
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        ok = _alice_options(g, start, stop)
        for k in np.flatnonzero(ok.any(axis=2).all(axis=1)):
            v = tuple(((start + int(k)) >> y) & 1 for y in range(g.y_count))
            choices = [[a for a in (0, 1) if ok[k, x, a]] for x in range(g.x_count)]
            # reversed product so that x = 0 varies fastest
            for combo in itertools.product(*reversed(choices)):
                yield ClassicalStrategy(tuple(reversed(combo)), v)


def search_classical(g: GameSpec, bound: int = DEFAULT_SEARCH_BOUND) -> Optional[ClassicalStrategy]:
    """First perfect classical strategy in enumeration order, or ``None``."""
    return next(enumerate_perfect(g, bound), None)


def classical_value(g: GameSpec, bound: int = DEFAULT_SEARCH_BOUND) -> Fraction:
    """Best winning fraction of a deterministic strategy under uniform questions."""
    _check_bound(g, bound)
    table = g.allowed
    if g.x_count > g.y_count:
        # enumerate the smaller party
        table = table.transpose(1, 0, 3, 2)
    n_enum, n_free = table.shape[0], table.shape[1]
    best = 0
    total = 1 << n_enum
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        U = _bits(start, stop, n_enum)
        xs = np.arange(n_enum)
        # table[x, y, U[k, x], b] -> (k, x, y, b)
        picked = table[xs, :, U, :]
        wins = picked.sum(axis=1)  # (k, y, b)
        score = wins.max(axis=2).sum(axis=1)
        best = max(best, int(score.max()))
    return Fraction(best, g.x_count * g.y_count)


def rho_word(s: ClassicalStrategy, w: GroupWord) -> int:
    """Value of a group word under the character ``A_x -> (-1)^u(x)``, ``B_y -> (-1)^v(y)``."""
    parity = sum(s.u[x] for x in w.alice) + sum(s.v[y] for y in w.bob)
    return -1 if parity & 1 else 1


def one_dim_rep_eval(s: ClassicalStrategy, alpha: AlgebraElement):
    """Evaluate the one-dimensional *-representation induced by ``s``.

    Returns an exact ``GaussianRational`` for exact elements and a
    ``complex`` otherwise.
    """
    if alpha.alphabet != (len(s.u), len(s.v)):
        raise ValueError(f"alphabet mismatch: element {alpha.alphabet}, strategy {(len(s.u), len(s.v))}")
    total = GaussianRational(0) if alpha.exact else 0j
    for w, c in alpha.items():
        total = total + c * rho_word(s, w)
    return total

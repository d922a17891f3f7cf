"""Arithmetic in the universal game algebra of a two-answer game.

The algebra generated by the projectors ``e_a^x`` and ``f_b^y`` modulo the
PVM relations is the group algebra of

    G = (Z2 * ... * Z2 over X) x (Z2 * ... * Z2 over Y)

with ``A_x = e_0^x - e_1^x`` and ``B_y = f_0^y - f_1^y`` as the involutive
generators. Group elements are stored as a pair of reduced words, one per
party; since the two parties commute this pair is already a normal form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping, Union

__all__ = [
    "GaussianRational",
    "GroupWord",
    "IDENTITY",
    "AlgebraElement",
    "word_mul",
    "word_star",
    "words_up_to",
    "party_words_up_to",
    "alg_add",
    "alg_mul",
    "alg_scale",
    "alg_star",
    "projector",
    "generator",
    "l1_norm",
    "FLOAT_PRUNE",
]

FLOAT_PRUNE = 1e-14


class AlphabetError(ValueError):
    """Raised when operands are built over different question sets."""


# ---------------------------------------------------------------------------
# exact complex coefficients


class GaussianRational:
    """Complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: Union[int, Fraction] = 0, im: Union[int, Fraction] = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction, Rational)) and not isinstance(value, bool):
            return cls(Fraction(value))
        if isinstance(value, complex):
            # only accept complex literals whose parts are integers (e.g. 4j)
            if value.real.is_integer() and value.imag.is_integer():
                return cls(int(value.real), int(value.imag))
        raise TypeError(f"cannot use {value!r} as an exact coefficient")

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        n = o.abs2()
        if n == 0:
            raise ZeroDivisionError("division by zero")
        return self * GaussianRational(o.re / n, -o.im / n)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!s}, {self.im!s})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


def _frac_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None if irrational."""
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


# ---------------------------------------------------------------------------
# group words


def _reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for letter in letters:
        if out and out[-1] == letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def _is_reduced(letters: tuple[int, ...]) -> bool:
    return all(a != b for a, b in zip(letters, letters[1:]))


@dataclass(frozen=True)
class GroupWord:
    """Canonical element of G: one reduced word per party."""

    alice: tuple[int, ...] = ()
    bob: tuple[int, ...] = ()

    def __post_init__(self):
        for part in (self.alice, self.bob):
            if any((not isinstance(i, int)) or i < 0 for i in part):
                raise ValueError(f"letters must be non-negative integers, got {part!r}")
            if not _is_reduced(part):
                raise ValueError(f"party word {part!r} is not reduced")

    @classmethod
    def from_letters(cls, alice: Iterable[int] = (), bob: Iterable[int] = ()) -> "GroupWord":
        """Build a word from arbitrary letter sequences, cancelling as needed."""
        return cls(_reduce(int(i) for i in alice), _reduce(int(i) for i in bob))

    def __len__(self):
        return len(self.alice) + len(self.bob)

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return word_mul(self, other)

    def star(self) -> "GroupWord":
        return word_star(self)

    def is_identity(self) -> bool:
        return not self.alice and not self.bob

    def fits(self, x_count: int, y_count: int) -> bool:
        return all(i < x_count for i in self.alice) and all(j < y_count for j in self.bob)

    def sort_key(self) -> tuple:
        """Graded order, ties broken lexicographically with Alice letters first."""
        return (len(self), tuple((0, i) for i in self.alice) + tuple((1, j) for j in self.bob))

    def __str__(self):
        if self.is_identity():
            return "1"
        return " ".join([f"A{i}" for i in self.alice] + [f"B{j}" for j in self.bob])

    @classmethod
    def parse(cls, text: str) -> "GroupWord":
        """Inverse of ``str``: ``"1"`` or space-separated ``A<i>`` / ``B<j>`` tokens."""
        text = text.strip()
        if text == "1":
            return IDENTITY
        alice, bob = [], []
        seen_bob = False
        for tok in text.split():
            if len(tok) < 2 or tok[0] not in "AB" or not tok[1:].isdigit():
                raise ValueError(f"bad word token {tok!r} in {text!r}")
            if tok[0] == "A":
                if seen_bob:
                    raise ValueError(f"Alice letters must precede Bob letters in {text!r}")
                alice.append(int(tok[1:]))
            else:
                seen_bob = True
                bob.append(int(tok[1:]))
        return cls(tuple(alice), tuple(bob))


IDENTITY = GroupWord()


def word_mul(u: GroupWord, v: GroupWord, alphabet: tuple[int, int] | None = None) -> GroupWord:
    """Canonical product ``u * v``.

    If ``alphabet`` is given as ``(x_count, y_count)`` both operands are
    checked against it.
    """
    if alphabet is not None:
        for w in (u, v):
            if not w.fits(*alphabet):
                raise AlphabetError(f"word {w} does not fit alphabet {alphabet}")
    return GroupWord(_reduce(u.alice + v.alice), _reduce(u.bob + v.bob))


def word_star(w: GroupWord) -> GroupWord:
    return GroupWord(w.alice[::-1], w.bob[::-1])


def party_words_up_to(d: int, count: int) -> list[tuple[int, ...]]:
    """All reduced words over ``count`` involutions of length at most ``d``."""
    words: list[tuple[int, ...]] = [()]
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(d):
        nxt = []
        for w in frontier:
            for i in range(count):
                if not w or w[-1] != i:
                    nxt.append(w + (i,))
        words.extend(nxt)
        frontier = nxt
    return words


def words_up_to(d: int, x_count: int, y_count: int) -> list[GroupWord]:
    """Canonical words of total length at most ``d`` in basis order (identity first)."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    alice = party_words_up_to(d, x_count)
    bob = party_words_up_to(d, y_count)
    out = [GroupWord(a, b) for a in alice for b in bob if len(a) + len(b) <= d]
    out.sort(key=GroupWord.sort_key)
    return out


# ---------------------------------------------------------------------------
# algebra elements


Coefficient = Union[GaussianRational, complex]


class AlgebraElement:
    """Finitely supported element of C[G].

    Coefficients are either all exact (:class:`GaussianRational`) or all
    double-precision ``complex``. Mixing an exact and a float operand gives a
    float result. Instances are treated as immutable.
    """

    __slots__ = ("_terms", "x_count", "y_count", "exact")

    def __init__(
        self,
        terms: Mapping[GroupWord, object],
        x_count: int,
        y_count: int,
        exact: bool = True,
    ):
        if x_count < 1 or y_count < 1:
            raise ValueError("question counts must be positive")
        self.x_count = x_count
        self.y_count = y_count
        self.exact = exact
        clean: dict[GroupWord, Coefficient] = {}
        for w, c in terms.items():
            if not w.fits(x_count, y_count):
                raise AlphabetError(f"word {w} outside alphabet ({x_count}, {y_count})")
            if exact:
                c = GaussianRational.coerce(c)
                if c:
                    clean[w] = c
            else:
                c = complex(c)
                if abs(c) >= FLOAT_PRUNE:
                    clean[w] = c
        self._terms = clean

    # constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, x_count: int, y_count: int, exact: bool = True) -> "AlgebraElement":
        return cls({}, x_count, y_count, exact)

    @classmethod
    def one(cls, x_count: int, y_count: int, exact: bool = True) -> "AlgebraElement":
        return cls({IDENTITY: 1}, x_count, y_count, exact)

    @classmethod
    def from_word(cls, w: GroupWord, x_count: int, y_count: int, coef=1, exact: bool = True):
        return cls({w: coef}, x_count, y_count, exact)

    # accessors ------------------------------------------------------------

    @property
    def alphabet(self) -> tuple[int, int]:
        return (self.x_count, self.y_count)

    @property
    def terms(self) -> Mapping[GroupWord, Coefficient]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[GroupWord, Coefficient]]:
        """Terms in basis order."""
        for w in sorted(self._terms, key=GroupWord.sort_key):
            yield w, self._terms[w]

    def coefficient(self, w: GroupWord) -> Coefficient:
        return self._terms.get(w, GaussianRational(0) if self.exact else 0j)

    def support(self) -> list[GroupWord]:
        return sorted(self._terms, key=GroupWord.sort_key)

    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self):
        return len(self._terms)

    # arithmetic -----------------------------------------------------------

    def _check(self, other: "AlgebraElement"):
        if self.alphabet != other.alphabet:
            raise AlphabetError(f"alphabet mismatch: {self.alphabet} vs {other.alphabet}")

    def to_float(self) -> "AlgebraElement":
        if not self.exact:
            return self
        return AlgebraElement(
            {w: complex(c) for w, c in self._terms.items()}, self.x_count, self.y_count, exact=False
        )

    def _coerced(self, other: "AlgebraElement"):
        self._check(other)
        if self.exact and other.exact:
            return self, other, True
        return self.to_float(), other.to_float(), False

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            other = self._scalar(other)
        a, b, exact = self._coerced(other)
        terms = dict(a._terms)
        for w, c in b._terms.items():
            terms[w] = terms[w] + c if w in terms else c
        return AlgebraElement(terms, self.x_count, self.y_count, exact)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement({w: -c for w, c in self._terms.items()}, self.x_count, self.y_count, self.exact)

    def __sub__(self, other):
        if not isinstance(other, AlgebraElement):
            other = self._scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, AlgebraElement):
            return self.scale(other)
        a, b, exact = self._coerced(other)
        terms: dict[GroupWord, Coefficient] = {}
        for u, cu in a._terms.items():
            for v, cv in b._terms.items():
                w = word_mul(u, v)
                c = cu * cv
                terms[w] = terms[w] + c if w in terms else c
        return AlgebraElement(terms, self.x_count, self.y_count, exact)

    def __rmul__(self, other):
        # scalars commute with everything
        return self.scale(other)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not supported")
        out = AlgebraElement.one(self.x_count, self.y_count, self.exact)
        for _ in range(n):
            out = out * self
        return out

    def _scalar(self, c) -> "AlgebraElement":
        if self.exact:
            try:
                return AlgebraElement({IDENTITY: GaussianRational.coerce(c)}, self.x_count, self.y_count)
            except TypeError:
                pass
        return AlgebraElement({IDENTITY: complex(c)}, self.x_count, self.y_count, exact=False)

    def scale(self, c) -> "AlgebraElement":
        if isinstance(c, float) or (isinstance(c, complex) and not _is_gaussian_int(c)):
            base = self.to_float()
            return AlgebraElement(
                {w: v * c for w, v in base._terms.items()}, self.x_count, self.y_count, exact=False
            )
        if self.exact:
            c = GaussianRational.coerce(c)
        else:
            c = complex(c)
        return AlgebraElement({w: v * c for w, v in self._terms.items()}, self.x_count, self.y_count, self.exact)

    def star(self) -> "AlgebraElement":
        return AlgebraElement(
            {word_star(w): c.conjugate() for w, c in self._terms.items()},
            self.x_count,
            self.y_count,
            self.exact,
        )

    def l1_norm(self):
        """Sum of coefficient moduli; a ``Fraction`` when computable exactly."""
        if self.exact:
            total = Fraction(0)
            for c in self._terms.values():
                r = _frac_sqrt(c.abs2())
                if r is None:
                    return sum(abs(complex(c)) for c in self._terms.values())
                total += r
            return total
        return math.fsum(abs(c) for c in self._terms.values())

    def max_abs_diff(self, other: "AlgebraElement") -> float:
        """Largest coefficient deviation, computed in floating point."""
        diff = (self - other).to_float()
        return max((abs(c) for c in diff._terms.values()), default=0.0)

    # comparison -----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            if isinstance(other, (int, Fraction, GaussianRational, float, complex)):
                other = self._scalar(other)
            else:
                return NotImplemented
        if self.alphabet != other.alphabet:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        mode = "exact" if self.exact else "float"
        return f"AlgebraElement({self}, alphabet={self.alphabet}, {mode})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for w, c in self.items():
            s = _fmt_coef(c)
            if s.startswith("-"):
                parts.append(("-", f"{s[1:]}*{w}"))
            else:
                parts.append(("+", f"{s}*{w}"))
        out = parts[0][1] if parts[0][0] == "+" else "-" + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


def _is_gaussian_int(c: complex) -> bool:
    return c.real.is_integer() and c.imag.is_integer()


def _fmt_coef(c) -> str:
    if isinstance(c, GaussianRational):
        return str(c)
    if c.imag == 0:
        return repr(c.real)
    return f"({c.real!r}{c.imag:+}j)"


# ---------------------------------------------------------------------------
# functional aliases


def alg_add(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a + b


def alg_mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a * b


def alg_scale(a: AlgebraElement, c) -> AlgebraElement:
    return a.scale(c)


def alg_star(a: AlgebraElement) -> AlgebraElement:
    return a.star()


def l1_norm(a: AlgebraElement):
    return a.l1_norm()


def _party_word(party: str, question: int) -> GroupWord:
    if party in ("alice", "A"):
        return GroupWord((question,), ())
    if party in ("bob", "B"):
        return GroupWord((), (question,))
    raise ValueError(f"unknown party {party!r}; use 'alice' or 'bob'")


def generator(party: str, question: int, x_count: int, y_count: int) -> AlgebraElement:
    """The involution ``A_x`` (party ``"alice"``) or ``B_y`` (party ``"bob"``)."""
    limit = x_count if party in ("alice", "A") else y_count
    if not 0 <= question < limit:
        raise IndexError(f"question {question} out of range for {party}")
    return AlgebraElement.from_word(_party_word(party, question), x_count, y_count)


def projector(party: str, question: int, answer: int, x_count: int, y_count: int) -> AlgebraElement:
    """``(1 + (-1)^answer g) / 2`` for the party's generator ``g``, exact."""
    if answer not in (0, 1):
        raise ValueError("answers are 0 or 1")
    g = generator(party, question, x_count, y_count)
    half = Fraction(1, 2)
    sign = 1 if answer == 0 else -1
    return AlgebraElement(
        {IDENTITY: half, next(iter(g.support())): sign * half}, x_count, y_count, exact=True
    )


def product_words(words: Iterable[GroupWord]) -> GroupWord:
    out = IDENTITY
    for w in words:
        out = word_mul(out, w)
    return out

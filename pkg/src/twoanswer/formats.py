"""Text file formats for games, strategies, certificates and moment vectors.

All files are UTF-8 JSON. Complex numbers are ``[re, im]`` pairs, exact
rationals are ``"p/q"`` strings, group words use their canonical rendering
(``"1"``, ``"A0 A1 B0"``). Writers emit a fixed layout so that a load/save
round trip reproduces the file byte for byte.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

import numpy as np

from .certificate import MomentVector, SOSCertificate
from .extraction import ExtractionResult, FiniteStrategy
from .game import ClassicalStrategy, GameSpec
from .group_algebra import GroupWord, words_up_to

__all__ = [
    "FormatError",
    "dumps",
    "load_game",
    "save_game",
    "game_to_dict",
    "load_strategy",
    "save_strategy",
    "strategy_to_dict",
    "load_certificate",
    "save_certificate",
    "certificate_to_dict",
    "load_moments",
    "save_moments",
    "moments_to_dict",
    "save_classical",
    "classical_to_dict",
    "load_classical",
]

PathLike = Union[str, Path]


class FormatError(ValueError):
    """Malformed input file; the message names the file and the offending field."""


def _compact(v: Any) -> str:
    return json.dumps(v, ensure_ascii=False, separators=(", ", ": "))


def dumps(obj: dict) -> str:
    """Top-level keys one per line; list-valued fields get one element per line."""
    items = []
    for k, v in obj.items():
        if isinstance(v, list) and v and isinstance(v[0], (list, dict)):
            body = ",\n".join(f"    {_compact(e)}" for e in v)
            items.append(f"  {json.dumps(k)}: [\n{body}\n  ]")
        else:
            items.append(f"  {json.dumps(k)}: {_compact(v)}")
    return "{\n" + ",\n".join(items) + "\n}\n"


def _write(path: PathLike, obj: Any) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def _read(path: PathLike) -> dict:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise FormatError(f"{path}: top level must be an object")
    return data


def _field(data: dict, name: str, source: str):
    if name not in data:
        raise FormatError(f"{source}: missing field '{name}'")
    return data[name]


def _int_field(data: dict, name: str, source: str, minimum: int = 1) -> int:
    val = _field(data, name, source)
    if not isinstance(val, int) or isinstance(val, bool) or val < minimum:
        raise FormatError(f"{source}: field '{name}' must be an integer >= {minimum}, got {val!r}")
    return val


# ---------------------------------------------------------------------------
# games


def game_to_dict(g: GameSpec) -> dict:
    return {
        "x_count": g.x_count,
        "y_count": g.y_count,
        "forbidden": [list(t) for t in g.forbidden],
    }


def save_game(g: GameSpec, path: PathLike) -> Path:
    return _write(path, game_to_dict(g))


def game_from_dict(data: dict, source: str = "<game>") -> GameSpec:
    x = _int_field(data, "x_count", source)
    y = _int_field(data, "y_count", source)
    forb = _field(data, "forbidden", source)
    if not isinstance(forb, list):
        raise FormatError(f"{source}: field 'forbidden' must be a list")
    seen = set()
    for k, entry in enumerate(forb):
        where = f"{source}: forbidden[{k}]"
        if not (isinstance(entry, list) and len(entry) == 4 and all(isinstance(i, int) for i in entry)):
            raise FormatError(f"{where}: expected [x, y, a, b] of integers, got {entry!r}")
        xx, yy, a, b = entry
        if not (0 <= xx < x and 0 <= yy < y and a in (0, 1) and b in (0, 1)):
            raise FormatError(f"{where}: index out of range in {entry!r}")
        if tuple(entry) in seen:
            raise FormatError(f"{where}: duplicate tuple {entry!r}")
        seen.add(tuple(entry))
    return GameSpec.from_forbidden(x, y, forb)


def load_game(path: PathLike) -> GameSpec:
    return game_from_dict(_read(path), str(path))


# ---------------------------------------------------------------------------
# finite strategies


def _cpx(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _matrix_out(m: np.ndarray) -> list:
    return [[_cpx(z) for z in row] for row in np.asarray(m)]


def _complex_in(v, where: str) -> complex:
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v)):
        raise FormatError(f"{where}: expected [re, im], got {v!r}")
    return complex(v[0], v[1])


def strategy_to_dict(s: FiniteStrategy) -> dict:
    return {
        "dim": s.dim,
        "E0": [_matrix_out(m) for m in s.E0],
        "F0": [_matrix_out(m) for m in s.F0],
        "psi": [_cpx(z) for z in s.psi],
    }


def save_strategy(s: FiniteStrategy, path: PathLike) -> Path:
    return _write(path, strategy_to_dict(s))


def strategy_from_dict(data: dict, source: str = "<strategy>") -> FiniteStrategy:
    dim = _int_field(data, "dim", source)

    def matrices(name):
        mats = _field(data, name, source)
        if not isinstance(mats, list) or not mats:
            raise FormatError(f"{source}: field '{name}' must be a non-empty list of matrices")
        out = []
        for q, m in enumerate(mats):
            where = f"{source}: {name}[{q}]"
            if not (isinstance(m, list) and len(m) == dim and all(isinstance(r, list) and len(r) == dim for r in m)):
                raise FormatError(f"{where}: expected a {dim}x{dim} matrix")
            out.append(np.array([[_complex_in(z, where) for z in row] for row in m]))
        return tuple(out)

    E0, F0 = matrices("E0"), matrices("F0")
    psi = _field(data, "psi", source)
    if not (isinstance(psi, list) and len(psi) == dim):
        raise FormatError(f"{source}: field 'psi' must have length {dim}")
    vec = np.array([_complex_in(z, f"{source}: psi") for z in psi])
    return FiniteStrategy(dim, E0, F0, vec)


def load_strategy(path: PathLike) -> FiniteStrategy:
    return strategy_from_dict(_read(path), str(path))


# ---------------------------------------------------------------------------
# classical strategies


def classical_to_dict(s: ClassicalStrategy, extraction: ExtractionResult | None = None) -> dict:
    out: dict[str, Any] = {"u": list(s.u), "v": list(s.v)}
    if extraction is not None:
        ctx = extraction.context
        out["k"] = list(ctx.k)
        out["l"] = list(ctx.l)
        out["correlations"] = [
            {"x": x, "y": y, "a": s.u[x], "b": s.v[y], "value": float(c)}
            for (x, y), c in sorted(extraction.correlations.items())
        ]
    return out


def save_classical(s: ClassicalStrategy, path: PathLike, extraction: ExtractionResult | None = None) -> Path:
    return _write(path, classical_to_dict(s, extraction))


def load_classical(path: PathLike) -> ClassicalStrategy:
    data = _read(path)
    u, v = _field(data, "u", str(path)), _field(data, "v", str(path))
    try:
        return ClassicalStrategy(tuple(u), tuple(v))
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# certificates


def _num_out(c) -> Union[float, str]:
    if isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}"
    return float(c)


def _num_in(c, exact: bool, where: str):
    if exact:
        if not isinstance(c, (str, int)):
            raise FormatError(f"{where}: exact entries must be 'p/q' strings, got {c!r}")
        try:
            return Fraction(c)
        except (ValueError, ZeroDivisionError):
            raise FormatError(f"{where}: bad rational {c!r}") from None
    if not isinstance(c, (int, float)) or isinstance(c, bool):
        raise FormatError(f"{where}: expected a number, got {c!r}")
    return float(c)


def _word_in(text, where: str) -> GroupWord:
    if not isinstance(text, str):
        raise FormatError(f"{where}: expected a word string, got {text!r}")
    try:
        return GroupWord.parse(text)
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from None


def certificate_to_dict(c: SOSCertificate) -> dict:
    return {
        "format": "sos-certificate",
        "degree": c.degree,
        "x_count": c.x_count,
        "y_count": c.y_count,
        "forbidden": [list(t) for t in c.forbidden],
        "exact": c.exact,
        "basis": [str(w) for w in c.basis],
        "gram": [[_num_out(v) for v in row] for row in c.gram],
        "multipliers": [[str(w), int(i), _num_out(v)] for w, i, v in c.multipliers],
    }


def save_certificate(c: SOSCertificate, path: PathLike) -> Path:
    return _write(path, certificate_to_dict(c))


def certificate_from_dict(data: dict, source: str = "<certificate>") -> SOSCertificate:
    d = _int_field(data, "degree", source)
    x = _int_field(data, "x_count", source)
    y = _int_field(data, "y_count", source)
    exact = bool(_field(data, "exact", source))
    forb = tuple(tuple(t) for t in _field(data, "forbidden", source))
    basis = tuple(_word_in(w, f"{source}: basis[{k}]") for k, w in enumerate(_field(data, "basis", source)))
    if list(basis) != words_up_to(d, x, y):
        raise FormatError(f"{source}: basis is not the canonical degree-{d} word basis")
    rows = _field(data, "gram", source)
    N = len(basis)
    if not (isinstance(rows, list) and len(rows) == N and all(isinstance(r, list) and len(r) == N for r in rows)):
        raise FormatError(f"{source}: gram must be a {N}x{N} array")
    gram_vals = [[_num_in(v, exact, f"{source}: gram[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(rows)]
    gram = tuple(tuple(r) for r in gram_vals) if exact else np.array(gram_vals, dtype=float)
    mults = []
    for k, entry in enumerate(_field(data, "multipliers", source)):
        where = f"{source}: multipliers[{k}]"
        if not (isinstance(entry, list) and len(entry) == 3):
            raise FormatError(f"{where}: expected [word, index, coefficient]")
        w, i, c = entry
        if not isinstance(i, int) or not 0 <= i < len(forb):
            raise FormatError(f"{where}: invalid-set index {i!r} out of range")
        mults.append((_word_in(w, where), i, _num_in(c, exact, where)))
    return SOSCertificate(d, basis, gram, tuple(mults), x, y, forb)


def load_certificate(path: PathLike) -> SOSCertificate:
    return certificate_from_dict(_read(path), str(path))


# ---------------------------------------------------------------------------
# moment vectors


def moments_to_dict(m: MomentVector, x_count: int, y_count: int) -> dict:
    words = words_up_to(2 * m.degree, x_count, y_count)
    return {
        "format": "moment-vector",
        "degree": m.degree,
        "x_count": x_count,
        "y_count": y_count,
        "values": [[str(w), float(m.values[w])] for w in words],
    }


def save_moments(m: MomentVector, path: PathLike, x_count: int, y_count: int) -> Path:
    return _write(path, moments_to_dict(m, x_count, y_count))


def moments_from_dict(data: dict, source: str = "<moments>") -> tuple[MomentVector, tuple[int, int]]:
    d = _int_field(data, "degree", source)
    x = _int_field(data, "x_count", source)
    y = _int_field(data, "y_count", source)
    values = {}
    for k, entry in enumerate(_field(data, "values", source)):
        where = f"{source}: values[{k}]"
        if not (isinstance(entry, list) and len(entry) == 2):
            raise FormatError(f"{where}: expected [word, value]")
        w = _word_in(entry[0], where)
        if not w.fits(x, y) or len(w) > 2 * d:
            raise FormatError(f"{where}: word {w} outside the degree-{d} alphabet ({x}, {y})")
        values[w] = _num_in(entry[1], False, where)
    expected = set(words_up_to(2 * d, x, y))
    if set(values) != expected:
        raise FormatError(f"{source}: values must list every word of length <= {2 * d} exactly once")
    return MomentVector(d, values), (x, y)


def load_moments(path: PathLike) -> tuple[MomentVector, tuple[int, int]]:
    return moments_from_dict(_read(path), str(path))

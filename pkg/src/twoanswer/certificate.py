"""Bounded-degree Nullstellensatz certificates and truncated moment problems.

At degree ``d`` the question "is ``-1`` in ``SOS + L(N) + L(N)*``" is the
dual of a moment problem: find a unital, star-symmetric functional on words
of length at most ``2d`` whose moment matrix over ``words_up_to(d)`` is PSD
and which vanishes on ``w * n`` for every invalid element ``n`` and every
word ``w`` with ``len(w) <= 2d - 2``.

The moment problem is solved as ``max t  s.t.  M(f) - t I >= 0``. A
non-negative optimum yields a feasible moment vector; a negative optimum
comes with a PSD dual matrix from which a certificate is rebuilt and checked
symbolically. Infeasibility is only reported through a verified certificate.

Because every basis word ``u`` is a group element, ``u* u = 1`` and the
diagonal of the moment matrix is pinned to ``f(1) = 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import cvxpy as cp
import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .extraction import FiniteStrategy, ValidationReport, validate_strategy
from .game import ClassicalStrategy, GameSpec, invalid_set, rho_word
from .group_algebra import (
    IDENTITY,
    AlgebraElement,
    GroupWord,
    word_mul,
    word_star,
    words_up_to,
)

__all__ = [
    "MomentProblem",
    "MomentVector",
    "SOSCertificate",
    "SolveResult",
    "CertificateReport",
    "GNSResult",
    "ArchimedeanWitness",
    "DimensionLimitError",
    "CertificateExtractionError",
    "ExactificationError",
    "build_moment_problem",
    "check_moments",
    "solve_feasibility",
    "extract_certificate",
    "verify_certificate",
    "expand_certificate",
    "embed_certificate",
    "forbidden_block_certificate",
    "truncated_gns",
    "archimedean_witness",
    "rho_moments",
    "mix_moments",
    "moment_matrix",
    "is_psd_exact",
    "certify_hierarchy",
    "MAX_MATRIX_SIDE",
]

MAX_MATRIX_SIDE = 400
DEFAULT_EPS = 1e-7
VERIFY_TOL = 1e-6
RANK_TOL = 1e-9
DEFAULT_DENOMINATOR = 10**6


class DimensionLimitError(ValueError):
    pass


class CertificateExtractionError(RuntimeError):
    pass


class ExactificationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# problem construction


def _class_rep(w: GroupWord) -> GroupWord:
    s = word_star(w)
    return min(w, s, key=GroupWord.sort_key)


@dataclass(frozen=True, eq=False)
class MomentProblem:
    """Data of the degree-``d`` moment problem for a game."""

    game: GameSpec
    degree: int
    basis: tuple  # words_up_to(degree)
    words: tuple  # words_up_to(2 * degree)
    classes: tuple  # star-class representatives, variables of the SDP
    class_of: dict = field(repr=False)  # word -> variable index
    index: np.ndarray = field(repr=False)  # (N, N) variable index of star(u) v
    ideal_keys: tuple = field(repr=False)  # (w, i) per constraint row
    ideal_matrix: np.ndarray = field(repr=False)  # rows over variables
    ideal_rank_rows: tuple = field(repr=False, default=())  # linearly independent subset handed to the solver

    @property
    def side(self) -> int:
        return len(self.basis)

    @property
    def alphabet(self) -> tuple[int, int]:
        return (self.game.x_count, self.game.y_count)

    def describe(self) -> dict:
        return {
            "degree": self.degree,
            "matrix_side": self.side,
            "variables": len(self.classes),
            "ideal_constraints": len(self.ideal_keys),
            "ideal_rank": len(self.ideal_rank_rows),
        }


def _element_terms(el: AlgebraElement) -> list[tuple[GroupWord, Fraction]]:
    out = []
    for w, c in el.items():
        if c.im != 0:
            raise ValueError("invalid-set elements are expected to have real coefficients")
        out.append((w, c.re))
    return out


def build_moment_problem(g: GameSpec, d: int, max_side: int = MAX_MATRIX_SIDE) -> MomentProblem:
    if d < 1:
        raise ValueError("degree must be at least 1")
    X, Y = g.x_count, g.y_count
    basis = tuple(words_up_to(d, X, Y))
    if len(basis) > max_side:
        raise DimensionLimitError(f"moment matrix side {len(basis)} exceeds limit {max_side}")
    words = tuple(words_up_to(2 * d, X, Y))
    reps: list[GroupWord] = []
    rep_index: dict[GroupWord, int] = {}
    class_of: dict[GroupWord, int] = {}
    for w in words:
        r = _class_rep(w)
        if r not in rep_index:
            rep_index[r] = len(reps)
            reps.append(r)
        class_of[w] = rep_index[r]

    N = len(basis)
    index = np.empty((N, N), dtype=np.int64)
    for i, u in enumerate(basis):
        su = word_star(u)
        for j, v in enumerate(basis):
            index[i, j] = class_of[word_mul(su, v)]

    rows: list[np.ndarray] = []
    keys: list[tuple[GroupWord, int]] = []
    seen = set()
    invalid = [_element_terms(n) for n in invalid_set(g)]
    for w in words_up_to(2 * d - 2, X, Y):
        for i, terms in enumerate(invalid):
            row = np.zeros(len(reps))
            for t, c in terms:
                row[class_of[word_mul(w, t)]] += float(c)
            key = row.tobytes()
            if key in seen or not row.any():
                continue
            seen.add(key)
            rows.append(row)
            keys.append((w, i))
    ideal = np.array(rows) if rows else np.zeros((0, len(reps)))
    return MomentProblem(
        g, d, basis, words, tuple(reps), class_of, index, tuple(keys), ideal, _independent_rows(ideal)
    )


def _independent_rows(C: np.ndarray, rel: float = 1e-9) -> tuple:
    # redundant equality rows make the interior-point KKT system singular
    if C.shape[0] == 0:
        return ()
    _, R, piv = sla.qr(C.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int((diag > rel * diag.max()).sum())
    return tuple(sorted(int(i) for i in piv[:rank]))


# ---------------------------------------------------------------------------
# moment vectors


@dataclass(frozen=True, eq=False)
class MomentVector:
    """A real functional on words of length at most ``2 * degree``."""

    degree: int
    values: dict  # GroupWord -> float

    def value(self, w: GroupWord) -> float:
        return self.values[w]

    def __eq__(self, other):
        if not isinstance(other, MomentVector):
            return NotImplemented
        return self.degree == other.degree and self.values == other.values

    __hash__ = None


def moment_matrix(m: MomentVector, basis: Sequence[GroupWord]) -> np.ndarray:
    N = len(basis)
    M = np.empty((N, N))
    for i, u in enumerate(basis):
        su = word_star(u)
        for j, v in enumerate(basis):
            M[i, j] = m.values[word_mul(su, v)]
    return M


def rho_moments(s: ClassicalStrategy, d: int) -> MomentVector:
    """Rank-one moment vector of the character induced by ``s``."""
    X, Y = len(s.u), len(s.v)
    return MomentVector(d, {w: float(rho_word(s, w)) for w in words_up_to(2 * d, X, Y)})


def mix_moments(parts: Iterable[tuple[float, MomentVector]]) -> MomentVector:
    parts = list(parts)
    d = parts[0][1].degree
    if any(m.degree != d for _, m in parts):
        raise ValueError("all moment vectors must share a degree")
    total = sum(w for w, _ in parts)
    values = {
        k: math.fsum(w * m.values[k] for w, m in parts) / total for k in parts[0][1].values
    }
    return MomentVector(d, values)


def check_moments(problem: MomentProblem, m: MomentVector) -> dict[str, float]:
    """Residuals of a moment vector against the constraints of ``problem``."""
    if m.degree != problem.degree:
        raise ValueError(f"moment degree {m.degree} does not match problem degree {problem.degree}")
    missing = [w for w in problem.words if w not in m.values]
    if missing:
        raise ValueError(f"moment vector lacks value for word {missing[0]}")
    M = moment_matrix(m, problem.basis)
    sym = max(abs(m.values[w] - m.values[word_star(w)]) for w in problem.words)
    invalid = [_element_terms(n) for n in invalid_set(problem.game)]
    ideal = 0.0
    for w, i in problem.ideal_keys:
        val = math.fsum(float(c) * m.values[word_mul(w, t)] for t, c in invalid[i])
        ideal = max(ideal, abs(val))
    lam = float(np.linalg.eigvalsh((M + M.T) / 2).min())
    return {
        "unital_residual": abs(m.values[IDENTITY] - 1.0),
        "symmetry_residual": sym,
        "psd_violation": max(0.0, -lam),
        "ideal_residual": ideal,
    }


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True, eq=False)
class SOSCertificate:
    """``sum gram[u,v] u* v + sum c (w n_i + (w n_i)*) = -1``.

    ``multipliers`` holds ``(w, i, c)`` where ``i`` indexes ``game.forbidden``.
    Coefficients are floats, or ``Fraction`` for an exactified certificate.
    """

    degree: int
    basis: tuple
    gram: object  # np.ndarray (float) or tuple of tuples of Fraction
    multipliers: tuple
    x_count: int
    y_count: int
    forbidden: tuple

    @property
    def exact(self) -> bool:
        return not isinstance(self.gram, np.ndarray)

    def gram_float(self) -> np.ndarray:
        return np.array([[float(c) for c in row] for row in self.gram], dtype=float)

    def matches(self, g: GameSpec) -> bool:
        return (self.x_count, self.y_count) == (g.x_count, g.y_count) and list(self.forbidden) == g.forbidden


def _bind(cert: SOSCertificate, g: GameSpec):
    if not cert.matches(g):
        raise ValueError("certificate was built for a different game")


def _expand_coeffs(cert: SOSCertificate, g: GameSpec, exact: bool) -> dict[GroupWord, object]:
    zero = Fraction(0) if exact else 0.0
    conv = (lambda c: Fraction(c)) if exact else float
    acc: dict[GroupWord, object] = {}

    def add(w, c):
        acc[w] = acc.get(w, zero) + c

    for i, u in enumerate(cert.basis):
        su = word_star(u)
        row = cert.gram[i]
        for j, v in enumerate(cert.basis):
            c = conv(row[j])
            if c:
                add(word_mul(su, v), c)
    invalid = [_element_terms(n) for n in invalid_set(g)]
    for w, i, c in cert.multipliers:
        c = conv(c)
        if not c:
            continue
        for t, tc in invalid[i]:
            wt = word_mul(w, t)
            add(wt, c * conv(tc))
            add(word_star(wt), c * conv(tc))
    return acc


def expand_certificate(cert: SOSCertificate, g: GameSpec, exact: bool = False) -> AlgebraElement:
    """The algebra element a certificate represents (should equal ``-1``)."""
    _bind(cert, g)
    if exact and not cert.exact:
        cert = _rationalize(cert, None)
    acc = _expand_coeffs(cert, g, exact)
    return AlgebraElement(acc, g.x_count, g.y_count, exact=exact)


def embed_certificate(cert: SOSCertificate, d: int) -> SOSCertificate:
    """The same certificate written over the larger basis ``words_up_to(d)``."""
    if d < cert.degree:
        raise ValueError("can only embed into a higher degree")
    basis = tuple(words_up_to(d, cert.x_count, cert.y_count))
    pos = {w: i for i, w in enumerate(basis)}
    N = len(basis)
    if cert.exact:
        G = [[Fraction(0)] * N for _ in range(N)]
        for i, u in enumerate(cert.basis):
            for j, v in enumerate(cert.basis):
                G[pos[u]][pos[v]] = cert.gram[i][j]
        gram = tuple(tuple(r) for r in G)
    else:
        gram = np.zeros((N, N))
        idx = [pos[u] for u in cert.basis]
        gram[np.ix_(idx, idx)] = cert.gram
    return SOSCertificate(d, basis, gram, cert.multipliers, cert.x_count, cert.y_count, cert.forbidden)


def forbidden_block_certificate(g: GameSpec) -> SOSCertificate:
    """Degree-1 certificate for a game that forbids all four answers somewhere.

    With ``n_1..n_4`` the invalid elements at that question pair,
    ``n_1 + ... + n_4 = 1`` and each ``n_i`` is self-adjoint, so
    ``-1 = 1 + sum(-n_i) + sum(-n_i)*`` with gram ``[1]`` on the basis ``{1}``.
    """
    forb = g.forbidden
    for x in range(g.x_count):
        for y in range(g.y_count):
            idx = [forb.index((x, y, a, b)) for a in (0, 1) for b in (0, 1) if (x, y, a, b) in forb]
            if len(idx) == 4:
                mults = tuple((IDENTITY, i, Fraction(-1)) for i in idx)
                return SOSCertificate(
                    1, (IDENTITY,), ((Fraction(1),),), mults, g.x_count, g.y_count, tuple(forb)
                )
    raise ValueError("game has no question pair with all four answers forbidden")


def _ideal_columns(problem: MomentProblem, word_pos: dict) -> tuple[np.ndarray, list]:
    """Columns of ``w n_i + (w n_i)*`` over all words, one per multiplier."""
    invalid = [_element_terms(n) for n in invalid_set(problem.game)]
    X, Y = problem.alphabet
    mult_words = words_up_to(2 * problem.degree - 2, X, Y)
    keys = []
    rows, cols, vals = [], [], []
    for w in mult_words:
        for i, terms in enumerate(invalid):
            col = len(keys)
            keys.append((w, i))
            for t, c in terms:
                wt = word_mul(w, t)
                for z in (wt, word_star(wt)):
                    rows.append(word_pos[z])
                    cols.append(col)
                    vals.append(float(c))
    T = sp.coo_matrix((vals, (rows, cols)), shape=(len(word_pos), len(keys))).toarray()
    return T, keys


def _sos_column(problem: MomentProblem, gram: np.ndarray, word_pos: dict) -> np.ndarray:
    out = np.zeros(len(word_pos))
    for i, u in enumerate(problem.basis):
        su = word_star(u)
        for j, v in enumerate(problem.basis):
            out[word_pos[word_mul(su, v)]] += gram[i, j]
    return out


def extract_certificate(
    dual_psd: Optional[np.ndarray],
    problem: MomentProblem,
    tol: float = VERIFY_TOL,
    margin: Optional[float] = None,
) -> SOSCertificate:
    """Turn the PSD dual of an infeasible moment problem into a certificate.

    The dual matrix fixes the gram direction; its scale and the ideal
    multipliers come from a least-squares fit of the identity. The gram is
    then shifted by ``margin * I`` and renormalised, which keeps the identity
    (``u* u = 1`` for basis words) while making the gram strictly positive
    definite so it survives rational rounding.
    """
    N = problem.side
    Z = np.zeros((N, N)) if dual_psd is None else np.asarray(dual_psd, dtype=float)
    Z = (Z + Z.T) / 2
    w, Q = np.linalg.eigh(Z)
    clipped = float(max(0.0, -w.min())) if w.size else 0.0
    Z = (Q * np.clip(w, 0.0, None)) @ Q.T

    word_pos = {wd: i for i, wd in enumerate(problem.words)}
    T, keys = _ideal_columns(problem, word_pos)
    sos = _sos_column(problem, Z, word_pos)
    target = np.zeros(len(word_pos))
    target[word_pos[IDENTITY]] = -1.0
    A = np.column_stack([sos, T]) if T.size else sos[:, None]
    sol, *_ = np.linalg.lstsq(A, target, rcond=None)
    scale, mult = float(sol[0]), sol[1:]
    if scale < -1e-9:
        raise CertificateExtractionError(f"dual matrix enters with negative scale {scale:.3e}")
    gram = max(scale, 0.0) * Z
    if margin is None:
        margin = min(1e-3, 0.1 / N)
    shrink = 1.0 - margin * N
    gram = (gram + margin * np.eye(N)) / shrink
    mult = mult / shrink
    gram = (gram + gram.T) / 2

    multipliers = tuple(
        (keys[k][0], keys[k][1], float(c)) for k, c in enumerate(mult) if abs(c) > 1e-15
    )
    g = problem.game
    cert = SOSCertificate(
        problem.degree, problem.basis, gram, multipliers, g.x_count, g.y_count, tuple(g.forbidden)
    )
    report = verify_certificate(cert, g, mode="float", tol=tol)
    if not report.passed:
        raise CertificateExtractionError(
            f"rebuilt certificate misses the identity by {report.coefficient_residual:.3e} "
            f"(min eigenvalue {report.min_eigenvalue:.3e}, clipped {clipped:.3e})"
        )
    return cert


# ---------------------------------------------------------------------------
# exact verification


def is_psd_exact(A: Sequence[Sequence[Fraction]]) -> tuple[bool, list[Fraction]]:
    """Exact PSD test by symmetric LDL^T with diagonal pivoting.

    Returns ``(is_psd, pivots)``; ``pivots`` are the diagonal entries of ``D``
    met before the test stopped.
    """
    n = len(A)
    M = [list(map(Fraction, row)) for row in A]
    for i in range(n):
        for j in range(i):
            if M[i][j] != M[j][i]:
                return False, []
    remaining = list(range(n))
    pivots: list[Fraction] = []
    while remaining:
        p = max(remaining, key=lambda i: M[i][i])
        piv = M[p][p]
        if piv < 0:
            return False, pivots
        remaining.remove(p)
        if piv == 0:
            if any(M[p][j] != 0 for j in remaining):
                return False, pivots
            pivots.append(piv)
            continue
        pivots.append(piv)
        col = {j: M[j][p] for j in remaining if M[j][p] != 0}
        for j, mj in col.items():
            f = mj / piv
            row = M[j]
            for k, mk in col.items():
                row[k] -= f * mk
    return True, pivots


def _rationalize(cert: SOSCertificate, max_den: Optional[int]) -> SOSCertificate:
    def q(c):
        c = Fraction(c)
        return c.limit_denominator(max_den) if max_den else c

    G = cert.gram
    N = len(cert.basis)
    rows = [[Fraction(0)] * N for _ in range(N)]
    for i in range(N):
        for j in range(i, N):
            rows[i][j] = rows[j][i] = q(G[i][j])
    mults = tuple((w, i, q(c)) for w, i, c in cert.multipliers)
    return SOSCertificate(
        cert.degree, cert.basis, tuple(tuple(r) for r in rows), mults, cert.x_count, cert.y_count, cert.forbidden
    )


def _project_gram(basis, gram_rows, target: dict[GroupWord, Fraction]) -> tuple:
    """Exact orthogonal projection of a gram onto ``{G : sum_{u* v = w} G[u,v] = target[w]}``."""
    N = len(basis)
    pairs: dict[GroupWord, list[tuple[int, int]]] = {}
    for i, u in enumerate(basis):
        su = word_star(u)
        for j, v in enumerate(basis):
            pairs.setdefault(word_mul(su, v), []).append((i, j))
    G = [list(r) for r in gram_rows]
    for w in set(pairs) | set(target):
        want = target.get(w, Fraction(0))
        if w not in pairs:
            if want != 0:
                raise ExactificationError(f"word {w} cannot be produced by the gram basis")
            continue
        have = sum((G[i][j] for i, j in pairs[w]), Fraction(0))
        if have != want:
            delta = (want - have) / len(pairs[w])
            for i, j in pairs[w]:
                G[i][j] += delta
    for i in range(N):
        for j in range(i):
            if G[i][j] != G[j][i]:
                raise ExactificationError("projected gram lost symmetry")
    return tuple(tuple(r) for r in G)


def _exactify(cert: SOSCertificate, g: GameSpec, max_den: int) -> SOSCertificate:
    rq = _rationalize(cert, max_den)
    # identity the gram has to reproduce once the multipliers are fixed
    ideal_only = SOSCertificate(
        rq.degree, rq.basis, tuple(tuple(Fraction(0) for _ in r) for r in rq.gram),
        rq.multipliers, rq.x_count, rq.y_count, rq.forbidden,
    )
    ideal = _expand_coeffs(ideal_only, g, exact=True)
    target = {w: -c for w, c in ideal.items()}
    target[IDENTITY] = target.get(IDENTITY, Fraction(0)) - 1
    gram = _project_gram(rq.basis, rq.gram, target)
    return SOSCertificate(rq.degree, rq.basis, gram, rq.multipliers, rq.x_count, rq.y_count, rq.forbidden)


@dataclass(frozen=True, eq=False)
class CertificateReport:
    mode: str
    passed: bool
    coefficient_residual: float
    min_eigenvalue: float
    worst_word: Optional[GroupWord] = None
    witness: Optional[SOSCertificate] = None
    pivots: tuple = ()
    message: str = ""

    def residuals(self) -> dict[str, float]:
        return {"coefficient_residual": self.coefficient_residual, "min_eigenvalue": self.min_eigenvalue}


def verify_certificate(
    cert: SOSCertificate,
    g: GameSpec,
    mode: str = "float",
    tol: float = VERIFY_TOL,
    max_denominator: int = DEFAULT_DENOMINATOR,
) -> CertificateReport:
    """Check that a certificate expands to ``-1`` with a PSD gram.

    ``mode="float"`` reports the largest coefficient deviation and the least
    gram eigenvalue. ``mode="exact"`` rounds to rationals, restores the
    identity exactly by projecting the gram, and certifies PSD-ness with an
    exact LDL^T; it raises :class:`ExactificationError` when a numerically
    valid certificate cannot be made exact.
    """
    if mode not in ("float", "exact"):
        raise ValueError("mode is 'float' or 'exact'")
    _bind(cert, g)
    acc = _expand_coeffs(cert, g, exact=cert.exact)
    acc[IDENTITY] = acc.get(IDENTITY, 0) + 1
    worst, resid = None, 0.0
    for w, c in acc.items():
        if abs(float(c)) > resid:
            worst, resid = w, abs(float(c))
    gf = cert.gram_float()
    min_eig = float(np.linalg.eigvalsh(gf).min()) if gf.size else 0.0
    float_ok = resid <= tol and min_eig >= -tol
    if mode == "float":
        return CertificateReport("float", float_ok, resid, min_eig, worst)

    if not float_ok and not cert.exact:
        return CertificateReport(
            "exact", False, resid, min_eig, worst, message="certificate fails numerically; not exactified"
        )
    exact_cert = cert if cert.exact else _exactify(cert, g, max_denominator)
    acc = _expand_coeffs(exact_cert, g, exact=True)
    acc[IDENTITY] = acc.get(IDENTITY, Fraction(0)) + 1
    residue = {w: c for w, c in acc.items() if c != 0}
    psd, pivots = is_psd_exact(exact_cert.gram)
    exact_min = float(np.linalg.eigvalsh(exact_cert.gram_float()).min())
    if residue:
        w, c = max(residue.items(), key=lambda kv: abs(kv[1]))
        if not cert.exact:
            raise ExactificationError(f"exact identity not closed at word {w}")
        return CertificateReport("exact", False, float(abs(c)), exact_min, w, exact_cert, tuple(pivots),
                                 "identity does not hold exactly")
    if not psd:
        if not cert.exact:
            raise ExactificationError("rounded gram is not positive semidefinite")
        return CertificateReport("exact", False, 0.0, exact_min, None, exact_cert, tuple(pivots),
                                 "gram is not positive semidefinite")
    return CertificateReport("exact", True, 0.0, exact_min, None, exact_cert, tuple(pivots), "exact identity verified")


# ---------------------------------------------------------------------------
# solving


@dataclass(frozen=True, eq=False)
class SolveResult:
    status: str  # "feasible" | "infeasible" | "undetermined"
    moments: Optional[MomentVector] = None
    certificate: Optional[SOSCertificate] = None
    iterations: int = 0
    residuals: dict = field(default_factory=dict)
    objective: Optional[float] = None
    dual: Optional[np.ndarray] = field(default=None, repr=False)
    seed: int = 0
    message: str = ""


def _psd_sparse_map(problem: MomentProblem) -> sp.csr_matrix:
    N = problem.side
    m = len(problem.classes)
    rows = np.arange(N * N)
    return sp.csr_matrix((np.ones(N * N), (rows, problem.index.reshape(-1))), shape=(N * N, m))


def solve_feasibility(
    problem: MomentProblem,
    eps: float = DEFAULT_EPS,
    max_iterations: int = 200,
    seed: int = 0,
    verify_tol: float = VERIFY_TOL,
) -> SolveResult:
    """Decide the degree-``d`` problem: feasible moments, a certificate, or undetermined.

    The interior-point solve is deterministic, so ``seed`` only travels into
    the result for bookkeeping.
    """
    N = problem.side
    m = len(problem.classes)
    if _unit_in_ideal_span(problem):
        # f(1) = 1 contradicts the ideal equations alone; no conic solve needed
        return _certificate_result(None, problem, None, 0, seed, verify_tol)
    f = cp.Variable(m)
    t = cp.Variable()
    P = _psd_sparse_map(problem)
    one = problem.class_of[IDENTITY]
    # M(f) is symmetric by construction (star(u) v and star(v) u share a class)
    psd = cp.reshape(P @ f, (N, N), order="C") - t * np.eye(N) >> 0
    cons = [psd, f[one] == 1]
    if problem.ideal_rank_rows:
        cons.append(problem.ideal_matrix[list(problem.ideal_rank_rows)] @ f == 0)
    prob = cp.Problem(cp.Maximize(t), cons)
    try:
        with warnings.catch_warnings():
            # inaccurate solves are reported through the status and the float verification
            warnings.filterwarnings("ignore", message="Solution may be inaccurate")
            prob.solve(solver=cp.CLARABEL, max_iter=max_iterations)
    except cp.error.SolverError as exc:
        return SolveResult("undetermined", seed=seed, message=f"solver error: {exc}")
    iters = int(getattr(prob.solver_stats, "num_iters", 0) or 0)
    status = prob.status
    if status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) and t.value is not None:
        t_opt = float(t.value)
        if t_opt >= -eps:
            values = {w: float(f.value[problem.class_of[w]]) for w in problem.words}
            mv = MomentVector(problem.degree, values)
            res = check_moments(problem, mv)
            if max(res.values()) <= eps:
                return SolveResult("feasible", moments=mv, iterations=iters, residuals=res,
                                   objective=t_opt, seed=seed)
            return SolveResult("undetermined", iterations=iters, residuals=res, objective=t_opt, seed=seed,
                               message="moment vector residuals exceed eps")
        dual = None if psd.dual_value is None else np.asarray(psd.dual_value)
    elif status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        # linear constraints alone are inconsistent; the ideal part carries the certificate
        t_opt = None
        dual = None if psd.dual_value is None else np.asarray(psd.dual_value)
    else:
        return SolveResult("undetermined", iterations=iters, seed=seed, message=f"solver status {status}")

    return _certificate_result(dual, problem, t_opt, iters, seed, verify_tol)


def _unit_in_ideal_span(problem: MomentProblem, tol: float = 1e-9) -> bool:
    rows = list(problem.ideal_rank_rows)
    if not rows:
        return False
    C = problem.ideal_matrix[rows]
    e = np.zeros(C.shape[1])
    e[problem.class_of[IDENTITY]] = 1.0
    y, *_ = np.linalg.lstsq(C.T, e, rcond=None)
    return float(np.linalg.norm(C.T @ y - e)) <= tol


def _certificate_result(dual, problem, t_opt, iters, seed, verify_tol) -> SolveResult:
    try:
        cert = extract_certificate(dual, problem, tol=verify_tol)
    except CertificateExtractionError as exc:
        return SolveResult("undetermined", iterations=iters, objective=t_opt, dual=dual, seed=seed,
                           message=str(exc))
    rep = verify_certificate(cert, problem.game, "float", tol=verify_tol)
    return SolveResult("infeasible", certificate=cert, iterations=iters, residuals=rep.residuals(),
                       objective=t_opt, dual=dual, seed=seed)


def certify_hierarchy(
    g: GameSpec, degrees: Sequence[int] = (1, 2, 3), max_side: int = MAX_MATRIX_SIDE, **kw
) -> list[tuple[int, SolveResult]]:
    """Solve at each degree in turn, stopping at the first verified infeasibility."""
    out = []
    for d in degrees:
        res = solve_feasibility(build_moment_problem(g, d, max_side=max_side), **kw)
        out.append((d, res))
        if res.status == "infeasible":
            break
    return out


# ---------------------------------------------------------------------------
# truncated GNS


@dataclass(frozen=True, eq=False)
class GNSResult:
    strategy: FiniteStrategy
    flat: bool
    rank: int
    rank_lower: int
    residuals: dict
    validation: ValidationReport

    @property
    def passed(self) -> bool:
        return self.flat and self.validation.passed and max(self.residuals.values()) <= self.validation.tol


def _numeric_rank(eigs: np.ndarray, rel: float) -> int:
    top = eigs.max() if eigs.size else 0.0
    if top <= 0:
        return 0
    return int((eigs > rel * top).sum())


def truncated_gns(
    m: MomentVector, g: GameSpec, rank_tol: float = RANK_TOL, tol: float = VERIFY_TOL
) -> GNSResult:
    """Finite-dimensional representation from a moment vector.

    ``M = V^T V`` gives a vector per word; each generator acts by sending the
    vector of ``w`` to that of ``s w`` for words of length ``d - 1``,
    compressed onto their span. The state is the vector of the identity word.
    """
    d = m.degree
    if d < 2:
        raise ValueError("truncated GNS needs degree at least 2")
    X, Y = g.x_count, g.y_count
    if abs(m.values.get(IDENTITY, 0.0) - 1.0) > 1e-8:
        raise ValueError("moment vector is not unital (f(1) != 1)")
    basis = words_up_to(d, X, Y)
    lower = words_up_to(d - 1, X, Y)
    pos = {w: i for i, w in enumerate(basis)}
    M = moment_matrix(m, basis)
    M = (M + M.T) / 2
    eigs, Q = np.linalg.eigh(M)
    r = _numeric_rank(eigs, rank_tol)
    keep = eigs > rank_tol * eigs.max()
    V = (Q[:, keep] * np.sqrt(eigs[keep])).T  # (r, N)
    low_idx = [pos[w] for w in lower]
    r_low = _numeric_rank(np.linalg.eigvalsh(M[np.ix_(low_idx, low_idx)]), rank_tol)
    flat = r == r_low

    W1 = V[:, low_idx]
    U1, S1, _ = np.linalg.svd(W1, full_matrices=False)
    Qr = U1[:, S1 > math.sqrt(rank_tol) * S1.max()]
    W1_pinv = np.linalg.pinv(W1, rcond=math.sqrt(rank_tol))

    def operator(gen: GroupWord) -> np.ndarray:
        Ws = V[:, [pos[word_mul(gen, w)] for w in lower]]
        return Qr.T @ (Ws @ W1_pinv) @ Qr

    ops_A = [operator(GroupWord((x,), ())) for x in range(X)]
    ops_B = [operator(GroupWord((), (y,))) for y in range(Y)]
    n = Qr.shape[1]
    I = np.eye(n)

    def fro(a):
        return float(np.linalg.norm(a) / math.sqrt(n))

    sa = max(fro(O - O.T) for O in ops_A + ops_B)
    sq = max(fro(O @ O - I) for O in ops_A + ops_B)
    cm = max(fro(a @ b - b @ a) for a in ops_A for b in ops_B)
    psi = Qr.T @ V[:, pos[IDENTITY]]
    sym = [(O + O.T) / 2 for O in ops_A + ops_B]
    E0 = tuple((I + O) / 2 for O in sym[:X])
    F0 = tuple((I + O) / 2 for O in sym[X:])
    strategy = FiniteStrategy(n, E0, F0, psi)
    perfect = 0.0
    for x, y, a, b in g.forbidden:
        perfect = max(perfect, abs(strategy.expect(strategy.E(x, a) @ strategy.F(y, b))))
    residuals = {
        "selfadjoint_residual": sa,
        "involution_residual": sq,
        "commutation_residual": cm,
        "perfectness_residual": perfect,
    }
    return GNSResult(strategy, flat, r, r_low, residuals, validate_strategy(strategy, g, tol))


# ---------------------------------------------------------------------------
# Archimedean bound


@dataclass(frozen=True, eq=False)
class ArchimedeanWitness:
    basis: tuple
    gram: np.ndarray
    residual: float
    min_eigenvalue: float
    exact_gram: Optional[tuple] = None


def archimedean_witness(alpha: AlgebraElement, d: int, tol: float = VERIFY_TOL) -> Optional[ArchimedeanWitness]:
    """Gram matrix for ``|alpha|_1^2 - alpha* alpha`` over ``words_up_to(d)``, if one is found."""
    X, Y = alpha.alphabet
    if alpha.degree() > d:
        raise ValueError(f"degree {d} does not cover element of degree {alpha.degree()}")
    if any(complex(c).imag != 0 for _, c in alpha.items()):
        raise ValueError("only real coefficients are supported")
    norm = alpha.l1_norm()
    p = AlgebraElement.one(X, Y, alpha.exact) * (norm * norm) - alpha.star() * alpha
    basis = tuple(words_up_to(d, X, Y))
    N = len(basis)
    pairs: dict[GroupWord, list[int]] = {}
    for i, u in enumerate(basis):
        su = word_star(u)
        for j, v in enumerate(basis):
            pairs.setdefault(word_mul(su, v), []).append(i * N + j)
    if any(w not in pairs for w in p.support()):
        return None
    G = cp.Variable((N, N), symmetric=True)
    lam = cp.Variable()
    flat = cp.vec(G, order="C")
    cons = [G - lam * np.eye(N) >> 0]
    done = set()
    for w, idx in pairs.items():
        rep = _class_rep(w)
        if rep in done:
            continue
        done.add(rep)
        cons.append(cp.sum(flat[idx]) == float(complex(p.coefficient(w)).real))
    prob = cp.Problem(cp.Maximize(lam), cons)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        return None
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or lam.value is None or lam.value < -tol:
        return None
    gram = (G.value + G.value.T) / 2
    resid = 0.0
    expanded: dict[GroupWord, float] = {}
    for w, idx in pairs.items():
        expanded[w] = float(sum(gram.flat[k] for k in idx))
    for w in set(expanded) | set(p.support()):
        resid = max(resid, abs(expanded.get(w, 0.0) - complex(p.coefficient(w)).real))
    min_eig = float(np.linalg.eigvalsh(gram).min())
    if resid > tol or min_eig < -tol:
        return None
    exact_gram = None
    if alpha.exact:
        target = {w: c.re for w, c in p.items()}
        try:
            rows = [[Fraction(float(c)).limit_denominator(DEFAULT_DENOMINATOR) for c in r] for r in gram]
            for i in range(N):
                for j in range(i):
                    rows[i][j] = rows[j][i]
            cand = _project_gram(basis, rows, target)
            if is_psd_exact(cand)[0]:
                exact_gram = cand
        except ExactificationError:
            exact_gram = None
    return ArchimedeanWitness(basis, gram, resid, min_eig, exact_gram)

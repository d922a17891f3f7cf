"""Finite-dimensional commuting-operator strategies and classical extraction.

A perfect commuting-operator strategy is turned into a perfect deterministic
strategy by completing the shared state to an orthonormal basis, locating for
each observable the first basis vector it has overlap with, and reading off
an answer from the phase of that overlap.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import unitary_group

from .game import ClassicalStrategy, GameSpec, enumerate_perfect, is_perfect_classical

__all__ = [
    "FiniteStrategy",
    "ValidationReport",
    "ExtractionContext",
    "ExtractionResult",
    "ExtractionError",
    "PreconditionError",
    "DegeneracyError",
    "InconsistencyError",
    "DEFAULT_TOL",
    "validate_strategy",
    "correlation",
    "decomposition_check",
    "support",
    "complete_basis",
    "extract_classical",
    "generate_perfect_strategy",
    "strategy_from_classical",
]

DEFAULT_TOL = 1e-8
_BASIS_SKIP = 1e-10


class ExtractionError(RuntimeError):
    pass


class PreconditionError(ExtractionError):
    """The input strategy is not a perfect PVM strategy at the given tolerance."""


class DegeneracyError(ExtractionError):
    """No basis vector has overlap above tolerance with some ``A_x psi`` or ``B_y psi``."""


class InconsistencyError(ExtractionError):
    """The extracted answers have non-positive correlation; the input was not genuinely perfect."""


def _as_matrix(m, dim: int, name: str) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.shape != (dim, dim):
        raise ValueError(f"{name} has shape {arr.shape}, expected {(dim, dim)}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FiniteStrategy:
    """PVMs ``E_0^x``, ``F_0^y`` on ``C^dim`` and a shared state ``psi``.

    The complementary projectors are ``I - E_0^x`` and ``I - F_0^y``.
    """

    dim: int
    E0: tuple
    F0: tuple
    psi: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if len(self.E0) < 1 or len(self.F0) < 1:
            raise ValueError("need at least one question per party")
        E0 = tuple(_as_matrix(m, self.dim, f"E0[{x}]") for x, m in enumerate(self.E0))
        F0 = tuple(_as_matrix(m, self.dim, f"F0[{y}]") for y, m in enumerate(self.F0))
        psi = np.asarray(self.psi, dtype=complex).reshape(-1).copy()
        if psi.shape != (self.dim,):
            raise ValueError(f"psi has length {psi.shape[0]}, expected {self.dim}")
        psi.setflags(write=False)
        object.__setattr__(self, "E0", E0)
        object.__setattr__(self, "F0", F0)
        object.__setattr__(self, "psi", psi)

    @property
    def x_count(self) -> int:
        return len(self.E0)

    @property
    def y_count(self) -> int:
        return len(self.F0)

    def E(self, x: int, a: int) -> np.ndarray:
        return self.E0[x] if a == 0 else np.eye(self.dim) - self.E0[x]

    def F(self, y: int, b: int) -> np.ndarray:
        return self.F0[y] if b == 0 else np.eye(self.dim) - self.F0[y]

    def A(self, x: int) -> np.ndarray:
        return 2 * self.E0[x] - np.eye(self.dim)

    def B(self, y: int) -> np.ndarray:
        return 2 * self.F0[y] - np.eye(self.dim)

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.vdot(self.psi, op @ self.psi))


@dataclass(frozen=True)
class ValidationReport:
    projection_residual: float
    commutation_residual: float
    perfectness_residual: float
    norm_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.residuals().values()) <= self.tol

    def residuals(self) -> dict[str, float]:
        return {
            "projection_residual": self.projection_residual,
            "commutation_residual": self.commutation_residual,
            "perfectness_residual": self.perfectness_residual,
            "norm_residual": self.norm_residual,
        }


def _fro(m: np.ndarray, dim: int) -> float:
    # Frobenius norm scaled so that c * I has norm |c|
    return float(np.linalg.norm(m) / np.sqrt(dim))


def _check_game(s: FiniteStrategy, g: GameSpec):
    if (s.x_count, s.y_count) != (g.x_count, g.y_count):
        raise ValueError(
            f"strategy has ({s.x_count}, {s.y_count}) questions, game has ({g.x_count}, {g.y_count})"
        )


def validate_strategy(s: FiniteStrategy, g: GameSpec, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Residuals of the PVM relations, cross-commutation, perfectness and normalisation."""
    _check_game(s, g)
    n = s.dim
    proj = 0.0
    for M in s.E0 + s.F0:
        proj = max(proj, _fro(M @ M - M, n), _fro(M - M.conj().T, n))
    comm = 0.0
    for E in s.E0:
        for F in s.F0:
            comm = max(comm, _fro(E @ F - F @ E, n))
    perfect = 0.0
    for x, y, a, b in g.forbidden:
        perfect = max(perfect, abs(s.expect(s.E(x, a) @ s.F(y, b))))
    norm = abs(float(np.linalg.norm(s.psi)) - 1.0)
    return ValidationReport(proj, comm, perfect, norm, tol)


def _check_indices(s: FiniteStrategy, x: int, y: int, a: int, b: int):
    if not (0 <= x < s.x_count and 0 <= y < s.y_count and a in (0, 1) and b in (0, 1)):
        raise IndexError(f"index ({x}, {y}, {a}, {b}) out of range")


def correlation(s: FiniteStrategy, x: int, y: int, a: int, b: int, tol: float = DEFAULT_TOL) -> float:
    """``Re <psi, E_a^x F_b^y psi>``; warns if the imaginary part exceeds ``tol``."""
    _check_indices(s, x, y, a, b)
    val = s.expect(s.E(x, a) @ s.F(y, b))
    if abs(val.imag) > tol:
        warnings.warn(
            f"correlation ({x}, {y}, {a}, {b}) has imaginary part {val.imag:.3e}", RuntimeWarning
        )
    return val.real


def _moments(s: FiniteStrategy, x: int, y: int) -> tuple[float, float, float]:
    A, B = s.A(x), s.B(y)
    return s.expect(A).real, s.expect(B).real, s.expect(A @ B).real


def decomposition_check(s: FiniteStrategy, x: int, y: int, a: int, b: int) -> float:
    """Gap between a correlation and its expansion in ``<A_x>``, ``<B_y>``, ``<A_x B_y>``."""
    _check_indices(s, x, y, a, b)
    direct = s.expect(s.E(x, a) @ s.F(y, b))
    mA, mB, mAB = _moments(s, x, y)
    sa, sb = (-1) ** a, (-1) ** b
    expanded = 0.25 * (1 + sa * mA + sb * mB + sa * sb * mAB)
    return abs(direct - expanded)


def support(s: FiniteStrategy, tol: float = DEFAULT_TOL) -> set[tuple[int, int, int, int]]:
    """Tuples whose correlation exceeds ``tol`` in absolute value."""
    out = set()
    for x, y, a, b in itertools.product(range(s.x_count), range(s.y_count), (0, 1), (0, 1)):
        if abs(correlation(s, x, y, a, b, tol=np.inf)) > tol:
            out.add((x, y, a, b))
    return out


def _fix_phase(v: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(np.abs(v) > 1e-12)
    if idx.size == 0:
        return v
    c = v[idx[0]]
    return v * (abs(c) / c)


def complete_basis(psi, dim: Optional[int] = None) -> np.ndarray:
    """Orthonormal basis (as columns) whose first vector is ``psi / |psi|``.

    The rest come from orthonormalising the standard basis vectors in index
    order, skipping candidates that are already (numerically) in the span.
    Each added vector has its first nonzero coordinate made positive real.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if dim is None:
        dim = psi.shape[0]
    if psi.shape[0] != dim:
        raise ValueError(f"vector has length {psi.shape[0]}, expected {dim}")
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ValueError("cannot complete a basis from the zero vector")
    basis = [psi / nrm]
    for i in range(dim):
        if len(basis) == dim:
            break
        cand = np.zeros(dim, dtype=complex)
        cand[i] = 1.0
        Q = np.array(basis).T
        # two passes of Gram-Schmidt
        for _ in range(2):
            cand = cand - Q @ (Q.conj().T @ cand)
        r = np.linalg.norm(cand)
        if r < _BASIS_SKIP:
            continue
        basis.append(_fix_phase(cand / r))
    return np.array(basis).T


@dataclass(frozen=True, eq=False)
class ExtractionContext:
    basis: np.ndarray = field(repr=False)
    k: tuple[int, ...]  # 1-based basis index per Alice question
    l: tuple[int, ...]  # 1-based basis index per Bob question
    overlaps_A: tuple[complex, ...]  # <psi_k(x), A_x psi>
    overlaps_B: tuple[complex, ...]
    moments: dict = field(repr=False)  # (x, y) -> (1/4, <A_x>, <B_y>, <A_x B_y>)


@dataclass(frozen=True, eq=False)
class ExtractionResult:
    strategy: ClassicalStrategy
    correlations: dict  # (x, y) -> correlation at (u(x), v(y))
    context: ExtractionContext

    @property
    def margin(self) -> float:
        return min(self.correlations.values())


def _first_overlap(basis: np.ndarray, vec: np.ndarray, tol: float) -> Optional[int]:
    overlaps = basis.conj().T @ vec
    hits = np.flatnonzero(np.abs(overlaps) > tol)
    return None if hits.size == 0 else int(hits[0])


def _answer_from_phase(z: complex, tol: float) -> int:
    # arg in [0, pi) -> 0, arg in [pi, 2 pi) -> 1; near the real axis only the sign counts
    if abs(z.imag) <= tol:
        return 0 if z.real > 0 else 1
    return 0 if z.imag > 0 else 1


def extract_classical(s: FiniteStrategy, g: GameSpec, tol: float = DEFAULT_TOL) -> ExtractionResult:
    """Perfect classical strategy from a perfect finite-dimensional strategy."""
    report = validate_strategy(s, g, tol)
    if not report.passed:
        bad = {k: v for k, v in report.residuals().items() if v > tol}
        raise PreconditionError(f"strategy is not a perfect PVM strategy at tol={tol:g}: {bad}")
    basis = complete_basis(s.psi, s.dim)
    psi = basis[:, 0]

    def locate(ops: Sequence[np.ndarray], label: str):
        idx, answers, vals = [], [], []
        for q, op in enumerate(ops):
            vec = op @ psi
            j = _first_overlap(basis, vec, tol)
            if j is None:
                raise DegeneracyError(f"no basis vector overlaps {label}_{q} psi above tol={tol:g}")
            z = complex(np.vdot(basis[:, j], vec))
            idx.append(j + 1)
            answers.append(_answer_from_phase(z, tol))
            vals.append(z)
        return tuple(idx), tuple(answers), tuple(vals)

    k, u, zA = locate([s.A(x) for x in range(s.x_count)], "A")
    l, v, zB = locate([s.B(y) for y in range(s.y_count)], "B")
    strat = ClassicalStrategy(u, v)

    moments = {}
    corr = {}
    forbidden = set(g.forbidden)
    for x in range(s.x_count):
        for y in range(s.y_count):
            mA, mB, mAB = _moments(s, x, y)
            moments[(x, y)] = (0.25, mA, mB, mAB)
            c = correlation(s, x, y, u[x], v[y], tol)
            corr[(x, y)] = c
            if c <= tol or (x, y, u[x], v[y]) in forbidden:
                raise InconsistencyError(
                    f"extracted answers ({u[x]}, {v[y]}) at questions ({x}, {y}) have correlation {c:.3e}"
                )
    ctx = ExtractionContext(basis, k, l, zA, zB, moments)
    if not is_perfect_classical(g, strat):  # pragma: no cover - implied by the loop above
        raise InconsistencyError("extracted strategy is not perfect")
    return ExtractionResult(strat, corr, ctx)


def strategy_from_classical(s: ClassicalStrategy) -> FiniteStrategy:
    """The one-dimensional PVM strategy that answers according to ``s``."""
    E0 = [np.array([[1.0 - a]]) for a in s.u]
    F0 = [np.array([[1.0 - b]]) for b in s.v]
    return FiniteStrategy(1, tuple(E0), tuple(F0), np.array([1.0]))


def _pick_strategies(g: GameSpec, rng: np.random.Generator, n: int, cap: int = 4096) -> list[ClassicalStrategy]:
    pool = list(itertools.islice(enumerate_perfect(g), cap))
    if not pool:
        raise ValueError("game has no perfect classical strategy")
    if n <= len(pool):
        picks = rng.choice(len(pool), size=n, replace=False)
    else:
        picks = rng.choice(len(pool), size=n, replace=True)
    return [pool[int(i)] for i in picks]


def generate_perfect_strategy(
    g: GameSpec,
    seed: int = 0,
    dim_budget: int = 16,
    n_blocks: Optional[int] = None,
    max_block_dim: int = 4,
) -> FiniteStrategy:
    """Random perfect strategy: a direct sum of classical blocks in a random basis.

    Between one and four perfect classical strategies are each realised on a
    block (projectors are 0 or I there), the state gets weight on every block,
    and everything is conjugated by a Haar-random unitary.
    """
    rng = np.random.default_rng(seed)
    if n_blocks is None:
        n_blocks = int(rng.integers(1, 5))
    n_blocks = max(1, min(n_blocks, dim_budget))
    strategies = _pick_strategies(g, rng, n_blocks)
    per_block = max(1, min(max_block_dim, dim_budget // n_blocks))
    sizes = [int(rng.integers(1, per_block + 1)) for _ in range(n_blocks)]
    dim = sum(sizes)

    E0 = [np.zeros((dim, dim)) for _ in range(g.x_count)]
    F0 = [np.zeros((dim, dim)) for _ in range(g.y_count)]
    psi = np.zeros(dim, dtype=complex)
    weights = 0.2 + rng.random(n_blocks)
    weights /= weights.sum()
    start = 0
    for strat, size, w in zip(strategies, sizes, weights):
        sl = slice(start, start + size)
        for x, a in enumerate(strat.u):
            if a == 0:
                E0[x][sl, sl] = np.eye(size)
        for y, b in enumerate(strat.v):
            if b == 0:
                F0[y][sl, sl] = np.eye(size)
        chunk = rng.normal(size=size) + 1j * rng.normal(size=size)
        psi[sl] = np.sqrt(w) * chunk / np.linalg.norm(chunk)
        start += size

    if dim > 1:
        U = unitary_group.rvs(dim, random_state=rng)
    else:
        U = np.array([[np.exp(2j * np.pi * rng.random())]])
    Uh = U.conj().T
    return FiniteStrategy(
        dim,
        tuple(U @ E @ Uh for E in E0),
        tuple(U @ F @ Uh for F in F0),
        U @ psi,
    )

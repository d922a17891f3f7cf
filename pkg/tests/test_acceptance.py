"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the lines are repeated in the
terminal summary) or ``python tests/test_acceptance.py`` for the lines alone.
"""

from __future__ import annotations

import hashlib
import io
import itertools
import json
import os
import sys
import time
from contextlib import redirect_stdout
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import unitary_group

sys.path.insert(0, str(Path(__file__).parent))

from twoanswer import data_path  # noqa: E402
from twoanswer.certificate import (  # noqa: E402
    SOSCertificate,
    build_moment_problem,
    check_moments,
    expand_certificate,
    forbidden_block_certificate,
    mix_moments,
    rho_moments,
    solve_feasibility,
    truncated_gns,
    verify_certificate,
)
from twoanswer.cli import main as cli_main  # noqa: E402
from twoanswer.extraction import (  # noqa: E402
    FiniteStrategy,
    complete_basis,
    decomposition_check,
    extract_classical,
    generate_perfect_strategy,
    support,
    validate_strategy,
)
from twoanswer.formats import (  # noqa: E402
    load_certificate,
    load_game,
    save_certificate,
    save_classical,
    save_game,
    save_moments,
    save_strategy,
)
from twoanswer.game import (  # noqa: E402
    GameSpec,
    enumerate_perfect,
    is_perfect_classical,
    search_classical,
)
from twoanswer.group_algebra import AlgebraElement, generator, projector  # noqa: E402

SEED = 2024
RESULTS: dict[int, str] = {}


def record(n: int, passed: bool, detail: str) -> bool:
    line = f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    return passed


def file_hashes(root: Path) -> dict[str, str]:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def random_game(rng, x_count, y_count, p_forbid):
    return GameSpec(x_count, y_count, rng.random((x_count, y_count, 2, 2)) >= p_forbid)


# ---------------------------------------------------------------------------
# 1. exact algebra identities at |X| = |Y| = 3


def criterion_1() -> tuple[bool, str]:
    X = Y = 3
    one = AlgebraElement.one(X, Y)
    zero = AlgebraElement.zero(X, Y)
    failures = []
    for party, count in (("alice", X), ("bob", Y)):
        for q in range(count):
            p0, p1 = projector(party, q, 0, X, Y), projector(party, q, 1, X, Y)
            g = generator(party, q, X, Y)
            checks = {
                "sum": p0 + p1 == one,
                "idem0": p0 * p0 == p0,
                "idem1": p1 * p1 == p1,
                "orth": p0 * p1 == zero,
                "invol": g * g == one,
                "self-adjoint": p0.star() == p0 and g.star() == g,
            }
            failures += [f"{party}{q}:{k}" for k, ok in checks.items() if not ok]
    for x, y, a, b in itertools.product(range(X), range(Y), (0, 1), (0, 1)):
        e, f = projector("alice", x, a, X, Y), projector("bob", y, b, X, Y)
        if e * f != f * e:
            failures.append(f"commute{(x, y, a, b)}")
    # star anti-automorphism on products of mixed generators
    gens = [generator("alice", i, X, Y) for i in range(X)] + [generator("bob", j, X, Y) for j in range(Y)]
    elems = [g + projector("alice", 0, 1, X, Y) for g in gens]
    for u, v in itertools.product(elems, repeat=2):
        if (u * v).star() != v.star() * u.star():
            failures.append("star")
    return not failures, f"exact identities, {len(failures)} failures"


# ---------------------------------------------------------------------------
# 2. CHSH value and certificate


def run_cli(argv: list[str]) -> tuple[int, dict]:
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli_main(argv + ["--machine"])
    report = json.loads(buf.getvalue())
    report.pop("wall_time")
    return code, report


def criterion_2(workdir: Path) -> tuple[bool, str, dict]:
    workdir.mkdir(parents=True, exist_ok=True)
    game = str(data_path("chsh.game"))
    here = os.getcwd()
    os.chdir(workdir)  # relative output names keep the reports comparable across runs
    try:
        start = time.perf_counter()
        c_code, c_rep = run_cli(["classical", game])
        s_code, s_rep = run_cli(["certify", game, "--max-degree", "3", "--exact", "--seed", str(SEED)])
        elapsed = time.perf_counter() - start
    finally:
        os.chdir(here)
    out = workdir / s_rep["payloads"][0]
    value_ok = c_rep["details"]["value"] == "3/4" and c_rep["outcome"] == "none" and c_code == 2
    cert_ok = s_rep["outcome"] == "infeasible" and s_rep["details"]["degree"] <= 3
    resid = s_rep["residuals"].get("coefficient_residual", float("inf"))
    exact_ok = s_rep["details"].get("verified") == "exact" or any(
        "exactification" in w for w in s_rep["warnings"]
    )
    reloaded = load_certificate(out)
    float_ok = verify_certificate(reloaded, GameSpec.chsh(), "float").passed
    passed = value_ok and cert_ok and resid <= 1e-6 and exact_ok and float_ok and elapsed <= 60
    detail = (
        f"value {c_rep['details']['value']}, certificate at d={s_rep['details']['degree']} "
        f"({s_rep['details'].get('verified')}), residual {resid:.1e}, {elapsed:.2f}s"
    )
    outcomes = {"classical": c_rep, "certify": s_rep}
    return passed, detail, outcomes


# ---------------------------------------------------------------------------
# 3. extraction on generated perfect strategies


def sample_games_with_perfect(rng, count):
    games = []
    while len(games) < count:
        x_count, y_count = (int(n) for n in rng.integers(1, 4, size=2))
        g = random_game(rng, x_count, y_count, p_forbid=float(rng.uniform(0.1, 0.45)))
        if search_classical(g) is not None:
            games.append(g)
    return games


def criterion_3(workdir: Path, runs: int = 120) -> tuple[bool, str, dict]:
    workdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    games = sample_games_with_perfect(rng, runs)
    ok = 0
    worst_margin = np.inf
    max_dim = 0
    outcomes = {}
    for i, g in enumerate(games):
        s = generate_perfect_strategy(g, seed=SEED + i, dim_budget=16)
        max_dim = max(max_dim, s.dim)
        save_game(g, workdir / f"g{i:03d}.game")
        save_strategy(s, workdir / f"s{i:03d}.strategy")
        try:
            res = extract_classical(s, g)
        except Exception as exc:  # recorded as a failed run
            outcomes[i] = f"error {type(exc).__name__}"
            continue
        save_classical(res.strategy, workdir / f"s{i:03d}.classical.json", res)
        sup = support(s)
        support_ok = all(
            (x, y, res.strategy.u[x], res.strategy.v[y]) in sup
            for x in range(g.x_count)
            for y in range(g.y_count)
        ) and not (sup & set(g.forbidden))
        if is_perfect_classical(g, res.strategy) and support_ok and res.margin > 1e-6:
            ok += 1
        worst_margin = min(worst_margin, res.margin)
        outcomes[i] = str(res.strategy)
    passed = ok == len(games) and len(games) >= 100 and max_dim <= 16
    return passed, f"{ok}/{len(games)} extracted perfect, min margin {worst_margin:.3g}, max dim {max_dim}", outcomes


# ---------------------------------------------------------------------------
# 4. decomposition identity and Parseval on commuting PVM pairs


def random_projection(rng, dim):
    rank = int(rng.integers(0, dim + 1))
    Z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    Q, _ = np.linalg.qr(Z)
    return Q[:, :rank] @ Q[:, :rank].conj().T


def criterion_4(pairs: int = 200) -> tuple[bool, str]:
    rng = np.random.default_rng(SEED)
    worst_dec = worst_par = 0.0
    max_dim = 0
    for _ in range(pairs):
        while True:
            da, db = (int(n) for n in rng.integers(1, 5, size=2))
            if da * db <= 8:
                break
        x_count, y_count = (int(n) for n in rng.integers(1, 4, size=2))
        dim = da * db
        max_dim = max(max_dim, dim)
        E0 = [np.kron(random_projection(rng, da), np.eye(db)) for _ in range(x_count)]
        F0 = [np.kron(np.eye(da), random_projection(rng, db)) for _ in range(y_count)]
        U = unitary_group.rvs(dim, random_state=rng) if dim > 1 else np.eye(1)
        Uh = U.conj().T
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi /= np.linalg.norm(psi)
        s = FiniteStrategy(dim, tuple(U @ E @ Uh for E in E0), tuple(U @ F @ Uh for F in F0), psi)
        for x, y, a, b in itertools.product(range(x_count), range(y_count), (0, 1), (0, 1)):
            worst_dec = max(worst_dec, decomposition_check(s, x, y, a, b))
        basis = complete_basis(s.psi)
        for op in [s.A(x) for x in range(x_count)] + [s.B(y) for y in range(y_count)]:
            coeffs = basis.conj().T @ (op @ s.psi)
            worst_par = max(worst_par, abs(float(np.sum(np.abs(coeffs) ** 2)) - 1.0))
    passed = worst_dec <= 1e-10 and worst_par <= 1e-10 and max_dim <= 8
    return passed, f"{pairs} pairs, decomposition {worst_dec:.1e}, Parseval {worst_par:.1e}"


# ---------------------------------------------------------------------------
# 5. consistency sweep on random 2x2 games


def criterion_5(workdir: Path, games: int = 200) -> tuple[bool, str, dict]:
    workdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    conflicts = 0
    witness_bad = 0
    solver_disagree = 0
    worst_witness = 0.0
    counts: dict[str, int] = {}
    outcomes = {}
    for i in range(games):
        g = random_game(rng, 2, 2, p_forbid=float(rng.uniform(0.1, 0.6)))
        strategies = list(enumerate_perfect(g))
        perfect = bool(strategies)
        statuses = []
        for d in (1, 2):
            problem = build_moment_problem(g, d)
            res = solve_feasibility(problem, seed=SEED)
            statuses.append(res.status)
            key = f"d{d}:{'perfect' if perfect else 'not-perfect'}:{res.status}"
            counts[key] = counts.get(key, 0) + 1
            if res.status == "infeasible":
                exact = verify_certificate(res.certificate, g, "exact")
                save_certificate(exact.witness, workdir / f"g{i:03d}.d{d}.certificate.json")
                if perfect and exact.passed:
                    conflicts += 1
            elif res.status == "feasible":
                save_moments(res.moments, workdir / f"g{i:03d}.d{d}.moments.json", 2, 2)
            if perfect:
                resid = max(check_moments(problem, rho_moments(strategies[0], d)).values())
                worst_witness = max(worst_witness, resid)
                witness_bad += resid > 1e-8
                solver_disagree += res.status != "feasible"
        outcomes[i] = statuses
    passed = conflicts == 0 and witness_bad == 0
    detail = (
        f"{games} games, {conflicts} conflicts, witness residual {worst_witness:.1e}, "
        f"solver not feasible on {solver_disagree} perfect cases; " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    )
    return passed, detail, outcomes


# ---------------------------------------------------------------------------
# 6. hand certificate for the all-four-forbidden game


def criterion_6() -> tuple[bool, str]:
    g = load_game(data_path("allforbidden.game"))
    cert = forbidden_block_certificate(g)
    rep = verify_certificate(cert, g, "exact")
    minus_one = -AlgebraElement.one(g.x_count, g.y_count)
    expands = expand_certificate(cert, g, exact=True) == minus_one
    # the -1/2 multipliers read literally collapse to 0 because sum n_i = 1
    half = SOSCertificate(
        1, cert.basis, cert.gram, tuple((w, i, Fraction(-1, 2)) for w, i, _ in cert.multipliers),
        cert.x_count, cert.y_count, cert.forbidden,
    )
    half_zero = expand_certificate(half, g, exact=True).is_zero()
    passed = rep.passed and rep.coefficient_residual == 0 and expands and half_zero
    return passed, (
        f"-1 = 1 + sum(-n_i) + sum(-n_i)*, exact residual {rep.coefficient_residual}; "
        f"-1/2 multipliers expand to 0: {half_zero}"
    )


# ---------------------------------------------------------------------------
# 7. truncated GNS round trip


def criterion_7(vectors: int = 20) -> tuple[bool, str]:
    rng = np.random.default_rng(SEED)
    made = 0
    flat_count = 0
    ok = 0
    while made < vectors:
        x_count, y_count = (int(n) for n in rng.integers(1, 4, size=2))
        g = random_game(rng, x_count, y_count, p_forbid=0.3)
        strategies = list(enumerate_perfect(g))
        if not strategies:
            continue
        if made % 2 == 0 or len(strategies) < 2:
            m = rho_moments(strategies[int(rng.integers(len(strategies)))], 2)
        else:
            i, j = rng.choice(len(strategies), size=2, replace=False)
            w = float(rng.uniform(0.2, 0.8))
            m = mix_moments([(w, rho_moments(strategies[i], 2)), (1 - w, rho_moments(strategies[j], 2))])
        made += 1
        res = truncated_gns(m, g)
        good = res.rank <= 2 and validate_strategy(res.strategy, g, 1e-6).passed
        if res.flat:
            flat_count += 1
            ext = extract_classical(res.strategy, g, 1e-6)
            good = good and is_perfect_classical(g, ext.strategy)
        ok += good
    return ok == vectors, f"{ok}/{vectors} reconstructions valid, {flat_count} flat"


# ---------------------------------------------------------------------------
# 8. determinism


def criterion_8(tmp: Path) -> tuple[bool, str]:
    summary = []
    for n, fn in ((2, criterion_2), (3, criterion_3), (5, criterion_5)):
        runs = []
        for rep in ("a", "b"):
            root = tmp / f"c{n}{rep}"
            _, _, outcomes = fn(root)
            runs.append((json.dumps(outcomes, sort_keys=True, default=str), file_hashes(root)))
        same = runs[0] == runs[1]
        summary.append((n, same, len(runs[0][1])))
    passed = all(s for _, s, _ in summary)
    return passed, ", ".join(f"c{n}: {'identical' if s else 'DIFFERENT'} ({k} files)" for n, s, k in summary)


# ---------------------------------------------------------------------------
# pytest entry points


def test_criterion_1_exact_identities():
    passed, detail = criterion_1()
    assert record(1, passed, detail), detail


def test_criterion_2_chsh(tmp_path):
    passed, detail, _ = criterion_2(tmp_path)
    assert record(2, passed, detail), detail


def test_criterion_3_extraction(tmp_path):
    passed, detail, _ = criterion_3(tmp_path)
    assert record(3, passed, detail), detail


def test_criterion_4_decomposition():
    passed, detail = criterion_4()
    assert record(4, passed, detail), detail


def test_criterion_5_consistency(tmp_path):
    passed, detail, _ = criterion_5(tmp_path)
    assert record(5, passed, detail), detail


def test_criterion_6_hand_certificate():
    passed, detail = criterion_6()
    assert record(6, passed, detail), detail


def test_criterion_7_gns():
    passed, detail = criterion_7()
    assert record(7, passed, detail), detail


def test_criterion_8_determinism(tmp_path):
    passed, detail = criterion_8(tmp_path)
    assert record(8, passed, detail), detail


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        tmp = Path(d)
        results = [
            record(1, *criterion_1()),
            record(2, *criterion_2(tmp / "c2")[:2]),
            record(3, *criterion_3(tmp / "c3")[:2]),
            record(4, *criterion_4()),
            record(5, *criterion_5(tmp / "c5")[:2]),
            record(6, *criterion_6()),
            record(7, *criterion_7()),
            record(8, *criterion_8(tmp / "c8")),
        ]
    sys.exit(0 if all(results) else 1)

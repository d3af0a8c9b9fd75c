"""Acceptance gate: one test per headline criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines as they complete. The experiment-heavy criteria share session-scoped
trial reports so the whole gate stays fast.
"""

import time

import numpy as np
import pytest
import scipy.linalg

from prnn import (
    BenchConfig,
    PrnnModel,
    TimeSeries,
    eigendecompose,
    ellipse,
    classify_longterm,
    Behavior,
    jordan_block_power,
    learn_full_transition,
    mso,
    nrmse,
    predict_last,
    real_jordan,
    run_trials,
    spectral_radius,
    trajectory,
)
from prnn.bench import BUILTIN_PUZZLES
import dataclasses

PARABOLA_W = np.array([[1.0, 2.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]])
PARABOLA_X0 = np.array([0.0, 0.0, 1.0])


def _report(number, name, ok, detail):
    line = f"criterion {number:2d} [{name}]: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


@pytest.fixture(scope="session")
def mso_report():
    return run_trials(BenchConfig(preset="mso8", trials=20, seed_base=0, keep_models=True))


@pytest.fixture(scope="session")
def parabola_report():
    return run_trials(BenchConfig(preset="parabola", trials=50, seed_base=0, keep_models=True))


@pytest.fixture(scope="session")
def sinusoid_report():
    return run_trials(BenchConfig(preset="sinusoid", trials=50, seed_base=0, keep_models=True))


@pytest.fixture(scope="session")
def trajectory_report():
    return run_trials(BenchConfig(preset="trajectory", trials=5, seed_base=0, keep_models=True))


def test_criterion_1_parabola_exactness():
    start = time.perf_counter()
    model = PrnnModel(w=PARABOLA_W, x0=PARABOLA_X0, d=1)
    values = trajectory(model, 21).data[0]
    expected = np.arange(21.0) ** 2
    err = float(np.max(np.abs(values - expected)))
    elapsed = time.perf_counter() - start
    _report(1, "parabola exactness", err <= 1e-9 and elapsed < 1.0,
            f"max abs err {err:.2e}, {elapsed:.2f}s")


def test_criterion_2_jordan_power_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(200):
        m = int(rng.integers(1, 5))
        t = int(rng.integers(0, 16))
        lam = rng.uniform(0, 2.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        closed = jordan_block_power(lam, m, t)
        block = np.eye(m, dtype=complex) * lam
        for i in range(m - 1):
            block[i, i + 1] = 1.0
        brute = np.eye(m, dtype=complex)
        for _ in range(t):
            brute = brute @ block
        scale = max(np.max(np.abs(brute)), 1.0)
        worst = max(worst, float(np.max(np.abs(closed - brute)) / scale))
    elapsed = time.perf_counter() - start
    _report(2, "jordan power oracle", worst <= 1e-10 and elapsed < 5.0,
            f"200 blocks, worst rel err {worst:.2e}, {elapsed:.2f}s")


def _random_diagonalizable(rng, n, max_modulus=1.2):
    blocks = []
    width = 0
    while width < n:
        if n - width >= 2 and rng.random() < 0.5:
            r = rng.uniform(0.2, max_modulus)
            ang = rng.uniform(0.05, np.pi - 0.05)
            c, s = np.cos(ang), np.sin(ang)
            blocks.append(r * np.array([[c, s], [-s, c]]))
            width += 2
        else:
            blocks.append(np.array([[rng.uniform(-max_modulus, max_modulus)]]))
            width += 1
    core = scipy.linalg.block_diag(*blocks)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q @ core @ q.T


def test_criterion_3_rebase_theorem():
    start = time.perf_counter()
    worst = 0.0
    for trial in range(100):
        rng = np.random.default_rng(3000 + trial)
        n = int(rng.integers(2, 21))
        w = _random_diagonalizable(rng, n)
        x0 = rng.standard_normal(n)
        form = real_jordan(w, x0)
        j = form.jordan_matrix()
        u = np.array(form.y)
        state = x0.copy()
        for _ in range(11):
            scale = max(np.linalg.norm(state), np.linalg.norm(x0), 1.0)
            worst = max(worst, float(np.max(np.abs(form.a @ u - state)) / scale))
            u = j @ u
            state = w @ state
    elapsed = time.perf_counter() - start
    _report(3, "rebase theorem", worst <= 1e-8 and elapsed < 30.0,
            f"100 matrices, all rows, t<=10, worst rel err {worst:.2e}, {elapsed:.1f}s")


def test_criterion_4_approximation_theorem():
    start = time.perf_counter()
    exact = 0
    for trial in range(50):
        rng = np.random.default_rng(4000 + trial)
        series = TimeSeries(rng.standard_normal((1, 10)))
        model = learn_full_transition(series, 9, seed=trial)
        if nrmse(series, trajectory(model, 10)) <= 1e-8:
            exact += 1
    elapsed = time.perf_counter() - start
    _report(4, "approximation theorem", exact >= 49 and elapsed < 10.0,
            f"{exact}/50 exact replays, {elapsed:.1f}s")


def test_criterion_5_mso8_headline(mso_report):
    ok_records = mso_report.completed
    median_size = mso_report.median_size
    median_err = mso_report.median_nrmse
    ok = (
        mso_report.failures == 0
        and median_size == 16
        and median_err <= 1e-2
    )
    _report(5, "MSO-8 headline", ok,
            f"median reduced size {median_size}, median NRMSE over 300 steps "
            f"{median_err:.2e}, {len(ok_records)}/20 trials completed")


def test_criterion_6_discrimination(parabola_report, sinusoid_report):
    par_rate = parabola_report.success_rate
    sin_rate = sinusoid_report.success_rate
    par_train = float(np.median([r.nrmse_train for r in parabola_report.completed]))
    sin_train = float(np.median([r.nrmse_train for r in sinusoid_report.completed]))
    ok = (
        par_rate >= 0.45
        and sin_rate >= 0.85
        and par_train <= 1e-4
        and sin_train <= 1e-4
    )
    _report(6, "function discrimination", ok,
            f"size-3 rate {par_rate:.0%} (parabola), size-2 rate {sin_rate:.0%} (sinusoid), "
            f"median training NRMSE {par_train:.1e} / {sin_train:.1e}")


def test_criterion_7_longterm_ellipse():
    start = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(7000 + seed)
        angle = rng.uniform(0.1, np.pi - 0.1)
        c, s = np.cos(angle), np.sin(angle)
        blocks = [np.array([[c, s], [-s, c]])]
        width = 2
        while width < 10:
            if 10 - width >= 2 and rng.random() < 0.5:
                r = rng.uniform(0.2, 0.9)
                ang = rng.uniform(0.1, np.pi - 0.1)
                blocks.append(r * np.array([[np.cos(ang), np.sin(ang)],
                                            [-np.sin(ang), np.cos(ang)]]))
                width += 2
            else:
                blocks.append(np.array([[rng.uniform(-0.9, 0.9)]]))
                width += 1
        core = scipy.linalg.block_diag(*blocks)
        q, _ = np.linalg.qr(rng.standard_normal((10, 10)))
        w = q @ core @ q.T
        w /= spectral_radius(w)
        x0 = rng.standard_normal(10)
        dec = eigendecompose(w, x0)
        assert classify_longterm(dec) is Behavior.ELLIPSE
        ana = ellipse(dec, tau=1.0)
        state = x0.copy()
        for _ in range(300):
            state = w @ state
        u = np.array(ana.x_hat)
        for _ in range(300):
            u = ana.d_hat @ u
        err = float(np.linalg.norm(state - ana.v_hat @ u) / np.linalg.norm(x0))
        worst = max(worst, err)
    elapsed = time.perf_counter() - start
    _report(7, "long-term ellipse", worst <= 1e-6 and elapsed < 10.0,
            f"20 systems, worst rel err at t=300: {worst:.2e}, {elapsed:.1f}s")


def test_criterion_8_number_puzzles():
    start = time.perf_counter()
    results = {}
    for pid, clue in (("S9", "none"), ("S19", "none"),
                      ("S8", "previous-value"), ("S15", "previous-value")):
        puzzle = dataclasses.replace(BUILTIN_PUZZLES[pid], clue_mode=clue)
        results[pid] = predict_last(puzzle, n_res=4, trials=500, seed_base=0)
    elapsed = time.perf_counter() - start
    plurality_ok = {pid: rep.plurality == rep.expected for pid, rep in results.items()}
    s9_rate = results["S9"].correct_rate
    ok = all(plurality_ok.values()) and s9_rate >= 0.90 and elapsed < 60.0
    detail = ", ".join(
        f"{pid}: plurality {rep.plurality} vs {rep.expected}"
        f"{' ok' if plurality_ok[pid] else ' MISS'}"
        for pid, rep in results.items()
    )
    _report(8, "number puzzles", ok, f"{detail}; S9 rate {s9_rate:.0%}, {elapsed:.1f}s")


def test_criterion_9_trajectory_replay(trajectory_report):
    recs = trajectory_report.records
    ok = all(r.ok and r.success for r in recs)
    detail = "; ".join(
        f"seed {r.seed}: replay {r.nrmse_train:.2f}, reduced {r.size_before + 4}->{r.size_after} "
        f"({1 - r.size_after / (r.size_before + 4):.0%} removed), NRMSE {r.nrmse_final:.2f}"
        for r in recs
    )
    _report(9, "trajectory replay", ok, detail)


def test_criterion_10_reduction_sparsity(mso_report, parabola_report, sinusoid_report, trajectory_report):
    checked = 0
    worst_ratio = 0.0
    for report in (mso_report, parabola_report, sinusoid_report, trajectory_report):
        for record in report.records:
            if record.model is None:
                continue
            nnz = int(np.count_nonzero(record.model.j))
            width = record.model.width
            worst_ratio = max(worst_ratio, nnz / max(width, 1))
            assert nnz <= 3 * width, f"seed {record.seed}: {nnz} non-zeros for width {width}"
            checked += 1
    _report(10, "reduction sparsity", checked > 0,
            f"{checked} reduced models, worst nnz/width {worst_ratio:.2f} <= 3")

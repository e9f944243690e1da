"""Acceptance suite: one test per gating criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` (the lines are printed even
without ``-s``).
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

import oracles
from toys import TOYS, operator
from arhbench.bench.cli import resolve_config
from arhbench.bench.output import write_csv
from arhbench.bench.runner import run
from arhbench.componentwise import bosq, diag_known, diag_unknown, guillas
from arhbench.grid import Curve, dyadic_grid, make_grid, reconstruct_values, sine_basis
from arhbench.metrics import (
    ErrorRecord,
    KernelErrorMode,
    ThresholdCurve,
    diag_truncated_error,
    diag_unknown_operator_error,
    f_count,
    full_error,
    hs_offdiag_bound,
    kernel_truncated_error,
    ub_bound,
)
from arhbench.scenario import Regime, ScenarioSpec, validate
from arhbench.simulate import simulate
from arhbench.smoothing import (
    KernelConfig,
    SmootherConfig,
    WaveletConfig,
    as_predictor,
    besse_penalized_predictor,
    fit_kernel,
    penalized_smoother,
)
from arhbench.wavelets import dwt, idwt


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def report(name):
        t0 = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            with capsys.disabled():
                print(f"\nFAIL  {name}  ({time.perf_counter() - t0:.1f} s): {type(exc).__name__}")
            raise
        with capsys.disabled():
            print(f"\nPASS  {name}  ({time.perf_counter() - t0:.1f} s)")

    return report


@pytest.fixture(scope="module")
def diag_ops():
    return validate(ScenarioSpec(regime=Regime.DIAGONAL, delta1=1.5, delta2=1.1, c2=0.8))


@pytest.fixture(scope="module")
def desk_config():
    return resolve_config("scenario2-desk")


@pytest.fixture(scope="module")
def desk_run(desk_config):
    return run(desk_config, workers=1)


def test_oracle_equivalence(criterion):
    with criterion("oracle equivalence of the four componentwise estimators"):
        t0 = time.perf_counter()
        for idx, X in enumerate(TOYS):
            rows, M = X.tolist(), X.shape[1]
            true_C = np.sort(np.abs(np.random.default_rng(idx).normal(size=M)))[::-1] + 0.05
            for k in range(1, M + 1):
                np.testing.assert_allclose(diag_known(X, k).rho_hat, oracles.diag_known(rows, k), rtol=1e-12, atol=1e-12)
                rho, _, vecs = oracles.diag_unknown(rows, k)
                np.testing.assert_allclose(
                    operator(diag_unknown(X, k)), oracles.diag_operator(rho, vecs, k), rtol=1e-12, atol=1e-12
                )
                R, _, vecs = oracles.bosq_matrix(rows, k)
                np.testing.assert_allclose(operator(bosq(X, k)), oracles.operator_from(R, vecs, k), rtol=1e-12, atol=1e-12)
                R, _, vecs = oracles.bosq_matrix(rows, k, floor=0.9 * true_C[k - 1])
                np.testing.assert_allclose(
                    operator(guillas(X, k, 0.9, true_C_eigs=true_C)),
                    oracles.operator_from(R, vecs, k),
                    rtol=1e-12,
                    atol=1e-12,
                )
        assert time.perf_counter() - t0 < 1.0


def test_scalar_ar1_collapse(criterion):
    with criterion("scalar AR(1) collapse"):
        rng = np.random.default_rng(11)
        for n in (3, 10, 100, 5000):
            for _ in range(25):
                x = np.empty(n)
                x[0] = rng.normal()
                for i in range(1, n):
                    x[i] = 0.6 * x[i - 1] + rng.normal()
                closed = (n / (n - 1)) * math.fsum(x[:-1] * x[1:]) / math.fsum(x * x)
                X = x[:, None]
                assert abs(diag_known(X, 1).rho_hat[0] - closed) <= 1e-14
                assert abs(diag_unknown(X, 1).rho_hat[0] - closed) <= 1e-14


def test_bound_invariants(criterion, diag_ops):
    with criterion("|rho_hat| <= 2 on 10^4 inputs and UB domination on 50 seeds"):
        t0 = time.perf_counter()
        rng = np.random.default_rng(21)
        for _ in range(10_000):
            M = int(rng.integers(1, 5))
            n = int(rng.integers(M + 2, 25))
            X = rng.standard_t(2, size=(n, M)) * rng.uniform(1e-3, 1e3, size=M)
            k = int(rng.integers(1, M + 1))
            assert np.all(np.abs(diag_known(X, k).rho_hat) <= 2.0)
            assert np.all(np.abs(diag_unknown(X, k).rho_hat) <= 2.0)
        for seed in range(50):
            s = simulate(diag_ops, 1000, seed=seed)
            err = diag_unknown_operator_error(s, diag_ops.rho_diag, 7)
            assert err <= ub_bound(s, diag_ops.C_eigs, diag_ops.rho_diag, 7).total
        assert time.perf_counter() - t0 < 30.0


def test_consistency_trend(criterion, diag_ops):
    with criterion("consistency trend of the diagonal estimator"):
        t0 = time.perf_counter()
        medians = []
        for n in (500, 2000, 8000, 32000):
            k = math.ceil(math.log(n))
            errs = [diag_unknown_operator_error(simulate(diag_ops, n, seed=s), diag_ops.rho_diag, k) for s in range(50)]
            medians.append(float(np.median(errs)))
        assert all(a > b for a, b in zip(medians, medians[1:])), medians
        assert medians[-1] < 0.5 * medians[0], medians
        assert time.perf_counter() - t0 < 300.0


def test_stationarity(criterion, diag_ops):
    with criterion("stationary variance and lag-1 moment at n = 50000"):
        n = 50_000
        X = simulate(diag_ops, n, seed=0).data
        C, r = diag_ops.C_eigs, diag_ops.rho_diag
        for j in range(10):
            x = X[:, j]
            var = float(np.mean(x * x))
            assert abs(var - C[j]) <= 3 * math.sqrt(2 / n) * C[j], (j, var, C[j])
            lag = float(np.dot(x[:-1], x[1:]) / (n - 1))
            # asymptotic variance of the lag-1 moment of a scalar AR(1)
            se = C[j] * math.sqrt((1 + 4 * r[j] ** 2 - r[j] ** 4) / ((1 - r[j] ** 2) * (n - 1)))
            assert abs(lag - r[j] * C[j]) <= 3 * se, (j, lag, r[j] * C[j])


def test_directional_scenario2(criterion, desk_run, desk_config):
    with criterion("diag mean error < bosq mean error on the desk scenario 2 analog"):
        assert desk_run.elapsed_s < 600.0
        diag = {row.n: row for row in desk_run.table.select("diag")}
        bosq_rows = {row.n: row for row in desk_run.table.select("bosq")}
        for n in desk_config.sample_sizes:
            assert diag[n].mean_err < bosq_rows[n].mean_err, (n, diag[n].mean_err, bosq_rows[n].mean_err)


def _sine_data(grid):
    rng = np.random.default_rng(7)
    M, n = 5, 60
    rho = np.diag([0.7, -0.4, 0.5, 0.2, -0.3]) + 0.05 * rng.normal(size=(M, M))
    X = np.zeros((n, M))
    x = rng.normal(size=M)
    for i in range(n):
        x = rho @ x + rng.normal(size=M) * np.arange(1, M + 1) ** -0.75
        X[i] = x
    X -= X.mean(axis=0)
    basis = sine_basis(grid, M, tol=1e-2)
    return X, basis, reconstruct_values(X, basis)


def test_smoothing_anchors(criterion):
    with criterion("smoothing method anchors"):
        t0 = time.perf_counter()
        rng = np.random.default_rng(31)
        for family in ("haar", "db4"):
            for j0 in (0, 3, 6):
                x = rng.normal(size=64)
                c = dwt(x, family, j0)
                np.testing.assert_allclose(idwt(c, family), x, atol=1e-10)
                assert abs(sum(np.sum(v**2) for v in c) - np.sum(x**2)) <= 1e-10

        g = make_grid(0, 4, 0.05)
        curves = [Curve(g, v) for v in rng.normal(size=(3, g.size)) + 2 * np.sin(g.points)]
        out, _ = penalized_smoother(curves, 0.0)
        for a, b in zip(out, curves):
            np.testing.assert_allclose(a.values, b.values, atol=1e-12)
        out, _ = penalized_smoother(curves, 1e12)
        for a, b in zip(out, curves):
            fit = np.polyval(np.polyfit(g.points, b.values, 1), g.points)
            assert np.abs(a.values - fit).max() < 1e-6

        walks = [Curve(g, v) for v in np.cumsum(rng.normal(size=(12, g.size)), axis=1) * 0.1]
        model = fit_kernel(walks, KernelConfig(h=1e12))
        np.testing.assert_allclose(model.predict(walks[-1]).values, model.smoothed[1:].mean(axis=0), atol=1e-8)
        model = fit_kernel(walks, KernelConfig(h=1e-9))
        near = model.predict(Curve(g, model.smoothed[4] + 1e-3)).values
        np.testing.assert_allclose(near, model.smoothed[5], atol=1e-8)

        dg = dyadic_grid(0, 4, 6)
        X, basis, V = _sine_data(dg)
        reference = bosq(X, 5).predict(X[-1]) @ basis.values
        dcurves = [Curve(dg, v) for v in V]
        wav = as_predictor(dcurves, 5, WaveletConfig(lam=0.0)).predict_values(V[-1])
        besse = besse_penalized_predictor(dcurves, SmootherConfig(ell=0.0, q=5)).predict_values(V[-1])
        np.testing.assert_allclose(wav, reference, atol=1e-8)
        np.testing.assert_allclose(besse, reference, atol=1e-8)
        assert time.perf_counter() - t0 < 60.0


def test_metric_transcriptions(criterion):
    with criterion("metric transcriptions against brute-force loops"):
        basis = sine_basis(make_grid(0, 4, 0.25), 3, tol=0.2)
        rows, w = basis.values.tolist(), basis.grid.weights.tolist()
        for seed in range(8):
            rng = np.random.default_rng(seed)
            X, x = rng.normal(size=(6, 3)), rng.normal(size=3)
            R_true = rng.uniform(-0.3, 0.3, size=(3, 3))
            rho_d = list(rng.uniform(-0.9, 0.9, size=3))
            for k in (1, 2, 3):
                rho_o, _, vecs = oracles.diag_unknown(X.tolist(), k)
                op = oracles.diag_operator(rho_o, vecs, k)
                pred = _oracle_curve(op, x, rows)
                got = diag_truncated_error(rho_d, x, diag_unknown(X, k), basis)
                assert got == pytest.approx(oracles.a755(rho_d, list(x), pred, rows, w, k), rel=1e-12, abs=1e-12)

                R, _, vecs = oracles.bosq_matrix(X.tolist(), k)
                pred = _oracle_curve(oracles.operator_from(R, vecs, k), x, rows)
                model = bosq(X, k)
                lit = kernel_truncated_error(R_true, model, basis, k, x, KernelErrorMode.PAPER_LITERAL)
                app = kernel_truncated_error(R_true, model, basis, k, x, KernelErrorMode.APPLIED)
                assert lit == pytest.approx(oracles.a766_literal(R_true.tolist(), pred, rows, w, k), rel=1e-12, abs=1e-12)
                assert app == pytest.approx(
                    oracles.a766_applied(R_true.tolist(), list(x), pred, rows, w, k), rel=1e-12, abs=1e-12
                )
                assert full_error(R_true, model, basis, x) == pytest.approx(
                    oracles.new2(R_true.tolist(), list(x), pred, rows, w), rel=1e-12, abs=1e-12
                )

                C = sorted(rng.uniform(0.2, 2.0, size=3), reverse=True)
                total, terms = oracles.ub(X.tolist(), C, rho_d, k)
                ub = ub_bound(X, C, rho_d, k)
                np.testing.assert_allclose([ub.estimation, ub.bias, ub.eigvec, ub.tail], terms, rtol=1e-12, atol=1e-12)
                assert ub.total == pytest.approx(total, rel=1e-12, abs=1e-12)

            expected = oracles.hs_offdiag(oracles.covariance(X.tolist()), oracles.cross_covariance(X.tolist()), 3)
            assert hs_offdiag_bound(X, 3) == pytest.approx(expected, rel=1e-12, abs=1e-12)

            errs = list(rng.exponential(0.05, size=40))
            for beta, rate, exponent in ((0.65, "half", 0.5), (1.25, "third", 1 / 3)):
                recs = [ErrorRecord(l, 2000, 3, "m", e, False) for l, e in enumerate(errs)]
                c = f_count(recs, ThresholdCurve(beta, rate))
                assert (c.count, c.total) == oracles.f_count(errs, 2000, beta, exponent)


def _oracle_curve(op, x, rows):
    M = len(x)
    coeffs = [sum(op[a][b] * x[b] for b in range(M)) for a in range(M)]
    return [oracles.curve(coeffs, rows, p) for p in range(len(rows[0]))]


def test_determinism(criterion, desk_run, desk_config, tmp_path):
    with criterion("identical CSV bytes for 1 and 8 workers"):
        one = write_csv(desk_run.table, tmp_path / "one.csv").read_bytes()
        eight = write_csv(run(desk_config, workers=8).table, tmp_path / "eight.csv").read_bytes()
        assert one == eight

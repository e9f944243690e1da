import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from arhbench.componentwise import bosq, diag_known
from arhbench.errors import GridMismatchError, InvalidSampleSizeError
from arhbench.grid import Curve, dyadic_grid, make_grid, reconstruct_values, sine_basis
from arhbench.smoothing import (
    KernelConfig,
    SmootherConfig,
    WaveletConfig,
    as_predictor,
    besse_penalized_predictor,
    fit_kernel,
    hat_operator,
    kernel_predictor,
    kernel_weights,
    penalized_smoother,
    penalty_seminorm,
    second_difference,
    smoothing_parameter,
    wavelet_smooth,
    wavelet_smooth_values,
)
from arhbench.wavelets import dwt, idwt


def as_curves(grid, V):
    return [Curve(grid, row) for row in V]


@pytest.fixture(scope="module")
def dgrid():
    return dyadic_grid(0, 4, 6)


@pytest.fixture(scope="module")
def sine_data(dgrid):
    """Zero-mean ARH-like coefficients on five sine modes, with their curves."""
    rng = np.random.default_rng(7)
    M, n = 5, 60
    rho = np.diag([0.7, -0.4, 0.5, 0.2, -0.3]) + 0.05 * rng.normal(size=(M, M))
    X = np.zeros((n, M))
    x = rng.normal(size=M)
    for i in range(n):
        x = rho @ x + rng.normal(size=M) * np.arange(1, M + 1) ** -0.75
        X[i] = x
    X -= X.mean(axis=0)
    basis = sine_basis(dgrid, M, tol=1e-2)
    return X, basis, reconstruct_values(X, basis)


def bosq_curve(X, basis, k, x_coeffs):
    return bosq(X, k).predict(x_coeffs) @ basis.values


class TestWaveletSmooth:
    def test_lambda_zero_identity(self, dgrid, rng):
        c = Curve(dgrid, rng.normal(size=64))
        out = wavelet_smooth(c, WaveletConfig(lam=0.0))
        np.testing.assert_allclose(out.values, c.values, atol=1e-10)

    @pytest.mark.parametrize("family", ["haar", "db4"])
    def test_huge_lambda_keeps_scaling_content(self, dgrid, rng, family):
        x = rng.normal(size=64)
        cfg = WaveletConfig(family=family, j0=2, lam=1e12)
        c = dwt(x, family, 2)
        coarse = idwt([c[0]] + [np.zeros_like(d) for d in c[1:]], family)
        np.testing.assert_allclose(wavelet_smooth(Curve(dgrid, x), cfg).values, coarse, atol=1e-10)

    @pytest.mark.parametrize("lam", [0.1, 1.0, 7.5])
    def test_matches_block_mean_oracle(self, dgrid, rng, lam):
        x = rng.normal(size=64)
        out = wavelet_smooth(Curve(dgrid, x), WaveletConfig(j0=3, lam=lam)).values
        np.testing.assert_allclose(out, oracles.haar_smooth(list(x), 3, lam), atol=1e-12)

    @pytest.mark.parametrize("family", ["haar", "db4"])
    @pytest.mark.parametrize("lam", [0.05, 0.5, 5.0])
    def test_quadratic_variation_random_curves(self, dgrid, family, lam):
        rng = np.random.default_rng(99)
        cfg = WaveletConfig(family=family, lam=lam)
        for _ in range(50):
            x = rng.normal(size=64)
            y = wavelet_smooth(Curve(dgrid, x), cfg).values
            assert np.sum(np.diff(y) ** 2) <= np.sum(np.diff(x) ** 2)

    def test_detail_energy_contracts(self, dgrid, rng):
        x = np.linspace(0, 4, 64) + 0.1 * rng.normal(size=64)
        y = wavelet_smooth(Curve(dgrid, x), WaveletConfig(lam=1.0)).values
        dx, dy = dwt(x, "haar", 3)[1:], dwt(y, "haar", 3)[1:]
        for a, b in zip(dx, dy):
            np.testing.assert_allclose(b, a / 2, atol=1e-12)

    def test_non_dyadic_grid_is_resampled(self):
        g = make_grid(0, 4, 0.06)
        c = Curve(g, np.sin(g.points))
        out = wavelet_smooth(c, WaveletConfig(lam=0.0))
        # only the two linear interpolations separate output from input
        assert np.abs(out.values - c.values).max() < 5e-3

    def test_single_curve_needs_lambda(self, dgrid):
        with pytest.raises(ValueError):
            wavelet_smooth(Curve(dgrid, np.zeros(64)), WaveletConfig())

    def test_scenario_lambda(self, diag_ops):
        lam = smoothing_parameter(WaveletConfig(), diag_ops)
        expected = np.diag(diag_ops.noise_cov).sum() * diag_ops.C_eigs.sum() / 64
        assert lam == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("j0,J", [(3, 3), (-1, 4)])
    def test_config_bounds(self, j0, J):
        with pytest.raises(ValueError):
            WaveletConfig(j0=j0, J=J)


class TestWaveletPredictor:
    def test_lambda_zero_equals_bosq(self, sine_data, dgrid):
        X, basis, V = sine_data
        pred = as_predictor(as_curves(dgrid, V), 5, WaveletConfig(lam=0.0))
        x = V[-1]
        np.testing.assert_allclose(pred.predict_values(x), bosq_curve(X, basis, 5, X[-1]), atol=1e-8)

    def test_brute_force_transcription(self):
        g = dyadic_grid(0, 4, 3)
        rng = np.random.default_rng(3)
        V = rng.normal(size=(3, 8))
        cfg = WaveletConfig(j0=1, J=3, lam=0.5)
        pred = as_predictor(as_curves(g, V), 2, cfg)
        x = rng.normal(size=8)
        expected = oracles.wavelet_predictor(V.tolist(), g.weights.tolist(), 1, 0.5, 2, list(x))
        np.testing.assert_allclose(pred.predict_values(x), expected, atol=1e-12)

    def test_independent_curves(self, dgrid):
        rng = np.random.default_rng(5)
        n = 2000
        basis = sine_basis(dgrid, 4, tol=1e-2)
        V = reconstruct_values(rng.normal(size=(n, 4)) * [1.0, 0.5, 0.3, 0.2], basis)
        pred = as_predictor(as_curves(dgrid, V), 1, WaveletConfig(lam=0.2))
        assert abs(pred.R[0, 0]) < 4 / np.sqrt(n)

    def test_needs_three_curves(self, dgrid):
        with pytest.raises(InvalidSampleSizeError):
            as_predictor(as_curves(dgrid, np.ones((2, 64))), 1, WaveletConfig(lam=0.0))

    def test_k_zero(self, dgrid, rng):
        with pytest.raises(ValueError):
            as_predictor(as_curves(dgrid, rng.normal(size=(4, 64))), 0, WaveletConfig(lam=0.0))

    def test_data_mode_lambda(self, sine_data, dgrid):
        _, _, V = sine_data
        pred = as_predictor(as_curves(dgrid, V), 2, WaveletConfig())
        assert pred.lam > 0


class TestPenalizedSmoother:
    def test_ell_zero(self, rng):
        g = make_grid(0, 4, 0.06)
        curves = as_curves(g, rng.normal(size=(3, g.size)))
        out, A = penalized_smoother(curves, 0.0)
        np.testing.assert_array_equal(A, np.eye(g.size))
        for a, b in zip(out, curves):
            np.testing.assert_array_equal(a.values, b.values)

    @pytest.mark.parametrize("step", [0.06, 0.01])
    def test_huge_ell_affine(self, rng, step):
        g = make_grid(0, 4, step)
        for _ in range(5):
            x = rng.normal(size=g.size) + 3 * np.sin(g.points)
            (out,), _ = penalized_smoother([Curve(g, x)], 1e12)
            fit = np.polyval(np.polyfit(g.points, x, 1), g.points)
            assert np.abs(out.values - fit).max() < 1e-6

    def test_second_difference_annihilates_affine(self):
        t = make_grid(0, 4, 0.06).points
        np.testing.assert_allclose(second_difference(t) @ (2 * t - 1), 0, atol=1e-10)
        np.testing.assert_allclose(second_difference(t) @ t**2, 2, atol=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(ell=st.floats(0, 1e8), step=st.sampled_from([0.06, 0.1, 0.37]))
    def test_hat_spd_spectrum(self, ell, step):
        A = hat_operator(make_grid(0, 4, step), ell)
        np.testing.assert_allclose(A, A.T, atol=1e-12)
        vals = np.linalg.eigvalsh(A)
        assert vals.min() > 0 and vals.max() <= 1 + 1e-12

    @pytest.mark.parametrize("ell", [1e-4, 1e-2, 1.0, 1e4])
    def test_contraction_uniform(self, ell, rng):
        g = make_grid(0, 4, 0.05)
        D = second_difference(g.points)
        for _ in range(10):
            x = rng.normal(size=g.size)
            (y,), _ = penalized_smoother([Curve(g, x)], ell)
            assert np.linalg.norm(D @ y.values) <= np.linalg.norm(D @ x) * (1 + 1e-12)

    @pytest.mark.parametrize("ell", [1e-3, 1.0])
    def test_contraction_seminorm_nonuniform(self, ell, rng):
        g = make_grid(0, 4, 0.06)
        for _ in range(10):
            x = rng.normal(size=g.size)
            (y,), _ = penalized_smoother([Curve(g, x)], ell)
            assert penalty_seminorm(g, y.values) <= penalty_seminorm(g, x) * (1 + 1e-12)

    def test_grid_mismatch(self):
        a = Curve(make_grid(0, 4, 0.1), np.zeros(41))
        b = Curve(make_grid(0, 4, 0.2), np.zeros(21))
        with pytest.raises(GridMismatchError):
            penalized_smoother([a, b], 1.0)


class TestBesse:
    def test_full_rank_equals_bosq(self, sine_data, dgrid):
        X, basis, V = sine_data
        pred = besse_penalized_predictor(as_curves(dgrid, V), SmootherConfig(ell=0.0, q=5))
        np.testing.assert_allclose(pred.predict_values(V[-1]), bosq_curve(X, basis, 5, X[-1]), atol=1e-8)

    @pytest.mark.parametrize("ell", [0.0, 1e-3, 0.5])
    def test_one_dimensional_collapse(self, ell):
        g = make_grid(0, 4, 0.05)
        rng = np.random.default_rng(1)
        a = np.empty(80)
        a[0] = 1.0
        for i in range(1, 80):
            a[i] = 0.6 * a[i - 1] + rng.normal()
        f = np.exp(-g.points) * np.cos(2 * g.points)
        pred = besse_penalized_predictor(as_curves(g, np.outer(a, f)), SmootherConfig(ell=ell, q=1))
        rho = diag_known(a[:, None], 1).rho_hat[0]
        assert pred.R[0, 0] == pytest.approx(rho, abs=1e-10)
        if ell == 0.0:
            np.testing.assert_allclose(pred.predict_values(a[-1] * f), rho * a[-1] * f, atol=1e-10)

    @pytest.mark.parametrize("ell", [0.0, 0.1])
    def test_constant_curves(self, ell):
        g = make_grid(0, 4, 0.05)
        v = 1 + np.sin(g.points) ** 2
        pred = besse_penalized_predictor(as_curves(g, np.tile(v, (6, 1))), SmootherConfig(ell=ell, q=1))
        assert pred.R[0, 0] == pytest.approx(1.0, abs=1e-12)
        E = pred.basis[0]
        projection = np.dot(g.weights * v, E) * E
        np.testing.assert_allclose(pred.predict_values(v), projection, atol=1e-10)
        if ell == 0.0:
            np.testing.assert_allclose(pred.predict_values(v), v, atol=1e-10)

    def test_rank_deficient_q_is_regularized(self):
        g = make_grid(0, 4, 0.05)
        v = np.sin(g.points)
        pred = besse_penalized_predictor(as_curves(g, np.tile(v, (6, 1))), SmootherConfig(q=3))
        assert np.all(np.isfinite(pred.R))

    def test_q_too_large(self, rng):
        g = make_grid(0, 4, 0.5)
        with pytest.raises(ValueError):
            besse_penalized_predictor(as_curves(g, rng.normal(size=(4, g.size))), SmootherConfig(q=5))


class TestKernel:
    @pytest.fixture
    def setup(self, rng):
        g = make_grid(0, 4, 0.05)
        V = np.cumsum(rng.normal(size=(12, g.size)), axis=1) * 0.1
        return g, as_curves(g, V)

    def test_flat_weights(self, setup):
        g, curves = setup
        model = fit_kernel(curves, KernelConfig(h=1e12))
        out = model.predict(curves[-1])
        np.testing.assert_allclose(out.values, model.smoothed[1:].mean(axis=0), atol=1e-8)

    def test_nearest_successor(self, setup):
        g, curves = setup
        model = fit_kernel(curves, KernelConfig(h=1e-9))
        query = Curve(g, model.smoothed[4] + 1e-3)
        res = model.predict_full(query)
        np.testing.assert_allclose(res.curve.values, model.smoothed[5], atol=1e-8)
        assert res.degenerate

    @pytest.mark.parametrize("h", [1e-3, 0.25, 10.0])
    def test_identical_curves(self, h, rng):
        g = make_grid(0, 4, 0.1)
        V = np.tile(np.cos(g.points), (8, 1))
        V[-1] = rng.normal(size=g.size)
        model = fit_kernel(as_curves(g, V), KernelConfig(h=h))
        out = model.predict(Curve(g, rng.normal(size=g.size)))
        np.testing.assert_allclose(out.values, model.smoothed[1:].mean(axis=0), atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(h=st.floats(1e-4, 1e4), seed=st.integers(0, 2**32 - 1))
    def test_convex_envelope(self, h, seed):
        rng = np.random.default_rng(seed)
        g = make_grid(0, 4, 0.2)
        curves = as_curves(g, rng.normal(size=(6, g.size)))
        model = fit_kernel(curves, KernelConfig(h=h))
        out = model.predict(Curve(g, rng.normal(size=g.size))).values
        succ = model.smoothed[1:]
        assert np.all(out >= succ.min(axis=0) - 1e-12)
        assert np.all(out <= succ.max(axis=0) + 1e-12)

    def test_weights_sum_to_one(self):
        w, degenerate = kernel_weights(np.array([0.0, 1.0, 4.0]), 1.0)
        np.testing.assert_allclose(w, np.exp(-0.5 * np.array([0, 1, 16.0])) / np.exp(-0.5 * np.array([0, 1, 16.0])).sum())
        assert not degenerate

    def test_function_form(self, setup):
        g, curves = setup
        cfg = KernelConfig(h=0.5)
        np.testing.assert_array_equal(
            kernel_predictor(curves, cfg, curves[3]).values, fit_kernel(curves, cfg).predict(curves[3]).values
        )

    def test_bandwidth_positive(self):
        with pytest.raises(ValueError):
            KernelConfig(h=0.0)


def test_wavelet_smooth_values_rowwise(dgrid, rng):
    V = rng.normal(size=(3, 64))
    cfg = WaveletConfig(lam=0.3)
    S = wavelet_smooth_values(V, dgrid, cfg, 0.3)
    for i in range(3):
        np.testing.assert_array_equal(S[i], wavelet_smooth(Curve(dgrid, V[i]), cfg).values)

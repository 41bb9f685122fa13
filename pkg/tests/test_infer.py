import numpy as np
import pytest

from pangenes.geneprocess import ModelParams, simulate_sample
from pangenes.infer import FitError, _profile, fit_params, predicted_spectrum
from pangenes.stats import SpectrumCounts, gene_frequency_spectrum
from pangenes.theory import spectrum

TRUE = ModelParams(1142.17, 2.03, 1270)


def test_predicted_spectrum():
    assert np.allclose(predicted_spectrum(6, ModelParams(2.0, 0.7)), spectrum(6, 2.0, 0.7))
    pred = predicted_spectrum(9, TRUE)
    assert pred[0] == pytest.approx(1024.878365, rel=1e-8)
    assert pred[-1] == pytest.approx(1281.980163, rel=1e-8)
    with pytest.raises(ValueError):
        predicted_spectrum(4, ModelParams(1.0, 0.0))


@pytest.mark.parametrize("weighted", [False, True])
def test_noiseless_recovery(weighted):
    fit = fit_params(predicted_spectrum(9, TRUE), weighted=weighted)
    assert fit.theta_hat == pytest.approx(1142.17, rel=1e-3)
    assert abs(fit.rho_hat - 2.03) < 1e-3
    assert abs(fit.gc_hat - 1270) < 0.1
    assert fit.gc_rounded == 1270 and not fit.clamped
    assert np.max(np.abs(fit.residuals)) < 1e-3


@pytest.mark.parametrize("params", [ModelParams(5.0, 0.3, 0), ModelParams(40.0, 8.0, 12),
                                    ModelParams(300.0, 0.05, 100)])
def test_noiseless_recovery_other_params(params):
    fit = fit_params(predicted_spectrum(12, params))
    assert fit.theta_hat == pytest.approx(params.theta, rel=1e-3)
    assert fit.rho_hat == pytest.approx(params.rho, rel=1e-3)
    assert abs(fit.gc_hat - params.g_c) < 0.1


def test_class_n_decomposition():
    # class-9 count of 1282 at the reported fit leaves about 1270 core genes
    y = predicted_spectrum(9, ModelParams(1142.17, 2.03))
    y[-1] = 1282
    fit = fit_params(y)
    assert fit.gc_rounded == 1270


def test_clamps_negative_core():
    y = spectrum(8, 20.0, 1.0)
    y[-1] = 0.0
    fit = fit_params(y)
    assert fit.clamped and fit.gc_hat == 0.0
    assert fit.residuals[-1] != 0


def test_accepts_spectrum_counts():
    counts = np.rint(predicted_spectrum(9, TRUE)).astype(int)
    fit = fit_params(SpectrumCounts(9, counts))
    assert fit.theta_hat == pytest.approx(1142.17, rel=0.02)


def test_errors():
    with pytest.raises(FitError):
        fit_params(SpectrumCounts(5, [0] * 5))
    with pytest.raises(ValueError):
        fit_params(spectrum(5, 1.0, 1.0), rho_min=2.0, rho_max=1.0)
    with pytest.raises(ValueError):
        fit_params(spectrum(2, 1.0, 1.0))
    with pytest.raises(ValueError):
        fit_params([1.0, -1.0, 2.0])


def test_rows():
    names = [name for name, _ in fit_params(predicted_spectrum(9, TRUE)).rows()]
    assert names[:4] == ["theta", "rho", "g_c", "g_c_rounded"]


@pytest.mark.slow
def test_calibration_on_simulated_spectra():
    # 100 seeded replicates; measured medians were +2.0% (theta) and -8.0% (rho)
    thetas, rhos = [], []
    for seq in np.random.SeedSequence(2024).spawn(100):
        _, m = simulate_sample(9, TRUE, np.random.default_rng(seq))
        fit = fit_params(gene_frequency_spectrum(m))
        thetas.append(fit.theta_hat)
        rhos.append(fit.rho_hat)
    assert abs(np.median(thetas) / 1142.17 - 1) < 0.15
    assert abs(np.median(rhos) / 2.03 - 1) < 0.25


def test_fit_invariants(rng):
    y = predicted_spectrum(9, ModelParams(50.0, 0.8, 20)) + rng.normal(0, 2.0, 9)
    fit = fit_params(y)
    assert fit.sse == pytest.approx(np.sum(fit.residuals**2), rel=1e-10)
    assert fit.gc_hat >= 0 and fit.residuals[-1] == pytest.approx(0, abs=1e-9)
    grid = np.exp(np.linspace(np.log(0.01), np.log(100), 64))
    assert all(fit.sse <= _profile(y, np.ones(9), r)[2] + 1e-9 for r in grid)


@pytest.mark.parametrize("c", [0.01, 3.0, 250.0])
def test_scale_equivariance(c):
    y = predicted_spectrum(9, ModelParams(80.0, 1.7, 30))
    a, b = fit_params(y), fit_params(c * y)
    assert b.theta_hat == pytest.approx(c * a.theta_hat, rel=1e-5)
    assert b.gc_hat == pytest.approx(c * a.gc_hat, rel=1e-5, abs=1e-6)
    assert b.rho_hat == pytest.approx(a.rho_hat, rel=1e-5)

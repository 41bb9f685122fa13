import math

import numpy as np
import pytest

from pangenes import _kernels as K
from pangenes.geneprocess import ModelParams
from pangenes.montecarlo import (Check, bootstrap_cov_se, compare_samplers,
                                 simulate_statistics, urn_spectra, verify_moments)
from pangenes.theory import spectrum


def test_results_independent_of_jobs():
    p = ModelParams(3.0, 1.0)
    a = simulate_statistics(6, p, 2500, seed=5, jobs=1)
    b = simulate_statistics(6, p, 2500, seed=5, jobs=3)
    assert np.array_equal(a, b, equal_nan=True)
    assert np.array_equal(urn_spectra(6, p, 2500, 5, jobs=1), urn_spectra(6, p, 2500, 5, jobs=2))


def test_report_independent_of_jobs():
    p = ModelParams(2.0, 1.0)
    a = verify_moments(4, p, 3000, seed=12, n_boot=200, jobs=1)
    b = verify_moments(4, p, 3000, seed=12, n_boot=200, jobs=4)
    assert a.to_tsv() == b.to_tsv()


def test_block_prefix_stable():
    # the first blocks do not change when more replicates are requested
    p = ModelParams(3.0, 1.0)
    a = simulate_statistics(5, p, 1000, seed=8, with_p=False)
    b = simulate_statistics(5, p, 3000, seed=8, with_p=False)
    assert np.array_equal(a, b[:1000], equal_nan=True)


def test_undefined_columns_are_nan():
    data = simulate_statistics(2, ModelParams(1.0, 1.0), 10, seed=1)
    assert np.all(np.isnan(data[:, K.COL_P])) and np.all(np.isnan(data[:, K.COL_D01_23]))


def test_validation():
    with pytest.raises(ValueError):
        simulate_statistics(63, ModelParams(1.0, 1.0), 10, seed=1)
    with pytest.raises(ValueError):
        simulate_statistics(4, ModelParams(1.0, 0.0), 10, seed=1)
    with pytest.raises(ValueError):
        verify_moments(4, ModelParams(1.0, 1.0), 50, seed=1)
    with pytest.raises(ValueError):
        verify_moments(4, ModelParams(1.0, 0.0), 500, seed=1)


def test_check_z():
    c = Check("x", "mean", 1.0, 1.5, 0.25, 4.0)
    assert c.z == pytest.approx(2.0) and c.passed
    assert not Check("x", "mean", 1.0, 2.5, 0.25, 4.0).passed
    assert Check("x", "mean", 1.0, 1.0, 0.0, 4.0).passed
    assert math.isinf(Check("x", "mean", 1.0, 2.0, 0.0, 4.0).z)


def test_bootstrap_se_of_variance():
    # for normal data the SE of the sample variance is about sigma^2 sqrt(2/(R-1))
    rng = np.random.default_rng(3)
    x = rng.normal(0, 2.0, size=(4000, 1))
    se = bootstrap_cov_se(x, [(0, 0)], 1000, np.random.default_rng(4))[0]
    assert se == pytest.approx(4.0 * math.sqrt(2 / 3999), rel=0.15)


def test_bootstrap_se_matches_naive_resampling():
    rng = np.random.default_rng(9)
    x = rng.exponential(size=(500, 2))
    x[:, 1] += x[:, 0]
    fast = bootstrap_cov_se(x, [(0, 1)], 2000, np.random.default_rng(1))[0]
    r2 = np.random.default_rng(2)
    naive = [np.cov(*x[r2.integers(0, 500, 500)].T)[0, 1] for _ in range(2000)]
    assert fast == pytest.approx(np.std(naive, ddof=1), rel=0.1)


def test_verify_small_case_passes():
    rep = verify_moments(2, ModelParams(1.0, 1.0), 100_000, seed=17)
    assert rep.passed, rep.to_text()
    names = {c.name for c in rep.checks}
    assert {"E[G]", "V[G]", "E[G_1]", "E[G_2]", "V[D]"} <= names
    g = next(c for c in rep.checks if c.name == "V[G]")
    assert g.theory == pytest.approx(19 / 12)
    tsv = rep.to_tsv().splitlines()
    assert tsv[1].startswith("statistic\tkind") and len(tsv) == len(rep.checks) + 2


def test_spectrum_classes_n9():
    data = simulate_statistics(9, ModelParams(10.0, 1.0), 100_000, seed=19, with_p=False)
    for k, expected in enumerate(spectrum(9, 10.0, 1.0), start=1):
        x = data[:, K.N_FIXED + k - 1]
        assert abs(x.mean() - expected) <= 4 * x.std(ddof=1) / math.sqrt(len(x))


def test_compare_samplers_small():
    cmp = compare_samplers(5, ModelParams(3.0, 1.0), 20_000, seed=2)
    assert cmp.passed, cmp.z
    assert cmp.z.shape == (5,)

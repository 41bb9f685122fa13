import numpy as np
import pytest

from conftest import within_se
from pangenes import _kernels as K
from pangenes.genealogy import Genealogy, sample_kingman
from pangenes.geneprocess import (BRANCH_GAIN, CORE, ROOT_POOL, ModelParams,
                                  hoppe_urn_spectra, hoppe_urn_spectrum, simulate_genes,
                                  simulate_sample)
from pangenes.montecarlo import simulate_statistics, urn_spectra
from pangenes.theory import spectrum


def test_params_validation():
    for bad in [(-1, 1), (1, -1), (1, 1, -2), (1, 1, 1.5)]:
        with pytest.raises(ValueError):
            ModelParams(*bad)


def test_rho_zero_needs_segregating_only(rng):
    tree = sample_kingman(4, rng)
    with pytest.raises(ValueError):
        simulate_genes(tree, ModelParams(1.0, 0.0), rng)
    m = simulate_genes(tree, ModelParams(1.0, 0.0), rng, segregating_only=True)
    assert m.segregating_only and ROOT_POOL not in m.origins


def test_theta_zero_gives_core_only(rng):
    tree = sample_kingman(5, rng)
    assert simulate_genes(tree, ModelParams(0.0, 1.0), rng).m == 0
    m = simulate_genes(tree, ModelParams(0.0, 1.0, 4), rng)
    assert m.m == 4 and m.n_core == 4 and m.carriers.all()
    assert simulate_genes(tree, ModelParams(0.0, 1.0, 4), rng, include_core=False).m == 0


def test_origins_and_ids(rng):
    _, m = simulate_sample(6, ModelParams(8.0, 1.0, 2), rng)
    assert set(m.origins) <= {ROOT_POOL, BRANCH_GAIN, CORE}
    assert m.origins[-2:] == (CORE, CORE)
    assert m.gene_ids == tuple(range(m.m))
    assert np.all(m.carriers.any(axis=1))


def test_seed_determinism():
    p = ModelParams(7.0, 1.5, 3)
    a = simulate_sample(8, p, np.random.default_rng(99))[1]
    b = simulate_sample(8, p, np.random.default_rng(99))[1]
    assert np.array_equal(a.carriers, b.carriers) and a.origins == b.origins


def test_sample_matches_block_kernel():
    # the Monte Carlo engine and the per-sample API consume the stream identically
    p = ModelParams(6.0, 1.2)
    seq = np.random.SeedSequence(3).spawn(1)[0]
    block = simulate_statistics(7, p, 1, seed=3, with_p=True)
    _, m = simulate_sample(7, p, np.random.Generator(np.random.PCG64(seq)))
    assert np.array_equal(K.summarize(m.carriers, 7, True), block[0], equal_nan=True)


def test_no_loss_keeps_gained_genes():
    # with rho = 0 every gain reaches all leaves below its branch
    tree = Genealogy.from_merges([(0, 1), (3, 2)], [1.0, 1.0])
    m = simulate_genes(tree, ModelParams(40.0, 0.0), np.random.default_rng(1),
                       segregating_only=True)
    patterns = {tuple(r) for r in m.carriers.astype(int)}
    assert patterns <= {(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0)}


@pytest.mark.parametrize("seed", range(5))
def test_no_loss_gain_reaches_whole_clade(seed):
    rng = np.random.default_rng(seed)
    tree = sample_kingman(8, rng)
    carriers, origin = K.simulate_carriers(8, tree.parent, tree.children, tree.time,
                                           15.0, 0.0, True, rng)
    assert len(origin) > 0 and np.all(origin > 0)
    for row, o in zip(carriers, origin):
        assert list(np.flatnonzero(row)) == tree.leaves_below(o - 1)


def test_single_individual_is_poisson():
    data = simulate_statistics(1, ModelParams(4.0, 2.0), 100_000, seed=21, with_p=False)
    g = data[:, K.COL_G]
    ok, mean, se = within_se(g, 2.0)
    assert ok, (mean, se)
    assert g.var() == pytest.approx(2.0, rel=0.03)


def test_single_individual_with_core(rng):
    _, m = simulate_sample(1, ModelParams(4.0, 2.0, 5), rng)
    assert m.n_core == 5


def test_mean_a_matches_theta_over_rho():
    data = simulate_statistics(9, ModelParams(10.0, 1.0), 100_000, seed=22, with_p=False)
    ok, mean, se = within_se(data[:, K.COL_A], 10.0)
    assert ok, (mean, se)


def test_mean_private_genes_pair():
    data = simulate_statistics(2, ModelParams(1.0, 1.0), 100_000, seed=23, with_p=False)
    ok, mean, se = within_se(data[:, K.COL_G0_MINUS_G1], 0.5)
    assert ok, (mean, se)


def test_urn_validation(rng):
    with pytest.raises(ValueError):
        hoppe_urn_spectrum(3, ModelParams(1.0, 0.0), rng)
    with pytest.raises(ValueError):
        hoppe_urn_spectrum(0, ModelParams(1.0, 1.0), rng)


def test_urn_theta_zero(rng):
    assert hoppe_urn_spectrum(6, ModelParams(0.0, 1.0), rng).total == 0


def test_urn_single_individual():
    x = urn_spectra(1, ModelParams(4.0, 2.0), 100_000, seed=31)[:, 0]
    ok, mean, se = within_se(x, 2.0)
    assert ok, (mean, se)


def test_urn_spectrum_matches_theory_large_theta():
    x = urn_spectra(9, ModelParams(1142.17, 2.03), 10_000, seed=32)
    for k, expected in enumerate(spectrum(9, 1142.17, 2.03), start=1):
        ok, mean, se = within_se(x[:, k - 1], expected)
        assert ok, (k, mean, se)


def test_urn_spectra_shape(rng):
    x = hoppe_urn_spectra(5, ModelParams(3.0, 1.0), 17, rng)
    assert x.shape == (17, 5) and x.dtype.kind == "i"

"""Monte Carlo verification of the closed-form moments against simulation."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import theory
from .geneprocess import ModelParams

log = logging.getLogger(__name__)

BLOCK_SIZE = 1000
MAX_LEAVES = 62


def _seed_seq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _aux_rng(seed) -> np.random.Generator:
    """Stream for resampling, disjoint from every block stream."""
    ss = _seed_seq(seed)
    child = np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + (2**32 - 1,))
    return np.random.Generator(np.random.PCG64(child))


def _block_sizes(replicates, block_size):
    full, rest = divmod(replicates, block_size)
    return [block_size] * full + ([rest] if rest else [])


def _run_blocks(fn, replicates, seed, jobs, block_size):
    """Run ``fn(size, rng)`` per block; stream ``b`` is spawn ``b`` of ``seed``.

    Blocks have a fixed size, so output does not depend on ``jobs``.
    """
    sizes = _block_sizes(replicates, block_size)
    seqs = _seed_seq(seed).spawn(len(sizes))
    tasks = [(size, np.random.Generator(np.random.PCG64(s))) for size, s in zip(sizes, seqs)]
    if jobs <= 1:
        parts = [fn(size, rng) for size, rng in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda t: fn(*t), tasks))
    return np.concatenate(parts, axis=0)


def simulate_statistics(n: int, params: ModelParams, replicates: int, seed: int,
                        jobs: int = 1, segregating_only: bool = False,
                        with_p: bool = True, block_size: int = BLOCK_SIZE) -> np.ndarray:
    """Per-replicate statistics of the dispensable genome.

    Columns follow the ``COL_*`` layout of the kernels, then ``G_1..G_n``.
    Statistics undefined for this ``n`` are ``nan``.
    """
    if not 1 <= n <= MAX_LEAVES:
        raise ValueError(f"n must be in 1..{MAX_LEAVES}")
    if params.rho == 0 and not segregating_only:
        raise ValueError("rho = 0 requires segregating_only=True")
    theta, rho = float(params.theta), float(params.rho)

    def block(size, rng):
        return K.simulate_block(n, theta, rho, segregating_only, with_p, size, rng)

    return _run_blocks(block, replicates, seed, jobs, block_size)


def urn_spectra(n: int, params: ModelParams, replicates: int, seed: int,
                jobs: int = 1, block_size: int = BLOCK_SIZE) -> np.ndarray:
    """Hoppe-urn spectra, ``replicates x n``, with the same block seeding."""
    if params.rho <= 0:
        raise ValueError("rho must be > 0")
    theta, rho = float(params.theta), float(params.rho)

    def block(size, rng):
        return K.hoppe_block(n, theta, rho, size, rng)

    return _run_blocks(block, replicates, seed, jobs, block_size)


@dataclass(frozen=True)
class Check:
    name: str
    kind: str          # "mean" or "var"
    theory: float
    estimate: float
    se: float
    threshold: float

    @property
    def z(self) -> float:
        if self.se == 0:
            return 0.0 if self.estimate == self.theory else math.inf
        return (self.estimate - self.theory) / self.se

    @property
    def passed(self) -> bool:
        return abs(self.z) <= self.threshold


@dataclass
class VerificationReport:
    n: int
    theta: float
    rho: float
    replicates: int
    seed: int
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_tsv(self) -> str:
        lines = [f"# n={self.n} theta={self.theta} rho={self.rho} "
                 f"replicates={self.replicates} seed={self.seed}",
                 "statistic\tkind\ttheory\testimate\tse\tz\tthreshold\tpass"]
        for c in self.checks:
            lines.append(f"{c.name}\t{c.kind}\t{c.theory:.10g}\t{c.estimate:.10g}\t"
                         f"{c.se:.6g}\t{c.z:.4f}\t{c.threshold:g}\t"
                         f"{'PASS' if c.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        lines = [f"n={self.n} theta={self.theta} rho={self.rho} R={self.replicates} "
                 f"seed={self.seed}"]
        for c in self.checks:
            lines.append(f"  [{'PASS' if c.passed else 'FAIL'}] {c.name:<18} "
                         f"theory={c.theory:<12.6g} mc={c.estimate:<12.6g} "
                         f"se={c.se:<10.3g} z={c.z:+.2f}")
        lines.append("all checks passed" if self.passed
                     else f"{len(self.failures())} check(s) failed")
        return "\n".join(lines)


def bootstrap_cov_se(data: np.ndarray, pairs: list[tuple[int, int]], n_boot: int,
                     rng: np.random.Generator) -> np.ndarray:
    """Bootstrap standard errors of sample covariances ``cov(data[:, a], data[:, b])``.

    Plain nonparametric bootstrap over replicates; each resample is a
    multinomial weight vector and only weighted sums are formed.
    """
    r = data.shape[0]
    cols = sorted({c for p in pairs for c in p})
    centred = {c: data[:, c] - data[:, c].mean() for c in cols}
    feats = [centred[c] for c in cols] + [centred[a] * centred[b] for a, b in pairs]
    fmat = np.column_stack(feats)
    pos = {c: i for i, c in enumerate(cols)}
    out = np.empty((n_boot, len(pairs)))
    chunk = max(1, 5_000_000 // r)
    for start in range(0, n_boot, chunk):
        stop = min(start + chunk, n_boot)
        w = np.stack([np.bincount(rng.integers(0, r, r), minlength=r)
                      for _ in range(start, stop)]).astype(float)
        sums = w @ fmat
        for j, (a, b) in enumerate(pairs):
            sa, sb = sums[:, pos[a]], sums[:, pos[b]]
            sab = sums[:, len(cols) + j]
            out[start:stop, j] = (sab - sa * sb / r) / (r - 1)
    return out.std(axis=0, ddof=1)


def verify_moments(n: int, params: ModelParams, replicates: int, seed: int,
                   threshold: float = 4.0, var_threshold: float = 6.0,
                   n_boot: int = 1000, jobs: int = 1) -> VerificationReport:
    """Simulate ``replicates`` samples and compare sample moments with theory.

    Means are checked against ``threshold`` standard errors, variances and
    covariances against ``var_threshold`` bootstrap standard errors.  The
    pair/triple/quadruple moments use leaves 0, 1, 2, 3 of every replicate.
    """
    if replicates < 100:
        raise ValueError("need at least 100 replicates")
    if params.rho <= 0:
        raise ValueError("rho must be > 0")
    if n_boot < 1000:
        log.warning("fewer than 1000 bootstrap resamples (%d)", n_boot)
    theta, rho = params.theta, params.rho
    data = simulate_statistics(n, params, replicates, seed, jobs=jobs)
    rep = VerificationReport(n, theta, rho, replicates, seed)
    cov = theory.covariances(n, theta, rho)
    spec = theory.spectrum(n, theta, rho)

    means = [("E[A]", K.COL_A, theory.moments_A(n, theta, rho)[0]),
             ("E[G]", K.COL_G, theory.moments_G(n, theta, rho)[0])]
    if n >= 2:
        means.append(("E[D]", K.COL_D, theory.moments_D(n, theta, rho)[0]))
    means += [(f"E[G_{k}]", K.N_FIXED + k - 1, spec[k - 1]) for k in range(1, n + 1)]
    means.append(("E[|Gi|]", K.COL_G0, cov["mean_Gi"]))
    if n >= 2:
        means.append(("E[|Gi-Gj|]", K.COL_G0_MINUS_G1, cov["mean_ij"]))
    if n >= 4:
        means.append(("E[D_ij,kl]", K.COL_D01_23, cov["mean_Dijkl"]))
        means.append(("E[P]", K.COL_P, theory.mean_P(theta, rho)))
    for name, col, value in means:
        x = data[:, col]
        rep.checks.append(Check(name, "mean", value, float(x.mean()),
                                float(x.std(ddof=1) / math.sqrt(len(x))), threshold))

    variances = [("V[A]", K.COL_A, K.COL_A, theory.moments_A(n, theta, rho)[1]),
                 ("V[G]", K.COL_G, K.COL_G, theory.moments_G(n, theta, rho)[1]),
                 ("V[|Gi|]", K.COL_G0, K.COL_G0, cov["var_Gi"])]
    if n >= 2:
        variances += [
            ("V[D]", K.COL_D, K.COL_D, theory.moments_D(n, theta, rho)[1]),
            ("C[|Gi|,|Gj|]", K.COL_G0, K.COL_G1, cov["cov_Gi_Gj"]),
            ("V[ij]", K.COL_G0_MINUS_G1, K.COL_G0_MINUS_G1, cov["var_ij"]),
            ("C[ij,ji]", K.COL_G0_MINUS_G1, K.COL_G1_MINUS_G0, cov["cov_ij_ji"]),
        ]
    if n >= 3:
        variances += [
            ("C[ij,ik]", K.COL_G0_MINUS_G1, K.COL_G0_MINUS_G2, cov["cov_ij_ik"]),
            ("C[ij,ki]", K.COL_G0_MINUS_G1, K.COL_G2_MINUS_G0, cov["cov_ij_ki"]),
            ("C[ij,jk]", K.COL_G0_MINUS_G1, K.COL_G1_MINUS_G2, cov["cov_ij_jk"]),
            ("C[ij,kj]", K.COL_G0_MINUS_G1, K.COL_G2_MINUS_G1, cov["cov_ij_kj"]),
        ]
    if n >= 4:
        variances.append(
            ("C[ij,kl]", K.COL_G0_MINUS_G1, K.COL_G2_MINUS_G3, cov["cov_ij_kl"]))
    pairs = [(a, b) for _, a, b, _ in variances]
    ses = bootstrap_cov_se(data, pairs, n_boot, _aux_rng(seed))
    for (name, a, b, value), se in zip(variances, ses):
        est = float(np.cov(data[:, a], data[:, b], ddof=1)[0, 1])
        rep.checks.append(Check(name, "var", value, est, float(se), var_threshold))
    return rep


@dataclass(frozen=True)
class SamplerComparison:
    n: int
    tree_mean: np.ndarray
    urn_mean: np.ndarray
    z: np.ndarray
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.all(np.abs(self.z) <= self.threshold))


def compare_samplers(n: int, params: ModelParams, replicates: int, seed: int,
                     threshold: float = 4.0, jobs: int = 1) -> SamplerComparison:
    """Two-sample z-test per spectrum class: tree simulation vs. Hoppe urn."""
    seq_tree, seq_urn = _seed_seq(seed).spawn(2)
    tree = simulate_statistics(n, params, replicates, seq_tree, jobs=jobs, with_p=False)
    tree = tree[:, K.N_FIXED:]
    urn = urn_spectra(n, params, replicates, seq_urn, jobs=jobs)
    m1, m2 = tree.mean(axis=0), urn.mean(axis=0)
    se = np.sqrt(tree.var(axis=0, ddof=1) / len(tree) + urn.var(axis=0, ddof=1) / len(urn))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, (m1 - m2) / se, 0.0)
    return SamplerComparison(n, m1, m2, z, threshold)

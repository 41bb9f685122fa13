"""Gene gain and loss along a genealogy (infinitely many genes model)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .genealogy import Genealogy, sample_kingman

ROOT_POOL = "root-pool"
BRANCH_GAIN = "branch-gain"
CORE = "core"
OBSERVED = "observed"
ORIGINS = (ROOT_POOL, BRANCH_GAIN, CORE, OBSERVED)


@dataclass(frozen=True)
class ModelParams:
    theta: float
    rho: float
    g_c: int = 0

    def __post_init__(self):
        if self.theta < 0:
            raise ValueError("theta must be >= 0")
        if self.rho < 0:
            raise ValueError("rho must be >= 0")
        if self.g_c < 0 or int(self.g_c) != self.g_c:
            raise ValueError("g_c must be a nonnegative integer")


@dataclass(frozen=True, eq=False)
class PresenceMatrix:
    """Genes x individuals presence/absence table.

    ``carriers[g, i]`` is True when gene ``gene_ids[g]`` is present in
    individual ``i``.  ``segregating_only`` marks matrices simulated at
    ``rho = 0``, which omit the infinite pool shared by everyone.
    """

    carriers: np.ndarray
    gene_ids: tuple
    origins: tuple[str, ...]
    strains: tuple[str, ...] = ()
    segregating_only: bool = False

    def __post_init__(self):
        c = np.array(self.carriers, dtype=bool)
        if c.ndim != 2:
            raise ValueError("carriers must be a genes x individuals matrix")
        c.setflags(write=False)
        object.__setattr__(self, "carriers", c)
        object.__setattr__(self, "gene_ids", tuple(self.gene_ids))
        object.__setattr__(self, "origins", tuple(self.origins))
        if not self.strains:
            object.__setattr__(self, "strains",
                               tuple(f"s{i}" for i in range(c.shape[1])))
        else:
            object.__setattr__(self, "strains", tuple(self.strains))
        m, n = c.shape
        if n < 1:
            raise ValueError("need at least one individual")
        if len(self.strains) != n:
            raise ValueError("one strain name per column required")
        if len(self.gene_ids) != m or len(self.origins) != m:
            raise ValueError("one id and origin per gene required")
        if len(set(self.gene_ids)) != m:
            raise ValueError("duplicate gene identifiers")
        if any(o not in ORIGINS for o in self.origins):
            raise ValueError("unknown origin tag")
        counts = c.sum(axis=1)
        if np.any(counts == 0):
            raise ValueError("every gene must be carried by at least one individual")
        core = np.array([o == CORE for o in self.origins], dtype=bool)
        if np.any(counts[core] != n):
            raise ValueError("core genes must be carried by all individuals")

    @property
    def n(self) -> int:
        return self.carriers.shape[1]

    @property
    def m(self) -> int:
        return self.carriers.shape[0]

    @property
    def n_core(self) -> int:
        return sum(o == CORE for o in self.origins)

    def dispensable(self) -> "PresenceMatrix":
        """The matrix without genes tagged as core."""
        keep = [i for i, o in enumerate(self.origins) if o != CORE]
        return PresenceMatrix(self.carriers[keep],
                              [self.gene_ids[i] for i in keep],
                              [self.origins[i] for i in keep],
                              self.strains, self.segregating_only)

    def permuted(self, perm: Sequence[int]) -> "PresenceMatrix":
        """Same genes with individuals reordered as ``perm``."""
        perm = list(perm)
        return PresenceMatrix(self.carriers[:, perm], self.gene_ids, self.origins,
                              [self.strains[i] for i in perm], self.segregating_only)


def _tree_arrays(tree: Genealogy):
    return tree.parent, tree.children, tree.time


def simulate_genes(tree: Genealogy, params: ModelParams, rng: np.random.Generator,
                   segregating_only: bool = False,
                   include_core: bool = True) -> PresenceMatrix:
    """Simulate gene content of the leaves of ``tree``.

    Genes present at the MRCA are drawn from the one-line equilibrium
    ``Poisson(theta/rho)``; genes gained on each branch are placed uniformly
    on it.  Each gene then survives every branch segment of length ``x``
    with probability ``exp(-rho*x/2)``.  Genes lost everywhere are dropped.
    With ``segregating_only`` (required when ``rho == 0``) the root pool is
    omitted.  ``g_c`` core genes are appended when ``include_core``.
    """
    if params.rho == 0 and not segregating_only:
        raise ValueError("rho = 0 requires segregating_only=True")
    parent, children, time = _tree_arrays(tree)
    carriers, origin = _kernels.simulate_carriers(
        tree.n, parent, children, time, float(params.theta), float(params.rho),
        bool(segregating_only), rng)
    m = carriers.shape[0]
    origins = [ROOT_POOL if o == 0 else BRANCH_GAIN for o in origin]
    ids = list(range(m))
    if include_core and params.g_c:
        carriers = np.vstack([carriers, np.ones((params.g_c, tree.n), bool)])
        origins += [CORE] * params.g_c
        ids += list(range(m, m + params.g_c))
    return PresenceMatrix(carriers, ids, origins, segregating_only=segregating_only)


def simulate_sample(n: int, params: ModelParams, rng: np.random.Generator,
                    segregating_only: bool = False,
                    include_core: bool = True) -> tuple[Genealogy, PresenceMatrix]:
    tree = sample_kingman(n, rng)
    return tree, simulate_genes(tree, params, rng, segregating_only, include_core)


def hoppe_urn_spectrum(n: int, params: ModelParams, rng: np.random.Generator):
    """Gene frequency spectrum from the marked Hoppe urn.

    A structurally different sampler: it never builds a genealogy, so it is
    used to cross-check :func:`simulate_genes` class by class.  Only the
    marginal class means agree with the tree simulation; marks on the same
    urn run share one loss forest.
    """
    from .stats import SpectrumCounts

    if n < 1:
        raise ValueError("n must be >= 1")
    if params.rho <= 0:
        raise ValueError("rho must be > 0")
    counts = _kernels.hoppe_block(n, float(params.theta), float(params.rho), 1, rng)[0]
    return SpectrumCounts(n, counts)


def hoppe_urn_spectra(n: int, params: ModelParams, replicates: int,
                      rng: np.random.Generator) -> np.ndarray:
    """``replicates x n`` array of urn spectra from one stream."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if params.rho <= 0:
        raise ValueError("rho must be > 0")
    return _kernels.hoppe_block(n, float(params.theta), float(params.rho),
                                int(replicates), rng)

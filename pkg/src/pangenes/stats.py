"""Sample statistics of a gene presence/absence matrix."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geneprocess import PresenceMatrix


@dataclass(frozen=True, eq=False)
class SpectrumCounts:
    """Gene frequency spectrum; ``counts[k-1]`` genes are carried by exactly
    ``k`` of the ``n`` individuals."""

    n: int
    counts: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        if c.shape != (self.n,):
            raise ValueError(f"expected {self.n} classes, got {c.shape}")
        if np.any(c < 0):
            raise ValueError("counts must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    def __getitem__(self, k: int) -> int:
        """Class ``k`` (1-based)."""
        if not 1 <= k <= self.n:
            raise IndexError(k)
        return int(self.counts[k - 1])

    def __eq__(self, other):
        if not isinstance(other, SpectrumCounts):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.counts, other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _carriers(m) -> np.ndarray:
    c = m.carriers if isinstance(m, PresenceMatrix) else np.asarray(m, dtype=bool)
    if c.ndim != 2 or c.shape[1] == 0:
        raise ValueError("need a genes x individuals matrix with n >= 1")
    return c


def average_gene_number(m) -> float:
    c = _carriers(m)
    return float(c.sum()) / c.shape[1]


def mean_pairwise_differences(m) -> float:
    """Mean of ``|G_i \\ G_j|`` over ordered pairs ``i != j``."""
    spec = gene_frequency_spectrum(m)
    n = spec.n
    if n < 2:
        raise ValueError("need n >= 2")
    k = np.arange(1, n + 1)
    return float(np.sum(k * (n - k) * spec.counts)) / (n * (n - 1))


def quadruple_difference(m, i: int, j: int, k: int, l: int) -> int:
    """Number of genes in both ``i`` and ``j`` but in neither ``k`` nor ``l``."""
    c = _carriers(m)
    idx = (i, j, k, l)
    if len(set(idx)) != 4 or any(not 0 <= x < c.shape[1] for x in idx):
        raise ValueError("indices must be distinct and in range")
    return int(np.sum(c[:, i] & c[:, j] & ~c[:, k] & ~c[:, l]))


def incongruence_sum(m, chunk: int = 1024) -> int:
    """Exact ``sum D_{ij,kl} * D_{ik,jl}`` over ordered distinct quadruples.

    Uses the gene-pair identity: the sum equals the sum over ordered gene
    pairs of ``n11 * n10 * n01 * n00`` (individuals carrying both, only the
    first, only the second, neither).
    """
    c = _carriers(m)
    n = c.shape[1]
    if n < 4:
        raise ValueError("need n >= 4")
    x = c.astype(np.int64)
    rows = x.sum(axis=1)
    total = 0
    for start in range(0, len(x), chunk):
        block = x[start:start + chunk]
        n11 = block @ x.T
        n10 = rows[start:start + chunk, None] - n11
        n01 = rows[None, :] - n11
        n00 = n - n11 - n10 - n01
        total += int(np.sum(n11 * n10 * n01 * n00))
    return total


def incongruence_statistic(m) -> float:
    c = _carriers(m)
    n = c.shape[1]
    return incongruence_sum(c) / (n * (n - 1) * (n - 2) * (n - 3))


def incongruence_bruteforce_sum(m) -> int:
    """Direct quadruple loop with set operations; test oracle for small input."""
    c = _carriers(m)
    n = c.shape[1]
    if n < 4:
        raise ValueError("need n >= 4")
    sets = [frozenset(np.flatnonzero(c[:, i]).tolist()) for i in range(n)]
    total = 0
    for i, j, k, l in itertools.permutations(range(n), 4):
        d1 = len((sets[i] & sets[j]) - (sets[k] | sets[l]))
        if d1:
            total += d1 * len((sets[i] & sets[k]) - (sets[j] | sets[l]))
    return total


def incongruence_bruteforce(m) -> float:
    n = _carriers(m).shape[1]
    return float(Fraction(incongruence_bruteforce_sum(m),
                          n * (n - 1) * (n - 2) * (n - 3)))


def gene_frequency_spectrum(m) -> SpectrumCounts:
    c = _carriers(m)
    n = c.shape[1]
    k = c.sum(axis=1)
    if np.any(k == 0):
        raise ValueError("matrix contains genes carried by nobody")
    return SpectrumCounts(n, np.bincount(k, minlength=n + 1)[1:])


def pangenome_size(m) -> int:
    return int(_carriers(m).shape[0])


@dataclass(frozen=True, eq=False)
class StatReport:
    n: int
    A: float
    D: float | None
    P: float | None
    G: int
    spectrum: SpectrumCounts
    g_c: int = 0

    def __eq__(self, other):
        if not isinstance(other, StatReport):
            return NotImplemented
        return ((self.n, self.A, self.D, self.P, self.G, self.g_c)
                == (other.n, other.A, other.D, other.P, other.G, other.g_c)
                and self.spectrum == other.spectrum)

    def rows(self):
        """(name, value) pairs for tabular output."""
        tilde = "~" if self.g_c else ""
        out = [("n", self.n), (f"A{tilde}", self.A)]
        if self.D is not None:
            out.append((f"D{tilde}", self.D))
        if self.P is not None:
            out.append((f"P{tilde}", self.P))
        out.append((f"G{tilde}", self.G))
        out += [(f"G{tilde}_{k}", self.spectrum[k]) for k in range(1, self.n + 1)]
        if self.g_c:
            out.append(("g_c", self.g_c))
        return out


def report(m) -> StatReport:
    spec = gene_frequency_spectrum(m)
    n = spec.n
    return StatReport(
        n=n,
        A=average_gene_number(m),
        D=mean_pairwise_differences(m) if n >= 2 else None,
        P=incongruence_statistic(m) if n >= 4 else None,
        G=spec.total,
        spectrum=spec,
    )


def with_core(rep: StatReport, g_c: int) -> StatReport:
    """Statistics after adding ``g_c`` genes carried by everybody."""
    if g_c < 0:
        raise ValueError("g_c must be >= 0")
    counts = rep.spectrum.counts.copy()
    counts[-1] += g_c
    return StatReport(rep.n, rep.A + g_c, rep.D, rep.P, rep.G + g_c,
                      SpectrumCounts(rep.n, counts), rep.g_c + g_c)

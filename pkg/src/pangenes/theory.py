"""Closed-form moments of the infinitely many genes model on a Kingman
coalescent, in the rescaled (theta, rho) parametrization."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special


def _need_positive_rho(rho):
    if not rho > 0:
        raise ValueError("rho must be > 0")


def moments_A(n: int, theta: float, rho: float) -> tuple[float, float]:
    """Mean and variance of the average number of genes per individual."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _need_positive_rho(rho)
    mean = theta / rho
    var = theta / (n * (1 + rho)) + theta / (rho * (1 + rho))
    return mean, var


def moments_D(n: int, theta: float, rho: float) -> tuple[float, float]:
    """Mean and variance of the average number of pairwise differences.

    ``rho = 0`` returns the limit of the formulas; the simulation counterpart
    is the segregating-only mode.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if rho < 0:
        raise ValueError("rho must be >= 0")
    r, t = rho, theta
    mean = t / (1 + r)
    common = (1 + r) * (2 + r) * (3 + r) * (1 + 2 * r) * (3 + 2 * r)
    term1 = ((3 + 14 * r + 23 * r**2 + 16 * r**3 + 4 * r**4 + 4 * t + 2 * r * t)
             / ((1 + r) * common))
    term2 = (6 + 19 * r + 19 * r**2 + 12 * r**3 + 4 * r**4 + 8 * t + 4 * r * t) / common
    term3 = (3 + 11 * r + 12 * r**2 + 4 * r**3 + 10 * t + 9 * r * t + 2 * r**2 * t) / common
    var = t * (term1 + term2 / n + term3 * 2 / (n * (n - 1)))
    return mean, var


def mean_P(theta: float, rho: float) -> float:
    """Expected number of incongruent gene pairs in four genomes."""
    if rho < 0:
        raise ValueError("rho must be >= 0")
    s = rho / 2
    num = theta**2 * rho / 4 * (18 + 117 * rho / 2 + 203 * rho**2 / 4 + 105 * rho**3 / 8)
    den = ((1 + s)**2 * (1 + 2 * s) * (1 + 4 * s) * (3 + 4 * s) * (3 + 5 * s)
           * (6 + 5 * s) * (6 + 7 * s))
    return num / den


def h_function(k: int, rho: float) -> float:
    """``2 * sum_{i<k} 1/(rho+i)``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    _need_positive_rho(rho)
    return 2.0 * math.fsum(1.0 / (rho + i) for i in range(k))


def transition_rates(k1: int, k2: int, k3: int, rho: float):
    """Rates and target states of the unlost-lines jump process.

    ``k1`` lines are unlost for both loss processes, ``k2`` only for the
    first, ``k3`` only for the second.
    """
    half = rho / 2
    rates = (
        k1 * (k1 - 1) / 2,
        k2 * (k2 - 1) / 2 + k1 * k2 + half * k2,
        k3 * (k3 - 1) / 2 + k1 * k3 + half * k3,
        k2 * k3,
        half * k1,
        half * k1,
    )
    states = (
        (k1 - 1, k2, k3),
        (k1, k2 - 1, k3),
        (k1, k2, k3 - 1),
        (k1 + 1, k2 - 1, k3 - 1),
        (k1 - 1, k2 + 1, k3),
        (k1 - 1, k2, k3 + 1),
    )
    return rates, states


@functools.lru_cache(maxsize=16)
def _g_memo(rho: float) -> dict:
    # shared across calls: the table depends on rho only
    return {}


def _h_table(size: int, rho: float) -> np.ndarray:
    return np.concatenate([[0.0], 2.0 * np.cumsum(1.0 / (rho + np.arange(size)))])


def _g_table(k1: int, k2: int, k3: int, rho: float) -> dict:
    """Memo table of ``g`` for all states reachable from ``(k1, k2, k3)``.

    Iterative post-order so the depth is not limited by the interpreter.
    """
    h = _h_table(k1 + k2 + k3 + 1, rho)
    memo = _g_memo(float(rho))
    stack = [(k1, k2, k3)]
    while stack:
        state = stack[-1]
        if state in memo:
            stack.pop()
            continue
        a, b, c = state
        if a + c == 1:
            memo[state] = 2 / rho * h[a + b]
            stack.pop()
            continue
        if a + b == 1:
            memo[state] = 2 / rho * h[a + c]
            stack.pop()
            continue
        if a + b == 0 or a + c == 0:
            memo[state] = 0.0
            stack.pop()
            continue
        rates, targets = transition_rates(a, b, c, rho)
        pending = [s for lam, s in zip(rates, targets) if lam > 0 and s not in memo]
        if pending:
            stack.extend(pending)
            continue
        total = sum(rates)
        l1, l2 = a + b, a + c
        value = l1 * l2 * 2 / total**2
        for lam, s in zip(rates, targets):
            if lam > 0:
                value += lam / total * ((l1 * h[s[0] + s[2]] + l2 * h[s[0] + s[1]]) / total
                                        + memo[s])
        memo[state] = value
        stack.pop()
    return memo


def g_recursion(k1: int, k2: int, k3: int, rho: float) -> float:
    """``E[L1 * L2]`` for the unlost-length pair started in ``(k1, k2, k3)``."""
    if min(k1, k2, k3) < 0:
        raise ValueError("state components must be >= 0")
    _need_positive_rho(rho)
    return _g_table(k1, k2, k3, rho)[(k1, k2, k3)]


def mean_G(n: int, theta: float, rho: float) -> float:
    """Mean size of the dispensable genome, ``theta * sum_{i<n} 1/(rho+i)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _need_positive_rho(rho)
    return theta * math.fsum(1.0 / (rho + i) for i in range(n))


def moments_G(n: int, theta: float, rho: float) -> tuple[float, float]:
    """Mean and variance of the size of the dispensable genome."""
    mean = mean_G(n, theta, rho)
    var = mean - mean**2 + theta**2 / 4 * g_recursion(n, 0, 0, rho)
    return mean, var


def _check_class(n, k, rho):
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if rho < 0:
        raise ValueError("rho must be >= 0")
    if rho == 0 and k == n:
        raise ValueError("class n diverges at rho = 0")


def spectrum_mean(n: int, k: int, theta: float, rho: float) -> float:
    """Expected number of genes carried by exactly ``k`` of ``n`` individuals.

    At ``rho = 0`` (``k < n``) this returns the segregating-sites value
    ``theta/k``, which is not the ``rho -> 0`` limit of the formula.
    """
    _check_class(n, k, rho)
    if rho == 0:
        return theta / k
    log_ratio = math.fsum(math.log(n - i) - math.log(n - 1 - i + rho) for i in range(k))
    return theta / k * math.exp(log_ratio)


def spectrum_mean_beta(n: int, k: int, theta: float, rho: float) -> float:
    """Same quantity from the frequency density ``theta / (x (1-x)^(1-rho))``:
    ``C(n,k) * theta * B(k, n-k+rho)``.  At ``rho = 0`` this is the
    ``rho -> 0`` limit ``theta n / (k (n-k))``."""
    _check_class(n, k, rho)
    log_binom = special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
    return float(theta * np.exp(log_binom + special.betaln(k, n - k + rho)))


def spectrum(n: int, theta: float, rho: float) -> np.ndarray:
    return np.array([spectrum_mean(n, k, theta, rho) for k in range(1, n + 1)])


@dataclass(frozen=True)
class MomentSet:
    n: int
    theta: float
    rho: float
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]


def covariances(n: int, theta: float, rho: float) -> MomentSet:
    """Pair, triple and quadruple moments for individuals ``i, j, k, l``.

    Keys name set differences by index pairs: ``ij`` is ``|G_i \\ G_j|``, so
    ``cov_ij_ki`` is the covariance of ``|G_i \\ G_j|`` and ``|G_k \\ G_i|``.
    Triple and quadruple keys are present when ``n`` allows.
    """
    _need_positive_rho(rho)
    t, r = theta, rho
    c2 = t**2 / ((1 + r) ** 2 * (1 + 2 * r))
    c3 = c2 / (3 + 2 * r)
    v = {
        "mean_Gi": t / r,
        "var_Gi": t / r,
        "cov_Gi_Gj": t / (r * (1 + r)),
        "mean_ij": t / (1 + r),
        "var_ij": c2 + t / (1 + r),
        "cov_ij_ji": c2,
    }
    if n >= 3:
        v.update({
            "cov_ij_ik": c3 + t / (2 + r),
            "cov_ij_ki": c3,
            "cov_ij_jk": c3,
            "cov_ij_kj": c3 + t / ((1 + r) * (2 + r)),
        })
    if n >= 4:
        v.update({
            "cov_ij_kl": t / ((3 + r) * (2 + r))
            + 2 * t**2 / ((1 + r) ** 2 * (3 + r) * (1 + 2 * r) * (3 + 2 * r)),
            "mean_Dijkl": t / ((3 + r) * (2 + r)),
        })
    return MomentSet(n, theta, rho, v)


def all_moments(n: int, theta: float, rho: float, g_c: int = 0) -> list[tuple]:
    """Rows ``(statistic, mean, variance)``; variance is ``nan`` where no
    closed form exists.  ``g_c`` shifts the core-including statistics."""
    rows = []
    mA, vA = moments_A(n, theta, rho)
    rows.append(("A~" if g_c else "A", mA + g_c, vA))
    if n >= 2:
        rows.append(("D", *moments_D(n, theta, rho)))
    if n >= 4:
        rows.append(("P", mean_P(theta, rho), math.nan))
    mG, vG = moments_G(n, theta, rho)
    rows.append(("G~" if g_c else "G", mG + g_c, vG))
    spec = spectrum(n, theta, rho)
    for k in range(1, n + 1):
        shift = g_c if k == n else 0
        rows.append((f"G~_{k}" if g_c else f"G_{k}", spec[k - 1] + shift, math.nan))
    cov = covariances(n, theta, rho)
    for key, value in cov.values.items():
        if key.startswith("mean_"):
            rows.append((key, value, math.nan))
        else:
            rows.append((key, math.nan, value))
    return rows

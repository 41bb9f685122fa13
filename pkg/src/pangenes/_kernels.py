"""numba kernels shared by the single-replicate API and the Monte Carlo engine.

Node numbering used throughout: leaves are ``0..n-1``, internal nodes are
``n..2n-2`` in order of creation (increasing time), so the root is ``2n-2``.
Random draws happen in a fixed documented order so that a seeded
``np.random.Generator`` gives bit-identical output.
"""
import numpy as np
from numba import njit

# Column layout of the per-replicate summary rows produced by ``summarize``.
COL_A = 0
COL_D = 1
COL_G = 2
COL_P = 3
COL_G0 = 4            # |G_0|
COL_G1 = 5            # |G_1|
COL_G0_MINUS_G1 = 6
COL_G1_MINUS_G0 = 7
COL_G0_MINUS_G2 = 8
COL_G2_MINUS_G0 = 9
COL_G1_MINUS_G2 = 10
COL_G2_MINUS_G1 = 11
COL_G2_MINUS_G3 = 12
COL_D01_23 = 13
N_FIXED = 14          # spectrum G_1..G_n follows


@njit(cache=True, nogil=True)
def sample_tree(n, rng):
    """Kingman coalescent on ``n`` leaves.

    For k = n..2 draws ``T_k ~ Exp(k(k-1)/2)``, then two distinct positions
    ``a = integers(k)``, ``b = integers(k-1)`` (shifted past ``a``) in the
    active list.  The new node takes the smaller position; the larger one is
    filled by the last active entry.
    """
    n_nodes = 2 * n - 1
    parent = np.full(n_nodes, -1, np.int64)
    children = np.full((n_nodes, 2), -1, np.int64)
    time = np.zeros(n_nodes)
    intervals = np.empty(n - 1)
    active = np.arange(n)
    t = 0.0
    for k in range(n, 1, -1):
        dt = rng.exponential(2.0 / (k * (k - 1)))
        t += dt
        intervals[n - k] = dt
        a = rng.integers(0, k)
        b = rng.integers(0, k - 1)
        if b >= a:
            b += 1
        if a > b:
            a, b = b, a
        node = 2 * n - k
        ca = active[a]
        cb = active[b]
        children[node, 0] = ca
        children[node, 1] = cb
        parent[ca] = node
        parent[cb] = node
        time[node] = t
        active[a] = node
        active[b] = active[k - 1]
    return parent, children, time, intervals


@njit(cache=True, nogil=True)
def _spread(start, row, carriers, children, surv, n, stack, rng):
    # depth first from ``start``; child 0 is tested before child 1
    top = 0
    stack[0] = start
    top = 1
    while top > 0:
        top -= 1
        x = stack[top]
        if x < n:
            carriers[row, x] = True
            continue
        for c in range(2):
            ch = children[x, c]
            if rng.random() < surv[ch]:
                stack[top] = ch
                top += 1


@njit(cache=True, nogil=True)
def simulate_carriers(n, parent, children, time, theta, rho, seg_only, rng):
    """Carrier matrix of the dispensable genes on a fixed tree.

    Draw order: root-pool count ``Poisson(theta/rho)`` (skipped when
    ``seg_only``), then per branch (node order) the gain count
    ``Poisson(theta*l/2)``, then for every gene in that order its origin
    offset and survival draws.  Returns ``(carriers, origin)`` with pruned
    rows; ``origin`` is 0 for root-pool genes and ``1 + node`` for a gain on
    the branch above ``node``.
    """
    n_nodes = 2 * n - 1
    root = n_nodes - 1
    length = np.zeros(n_nodes)
    for v in range(n_nodes):
        if parent[v] >= 0:
            length[v] = time[parent[v]] - time[v]
    surv = np.exp(-0.5 * rho * length)

    n_root = 0
    if not seg_only:
        n_root = rng.poisson(theta / rho)
    gains = np.zeros(n_nodes, np.int64)
    for v in range(n_nodes):
        if v != root:
            gains[v] = rng.poisson(0.5 * theta * length[v])
    total = n_root + gains.sum()

    carriers = np.zeros((total, n), np.bool_)
    origin = np.empty(total, np.int64)
    stack = np.empty(n_nodes, np.int64)
    row = 0
    for _ in range(n_root):
        origin[row] = 0
        _spread(root, row, carriers, children, surv, n, stack, rng)
        row += 1
    for v in range(n_nodes):
        for _ in range(gains[v]):
            origin[row] = 1 + v
            # distance from the gain point down to ``v``
            x = rng.random() * length[v]
            if rng.random() < np.exp(-0.5 * rho * x):
                _spread(v, row, carriers, children, surv, n, stack, rng)
            row += 1

    keep = np.zeros(total, np.bool_)
    n_keep = 0
    for g in range(total):
        for i in range(n):
            if carriers[g, i]:
                keep[g] = True
                n_keep += 1
                break
    out = np.empty((n_keep, n), np.bool_)
    out_origin = np.empty(n_keep, np.int64)
    j = 0
    for g in range(total):
        if keep[g]:
            out[j] = carriers[g]
            out_origin[j] = origin[g]
            j += 1
    return out, out_origin


@njit(cache=True, nogil=True)
def incongruence_sum_masks(carriers):
    """Sum of ``D_{ij,kl} * D_{ik,jl}`` over ordered distinct quadruples.

    Genes are collapsed to carrier patterns first.  For each ordered pair
    ``(i, l)`` the matrix ``M[j, k] = D_{ij,kl}`` is accumulated and the
    contribution is ``sum_{j,k} M[j,k] * M[k,j]``; all terms with colliding
    indices vanish identically.  Requires ``n <= 62``.
    """
    m, n = carriers.shape
    if m == 0 or n < 4:
        return 0
    masks = np.zeros(m, np.int64)
    for g in range(m):
        x = np.int64(0)
        for i in range(n):
            if carriers[g, i]:
                x |= np.int64(1) << i
        masks[g] = x
    masks.sort()
    pats = np.empty(m, np.int64)
    counts = np.empty(m, np.int64)
    u = 0
    for g in range(m):
        if u > 0 and pats[u - 1] == masks[g]:
            counts[u - 1] += 1
        else:
            pats[u] = masks[g]
            counts[u] = 1
            u += 1
    one = np.int64(1)
    total = 0
    mat = np.zeros((n, n), np.int64)
    for i in range(n):
        for l in range(n):
            if i == l:
                continue
            mat[:, :] = 0
            for p in range(u):
                pat = pats[p]
                if (pat >> i) & one and not (pat >> l) & one:
                    c = counts[p]
                    for j in range(n):
                        if (pat >> j) & one:
                            for k in range(n):
                                if not (pat >> k) & one:
                                    mat[j, k] += c
            for j in range(n):
                for k in range(j + 1, n):
                    total += 2 * mat[j, k] * mat[k, j]
    return total


@njit(cache=True, nogil=True)
def summarize(carriers, n, want_p):
    """One row of per-replicate statistics, laid out by the COL_* constants."""
    out = np.full(N_FIXED + n, np.nan)
    m = carriers.shape[0]
    counts = np.zeros(m, np.int64)
    for g in range(m):
        c = 0
        for i in range(n):
            if carriers[g, i]:
                c += 1
        counts[g] = c
    spec = np.zeros(n + 1, np.int64)
    for g in range(m):
        spec[counts[g]] += 1
    a_sum = 0.0
    d_sum = 0.0
    for k in range(1, n + 1):
        a_sum += k * spec[k]
        d_sum += k * (n - k) * spec[k]
        out[N_FIXED + k - 1] = spec[k]
    out[COL_A] = a_sum / n
    out[COL_G] = m
    if n >= 2:
        out[COL_D] = d_sum / (n * (n - 1))
        g0 = 0
        g1 = 0
        d01 = 0
        d10 = 0
        for g in range(m):
            x0 = carriers[g, 0]
            x1 = carriers[g, 1]
            g0 += x0
            g1 += x1
            d01 += x0 and not x1
            d10 += x1 and not x0
        out[COL_G0] = g0
        out[COL_G1] = g1
        out[COL_G0_MINUS_G1] = d01
        out[COL_G1_MINUS_G0] = d10
    elif n == 1:
        out[COL_G0] = m
    if n >= 3:
        s02 = 0
        s20 = 0
        s12 = 0
        s21 = 0
        for g in range(m):
            x0 = carriers[g, 0]
            x1 = carriers[g, 1]
            x2 = carriers[g, 2]
            s02 += x0 and not x2
            s20 += x2 and not x0
            s12 += x1 and not x2
            s21 += x2 and not x1
        out[COL_G0_MINUS_G2] = s02
        out[COL_G2_MINUS_G0] = s20
        out[COL_G1_MINUS_G2] = s12
        out[COL_G2_MINUS_G1] = s21
    if n >= 4:
        s23 = 0
        q = 0
        for g in range(m):
            x0 = carriers[g, 0]
            x1 = carriers[g, 1]
            x2 = carriers[g, 2]
            x3 = carriers[g, 3]
            s23 += x2 and not x3
            q += x0 and x1 and not x2 and not x3
        out[COL_G2_MINUS_G3] = s23
        out[COL_D01_23] = q
        if want_p:
            denom = n * (n - 1) * (n - 2) * (n - 3)
            out[COL_P] = incongruence_sum_masks(carriers) / denom
    return out


@njit(cache=True, nogil=True)
def simulate_block(n, theta, rho, seg_only, want_p, n_reps, rng):
    """``n_reps`` replicates of tree + genes, summarized row by row."""
    out = np.empty((n_reps, N_FIXED + n))
    for r in range(n_reps):
        parent, children, time, _ = sample_tree(n, rng)
        carriers, _ = simulate_carriers(
            n, parent, children, time, theta, rho, seg_only, rng)
        out[r] = summarize(carriers, n, want_p)
    return out


@njit(cache=True, nogil=True)
def hoppe_block(n, theta, rho, n_reps, rng):
    """Spectra from the marked Hoppe urn, one row per replicate.

    Ball ``b`` is born at the end of interval ``b`` (``b`` balls present
    before it).  With ``i`` colored balls the urn waits
    ``Exp(i(i-1+rho)/2)``, each present ball collects ``Poisson(theta/2 *
    wait)`` marks, then a colored ball is copied with probability
    ``i/(i+rho)`` (uniform choice), otherwise a ball of a new color starts.
    A mark on ball ``b`` during interval ``i`` is copied only when a marked
    ball is drawn, so it is carried by ``b`` plus the whole families of the
    direct children of ``b`` born after interval ``i``.
    """
    out = np.zeros((n_reps, n), np.int64)
    parent = np.empty(n, np.int64)
    marks = np.zeros((n, n), np.int64)   # [interval-1, ball]
    size = np.zeros(n, np.int64)
    for r in range(n_reps):
        marks[:, :] = 0
        parent[0] = -1
        for i in range(1, n + 1):
            wait = rng.exponential(2.0 / (i * (i - 1 + rho)))
            lam = 0.5 * theta * wait
            for b in range(i):
                marks[i - 1, b] = rng.poisson(lam)
            if i < n:
                if rng.random() * (i + rho) < i:
                    parent[i] = rng.integers(0, i)
                else:
                    parent[i] = -1
        # walk intervals backwards; when ball i is reached its family is
        # complete and joins its parent's count
        size[:] = 1
        for i in range(n, 0, -1):
            if i < n and parent[i] >= 0:
                size[parent[i]] += size[i]
            for b in range(i):
                if marks[i - 1, b] > 0:
                    out[r, size[b] - 1] += marks[i - 1, b]
    return out

"""Kingman coalescent genealogies and the tree functionals used by the gene
process: total length, survival function and the conditional pangenome mean.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels


class Node(NamedTuple):
    id: int
    parent: int | None
    time: float
    children: tuple[int, ...]


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Genealogy:
    """Rooted binary tree with leaves ``0..n-1`` at time 0.

    Internal nodes are ``n..2n-2`` in order of coalescence, so the root is
    ``2n-2``.  ``intervals`` holds ``(T_n, ..., T_2)``.
    """

    parent: np.ndarray
    children: np.ndarray
    time: np.ndarray
    intervals: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parent", _frozen(self.parent, np.int64))
        object.__setattr__(self, "children",
                           _frozen(self.children, np.int64).reshape(-1, 2))
        object.__setattr__(self, "time", _frozen(self.time, np.float64))
        object.__setattr__(self, "intervals",
                           _frozen(self.intervals, np.float64))
        n = self.n
        if self.parent.shape != (2 * n - 1,) or self.children.shape[0] != 2 * n - 1:
            raise ValueError("node arrays must have length 2n-1")
        if self.intervals.shape != (n - 1,):
            raise ValueError("intervals must have length n-1")
        if np.any(self.time[:n] != 0.0):
            raise ValueError("leaves must sit at time 0")
        for v in range(n, 2 * n - 1):
            c = self.children[v]
            if np.any(c < 0) or np.any(self.time[c] >= self.time[v]):
                raise ValueError(f"node {v} must have two strictly younger children")

    @property
    def n(self) -> int:
        return (len(self.parent) + 1) // 2

    @property
    def root(self) -> int:
        return len(self.parent) - 1

    @property
    def nodes(self) -> list[Node]:
        out = []
        for v in range(len(self.parent)):
            p = int(self.parent[v])
            kids = tuple(int(c) for c in self.children[v] if c >= 0)
            out.append(Node(v, p if p >= 0 else None, float(self.time[v]), kids))
        return out

    @property
    def branch_lengths(self) -> np.ndarray:
        """Length of the branch above each node (0 for the root)."""
        out = np.zeros(len(self.parent))
        has_parent = self.parent >= 0
        out[has_parent] = self.time[self.parent[has_parent]] - self.time[has_parent]
        return out

    @classmethod
    def from_merges(cls, merges: Sequence[tuple[int, int]],
                    intervals: Sequence[float]) -> "Genealogy":
        """Build a tree from an explicit merge order.

        ``merges[i]`` joins two existing node ids into node ``n + i``;
        ``intervals`` are ``(T_n, ..., T_2)`` as in the sampler.
        """
        n = len(merges) + 1
        if len(intervals) != n - 1:
            raise ValueError("need one interval per merge")
        parent = np.full(2 * n - 1, -1, np.int64)
        children = np.full((2 * n - 1, 2), -1, np.int64)
        time = np.zeros(2 * n - 1)
        t = 0.0
        for i, ((a, b), dt) in enumerate(zip(merges, intervals)):
            node = n + i
            if not (0 <= a < node and 0 <= b < node) or a == b:
                raise ValueError(f"invalid merge {(a, b)}")
            if parent[a] >= 0 or parent[b] >= 0:
                raise ValueError(f"node merged twice in {(a, b)}")
            if dt <= 0:
                raise ValueError("intervals must be positive")
            t += dt
            children[node] = (a, b)
            parent[a] = parent[b] = node
            time[node] = t
        return cls(parent, children, time, np.asarray(intervals, float))

    def leaves_below(self, v: int) -> list[int]:
        out, stack = [], [v]
        while stack:
            x = stack.pop()
            if x < self.n:
                out.append(x)
            else:
                stack.extend(self.children[x])
        return sorted(out)

    def to_newick(self, precision: int = 10) -> str:
        """Newick string with branch lengths; leaves are named ``s0..s{n-1}``."""
        bl = self.branch_lengths

        def render(v):
            if v < self.n:
                label = f"s{v}"
            else:
                label = "(" + ",".join(render(c) for c in self.children[v]) + ")"
            if v == self.root:
                return label
            return f"{label}:{bl[v]:.{precision}g}"

        return render(self.root) + ";"


def sample_kingman(n: int, rng: np.random.Generator) -> Genealogy:
    """Sample a Kingman coalescent tree on ``n`` leaves."""
    if n < 1:
        raise ValueError("n must be >= 1")
    parent, children, time, intervals = _kernels.sample_tree(n, rng)
    return Genealogy(parent, children, time, intervals)


def total_length(tree: Genealogy) -> float:
    return float(tree.branch_lengths.sum())


@dataclass(frozen=True, eq=False)
class SurvivalProfile:
    """Survival function on the branch skeleton.

    ``node_value[v]`` is the value at node ``v`` (the leafward end of the
    branch above it); ``top_value[v]`` is the value at the rootward end of
    that branch, ``node_value[v] * exp(-rho * l / 2)``.
    """

    node_value: np.ndarray
    top_value: np.ndarray
    rho: float

    def at(self, v: int, height: float = 0.0) -> float:
        """Value at distance ``height`` above node ``v`` on its branch."""
        return float(self.node_value[v] * np.exp(-0.5 * self.rho * height))


def survival_profile(tree: Genealogy, rho: float) -> SurvivalProfile:
    if rho < 0:
        raise ValueError("rho must be >= 0")
    n = tree.n
    decay = np.exp(-0.5 * rho * tree.branch_lengths)
    node = np.ones(len(tree.parent))
    top = np.empty(len(tree.parent))
    top[:n] = decay[:n]
    # internal ids increase with time, so this is a leaf-to-root pass
    for v in range(n, len(tree.parent)):
        c1, c2 = tree.children[v]
        node[v] = 1.0 - (1.0 - top[c1]) * (1.0 - top[c2])
        top[v] = node[v] * decay[v]
    node.setflags(write=False)
    top.setflags(write=False)
    return SurvivalProfile(node, top, float(rho))


def conditional_mean_genes(tree: Genealogy, theta: float, rho: float) -> float:
    """Mean pangenome size given the tree (the size is Poisson with this mean)."""
    if rho <= 0:
        raise ValueError("rho must be > 0")
    prof = survival_profile(tree, rho)
    bl = tree.branch_lengths
    integral = np.sum(2.0 * prof.node_value / rho * (-np.expm1(-0.5 * rho * bl)))
    return float(0.5 * theta * integral + theta / rho * prof.node_value[tree.root])


@dataclass(frozen=True)
class TreePiece:
    """A connected piece of a genealogy, rooted at a point of the tree.

    ``edges`` are ``(child, parent)`` node pairs of the original tree, each a
    whole branch.  ``leaves`` are the sample leaves of the piece.
    """

    root: int
    edges: tuple[tuple[int, int], ...]
    leaves: tuple[int, ...]
    tree: Genealogy

    @property
    def length(self) -> float:
        bl = self.tree.branch_lengths
        return float(sum(bl[c] for c, _ in self.edges))

    def survival_at_root(self, rho: float) -> float:
        """Probability that a gene at the root survives to at least one leaf.

        The piece may extend above its root (toward the MRCA), so it is
        traversed as an undirected tree.
        """
        if rho < 0:
            raise ValueError("rho must be >= 0")
        bl = self.tree.branch_lengths
        adj: dict[int, list[tuple[int, float]]] = {}
        for c, p in self.edges:
            adj.setdefault(c, []).append((p, bl[c]))
            adj.setdefault(p, []).append((c, bl[c]))
        leaves = set(self.leaves)

        def value(v, came_from):
            if v in leaves:
                return 1.0
            miss = 1.0
            for w, length in adj.get(v, []):
                if w != came_from:
                    miss *= 1.0 - np.exp(-0.5 * rho * length) * value(w, v)
            return 1.0 - miss

        return float(value(self.root, None))


def _mrca(tree: Genealogy, leaves) -> int:
    paths = []
    for leaf in leaves:
        path, v = [], leaf
        while v >= 0:
            path.append(v)
            v = tree.parent[v]
        paths.append(path)
    common = set(paths[0]).intersection(*paths[1:])
    return min(common, key=lambda v: tree.time[v])


def _spanning_edges(tree: Genealogy, leaves, top: int) -> set[tuple[int, int]]:
    edges = set()
    for leaf in leaves:
        v = leaf
        while v != top:
            p = int(tree.parent[v])
            edges.add((v, p))
            v = p
    return edges


def spanning_subtree_decomposition(tree: Genealogy, keep: Sequence[int],
                                   other: Sequence[int]):
    """Split the tree spanned by ``keep`` and ``other`` leaves.

    Returns ``(T0, attached)``: ``T0`` spans ``keep`` and is rooted at their
    MRCA (a single point when ``len(keep) == 1``); ``attached`` lists the
    connected pieces of the tree spanning ``keep`` and ``other`` that lie
    outside ``T0``, each rooted at the vertex where it meets ``T0``.
    """
    keep = sorted(set(int(x) for x in keep))
    other = sorted(set(int(x) for x in other))
    if not keep or not other:
        raise ValueError("leaf sets must be nonempty")
    if set(keep) & set(other):
        raise ValueError("leaf sets must be disjoint")
    if any(not 0 <= x < tree.n for x in keep + other):
        raise ValueError("leaf index out of range")

    r0 = _mrca(tree, keep)
    e0 = _spanning_edges(tree, keep, r0)
    t0_nodes = {r0} | {v for e in e0 for v in e}
    top = _mrca(tree, keep + other)
    rest = _spanning_edges(tree, keep + other, top) - e0

    # union edges that share a node outside T0
    groups: list[set[tuple[int, int]]] = []
    for e in sorted(rest):
        touching = [g for g in groups
                    if any(v not in t0_nodes and v in {x for f in g for x in f}
                           for v in e)]
        merged = {e}.union(*touching) if touching else {e}
        groups = [g for g in groups if g not in touching] + [merged]

    pieces = []
    for g in groups:
        nodes = {v for e in g for v in e}
        (attach,) = nodes & t0_nodes
        leaves = tuple(sorted(v for v in nodes if v < tree.n and v != attach))
        pieces.append(TreePiece(attach, tuple(sorted(g)), leaves, tree))
    pieces.sort(key=lambda p: p.root)
    t0 = TreePiece(r0, tuple(sorted(e0)), tuple(keep), tree)
    return t0, pieces

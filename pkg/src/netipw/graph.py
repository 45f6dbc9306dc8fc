"""Sparse undirected graphs with capped shortest-path queries and the
topology diagnostics that drive the HAC bandwidth rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import InputError


class Graph:
    """Immutable undirected graph in CSR form.

    Node ids are 0..n-1. Neighbor lists are sorted ascending, deduplicated,
    and symmetric; self-loops are stripped at construction. Instances are
    safe to share across threads.

    Attributes
    ----------
    n : int
        Number of nodes.
    indptr, indices : numpy int64 arrays
        CSR layout of the adjacency structure (both directions of every
        edge are stored).
    edge_count : int
        Number of undirected edges.
    loops_stripped, dupes_merged : int
        Input-cleaning counts reported by :func:`build_graph`.
    """

    def __init__(self, n, indptr, indices, loops_stripped=0, dupes_merged=0):
        self.n = int(n)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.edge_count = self.indices.size // 2
        self.loops_stripped = int(loops_stripped)
        self.dupes_merged = int(dupes_merged)
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        self._csr = None

    @property
    def degrees(self):
        return np.diff(self.indptr)

    @property
    def avg_degree(self):
        return 2.0 * self.edge_count / self.n if self.n else 0.0

    def degree(self, i):
        return int(self.indptr[i + 1] - self.indptr[i])

    def neighbors(self, i):
        """Sorted neighbor ids of node i (read-only view)."""
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def adjacency(self):
        """Adjacency matrix as a scipy CSR matrix with float64 ones (cached)."""
        if self._csr is None:
            data = np.ones(self.indices.size, dtype=np.float64)
            self._csr = sp.csr_matrix(
                (data, self.indices.copy(), self.indptr.copy()),
                shape=(self.n, self.n),
            )
        return self._csr

    def edges(self):
        """Undirected edge list as an (m, 2) array with i < j."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        mask = rows < self.indices
        return np.column_stack([rows[mask], self.indices[mask]])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class GraphSummary:
    """Topology summary feeding the bandwidth rule.

    ``apl`` is the mean path length over ordered pairs (i != j) in the
    largest component; ``diameter`` the max finite distance over the same
    pairs. Singleton largest components give apl = diameter = 0.
    """

    avg_degree: float
    apl: float
    diameter: int
    largest_component_size: int
    largest_component_fraction: float


class NeighborhoodProfile:
    """Average boundary sizes and neighborhood-size moments by radius.

    ``boundary_mean[s]`` is the mean over nodes of the count of nodes at
    exactly distance s; ``moment(s, k)`` the mean of |N(i, s)|**k, where
    the s-neighborhood includes i itself.
    """

    def __init__(self, boundary_mean, sizes, s_max, k_max):
        self.boundary_mean = boundary_mean
        self.s_max = int(s_max)
        self.k_max = int(k_max)
        self._sizes = sizes  # (n, s_max+1) cumulative neighborhood sizes

    def moment(self, s, k):
        if not 0 <= s <= self.s_max:
            raise InputError(f"s={s} outside computed range 0..{self.s_max}")
        if not 1 <= k <= self.k_max:
            raise InputError(f"k={k} outside computed range 1..{self.k_max}")
        return float(np.mean(self._sizes[:, s].astype(np.float64) ** k))

    def neighborhood_sizes(self, s):
        """Per-node |N(i, s)| (read-only view)."""
        return self._sizes[:, s]


def build_graph(edges, n, symmetrize=True):
    """Build an undirected :class:`Graph` from an edge list.

    Parameters
    ----------
    edges : sequence of (i, j) pairs or (m, 2) array
        Node-id pairs. Self-loops are stripped (counted) and duplicates
        merged. With ``symmetrize`` (default), pairs are treated as
        unordered, so directed inputs are closed under symmetry.
    n : int
        Number of nodes; every id must be < n.
    symmetrize : bool
        When False, the input must already contain both orientations of
        every link, otherwise an :class:`InputError` is raised.
    """
    if n < 1:
        raise InputError("graph needs at least one node")
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                   dtype=np.int64)
    if e.size == 0:
        e = e.reshape(0, 2)
    if e.ndim != 2 or e.shape[1] != 2:
        raise InputError("edges must be pairs of node ids")
    if e.size and (e.min() < 0 or e.max() >= n):
        bad = e[(e < 0) | (e >= n)].flat[0]
        raise InputError(f"node id {bad} outside 0..{n - 1}")

    loops = e[:, 0] == e[:, 1]
    loops_stripped = int(loops.sum())
    e = e[~loops]

    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    keys = np.unique(lo * n + hi)
    dupes_merged = int(e.shape[0] - keys.size)

    if not symmetrize and e.shape[0]:
        directed = np.unique(e[:, 0] * n + e[:, 1])
        reversed_ = np.unique(e[:, 1] * n + e[:, 0])
        if not np.array_equal(directed, reversed_):
            raise InputError(
                "edge list is not symmetric; pass symmetrize=True for "
                "directed input"
            )

    lo = keys // n
    hi = keys % n
    rows = np.concatenate([lo, hi])
    cols = np.concatenate([hi, lo])
    order = np.lexsort((cols, rows))
    rows = rows[order]
    cols = cols[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    indptr = np.cumsum(indptr)
    return Graph(n, indptr, cols, loops_stripped, dupes_merged)


def capped_bfs(g, source, cap):
    """Map node -> path distance for all nodes within ``cap`` of ``source``.

    The source itself is included at distance 0; unreachable nodes are
    absent (distance infinity).
    """
    if not 0 <= source < g.n:
        raise InputError(f"source {source} outside 0..{g.n - 1}")
    if cap < 0:
        raise InputError("cap must be nonnegative")
    nodes, dists = _kernels.bfs_capped(g.indptr, g.indices, source, cap)
    return dict(zip(nodes.tolist(), dists.tolist()))


def summary(g):
    """Compute :class:`GraphSummary` for ``g``.

    APL and diameter are exact, via BFS from every node of the largest
    component; ties between equal-size components go to the one containing
    the lowest node id.
    """
    labels = _kernels.component_labels(g.indptr, g.indices)
    sizes = np.bincount(labels)
    largest = int(np.argmax(sizes))  # first max = lowest contained node id
    comp_nodes = np.flatnonzero(labels == largest).astype(np.int64)
    total, pairs, dmax = _kernels.apl_diameter(g.indptr, g.indices, comp_nodes)
    apl = total / pairs if pairs else 0.0
    return GraphSummary(
        avg_degree=g.avg_degree,
        apl=apl,
        diameter=int(dmax),
        largest_component_size=int(sizes[largest]),
        largest_component_fraction=float(sizes[largest]) / g.n,
    )


def neighborhood_profile(g, s_max, k_max=2):
    """Boundary means and neighborhood-size moments for s = 0..s_max."""
    if s_max < 0:
        raise InputError("s_max must be nonnegative")
    counts = _kernels.boundary_counts(g.indptr, g.indices, s_max)
    boundary_mean = counts.mean(axis=0)
    sizes = np.cumsum(counts, axis=1)
    return NeighborhoodProfile(boundary_mean, sizes, s_max, k_max)


def read_edgelist(path, n=None, symmetrize=True):
    """Read the text edge-list format: one edge per line, two whitespace-
    separated node ids; lines starting with '#' are ignored. A comment of
    the form ``# n=<count>`` pins the node count when ``n`` is not given."""
    edges = []
    pinned_n = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                stripped = line[1:].strip()
                if stripped.startswith("n=") and pinned_n is None:
                    try:
                        pinned_n = int(stripped[2:])
                    except ValueError:
                        pass
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InputError(f"{path}:{lineno}: expected two node ids")
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: non-integer node id") from exc
            if i < 0 or j < 0:
                raise InputError(f"{path}:{lineno}: negative node id")
            edges.append((i, j))
    if n is None:
        n = pinned_n
    if n is None:
        n = 1 + max((max(i, j) for i, j in edges), default=0)
    return build_graph(edges, n, symmetrize=symmetrize)


def write_edgelist(g, path):
    """Write ``g`` in the edge-list text format (with an ``# n=`` header so
    trailing isolated nodes survive a round trip)."""
    with open(path, "w") as fh:
        fh.write(f"# n={g.n}\n")
        for i, j in g.edges():
            fh.write(f"{i} {j}\n")

"""Compiled BFS kernels operating on CSR arrays.

All kernels are single-threaded and deterministic, so callers may fan them
out across sources from multiple threads without changing results.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def bfs_capped(indptr, indices, source, cap):
    """Nodes within path distance ``cap`` of ``source`` and their distances."""
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    head = 0
    tail = 0
    dist[source] = 0
    queue[tail] = source
    tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        if du >= cap:
            continue
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if dist[v] < 0:
                dist[v] = du + 1
                queue[tail] = v
                tail += 1
    nodes = queue[:tail].copy()
    dists = np.empty(tail, np.int64)
    for t in range(tail):
        dists[t] = dist[nodes[t]]
    return nodes, dists


@njit(cache=True)
def component_labels(indptr, indices):
    """Connected-component label per node; labels increase with the lowest
    node id contained in the component."""
    n = indptr.shape[0] - 1
    labels = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    next_label = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        labels[start] = next_label
        head = 0
        tail = 0
        queue[tail] = start
        tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if labels[v] < 0:
                    labels[v] = next_label
                    queue[tail] = v
                    tail += 1
        next_label += 1
    return labels


@njit(cache=True)
def apl_diameter(indptr, indices, sources):
    """Sum of finite pairwise distances, ordered pair count, and max distance
    over BFS runs from every node in ``sources``."""
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    total = 0.0
    pairs = 0
    dmax = 0
    for s in range(sources.shape[0]):
        src = sources[s]
        head = 0
        tail = 0
        queue[tail] = src
        tail += 1
        dist[src] = 0
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if dist[v] < 0:
                    dist[v] = du + 1
                    queue[tail] = v
                    tail += 1
        for t in range(tail):
            v = queue[t]
            d = dist[v]
            if d > 0:
                total += d
                pairs += 1
                if d > dmax:
                    dmax = d
            dist[v] = -1
    return total, pairs, dmax


@njit(cache=True)
def boundary_counts(indptr, indices, s_max):
    """Per-node counts of neighbors at exactly distance s, s = 0..s_max."""
    n = indptr.shape[0] - 1
    counts = np.zeros((n, s_max + 1), np.int64)
    dist = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    for src in range(n):
        head = 0
        tail = 0
        queue[tail] = src
        tail += 1
        dist[src] = 0
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            if du >= s_max:
                continue
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if dist[v] < 0:
                    dist[v] = du + 1
                    queue[tail] = v
                    tail += 1
        for t in range(tail):
            v = queue[t]
            counts[src, dist[v]] += 1
            dist[v] = -1
    return counts


@njit(cache=True)
def kernel_weighted_quadratic(indptr, indices, sources, scores, b):
    """Sum over source pairs (i, j) with path distance <= b of
    scores[i] * scores[j], distances taken on the full graph.

    ``scores`` has length n and must be zero outside ``sources``; each
    ordered pair is accumulated once, including i == j.
    """
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    acc = 0.0
    for s in range(sources.shape[0]):
        src = sources[s]
        zi = scores[src]
        head = 0
        tail = 0
        queue[tail] = src
        tail += 1
        dist[src] = 0
        inner = 0.0
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            if du >= b:
                continue
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if dist[v] < 0:
                    dist[v] = du + 1
                    queue[tail] = v
                    tail += 1
        for t in range(tail):
            v = queue[t]
            inner += scores[v]
            dist[v] = -1
        acc += zi * inner
    return acc


@njit(cache=True)
def distance_matrix(indptr, indices):
    """Dense all-pairs path distances; -1 marks disconnected pairs."""
    n = indptr.shape[0] - 1
    out = np.full((n, n), -1, np.int64)
    queue = np.empty(n, np.int64)
    for src in range(n):
        head = 0
        tail = 0
        queue[tail] = src
        tail += 1
        out[src, src] = 0
        while head < tail:
            u = queue[head]
            head += 1
            du = out[src, u]
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if out[src, v] < 0:
                    out[src, v] = du + 1
                    queue[tail] = v
                    tail += 1
    return out

"""Shared fixture builders for the test suite."""

import numpy as np

from detmincut.graph import WeightedMultigraph


def graph_from_edges(n, edges, loops=None):
    """edges: list of (u, v, w) triples."""
    if edges:
        eu, ev, ew = (np.array(x, dtype=np.int64) for x in zip(*edges))
    else:
        eu = ev = ew = np.array([], dtype=np.int64)
    lp = None
    if loops is not None:
        lp = np.array(loops, dtype=np.int64)
    return WeightedMultigraph(n, eu, ev, ew, loops=lp)


def complete_graph(k, w=1):
    return graph_from_edges(k, [(i, j, w) for i in range(k) for j in range(i + 1, k)])


def path_graph(weights):
    return graph_from_edges(len(weights) + 1,
                            [(i, i + 1, w) for i, w in enumerate(weights)])


def two_cliques_bridge(k, bridge_w=1, clique_w=1, bridges=1):
    """Two K_k's joined by `bridges` unit edges (the dumbbell fixture)."""
    edges = []
    for i in range(k):
        for j in range(i + 1, k):
            edges.append((i, j, clique_w))
            edges.append((k + i, k + j, clique_w))
    for b in range(bridges):
        edges.append((b % k, k + (b % k), bridge_w))
    return graph_from_edges(2 * k, edges)


def random_graph(n, m, wlo, whi, seed, connected=True):
    """Seeded random connected multigraph with integer weights."""
    rng = np.random.default_rng(seed)
    edges = []
    if connected:
        perm = rng.permutation(n)
        for i in range(1, n):
            u = int(perm[rng.integers(0, i)])
            v = int(perm[i])
            edges.append((u, v, int(rng.integers(wlo, whi + 1))))
    while len(edges) < m:
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        edges.append((u, v, int(rng.integers(wlo, whi + 1))))
    return graph_from_edges(n, edges)

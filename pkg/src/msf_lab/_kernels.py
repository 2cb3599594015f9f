import numba
import numpy as np


@numba.njit(cache=True)
def longest_increasing_chain(indptr, indices, rank):
    """Depth of every node: longest path along edges to strictly higher rank."""
    n = rank.shape[0]
    order = np.argsort(-rank)
    depth = np.zeros(n, dtype=np.int64)
    for c in order:
        best = 0
        r = rank[c]
        for j in range(indptr[c], indptr[c + 1]):
            nb = indices[j]
            if rank[nb] > r and depth[nb] + 1 > best:
                best = depth[nb] + 1
        depth[c] = best
    return depth


@numba.njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


@numba.njit(cache=True)
def edges_form_forest(n_nodes, u, v):
    """Union-find pass: False as soon as an edge closes a cycle."""
    parent = np.arange(n_nodes)
    for j in range(u.shape[0]):
        ru = _find(parent, u[j])
        rv = _find(parent, v[j])
        if ru == rv:
            return False
        parent[ru] = rv
    return True

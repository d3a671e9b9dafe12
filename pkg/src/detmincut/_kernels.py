"""Hot integer kernels: numba @njit with a pure-numpy/python fallback.

Backend selection: env ``DETMINCUT_NO_NUMBA=1`` forces the fallback path;
otherwise numba is used when importable.  ``set_backend`` flips at runtime
(the benchmark uses it to time both).  Every kernel is integer-only and
single-threaded, so both paths return identical bits.
"""

import os

import numpy as np

_env_off = os.environ.get("DETMINCUT_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:  # pragma: no cover - import guard
    if _env_off:
        raise ImportError("numba disabled by env")
    import numba
    from numba import njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return deco

_BACKEND = "numba" if HAS_NUMBA else "numpy"


def set_backend(name):
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend unavailable")
    _BACKEND = name


def get_backend():
    return _BACKEND


# ---------------------------------------------------------------------------
# Maximum-adjacency scan on a dense int64 weight matrix.

@njit(cache=True)
def _nb_ma_scan(W, start):
    n = W.shape[0]
    order = np.empty(n, dtype=np.int64)
    attach = np.zeros(n, dtype=np.int64)
    in_a = np.zeros(n, dtype=np.uint8)
    r = np.zeros(n, dtype=np.int64)
    order[0] = start
    in_a[start] = 1
    for v in range(n):
        r[v] += W[start, v]
    for step in range(1, n):
        best = -1
        bestr = np.int64(-1)
        for v in range(n):
            if in_a[v] == 0 and r[v] > bestr:
                bestr = r[v]
                best = v
        order[step] = best
        attach[step] = bestr
        in_a[best] = 1
        for v in range(n):
            if in_a[v] == 0:
                r[v] += W[best, v]
    return order, attach


def _np_ma_scan(W, start):
    n = W.shape[0]
    order = np.empty(n, dtype=np.int64)
    attach = np.zeros(n, dtype=np.int64)
    out = np.ones(n, dtype=bool)
    r = W[start].copy()
    order[0] = start
    out[start] = False
    for step in range(1, n):
        rr = np.where(out, r, -1)
        best = int(np.argmax(rr))
        order[step] = best
        attach[step] = rr[best]
        out[best] = False
        r += W[best]
    return order, attach


def ma_scan(W, start=0):
    """Maximum-adjacency order and attachment weights; ties to lowest index."""
    if _BACKEND == "numba":
        return _nb_ma_scan(W, start)
    return _np_ma_scan(W, start)


# ---------------------------------------------------------------------------
# Kruskal over a pre-sorted edge order.

@njit(cache=True)
def _nb_kruskal(eu, ev, order, n):
    parent = np.arange(n, dtype=np.int64)
    picked = np.empty(n - 1, dtype=np.int64)
    cnt = 0
    for oi in range(order.shape[0]):
        e = order[oi]
        a = eu[e]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = ev[e]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
            picked[cnt] = e
            cnt += 1
            if cnt == n - 1:
                break
    return picked[:cnt]


def _np_kruskal(eu, ev, order, n):
    parent = np.arange(n, dtype=np.int64)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    picked = []
    for e in order.tolist():
        a, b = find(eu[e]), find(ev[e])
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
            picked.append(e)
            if len(picked) == n - 1:
                break
    return np.array(picked, dtype=np.int64)


def kruskal(eu, ev, order, n):
    """Forest edge positions picked greedily along ``order``."""
    if _BACKEND == "numba":
        return _nb_kruskal(eu, ev, order, n)
    return _np_kruskal(eu, ev, order, n)


# ---------------------------------------------------------------------------
# Cut weights for a chunk of vertex bitmasks (exhaustive enumeration).

@njit(cache=True)
def _nb_mask_cut_weights(eu, ev, ew, masks):
    out = np.zeros(masks.shape[0], dtype=np.int64)
    for i in range(masks.shape[0]):
        mk = masks[i]
        tot = np.int64(0)
        for e in range(eu.shape[0]):
            if ((mk >> eu[e]) & 1) != ((mk >> ev[e]) & 1):
                tot += ew[e]
        out[i] = tot
    return out


def _np_mask_cut_weights(eu, ev, ew, masks):
    bu = (masks[:, None] >> eu[None, :]) & 1
    bv = (masks[:, None] >> ev[None, :]) & 1
    cross = bu != bv
    return cross @ ew


def mask_cut_weights(eu, ev, ew, masks):
    if _BACKEND == "numba":
        return _nb_mask_cut_weights(eu, ev, ew, masks)
    return _np_mask_cut_weights(eu, ev, ew, masks)


def mask_side_sums(vals, masks):
    """sum of vals[v] over set bits of each mask (volumes for enumeration)."""
    n = vals.shape[0]
    bits = (masks[:, None] >> np.arange(n)[None, :]) & 1
    return bits @ vals


# ---------------------------------------------------------------------------
# Subtree accumulation and best 2-respecting pair scan for the cut DP.

@njit(cache=True)
def _nb_accum_rows(A, topo, parent):
    for i in range(topo.shape[0] - 1, 0, -1):
        v = topo[i]
        p = parent[v]
        for j in range(A.shape[1]):
            A[p, j] += A[v, j]


def _np_accum_rows(A, topo, parent):
    for i in range(topo.shape[0] - 1, 0, -1):
        v = topo[i]
        A[parent[v]] += A[v]


def accum_rows(A, topo, parent):
    """In-place: add each row into its tree parent's row, leaves upward."""
    if _BACKEND == "numba":
        _nb_accum_rows(A, topo, parent)
    else:
        _np_accum_rows(A, topo, parent)


@njit(cache=True)
def _nb_best_pair(X, cut1, R, tin, tout, root):
    n = X.shape[0]
    best = np.int64(2 ** 62)
    ba = -1
    bb = -1
    bnest = 0
    for a in range(n):
        if a == root:
            continue
        ca = cut1[a]
        for b in range(a + 1, n):
            if b == root:
                continue
            if tin[a] <= tin[b] and tout[b] <= tout[a]:
                val = ca + cut1[b] + 2 * X[a, b] - 2 * R[b]
                nest = 1
            elif tin[b] <= tin[a] and tout[a] <= tout[b]:
                val = ca + cut1[b] + 2 * X[a, b] - 2 * R[a]
                nest = 2
            else:
                val = ca + cut1[b] - 2 * X[a, b]
                nest = 0
            if val < best:
                best = val
                ba = a
                bb = b
                bnest = nest
    return best, ba, bb, bnest


def _np_best_pair(X, cut1, R, tin, tout, root):
    n = X.shape[0]
    anc = (tin[:, None] <= tin[None, :]) & (tout[None, :] <= tout[:, None])
    base = cut1[:, None] + cut1[None, :]
    v_disj = base - 2 * X
    v_nest_ab = base + 2 * X - 2 * R[None, :]   # a ancestor of b
    vals = np.where(anc, v_nest_ab, np.where(anc.T, v_nest_ab.T, v_disj))
    iu = np.triu_indices(n, k=1)
    vals_u = vals[iu]
    ok = (iu[0] != root) & (iu[1] != root)
    vals_u = np.where(ok, vals_u, 2 ** 62)
    k = int(np.argmin(vals_u))
    a, b = int(iu[0][k]), int(iu[1][k])
    if anc[a, b]:
        nest = 1
    elif anc[b, a]:
        nest = 2
    else:
        nest = 0
    return int(vals_u[k]), a, b, nest


def best_pair(X, cut1, R, tin, tout, root):
    """Minimum-value pair of tree edges (identified by child vertices)."""
    if _BACKEND == "numba":
        return _nb_best_pair(X, cut1, R, tin, tout, root)
    return _np_best_pair(X, cut1, R, tin, tout, root)


def warmup():
    """Force-compile the numba kernels on toy inputs."""
    if not HAS_NUMBA or _BACKEND != "numba":
        return
    W = np.array([[0, 1], [1, 0]], dtype=np.int64)
    _nb_ma_scan(W, 0)
    eu = np.array([0], dtype=np.int64)
    ev = np.array([1], dtype=np.int64)
    _nb_kruskal(eu, ev, np.array([0], dtype=np.int64), 2)
    _nb_mask_cut_weights(eu, ev, np.array([1], dtype=np.int64), np.array([1], dtype=np.int64))
    A = np.zeros((2, 2), dtype=np.int64)
    _nb_accum_rows(A, np.array([0, 1], dtype=np.int64), np.array([-1, 0], dtype=np.int64))
    _nb_best_pair(A, np.zeros(2, dtype=np.int64), np.zeros(2, dtype=np.int64),
                  np.array([0, 1], dtype=np.int64), np.array([1, 2], dtype=np.int64), 0)

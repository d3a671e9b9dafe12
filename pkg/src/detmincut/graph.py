"""Weighted undirected multigraph with stable edge identities.

Weights are 64-bit scaled integers (fixed point) so every downstream stage is
bit-deterministic.  Parallel edges are never merged; each edge keeps a stable
``eid`` across contractions.  Self-loops live in a per-vertex weight vector:
they count toward degrees and volumes (the decomposition bookkeeping needs
that) but never toward any cut.
"""

import json

import numpy as np


class GraphError(ValueError):
    pass


class InvalidCutError(GraphError):
    pass


class WeightedMultigraph:
    """Immutable multigraph: vertex count, parallel edges, self-loop vector."""

    __slots__ = ("n", "eu", "ev", "ew", "eid", "loops", "_deg_cache", "_inc_cache")

    def __init__(self, n, eu, ev, ew, eid=None, loops=None, validate=True):
        self.n = int(n)
        self.eu = np.ascontiguousarray(eu, dtype=np.int64)
        self.ev = np.ascontiguousarray(ev, dtype=np.int64)
        self.ew = np.ascontiguousarray(ew, dtype=np.int64)
        m = self.eu.shape[0]
        if eid is None:
            eid = np.arange(m, dtype=np.int64)
        self.eid = np.ascontiguousarray(eid, dtype=np.int64)
        if loops is None:
            loops = np.zeros(self.n, dtype=np.int64)
        self.loops = np.ascontiguousarray(loops, dtype=np.int64)
        if validate:
            self._validate()
        self._deg_cache = None
        self._inc_cache = None

    def _validate(self):
        if self.n < 1:
            raise GraphError("graph needs at least one vertex")
        m = self.m
        if not (self.ev.shape[0] == self.ew.shape[0] == self.eid.shape[0] == m):
            raise GraphError("edge array length mismatch")
        if m:
            if self.eu.min() < 0 or self.eu.max() >= self.n:
                raise GraphError("edge endpoint out of range")
            if self.ev.min() < 0 or self.ev.max() >= self.n:
                raise GraphError("edge endpoint out of range")
            if np.any(self.eu == self.ev):
                raise GraphError("self-loops must go in the loop vector, not the edge list")
            if self.ew.min() <= 0:
                raise GraphError("edge weights must be positive")
            if len(np.unique(self.eid)) != m:
                raise GraphError("edge ids must be unique")
        if self.loops.shape[0] != self.n or (self.n and self.loops.min() < 0):
            raise GraphError("bad self-loop vector")

    @property
    def m(self):
        return self.eu.shape[0]

    def degrees(self):
        """deg(v) = incident edge weight + self-loop weight at v."""
        if self._deg_cache is None:
            di = np.zeros(self.n, dtype=np.int64)
            np.add.at(di, self.eu, self.ew)
            np.add.at(di, self.ev, self.ew)
            di += self.loops
            self._deg_cache = di
        return self._deg_cache

    def degree(self, v):
        return int(self.degrees()[v])

    def volume(self, verts=None):
        d = self.degrees()
        if verts is None:
            return int(d.sum())
        verts = np.asarray(verts, dtype=np.int64)
        return int(d[verts].sum())

    def total_weight(self):
        return int(self.ew.sum())

    def incident_eids(self, v):
        """Adjacency index: positions (not eids) of edges touching v."""
        if self._inc_cache is None:
            order = np.argsort(np.concatenate([self.eu, self.ev]), kind="stable")
            self._inc_cache = order
        order = self._inc_cache
        ends = np.concatenate([self.eu, self.ev])
        lo = np.searchsorted(ends[order], v, side="left")
        hi = np.searchsorted(ends[order], v, side="right")
        return order[lo:hi] % self.m

    def is_connected(self):
        return bool(component_labels(self).max() == 0) if self.n > 1 else True

    def copy_with(self, ew=None, loops=None):
        return WeightedMultigraph(
            self.n, self.eu, self.ev,
            self.ew if ew is None else ew,
            self.eid,
            self.loops if loops is None else loops,
            validate=False,
        )

    def __eq__(self, other):
        if not isinstance(other, WeightedMultigraph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.eu, other.eu)
            and np.array_equal(self.ev, other.ev)
            and np.array_equal(self.ew, other.ew)
            and np.array_equal(self.eid, other.eid)
            and np.array_equal(self.loops, other.loops)
        )

    def __repr__(self):
        return f"WeightedMultigraph(n={self.n}, m={self.m}, w={self.total_weight()})"


class Cut:
    """A vertex side plus its cached boundary weight."""

    __slots__ = ("side", "boundary_weight")

    def __init__(self, side, boundary_weight):
        self.side = tuple(sorted(int(v) for v in side))
        self.boundary_weight = int(boundary_weight)

    @classmethod
    def from_side(cls, g, side):
        mask = as_mask(g, side)
        return cls(np.nonzero(mask)[0], cut_weight(g, mask))

    def __repr__(self):
        return f"Cut(side={self.side}, w={self.boundary_weight})"


def as_mask(g, s):
    """Normalize a vertex subset (iterable / bool mask / bitmask int) to bool mask."""
    if isinstance(s, np.ndarray) and s.dtype == bool:
        if s.shape[0] != g.n:
            raise InvalidCutError("mask length mismatch")
        return s
    if isinstance(s, (int, np.integer)):
        mask = np.zeros(g.n, dtype=bool)
        for v in range(g.n):
            if (int(s) >> v) & 1:
                mask[v] = True
        return mask
    mask = np.zeros(g.n, dtype=bool)
    idx = np.asarray(list(s), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= g.n):
        raise InvalidCutError("vertex out of range")
    mask[idx] = True
    return mask


def cut_weight(g, s):
    """w(partial S): total weight of edges with exactly one endpoint in S.

    Self-loops never count.  Raises on the empty or full side.
    """
    mask = as_mask(g, s)
    k = int(mask.sum())
    if k == 0 or k == g.n:
        raise InvalidCutError("cut side must be a proper nonempty subset")
    cross = mask[g.eu] != mask[g.ev]
    return int(g.ew[cross].sum())


def boundary_eids(g, s):
    mask = as_mask(g, s)
    cross = mask[g.eu] != mask[g.ev]
    return g.eid[cross]


def laplacian_quadratic(g, x, y):
    """x^T L_G y evaluated edge by edge: sum_e w_e (x_u - x_v)(y_u - y_v).

    Self-loops cancel in the quadratic form, matching cut_weight's convention.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape[0] != g.n or y.shape[0] != g.n:
        raise GraphError("vector dimension mismatch")
    dx = x[g.eu] - x[g.ev]
    dy = y[g.eu] - y[g.ev]
    return int((g.ew * dx * dy).sum())


def component_labels(g):
    """Connected-component label per vertex (0-based, by smallest vertex)."""
    parent = np.arange(g.n, dtype=np.int64)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in zip(g.eu.tolist(), g.ev.tolist()):
        ra, rb = find(u), find(v)
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    roots = np.array([find(v) for v in range(g.n)], dtype=np.int64)
    uniq = np.unique(roots)
    remap = {int(r): i for i, r in enumerate(uniq)}
    return np.array([remap[int(r)] for r in roots], dtype=np.int64)


def contract_partition(g, partition):
    """Contract each part to a vertex, dropping intra-part edges.

    Returns (contracted graph, vertex_map, surviving eid array).  Surviving
    edges keep their eid and weight, so E(G^{i+1}) subseteq E(G^i) holds by
    edge identity.
    """
    vmap = np.full(g.n, -1, dtype=np.int64)
    for ci, part in enumerate(partition):
        idx = np.asarray(list(part), dtype=np.int64)
        if idx.size == 0:
            raise GraphError("empty part in partition")
        if np.any(vmap[idx] != -1):
            raise GraphError("partition parts overlap")
        vmap[idx] = ci
    if np.any(vmap == -1):
        raise GraphError("partition does not cover all vertices")
    k = len(partition)
    cu = vmap[g.eu]
    cv = vmap[g.ev]
    keep = cu != cv
    loops = np.zeros(k, dtype=np.int64)
    np.add.at(loops, vmap, g.loops)
    g2 = WeightedMultigraph(k, cu[keep], cv[keep], g.ew[keep], g.eid[keep], loops,
                            validate=False)
    return g2, vmap, g.eid[keep].copy()


def split_heavy_edges(g, cap):
    """Replace each edge by ceil(w/cap) parallel pieces of weight <= cap.

    Cap must be a positive integer in the graph's weight unit.  Piece ids are
    fresh and dense; all cut values are preserved exactly.
    """
    cap = int(cap)
    if cap <= 0:
        raise GraphError("split cap must be positive")
    us, vs, ws = [], [], []
    for u, v, w in zip(g.eu.tolist(), g.ev.tolist(), g.ew.tolist()):
        k = -(-w // cap)
        q, r = divmod(w, k)
        for i in range(k):
            us.append(u)
            vs.append(v)
            ws.append(q + 1 if i < r else q)
    return WeightedMultigraph(g.n, np.array(us, dtype=np.int64),
                              np.array(vs, dtype=np.int64),
                              np.array(ws, dtype=np.int64),
                              loops=g.loops.copy(), validate=False)


def clamp_weights_to(g, cap):
    """Reduce every edge weight to at most cap (cap >= some mincut upper bound)."""
    cap = int(cap)
    if cap <= 0:
        raise GraphError("clamp cap must be positive")
    return g.copy_with(ew=np.minimum(g.ew, cap))


def induced_subgraph(g, verts):
    """Induced subgraph on verts (original loop weights kept), plus maps.

    Returns (subgraph, local_of_global dict, global vertex array).
    """
    verts = np.asarray(sorted(int(v) for v in verts), dtype=np.int64)
    local = np.full(g.n, -1, dtype=np.int64)
    local[verts] = np.arange(verts.shape[0])
    keep = (local[g.eu] >= 0) & (local[g.ev] >= 0)
    sub = WeightedMultigraph(verts.shape[0], local[g.eu[keep]], local[g.ev[keep]],
                             g.ew[keep], g.eid[keep], g.loops[verts].copy(),
                             validate=False)
    return sub, local, verts


# ---------------------------------------------------------------------------
# DIMACS-style and JSON i/o

def read_dimacs(path_or_lines):
    """Parse a ``p <n> <m>`` / ``e u v w`` edge list (1-indexed vertices).

    Lines with u == v add self-loop weight.  Comment lines start with 'c'.
    """
    if isinstance(path_or_lines, (list, tuple)):
        lines = path_or_lines
    else:
        with open(path_or_lines) as fh:
            lines = fh.readlines()
    n = None
    us, vs, ws = [], [], []
    loops = None
    for ln in lines:
        parts = ln.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            n = int(parts[-2])
            loops = np.zeros(n, dtype=np.int64)
        elif parts[0] == "e":
            if n is None:
                raise GraphError("edge line before problem line")
            u, v = int(parts[1]) - 1, int(parts[2]) - 1
            w = int(parts[3]) if len(parts) > 3 else 1
            if u == v:
                loops[u] += w
            else:
                us.append(u)
                vs.append(v)
                ws.append(w)
    if n is None:
        raise GraphError("missing problem line")
    return WeightedMultigraph(n, np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64),
                              np.array(ws, dtype=np.int64), loops=loops)


def write_dimacs(g, path):
    with open(path, "w") as fh:
        fh.write(f"p mincut {g.n} {g.m}\n")
        for u, v, w in zip(g.eu.tolist(), g.ev.tolist(), g.ew.tolist()):
            fh.write(f"e {u + 1} {v + 1} {w}\n")
        for v in range(g.n):
            if g.loops[v]:
                fh.write(f"e {v + 1} {v + 1} {int(g.loops[v])}\n")


def to_json_dict(g):
    return {
        "vertices": g.n,
        "edges": [
            {"id": int(i), "u": int(u), "v": int(v), "w": int(w)}
            for i, u, v, w in zip(g.eid.tolist(), g.eu.tolist(), g.ev.tolist(), g.ew.tolist())
        ],
        "self_loops": [int(x) for x in g.loops.tolist()],
    }


def from_json_dict(d):
    edges = d["edges"]
    return WeightedMultigraph(
        d["vertices"],
        np.array([e["u"] for e in edges], dtype=np.int64),
        np.array([e["v"] for e in edges], dtype=np.int64),
        np.array([e["w"] for e in edges], dtype=np.int64),
        np.array([e["id"] for e in edges], dtype=np.int64),
        np.array(d.get("self_loops", [0] * d["vertices"]), dtype=np.int64),
    )


def dump_json(g, path):
    with open(path, "w") as fh:
        json.dump(to_json_dict(g), fh, indent=1, sort_keys=True)

"""Expander decomposition sequences and canonical cut decompositions.

build_sequence repeatedly decomposes and contracts until a single vertex (or
the level cap) is reached, keeping edge identities so E(G^0) supseteq ... holds
by construction.  canonical_sequence applies the volume-comparison inclusion
rule to a query set S, producing the per-level difference sets D^i_j whose
containment (lower bound) and weight (upper bound) lemmas are checked here as
test predicates with the explicit (1/beta)(1+1/beta)^i constants.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .decomposition import DecompositionParams, decompose
from .graph import GraphError, as_mask, boundary_eids, contract_partition, cut_weight


@dataclass
class SequenceLevel:
    graph: object          # G^i
    clusters: list         # partition of U^i (lists of G^i vertex ids)
    cluster_of: np.ndarray
    vmap: np.ndarray       # U^i -> U^{i+1}
    decomposition: object


@dataclass
class ExpanderSequence:
    base: object
    levels: list           # length L
    graphs: list           # length L+1, graphs[0] is base
    phi: Fraction
    beta: Fraction
    complete: bool         # False when stopped by the level cap / no progress

    @property
    def depth(self):
        return len(self.levels)


@dataclass
class CanonicalSequence:
    s_masks: list          # bool mask over U^i per level 0..L
    d_sets: list           # per level: list of (cluster_idx, vertices, included)
    trace: list = field(default_factory=list)


def build_sequence(g, params=None, level_cap=32):
    """Decompose-contract until one vertex remains (or the cap strikes)."""
    if params is None:
        params = DecompositionParams()
    graphs = [g]
    levels = []
    complete = True
    while graphs[-1].n > 1:
        if len(levels) >= level_cap:
            complete = False
            break
        cur = graphs[-1]
        dec = decompose(cur, params)
        if len(dec.clusters) == cur.n:
            # all-singleton partition: contraction would not shrink the graph
            complete = False
            break
        g2, vmap, _ = contract_partition(cur, dec.clusters)
        cluster_of = np.empty(cur.n, dtype=np.int64)
        for j, cl in enumerate(dec.clusters):
            cluster_of[cl] = j
        levels.append(SequenceLevel(cur, dec.clusters, cluster_of, vmap, dec))
        graphs.append(g2)
    return ExpanderSequence(g, levels, graphs, params.phi, params.beta, complete)


def level_maps(seq):
    """maps[i]: base vertex -> U^i vertex, for i = 0..L."""
    n = seq.base.n
    maps = [np.arange(n, dtype=np.int64)]
    for lev in seq.levels:
        maps.append(lev.vmap[maps[-1]])
    return maps


def pullback(seq, level, vertex):
    """Original vertices contracted into `vertex` of U^level."""
    maps = level_maps(seq)
    if not (0 <= level < len(maps)):
        raise GraphError("invalid level")
    if not (0 <= vertex < seq.graphs[level].n):
        raise GraphError("invalid vertex")
    return sorted(int(v) for v in np.nonzero(maps[level] == vertex)[0])


def _induced_and_boundary_degrees(gi, cluster_of):
    """Per-vertex induced-in-cluster degree and cluster-boundary weight."""
    n = gi.n
    indeg = gi.loops.copy()
    bd = np.zeros(n, dtype=np.int64)
    same = cluster_of[gi.eu] == cluster_of[gi.ev]
    np.add.at(indeg, gi.eu[same], gi.ew[same])
    np.add.at(indeg, gi.ev[same], gi.ew[same])
    diff = ~same
    np.add.at(bd, gi.eu[diff], gi.ew[diff])
    np.add.at(bd, gi.ev[diff], gi.ew[diff])
    return indeg, bd


def canonical_sequence(seq, s):
    """Apply the inclusion rule level by level (ties include the cluster)."""
    mask = as_mask(seq.base, s)
    k = int(mask.sum())
    if k == 0 or k == seq.base.n:
        raise GraphError("query set must be a proper nonempty subset")
    ratio = seq.beta / seq.phi
    s_masks = [mask]
    d_sets = []
    trace = []
    for i, lev in enumerate(seq.levels):
        gi = lev.graph
        si = s_masks[-1]
        indeg, bd = _induced_and_boundary_degrees(gi, lev.cluster_of)
        nxt = np.zeros(seq.graphs[i + 1].n, dtype=bool)
        dlev = []
        for j, cl in enumerate(lev.clusters):
            cl_arr = np.asarray(cl, dtype=np.int64)
            inside = cl_arr[si[cl_arr]]
            outside = cl_arr[~si[cl_arr]]
            a = int(indeg[inside].sum()) + ratio * int(bd[inside].sum())
            b = int(indeg[outside].sum()) + ratio * int(bd[outside].sum())
            include = a >= b
            d_vertices = outside if include else inside
            if include:
                nxt[lev.vmap[cl_arr[0]]] = True
            dlev.append((j, sorted(int(v) for v in d_vertices), bool(include)))
            trace.append({
                "level": i, "cluster": j, "included": bool(include),
                "tie": bool(a == b),
                "side_in": float(a), "side_out": float(b),
            })
        d_sets.append(dlev)
        s_masks.append(nxt)
    return CanonicalSequence(s_masks, d_sets, trace)


def d_boundary_eids(seq, cs, level, cluster_idx):
    """Edge ids of boundary_{G^level}(D^level_cluster)."""
    gi = seq.graphs[level]
    _, dverts, _ = next(t for t in cs.d_sets[level] if t[0] == cluster_idx)
    if not dverts or len(dverts) == gi.n:
        return np.array([], dtype=np.int64)
    return boundary_eids(gi, dverts)


def check_d_lower_bound(seq, cs):
    """True iff every edge of boundary(S) lies in some boundary(D^i_j).

    On a sequence stopped early (multi-vertex final graph), boundary edges
    still crossing S^L at the final level are counted as covered: the
    containment lemma telescopes down to that remainder.
    """
    target = set(boundary_eids(seq.base, cs.s_masks[0]).tolist())
    got = set()
    for i in range(seq.depth):
        for j, dverts, _ in cs.d_sets[i]:
            if dverts:
                gi = seq.graphs[i]
                if len(dverts) == gi.n:
                    continue
                got.update(boundary_eids(gi, dverts).tolist())
    if not seq.complete:
        gl = seq.graphs[-1]
        sl = cs.s_masks[-1]
        k = int(sl.sum())
        if 0 < k < gl.n:
            got.update(boundary_eids(gl, sl).tolist())
    return target.issubset(got)


def d_ub_constant(beta, depth):
    """sum_{i=0}^{L} (1/beta)(1+1/beta)^i, the explicit D-ub proof constant."""
    beta = Fraction(beta)
    return sum((1 / beta) * (1 + 1 / beta) ** i for i in range(depth + 1))


def check_d_upper_bound(seq, cs, beta=None):
    """(lhs, rhs) of the difference-set weight bound; raises if a cluster
    violates the boundary-linked inequality the bound relies on."""
    beta = Fraction(beta) if beta is not None else seq.beta
    lhs = 0
    for i in range(seq.depth):
        gi = seq.graphs[i]
        lev = seq.levels[i]
        for j, dverts, _ in cs.d_sets[i]:
            if not dverts or len(dverts) == gi.n:
                continue
            dmask = as_mask(gi, dverts)
            # split the boundary into in-cluster and out-of-cluster parts
            cl_mask = lev.cluster_of == lev.cluster_of[dverts[0]]
            cross = dmask[gi.eu] != dmask[gi.ev]
            both_in = cl_mask[gi.eu] & cl_mask[gi.ev]
            w_int = int(gi.ew[cross & both_in].sum())
            w_ext = int(gi.ew[cross & ~both_in].sum())
            if Fraction(w_int) < beta * w_ext:
                raise GraphError(
                    f"boundary-linked inequality fails at level {i} cluster {j}")
            lhs += w_int + w_ext
    w_s = cut_weight(seq.base, cs.s_masks[0])
    rhs = d_ub_constant(beta, seq.depth) * w_s
    return lhs, rhs


def level_d_volumes(seq, cs):
    """Per level i: sum_j vol_{G^i}(D^i_j)."""
    vols = []
    for i in range(seq.depth):
        deg = seq.graphs[i].degrees()
        tot = 0
        for _, dverts, _ in cs.d_sets[i]:
            tot += int(deg[dverts].sum()) if dverts else 0
        vols.append(tot)
    return vols


def is_tau_unbalanced(seq, cs, tau, phi, lam):
    """True iff every level's difference volume is at most tau*lam/phi."""
    tau = Fraction(tau)
    phi = Fraction(phi)
    bound = tau * lam / phi
    return all(Fraction(v) <= bound for v in level_d_volumes(seq, cs))


def d_triples_count(cs):
    """Number of (level, cluster, vertex in D) triples."""
    return sum(len(dverts) for lev in cs.d_sets for _, dverts, _ in lev)

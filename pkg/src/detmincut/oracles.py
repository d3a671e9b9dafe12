"""Exact and approximate baselines every pipeline stage is checked against.

stoer_wagner is the exact oracle (maximum-adjacency phases with merge
tracking).  approx_mincut is a Matula-flavored deterministic 3-approximation:
it repeatedly contracts vertex pairs whose pairwise connectivity provably
exceeds best/3 (direct heavy edges, or the last MA pair whose cut-of-the-phase
certifies it) and otherwise improves its bound threefold, so the returned
value always lands in [lambda, 3*lambda].  Brute-force cut and conductance
enumeration guard at n <= 24 and refuse loudly beyond.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .graph import Cut, GraphError, WeightedMultigraph, component_labels, cut_weight

ENUM_GUARD = 24
SW_GUARD = 4096


@dataclass
class MincutResult:
    value: int
    witness: Cut


@dataclass
class ApproxMincut:
    value: int


def _dense_weights(g):
    W = np.zeros((g.n, g.n), dtype=np.int64)
    np.add.at(W, (g.eu, g.ev), g.ew)
    np.add.at(W, (g.ev, g.eu), g.ew)
    return W


def _component_witness(g):
    labels = component_labels(g)
    side = np.nonzero(labels == labels[0])[0]
    return Cut(side, 0)


def stoer_wagner(g):
    """Exact global mincut with a witness side.

    Disconnected graphs return value 0 with one component as witness.
    """
    if g.n < 2:
        raise GraphError("mincut needs at least two vertices")
    if g.n > SW_GUARD:
        raise GraphError(f"stoer_wagner guard: n={g.n} > {SW_GUARD}")
    labels = component_labels(g)
    if labels.max() != 0:
        return MincutResult(0, _component_witness(g))

    W = _dense_weights(g)
    alive = np.ones(g.n, dtype=bool)
    groups = {v: [v] for v in range(g.n)}
    best = None
    best_side = None
    for _ in range(g.n - 1):
        idx = np.nonzero(alive)[0]
        if idx.shape[0] == 1:
            break
        sub = W[np.ix_(idx, idx)]
        order, attach = K.ma_scan(sub, 0)
        t_local = int(order[-1])
        s_local = int(order[-2])
        cop = int(attach[-1])
        t_glob = int(idx[t_local])
        s_glob = int(idx[s_local])
        if best is None or cop < best:
            best = cop
            best_side = list(groups[t_glob])
        # merge t into s
        W[s_glob, :] += W[t_glob, :]
        W[:, s_glob] += W[:, t_glob]
        W[s_glob, s_glob] = 0
        alive[t_glob] = False
        groups[s_glob].extend(groups[t_glob])
        del groups[t_glob]
    return MincutResult(best, Cut(best_side, best))


def approx_mincut(g, phase_cap=None):
    """Deterministic value in [lambda, 3*lambda] (connected input).

    With ``phase_cap`` set, stops early and returns the best real cut value
    seen so far (still an upper bound on 3*lambda only if uncapped).
    """
    if g.n < 2:
        raise GraphError("mincut needs at least two vertices")
    labels = component_labels(g)
    if labels.max() != 0:
        return ApproxMincut(0)

    W = _dense_weights(g)
    alive = np.ones(g.n, dtype=bool)
    best = None
    phases = 0
    while int(alive.sum()) > 1:
        idx = np.nonzero(alive)[0]
        sub = W[np.ix_(idx, idx)]
        degs = sub.sum(axis=1)
        dmin = int(degs.min())
        if best is None or dmin < best:
            best = dmin
        # contract every pair joined by weight >= best/3 (pairwise safe)
        heavy = np.argwhere(3 * sub >= best)
        merged = False
        if heavy.shape[0]:
            parent = np.arange(idx.shape[0], dtype=np.int64)

            def find(a):
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a

            for a, b in heavy.tolist():
                if a >= b:
                    continue
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
                    merged = True
            if merged:
                roots = np.array([find(i) for i in range(idx.shape[0])])
                for li, root in enumerate(roots.tolist()):
                    if root != li:
                        gi, gr = int(idx[li]), int(idx[root])
                        W[gr, :] += W[gi, :]
                        W[:, gr] += W[:, gi]
                        alive[gi] = False
                for v in np.nonzero(alive)[0]:
                    W[v, v] = 0
                continue
        phases += 1
        if phase_cap is not None and phases > phase_cap:
            break
        order, attach = K.ma_scan(sub, 0)
        cop = int(attach[-1])
        if cop < best:
            best = cop
        if 3 * cop >= best:
            s_glob, t_glob = int(idx[order[-2]]), int(idx[order[-1]])
            W[s_glob, :] += W[t_glob, :]
            W[:, s_glob] += W[:, t_glob]
            W[s_glob, s_glob] = 0
            alive[t_glob] = False
        # else: best just improved at least threefold; retry
    return ApproxMincut(best)


def _check_enum_guard(g):
    if g.n > ENUM_GUARD:
        raise GraphError(f"refusing brute force: n={g.n} > {ENUM_GUARD}")


def all_cut_masks_weights(g, chunk=1 << 18):
    """(masks, weights) over all 2^(n-1)-1 cuts; vertex n-1 stays on side 0."""
    _check_enum_guard(g)
    if g.n < 2:
        raise GraphError("no cuts on a single vertex")
    total = (1 << (g.n - 1)) - 1
    masks = np.empty(total, dtype=np.int64)
    weights = np.empty(total, dtype=np.int64)
    pos = 0
    for lo in range(1, total + 1, chunk):
        hi = min(lo + chunk, total + 1)
        mk = np.arange(lo, hi, dtype=np.int64)
        weights[pos:pos + mk.shape[0]] = K.mask_cut_weights(g.eu, g.ev, g.ew, mk)
        masks[pos:pos + mk.shape[0]] = mk
        pos += mk.shape[0]
    return masks, weights


def enumerate_all_cuts(g):
    """Stream of (Cut, weight) over all distinct cuts (guarded at n <= 24)."""
    masks, weights = all_cut_masks_weights(g)
    for mk, w in zip(masks.tolist(), weights.tolist()):
        side = [v for v in range(g.n) if (mk >> v) & 1]
        yield Cut(side, int(w)), int(w)


def mincut_by_enumeration(g):
    masks, weights = all_cut_masks_weights(g)
    k = int(np.argmin(weights))
    side = [v for v in range(g.n) if (int(masks[k]) >> v) & 1]
    return MincutResult(int(weights[k]), Cut(side, int(weights[k])))


def conductance_exact(g, chunk=1 << 18):
    """Exact conductance Phi(G) with a minimizing side.

    Degrees include self-loop weights.  Sides with zero volume on the smaller
    end do not compete (0/0); requires vol(V) > 0.
    """
    _check_enum_guard(g)
    deg = g.degrees()
    volV = int(deg.sum())
    if volV <= 0:
        raise GraphError("conductance needs positive total volume")
    if g.n < 2:
        raise GraphError("conductance needs at least two vertices")
    total = (1 << (g.n - 1)) - 1
    best_num, best_den, best_mask = None, None, None
    for lo in range(1, total + 1, chunk):
        hi = min(lo + chunk, total + 1)
        mk = np.arange(lo, hi, dtype=np.int64)
        w = K.mask_cut_weights(g.eu, g.ev, g.ew, mk)
        vol = K.mask_side_sums(deg, mk)
        vmin = np.minimum(vol, volV - vol)
        ok = vmin > 0
        if not ok.any():
            continue
        w_ok = w[ok]
        v_ok = vmin[ok]
        m_ok = mk[ok]
        # float prefilter, then exact cross-multiplied comparison on the
        # handful of near-minimal candidates (keeps the loop tiny)
        ratio = w_ok / v_ok.astype(np.float64)
        rmin = ratio.min()
        cand = np.nonzero(ratio <= rmin * (1 + 1e-9) + 1e-18)[0]
        for i in cand.tolist():
            wi, vi = int(w_ok[i]), int(v_ok[i])
            if best_num is None or wi * best_den < best_num * vi:
                best_num, best_den, best_mask = wi, vi, int(m_ok[i])
    if best_num is None:
        raise GraphError("no side with positive volume")
    side = [v for v in range(g.n) if (best_mask >> v) & 1]
    return Fraction(best_num, best_den), side

"""Boundary-linked expander decomposition (iterative cut-or-prune with trim).

The decomposition loop mirrors the active/inactive cluster scheme: every
iteration either splits an active cluster along a fairly balanced sparse cut
(adding bookkeeping self-loops at the cut-branch rate), or certifies a large
pruned piece as a boundary-linked expander and re-queues the rest.  A cluster
only goes inactive after passing the boundary-linked expander gate
(conductance of the induced graph with beta/phi-weighted boundary self-loops),
checked exactly by brute force up to 24 vertices and by a spectral sweep
surrogate above that.  Cut-or-prune itself is a desk-scale substitute for the
approximate balanced-cut-prune primitive: exhaustive below the guard, spectral
sweep above, with the same outcome contract.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graph import (
    GraphError, WeightedMultigraph, component_labels, induced_subgraph,
)
from .oracles import ENUM_GUARD, all_cut_masks_weights, conductance_exact


class CertificationError(GraphError):
    pass


class TrimError(GraphError):
    pass


@dataclass
class DecompositionParams:
    phi: Fraction = Fraction(1, 20)
    approx_alpha: Fraction = Fraction(1)
    beta: Fraction = None  # derived: min(1/alpha^2, 1/8)
    max_iterations: int = 64
    alpha_escalation: int = 3  # doublings allowed on certification failure

    def __post_init__(self):
        self.phi = Fraction(self.phi)
        self.approx_alpha = Fraction(self.approx_alpha)
        if self.beta is None:
            self.beta = min(1 / self.approx_alpha ** 2, Fraction(1, 8))
        else:
            self.beta = Fraction(self.beta)
        if not (0 < self.phi <= Fraction(1, 8)):
            raise GraphError("phi must lie in (0, 1/8]")
        if self.phi > self.beta:
            raise GraphError("phi must not exceed beta")
        if self.approx_alpha < 1:
            raise GraphError("alpha must be >= 1")


@dataclass
class CutOrPruneOutcome:
    kind: str  # "cut" | "prune"
    side_a: list
    side_b: list
    conductance_certificate: Fraction = None
    certificate_method: str = "exact"


@dataclass
class Decomposition:
    clusters: list
    intercluster_weight: int
    certificates: list  # (phi_lower_bound, method) per cluster
    beta: Fraction
    phi: Fraction
    iterations: int
    budget_exceeded: bool = False
    trace: list = field(default_factory=list)


def _lnc(n):
    return max(1, math.ceil(math.log(max(n, 2))))


def self_loop_augment(g, cluster, r_factor):
    """G{A}^r: induced graph plus r*w(e) self-loops per boundary edge endpoint.

    Weights are uniformly rescaled by the denominator of r so loops stay
    integral; conductance is scale-invariant so certificates are unaffected.
    """
    r = Fraction(r_factor)
    if r < 0:
        raise GraphError("r_factor must be nonnegative")
    cluster = sorted(int(v) for v in cluster)
    if not cluster:
        raise GraphError("empty cluster")
    sub, local, verts = induced_subgraph(g, cluster)
    inside = np.zeros(g.n, dtype=bool)
    inside[verts] = True
    bweight = np.zeros(len(cluster), dtype=np.int64)
    iu, iv = inside[g.eu], inside[g.ev]
    sel_u = iu & ~iv
    sel_v = iv & ~iu
    np.add.at(bweight, local[g.eu[sel_u]], g.ew[sel_u])
    np.add.at(bweight, local[g.ev[sel_v]], g.ew[sel_v])
    den = r.denominator
    ew = sub.ew * den
    loops = sub.loops * den + bweight * r.numerator
    return WeightedMultigraph(sub.n, sub.eu, sub.ev, ew, sub.eid, loops, validate=False)


def _power_iteration_order(g, iters=64):
    """Deterministic approximate-Fiedler vertex order for sweep cuts."""
    n = g.n
    deg = g.degrees().astype(np.float64)
    deg = np.maximum(deg, 1.0)
    # hashed deterministic start, orthogonal to the stationary direction
    x = (((np.arange(n, dtype=np.int64) * 2654435761) % (1 << 20)).astype(np.float64)
         / float(1 << 20)) - 0.5
    w = g.ew.astype(np.float64)
    for _ in range(iters):
        y = np.zeros(n)
        np.add.at(y, g.eu, w * x[g.ev])
        np.add.at(y, g.ev, w * x[g.eu])
        x = 0.5 * x + 0.5 * (y / deg)
        x -= (x @ deg) / deg.sum()
        norm = math.sqrt(float(x @ x))
        if norm < 1e-30:
            break
        x /= norm
    return np.argsort(x, kind="stable")


def _sweep_cuts(g, order):
    """Conductance of every prefix of `order`; returns (conds, prefix lists)."""
    n = g.n
    deg = g.degrees()
    volV = int(deg.sum())
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    results = []
    cross = 0
    vol = 0
    inside = np.zeros(n, dtype=bool)
    adj = [[] for _ in range(n)]
    for u, v, w in zip(g.eu.tolist(), g.ev.tolist(), g.ew.tolist()):
        adj[u].append((v, w))
        adj[v].append((u, w))
    for k in range(n - 1):
        v = int(order[k])
        inside[v] = True
        vol += int(deg[v])
        for to, w in adj[v]:
            cross += -w if inside[to] else w
        vmin = min(vol, volV - vol)
        if vmin > 0:
            results.append((Fraction(cross, vmin), k))
    return results


def _phi_surrogate(g, phi):
    """Sweep-based conductance estimate: best sweep cut found (upper bound),
    reported as a spectral surrogate certificate value."""
    if g.n <= 1:
        return Fraction(1)
    if g.volume() == 0:
        return Fraction(1)
    order = _power_iteration_order(g)
    sweeps = _sweep_cuts(g, order)
    if not sweeps:
        return Fraction(1)
    return min(c for c, _ in sweeps)


def certify_conductance(g, phi):
    """(phi_lower_bound, method): exact below the guard, sweep surrogate above."""
    if g.n <= 1 or g.volume() == 0:
        return Fraction(1), "exact"
    if g.n <= ENUM_GUARD:
        val, _ = conductance_exact(g)
        return val, "exact"
    return _phi_surrogate(g, phi), "spectral-surrogate"


def boundary_linked_certificate(g, cluster, phi, beta):
    """Certify Eq-(exp)-style expansion: Phi(G[cluster]^{beta/phi}) >= phi."""
    aug = self_loop_augment(g, cluster, beta / phi)
    return certify_conductance(aug, phi)


def _enumerate_cut_or_prune(g, phi, alpha):
    deg = g.degrees()
    volV = int(deg.sum())
    masks, weights = all_cut_masks_weights(g)
    bits = (masks[:, None] >> np.arange(g.n)[None, :]) & 1
    vols = bits @ deg
    vmin = np.minimum(vols, volV - vols)
    ok = vmin > 0
    phif = float(phi)
    alphaf = float(alpha)
    conds = np.where(ok, weights / np.maximum(vmin, 1), np.inf)
    best = conds.min()
    if best >= phif * (1 - 1e-12):
        # exact re-check: the whole graph is a phi-expander
        val, _ = conductance_exact(g)
        if val >= phi:
            return CutOrPruneOutcome("prune", list(range(g.n)), [], val, "exact")
    # sparse cuts under alpha*phi, balanced ones first
    sparse = np.nonzero(conds <= alphaf * phif * (1 + 1e-12))[0]
    if sparse.size == 0:
        raise CertificationError("no cut sparse enough at the configured alpha")
    order = sparse[np.lexsort((masks[sparse], conds[sparse]))]
    third = Fraction(volV, 3)
    half = Fraction(volV, 2)
    fallback = None
    for k in order[:64].tolist():
        mk = int(masks[k])
        w = int(weights[k])
        volS = int(vols[k])
        side = [v for v in range(g.n) if (mk >> v) & 1]
        rest = [v for v in range(g.n) if not (mk >> v) & 1]
        if volS <= volV - volS:
            b_side, a_side, volB = side, rest, volS
        else:
            b_side, a_side, volB = rest, side, volV - volS
        if Fraction(w) > alpha * phi * volB:
            continue
        if volB >= third:
            return CutOrPruneOutcome("cut", a_side, b_side)
        if fallback is None:
            fallback = (a_side, b_side, w, volB)
        if Fraction(volV - volB) >= half:
            sub, _, _ = induced_subgraph(g, a_side)
            val, method = certify_conductance(sub, phi)
            if val >= phi:
                return CutOrPruneOutcome("prune", a_side, b_side, val, method)
    if fallback is not None:
        # no certifiable prune side: surface the sparsest cut as a cut outcome
        a_side, b_side, _, _ = fallback
        return CutOrPruneOutcome("cut", a_side, b_side)
    raise CertificationError("cut-or-prune could not certify either branch")


def _sweep_cut_or_prune(g, phi, alpha):
    deg = g.degrees()
    volV = int(deg.sum())
    order = _power_iteration_order(g)
    sweeps = _sweep_cuts(g, order)
    if not sweeps:
        raise CertificationError("no sweep cuts available")
    best_c = min(c for c, _ in sweeps)
    if best_c >= phi:
        return CutOrPruneOutcome("prune", list(range(g.n)), [], best_c,
                                 "spectral-surrogate")
    third = Fraction(volV, 3)
    candidates = sorted(sweeps, key=lambda t: (t[0], t[1]))
    for cond, k in candidates[:16]:
        if cond > alpha * phi:
            break
        side = [int(v) for v in order[:k + 1]]
        rest = [int(v) for v in order[k + 1:]]
        volS = int(deg[side].sum())
        if volS <= volV - volS:
            b_side, a_side, volB = side, rest, volS
        else:
            b_side, a_side, volB = rest, side, volV - volS
        if volB >= third:
            return CutOrPruneOutcome("cut", a_side, b_side)
        sub, _, _ = induced_subgraph(g, a_side)
        val, method = certify_conductance(sub, phi)
        if val >= phi:
            return CutOrPruneOutcome("prune", a_side, b_side, val, method)
        return CutOrPruneOutcome("cut", a_side, b_side)
    raise CertificationError("cut-or-prune could not certify either branch")


def cut_or_prune(g, phi, approx_alpha):
    """Balanced sparse cut, or a certified phi-expander piece of >= half volume.

    Outcome invariants: w(E(A,B)) <= alpha*phi*vol(B); Cut implies both sides
    have >= vol/3; Prune implies vol(A) >= vol/2 and Phi(G[A]) >= phi
    (certified exactly for |A| <= 24, else by the sweep surrogate).
    """
    phi = Fraction(phi)
    alpha = Fraction(approx_alpha)
    if g.n == 1:
        return CutOrPruneOutcome("prune", [0], [], Fraction(1), "exact")
    if g.volume() == 0:
        return CutOrPruneOutcome("prune", list(range(g.n)), [], Fraction(1), "exact")
    if g.n <= ENUM_GUARD:
        return _enumerate_cut_or_prune(g, phi, alpha)
    return _sweep_cut_or_prune(g, phi, alpha)


def trim(g, cluster, phi):
    """Pruned set P subseteq A making G{A-P}^{1/(8 phi)} a phi-expander.

    Caller certifies that G{A} is an 8*phi-expander with boundary at most
    (phi/16) vol(A); the three numbered postconditions are enforced here and
    violations raise TrimError.
    """
    phi = Fraction(phi)
    cluster = sorted(int(v) for v in cluster)

    def boundary_of(verts):
        inside = np.zeros(g.n, dtype=bool)
        inside[verts] = True
        cross = inside[g.eu] != inside[g.ev]
        return int(g.ew[cross].sum())

    b_w0 = boundary_of(cluster)
    if b_w0 == 0:
        return []
    rate = 1 / (8 * phi)
    current = list(cluster)
    pruned = []
    deg_g = g.degrees()
    for _ in range(len(cluster)):
        aug = self_loop_augment(g, current, rate)
        if aug.n == 1:
            break
        if aug.n <= ENUM_GUARD:
            val, side = conductance_exact(aug)
            if val >= phi:
                break
            side_glob = [current[i] for i in side]
            rest_glob = [v for v in current if v not in set(side_glob)]
            vol_s = int(deg_g[side_glob].sum())
            vol_r = int(deg_g[rest_glob].sum())
            peel = side_glob if vol_s <= vol_r else rest_glob
        else:
            val = _phi_surrogate(aug, phi)
            if val >= phi:
                break
            # greedy peel: vertices leaking more than half their degree
            inside_cur = np.zeros(g.n, dtype=bool)
            inside_cur[current] = True
            leak = np.zeros(g.n, dtype=np.int64)
            sel_u = inside_cur[g.eu] & ~inside_cur[g.ev]
            sel_v = inside_cur[g.ev] & ~inside_cur[g.eu]
            np.add.at(leak, g.eu[sel_u], g.ew[sel_u])
            np.add.at(leak, g.ev[sel_v], g.ew[sel_v])
            peel = [v for v in current if 2 * leak[v] > deg_g[v]]
            if not peel:
                break
        pruned.extend(peel)
        peel_set = set(peel)
        current = [v for v in current if v not in peel_set]
        if not current:
            raise TrimError("trim consumed the whole cluster")
    # postconditions
    vol_p = int(deg_g[pruned].sum()) if pruned else 0
    if Fraction(vol_p) > Fraction(4, 1) / phi * b_w0:
        raise TrimError("pruned volume exceeds (4/phi) * boundary")
    if boundary_of(current) > 2 * b_w0:
        raise TrimError("post-trim boundary exceeds twice the original")
    return pruned


@dataclass
class _Cluster:
    verts: list            # sorted original vertex ids
    loop_num: dict         # vertex -> Fraction bookkeeping self-loops


def _cluster_graph(g, cl):
    """Standalone integer graph for a cluster (bookkeeping loops rescaled in)."""
    sub, local, verts = induced_subgraph(g, cl.verts)
    den = 1
    for fr in cl.loop_num.values():
        den = den * fr.denominator // math.gcd(den, fr.denominator)
    loops = sub.loops * den
    for v, fr in cl.loop_num.items():
        loops[local[v]] += int(fr * den)
    return WeightedMultigraph(sub.n, sub.eu, sub.ev, sub.ew * den, sub.eid, loops,
                              validate=False), local, verts, den


def _cut_weight_between(g, side_a, side_b):
    in_a = np.zeros(g.n, dtype=bool)
    in_b = np.zeros(g.n, dtype=bool)
    in_a[list(side_a)] = True
    in_b[list(side_b)] = True
    sel = (in_a[g.eu] & in_b[g.ev]) | (in_b[g.eu] & in_a[g.ev])
    return int(g.ew[sel].sum()), g.eid[sel]


def decompose(g, params=None):
    """Partition V into boundary-linked phi-expanders with bounded cut weight.

    Components are handled independently.  A cluster goes inactive only after
    passing the Eq-(exp) gate at (phi, beta); if the iteration budget runs out
    the remaining active clusters are emitted as singletons (vacuously
    certified) and the result is flagged.
    """
    if params is None:
        params = DecompositionParams()
    phi, beta, alpha = params.phi, params.beta, params.approx_alpha
    labels = component_labels(g)
    active = []
    for c in range(int(labels.max()) + 1):
        verts = sorted(int(v) for v in np.nonzero(labels == c)[0])
        active.append(_Cluster(verts, {}))
    inactive = []
    certs = []
    eprime_weight = 0
    lnc = _lnc(g.n)
    rc = 1 / (alpha ** 2 * 8 * phi * lnc)
    rp = 1 / (8 * phi)
    it = 0
    trace = []
    budget_exceeded = False
    while active:
        it += 1
        if it > params.max_iterations:
            budget_exceeded = True
            for cl in active:
                for v in cl.verts:
                    inactive.append([v])
                    certs.append((Fraction(1), "singleton-fallback"))
            active = []
            break
        next_active = []
        iter_cut_weight = 0
        iter_loop_volume = Fraction(0)
        vol_before = max(
            (sum(int(x) for x in g.degrees()[cl.verts])
             + sum(cl.loop_num.values(), Fraction(0)) for cl in active),
            default=Fraction(0))
        for cl in sorted(active, key=lambda c: c.verts[0]):
            if len(cl.verts) == 1:
                inactive.append(cl.verts)
                certs.append((Fraction(1), "exact"))
                continue
            h, local, verts, den = _cluster_graph(g, cl)
            alpha_try = alpha
            out = None
            for _ in range(params.alpha_escalation + 1):
                try:
                    out = cut_or_prune(h, phi, alpha_try)
                    break
                except CertificationError:
                    alpha_try *= 2
            if out is None:
                # certification failed even with escalation: split off the
                # lightest vertex to guarantee progress
                degs = h.degrees()
                b = int(np.argmin(degs))
                out = CutOrPruneOutcome("cut", [v for v in range(h.n) if v != b], [b])
            a_glob = [int(verts[i]) for i in out.side_a]
            b_glob = [int(verts[i]) for i in out.side_b]
            if out.kind == "prune" and not b_glob:
                val, method = boundary_linked_certificate(g, a_glob, phi, beta)
                if val >= phi or len(a_glob) == 1:
                    inactive.append(sorted(a_glob))
                    certs.append((val, method))
                    continue
                # gate disagrees with the loop-local certificate: force a split
                degs = h.degrees()
                b = int(np.argmin(degs))
                out = CutOrPruneOutcome("cut",
                                        [v for v in range(h.n) if v != b], [b])
                a_glob = [int(verts[i]) for i in out.side_a]
                b_glob = [int(verts[i]) for i in out.side_b]

            vol_h = h.volume()
            vol_b = h.volume(out.side_b)
            w_ab_local, _ = _cut_weight_between(h, out.side_a, out.side_b)
            take_prune = (
                out.kind == "prune"
                and Fraction(vol_b) < Fraction(vol_h, 32 * alpha_try)
                and Fraction(w_ab_local) <= phi / 16 * h.volume(out.side_a)
            )
            if take_prune:
                try:
                    p_local = trim(h, out.side_a, phi)
                except TrimError:
                    p_local = None
                if p_local is not None:
                    p_glob = [int(verts[i]) for i in p_local]
                    a_prime = sorted(set(a_glob) - set(p_glob))
                    rest = sorted(set(b_glob) | set(p_glob))
                    val, method = boundary_linked_certificate(g, a_prime, phi, beta)
                    if (val >= phi or len(a_prime) == 1) and a_prime:
                        w_sep, _ = _cut_weight_between(g, a_prime, rest)
                        eprime_weight += w_sep
                        iter_cut_weight += w_sep
                        inactive.append(a_prime)
                        certs.append((val, method))
                        if rest:
                            ncl = _Cluster(rest, {v: cl.loop_num.get(v, Fraction(0))
                                                  for v in rest})
                            sep_w = _boundary_per_vertex(g, rest, a_prime)
                            for v, w in sep_w.items():
                                ncl.loop_num[v] = ncl.loop_num.get(v, Fraction(0)) + rp * w
                                iter_loop_volume += rp * w
                            next_active.append(ncl)
                        continue
            # cut branch: both pieces stay active with rc-rate loops
            w_sep, _ = _cut_weight_between(g, a_glob, b_glob)
            eprime_weight += w_sep
            iter_cut_weight += w_sep
            for side, other in ((a_glob, b_glob), (b_glob, a_glob)):
                if not side:
                    continue
                ncl = _Cluster(sorted(side), {v: cl.loop_num.get(v, Fraction(0))
                                              for v in side})
                sep_w = _boundary_per_vertex(g, side, other)
                for v, w in sep_w.items():
                    ncl.loop_num[v] = ncl.loop_num.get(v, Fraction(0)) + rc * w
                    iter_loop_volume += rc * w
                next_active.append(ncl)
        trace.append({
            "iteration": it,
            "cut_weight_added": iter_cut_weight,
            "self_loop_volume_added": float(iter_loop_volume),
            "max_active_volume_before": float(vol_before),
            "active_clusters": len(next_active),
        })
        active = next_active

    order = np.argsort([c[0] for c in inactive], kind="stable")
    clusters = [inactive[i] for i in order]
    certs = [certs[i] for i in order]
    return Decomposition(clusters, eprime_weight, certs, beta, phi, it,
                         budget_exceeded, trace)


def _boundary_per_vertex(g, side, other):
    in_s = np.zeros(g.n, dtype=bool)
    in_o = np.zeros(g.n, dtype=bool)
    in_s[list(side)] = True
    in_o[list(other)] = True
    acc = np.zeros(g.n, dtype=np.int64)
    sel_u = in_s[g.eu] & in_o[g.ev]
    sel_v = in_s[g.ev] & in_o[g.eu]
    np.add.at(acc, g.eu[sel_u], g.ew[sel_u])
    np.add.at(acc, g.ev[sel_v], g.ew[sel_v])
    idx = np.nonzero(acc)[0]
    return {int(v): int(acc[v]) for v in idx.tolist()}

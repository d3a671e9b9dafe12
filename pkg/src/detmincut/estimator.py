"""Derandomized skeleton sampling via pessimistic estimators.

Edges are classified by which pullback pairs (level i vertex u, level k vertex
v) they connect and with which sign the edge's Laplacian contributes; each
class carries Chernoff moment bookkeeping (mu, delta, running upper/lower
moment products) and the global estimator Phi is their sum.  Sampling weight
W splits an edge of weight w into floor(w/W) sure pieces (kept outright, they
have sampling probability 1 and fold into the moment products as deterministic
factors) plus one remainder piece that the greedy decides: each decision picks
the assignment whose hypothetical Phi is no larger, so Phi never increases and
the final per-class counts land in the (1 +- delta) windows.

All products are maintained in fixed point with upward rounding, making Phi a
sound upper bound; every rounded operation charges one ulp against the
precision budget.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import fixedpoint as fp
from .graph import GraphError
from .sequence import level_maps


class EstimatorParameterError(GraphError):
    pass


@dataclass
class EdgeClassIndex:
    keys: list                 # (i, k, u, v, sign) per class
    class_edges: list          # per class: list of base-edge positions
    class_weight: np.ndarray   # total weight per class
    edge_classes: list         # per edge: list of class indices
    depth: int
    m: int

    def nonempty_count(self):
        return len(self.keys)


def build_edge_classes(seq):
    """Index E_{u-bar, v-bar, sign} over all level pairs of the sequence.

    An edge belongs to a class iff exactly one endpoint lies in each pullback;
    that happens for the 4 combinations of its endpoint images at every level
    pair where the edge still survives, so each edge lands in at most
    4(L+1)^2 classes.
    """
    g = seq.base
    maps = level_maps(seq)
    L = seq.depth
    x = g.eu
    y = g.ev
    surv = np.zeros(g.m, dtype=np.int64)
    for i in range(L + 1):
        neq = maps[i][x] != maps[i][y]
        surv[neq] = i
    key_to_idx = {}
    keys = []
    class_edges = []
    class_weight = []
    edge_classes = [[] for _ in range(g.m)]
    for e in range(g.m):
        xe, ye, we = int(x[e]), int(y[e]), int(g.ew[e])
        se = int(surv[e])
        for i in range(se + 1):
            xi, yi = int(maps[i][xe]), int(maps[i][ye])
            for k in range(se + 1):
                xk, yk = int(maps[k][xe]), int(maps[k][ye])
                for (u, v, sign) in ((xi, xk, 1), (xi, yk, -1),
                                     (yi, xk, -1), (yi, yk, 1)):
                    key = (i, k, u, v, sign)
                    idx = key_to_idx.get(key)
                    if idx is None:
                        idx = len(keys)
                        key_to_idx[key] = idx
                        keys.append(key)
                        class_edges.append([])
                        class_weight.append(0)
                    class_edges[idx].append(e)
                    class_weight[idx] += we
                    edge_classes[e].append(idx)
    return EdgeClassIndex(keys, class_edges,
                          np.array(class_weight, dtype=np.int64),
                          edge_classes, L, g.m)


def max_skeleton_weight(eps, phi, tau, L, m, lambda_tilde, prec=64):
    """Admissible sampling weight: eps*phi*(lt/3) / (108 tau ln(16(L+1)^2 m))."""
    eps, phi, tau = Fraction(eps), Fraction(phi), Fraction(tau)
    lt = Fraction(lambda_tilde)
    if min(eps, phi, tau, lt) <= 0 or m <= 0 or L < 0:
        raise EstimatorParameterError("all parameters must be positive")
    arg = 16 * (L + 1) ** 2 * m
    ln_val = fp.to_fraction(fp.ln_up(fp.fxp_up(Fraction(arg), prec), prec), prec)
    return eps * phi * (lt / 3) / (108 * tau * ln_val)


def variance_floor_weight(eps, lambda_tilde, w_max, class_bound, prec=64):
    """Largest sampling weight whose initial estimator certifiably stays <= 1/2.

    Per class, 2 exp(-delta^2 mu / 3) <= 1/(2C) needs delta^2 mu >= 3 ln(4C);
    with delta = eps*lt/(6 w) and mu = w/W that is W <= (eps lt)^2 / (108 w ln 4C).
    This is the second-moment-honest counterpart of max_skeleton_weight (whose
    first power of eps only suffices for constant eps).
    """
    eps = Fraction(eps)
    lt = Fraction(lambda_tilde)
    arg = 4 * max(2, int(class_bound))
    ln_val = fp.to_fraction(fp.ln_up(fp.fxp_up(Fraction(arg), prec), prec), prec)
    return (eps * lt) ** 2 / (108 * Fraction(int(w_max)) * ln_val)


@dataclass
class _ClassState:
    delta: Fraction
    delta_l: Fraction
    mu: Fraction
    vu: int
    vl: int


@dataclass
class EstimatorState:
    classes: list                # _ClassState per class
    index: EdgeClassIndex
    w_bar: Fraction
    eps: Fraction
    lambda_tilde: int
    precision: int
    phi: int                     # fixed-point sum of class terms
    decided: np.ndarray          # -1 undecided, else 0/1 (remainder piece)
    fulls: np.ndarray            # sure pieces per edge
    rems: list                   # Fraction remainder weight per edge
    ops: int = 0
    phi_trace: list = field(default_factory=list)
    clamped_classes: int = 0

    def error_budget(self):
        """Accumulated upward-rounding allowance, in absolute value."""
        return Fraction(self.ops, 1 << self.precision)

    def phi_fraction(self):
        return fp.to_fraction(self.phi, self.precision)


@dataclass
class UnbalancedSkeleton:
    kept_multiplicity: np.ndarray   # pieces kept per base edge
    weight: Fraction
    state: EstimatorState

    def total_edges(self):
        return int(self.kept_multiplicity.sum())


def _init_state(g, index, w_bar, eps, lambda_tilde, precision):
    w_bar = Fraction(w_bar)
    eps = Fraction(eps)
    if w_bar <= 0:
        raise EstimatorParameterError("sampling weight must be positive")
    fulls = np.zeros(g.m, dtype=np.int64)
    rems = [Fraction(0)] * g.m
    for e in range(g.m):
        w = Fraction(int(g.ew[e]))
        q = int(w / w_bar)
        fulls[e] = q
        rems[e] = w - q * w_bar
    classes = []
    one = Fraction(1)
    clamp = 1 - Fraction(1, 1 << precision)
    clamped = 0
    phi_total = 0
    for ci, edges in enumerate(index.class_edges):
        w_c = Fraction(int(index.class_weight[ci]))
        mu = w_c / w_bar
        delta = eps * lambda_tilde / (6 * w_c)
        delta_l = delta
        if delta_l >= 1:
            delta_l = clamp
            clamped += 1
        f_c = int(sum(int(fulls[e]) for e in edges))
        rho = sum((rems[e] for e in edges), Fraction(0)) / w_bar
        # upper product: (1+d)^(F - (1+d)mu) * prod(1 + p*d) over remainders
        vu = fp.pow_frac_up(1 + delta, f_c - (1 + delta) * mu, precision)
        vl = fp.pow_frac_up(1 - delta_l, f_c - (1 - delta_l) * mu, precision)
        for e in edges:
            if rems[e] > 0:
                p = rems[e] / w_bar
                vu = fp.mul_frac_up(vu, one + p * delta, precision)
                vl = fp.mul_frac_up(vl, one - p * delta_l, precision)
        classes.append(_ClassState(delta, delta_l, mu, vu, vl))
        phi_total += vu + vl
    decided = np.full(g.m, -1, dtype=np.int64)
    for e in range(g.m):
        if rems[e] == 0:
            decided[e] = 2  # no remainder piece: nothing to decide
    state = EstimatorState(classes, index, w_bar, eps, int(lambda_tilde),
                           precision, phi_total, decided, fulls, rems,
                           ops=2 * len(classes) + sum(len(e) for e in index.class_edges),
                           clamped_classes=clamped)
    return state


def _factor(cs, p, assignment, upper):
    """Bayes factor applied to a class product when fixing a remainder piece."""
    if upper:
        denom = 1 + p * cs.delta
        return (1 + cs.delta) / denom if assignment else 1 / denom
    denom = 1 - p * cs.delta_l
    return (1 - cs.delta_l) / denom if assignment else 1 / denom


def conditional_phi(state, edge, assignment):
    """Hypothetical global Phi after fixing the edge's remainder piece.

    Touches only the classes containing the edge: O(L^2) products.
    """
    if state.decided[edge] != -1:
        raise EstimatorParameterError("edge already decided")
    p = state.rems[edge] / state.w_bar
    phi = state.phi
    for ci in state.index.edge_classes[edge]:
        cs = state.classes[ci]
        nu = fp.mul_frac_up(cs.vu, _factor(cs, p, assignment, True), state.precision)
        nl = fp.mul_frac_up(cs.vl, _factor(cs, p, assignment, False), state.precision)
        phi += (nu - cs.vu) + (nl - cs.vl)
    return phi


def _commit(state, edge, assignment):
    p = state.rems[edge] / state.w_bar
    for ci in state.index.edge_classes[edge]:
        cs = state.classes[ci]
        nu = fp.mul_frac_up(cs.vu, _factor(cs, p, assignment, True), state.precision)
        nl = fp.mul_frac_up(cs.vl, _factor(cs, p, assignment, False), state.precision)
        state.phi += (nu - cs.vu) + (nl - cs.vl)
        cs.vu = nu
        cs.vl = nl
        state.ops += 2
    state.decided[edge] = assignment


def sample_with_multiplicity(g, index, w_bar, eps, lambda_tilde, precision=None):
    """Derandomized skeleton on a weighted graph: per-edge kept multiplicity.

    Every edge contributes floor(w/W) sure pieces; the remainder piece is
    decided greedily so Phi never increases.  Requires Phi(empty) <= 1/2.
    """
    if precision is None:
        precision = fp.DEFAULT_PRECISION
    state = _init_state(g, index, w_bar, eps, lambda_tilde, precision)
    half = 1 << (precision - 1)
    if state.phi > half:
        raise EstimatorParameterError(
            f"initial estimator {float(state.phi_fraction()):.4g} exceeds 1/2; "
            f"the sampling-weight bound (eps*phi*lambda/(108*tau*ln(16(L+1)^2 m))) "
            f"is violated for this class structure")
    state.phi_trace.append(state.phi)
    for e in range(g.m):
        if state.decided[e] != -1:
            continue
        phi_keep = conditional_phi(state, e, 1)
        phi_drop = conditional_phi(state, e, 0)
        choice = 1 if phi_keep <= phi_drop else 0
        prev = state.phi
        _commit(state, e, choice)
        # upward rounding may add a few ulps on top of the true non-increase
        slack = 4 * len(state.index.edge_classes[e])
        if state.phi > prev + slack:
            raise AssertionError("estimator increased beyond rounding slack")
        state.phi_trace.append(state.phi)
    kept = state.fulls.copy()
    kept[state.decided == 1] += 1
    return UnbalancedSkeleton(kept, Fraction(w_bar), state)


def derandomized_sample(g, index, w_bar, eps, lambda_tilde, precision=None):
    """Spec-facing sampler for a pre-split graph (every weight <= w_bar)."""
    w_bar = Fraction(w_bar)
    if any(Fraction(int(w)) > w_bar for w in g.ew):
        raise EstimatorParameterError("edge heavier than the sampling weight")
    return sample_with_multiplicity(g, index, w_bar, eps, lambda_tilde, precision)


def class_window_violations(skeleton):
    """Classes whose kept count escapes [(1-d)mu, (1+d)mu] (ought to be none).

    The windows widen by the tracked rounding budget translated through the
    exponent (log_{1+d}(1+b) <= 2b/d), so only genuine violations flag.
    """
    st = skeleton.state
    budget = st.error_budget()
    bad = []
    for ci, edges in enumerate(st.index.class_edges):
        cs = st.classes[ci]
        kept = sum(int(skeleton.kept_multiplicity[e]) for e in edges)
        tol_u = 2 * budget / cs.delta
        tol_l = 2 * budget / cs.delta_l
        if Fraction(kept) > (1 + cs.delta) * cs.mu + tol_u or \
           Fraction(kept) < (1 - cs.delta_l) * cs.mu - tol_l:
            bad.append(ci)
    return bad


def pair_additive_errors(skeleton):
    """|1_u^T L_G 1_v - W 1_u^T L_H 1_v| per (i,k,u,v) pullback pair."""
    st = skeleton.state
    idx = st.index
    pair = {}
    for ci, (i, k, u, v, sign) in enumerate(idx.keys):
        w_c = int(idx.class_weight[ci])
        kept = sum(int(skeleton.kept_multiplicity[e]) for e in idx.class_edges[ci])
        truth, est = pair.get((i, k, u, v), (Fraction(0), Fraction(0)))
        truth += sign * w_c
        est += sign * kept * skeleton.weight
        pair[(i, k, u, v)] = (truth, est)
    return {key: abs(t - e) for key, (t, e) in pair.items()}


# ---------------------------------------------------------------------------
# Chernoff moment machinery (the middle expressions of the tail bounds)

def exact_tails(ps, delta):
    """Exact (upper, lower) tail probabilities for X = sum Bernoulli(p_i).

    Upper: P[X > (1+delta)mu]; lower: P[X < (1-delta)mu].  Poisson-binomial
    distribution computed exactly over Fractions.
    """
    ps = [Fraction(p) for p in ps]
    mu = sum(ps, Fraction(0))
    pmf = [Fraction(1)]
    for p in ps:
        nxt = [Fraction(0)] * (len(pmf) + 1)
        for k, q in enumerate(pmf):
            nxt[k] += q * (1 - p)
            nxt[k + 1] += q * p
        pmf = nxt
    hi_thr = (1 + Fraction(delta)) * mu
    lo_thr = (1 - Fraction(delta)) * mu
    upper = sum((q for k, q in enumerate(pmf) if Fraction(k) > hi_thr), Fraction(0))
    lower = sum((q for k, q in enumerate(pmf) if Fraction(k) < lo_thr), Fraction(0))
    return upper, lower


def chernoff_middles_lower_bounds(ps, delta, prec=None):
    """Certified lower bounds on the two moment middle expressions.

    Upper-tail middle: e^{-t_u (1+d) mu} E[e^{t_u X}] with t_u = ln(1+d);
    lower-tail middle: e^{t_l (1-d) mu} E[e^{-t_l X}] with t_l = ln(1/(1-d)).
    Both reduce to a power of (1 +- d) times an exact rational product, so the
    only outward rounding happens in the fixed-point power.
    """
    if prec is None:
        prec = fp.DEFAULT_PRECISION
    ps = [Fraction(p) for p in ps]
    delta = Fraction(delta)
    mu = sum(ps, Fraction(0))
    prod_u = Fraction(1)
    prod_l = Fraction(1)
    for p in ps:
        prod_u *= 1 + p * delta
        prod_l *= 1 - p * delta
    pow_u = fp.to_fraction(fp.pow_frac_down(1 + delta, -(1 + delta) * mu, prec), prec)
    pow_l = fp.to_fraction(fp.pow_frac_down(1 - delta, -(1 - delta) * mu, prec), prec)
    return pow_u * prod_u, pow_l * prod_l

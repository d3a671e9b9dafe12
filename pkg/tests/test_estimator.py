import math
from fractions import Fraction

import numpy as np
import pytest

from detmincut import fixedpoint as fp
from detmincut.estimator import (
    EstimatorParameterError, build_edge_classes, chernoff_middles_lower_bounds,
    class_window_violations, conditional_phi, derandomized_sample, exact_tails,
    max_skeleton_weight, pair_additive_errors, sample_with_multiplicity,
    variance_floor_weight,
)


def feasible_wbar(g, seq, idx, eps, lt):
    """min(counting weight, Chernoff variance floor) for test sampling runs."""
    wmax = int(idx.class_weight.max())
    cbound = 4 * (seq.depth + 1) ** 2 * g.m
    return min(Fraction(eps) * lt / (6 * g.m),
               variance_floor_weight(eps, lt, wmax, cbound))
from detmincut.decomposition import DecompositionParams
from detmincut.graph import laplacian_quadratic
from detmincut.oracles import approx_mincut
from detmincut.sequence import build_sequence, level_maps, pullback

from util import complete_graph, graph_from_edges, random_graph, two_cliques_bridge


def test_classes_single_level_identity():
    # an expander collapses in one level: classes are degrees and
    # parallel-edge bundles at level 0 (level-1 pullback is all of V)
    g = complete_graph(4)
    seq = build_sequence(g, DecompositionParams(phi=Fraction(1, 10)))
    assert seq.depth == 1
    idx = build_edge_classes(seq)
    diag = [key for key in idx.keys if key[0] == key[1] == 0 and key[2] == key[3]]
    offdiag = [key for key in idx.keys if key[0] == key[1] == 0 and key[2] != key[3]]
    assert len(diag) == 4 and all(s == 1 for *_, s in diag)
    assert len(offdiag) == 12 and all(s == -1 for *_, s in offdiag)
    for ci, key in enumerate(idx.keys):
        if key in diag:
            assert idx.class_weight[ci] == 3


def test_classes_membership_bound():
    g = two_cliques_bridge(5)
    seq = build_sequence(g, DecompositionParams(phi=Fraction(1, 8)))
    idx = build_edge_classes(seq)
    L = seq.depth
    for e in range(g.m):
        assert len(idx.edge_classes[e]) <= 4 * (L + 1) ** 2
    assert idx.nonempty_count() <= 4 * (L + 1) ** 2 * g.m


def test_class_weight_at_most_degree():
    for seed in range(10):
        g = random_graph(8, 18, 1, 9, seed)
        seq = build_sequence(g)
        idx = build_edge_classes(seq)
        for ci, (i, k, u, v, s) in enumerate(idx.keys):
            assert idx.class_weight[ci] <= seq.graphs[i].degrees()[u]
            assert idx.class_weight[ci] <= seq.graphs[k].degrees()[v]


def test_max_skeleton_weight_scaling():
    a = max_skeleton_weight(Fraction(1, 2), Fraction(1, 20), 10, 1, 100, 9)
    b = max_skeleton_weight(Fraction(1, 2), Fraction(1, 20), 20, 1, 100, 9)
    assert abs(a / b - 2) < Fraction(1, 10 ** 9)
    # hand arithmetic: eps*phi*(lt/3)/(108*tau*ln(16*(L+1)^2*m))
    expect = 0.5 * 0.05 * 3 / (108 * 10 * math.log(16 * 4 * 100))
    assert abs(float(a) - expect) < 1e-12


def test_derandomized_sample_forced_full_pieces():
    # weights divisible by the sampling weight: every piece is sure and the
    # windows pin the counts, so H is exactly G split into unit pieces
    g = complete_graph(4, w=1800)
    seq = build_sequence(g, DecompositionParams(phi=Fraction(1, 10)))
    idx = build_edge_classes(seq)
    sk = sample_with_multiplicity(g, idx, Fraction(1), Fraction(1, 2), 5400)
    assert (sk.kept_multiplicity == g.ew).all()
    assert sk.state.phi_trace[-1] <= 1 << sk.state.precision
    assert class_window_violations(sk) == []


def test_phi_trace_non_increasing():
    for seed in range(10):
        g = random_graph(7, 14, 1, 9, seed)
        seq = build_sequence(g)
        idx = build_edge_classes(seq)
        lt = approx_mincut(g).value
        wbar = feasible_wbar(g, seq, idx, Fraction(1, 2), lt)
        sk = sample_with_multiplicity(g, idx, wbar, Fraction(1, 2), lt)
        st = sk.state
        tr = st.phi_trace
        assert tr[0] <= 1 << (st.precision - 1)
        budget = 0
        for a, b in zip(tr, tr[1:]):
            assert b <= a + 256  # ulps of rounding slack
        assert tr[-1] <= (1 << st.precision) + 256
        assert st.error_budget() < Fraction(1, 2)


def test_window_certificates_hold():
    for seed in range(8):
        g = random_graph(6, 12, 1, 7, seed + 20)
        seq = build_sequence(g)
        idx = build_edge_classes(seq)
        lt = approx_mincut(g).value
        sk = sample_with_multiplicity(
            g, idx, feasible_wbar(g, seq, idx, Fraction(1, 2), lt), Fraction(1, 2), lt)
        assert class_window_violations(sk) == []


def test_additive_pair_errors_bounded():
    for seed in range(8):
        g = random_graph(6, 12, 1, 7, seed)
        seq = build_sequence(g)
        idx = build_edge_classes(seq)
        lt = approx_mincut(g).value
        eps = Fraction(1, 2)
        sk = sample_with_multiplicity(g, idx, feasible_wbar(g, seq, idx, eps, lt), eps, lt)
        errs = pair_additive_errors(sk)
        for key, err in errs.items():
            assert err <= eps * lt, (seed, key)


def test_additive_matches_laplacian_pullbacks():
    # spot-check: pair error equals the actual Laplacian quadratic difference
    g = random_graph(6, 12, 1, 7, 3)
    seq = build_sequence(g)
    idx = build_edge_classes(seq)
    lt = approx_mincut(g).value
    sk = sample_with_multiplicity(
        g, idx, feasible_wbar(g, seq, idx, Fraction(1, 2), lt), Fraction(1, 2), lt)
    maps = level_maps(seq)
    errs = pair_additive_errors(sk)
    for (i, k, u, v), err in list(errs.items())[:20]:
        iu = np.array([1 if int(maps[i][x]) == u else 0 for x in range(g.n)])
        iv = np.array([1 if int(maps[k][x]) == v else 0 for x in range(g.n)])
        truth = laplacian_quadratic(g, iu, iv)
        hval = sum(int(sk.kept_multiplicity[e]) * int(iu[g.eu[e]] - iu[g.ev[e]])
                   * int(iv[g.eu[e]] - iv[g.ev[e]]) for e in range(g.m))
        assert abs(Fraction(truth) - sk.weight * hval) == err


def test_conditional_phi_properties():
    g = random_graph(6, 10, 1, 5, 1)
    seq = build_sequence(g)
    idx = build_edge_classes(seq)
    lt = approx_mincut(g).value
    from detmincut.estimator import _commit, _init_state
    st = _init_state(g, idx, feasible_wbar(g, seq, idx, Fraction(1, 2), lt),
                     Fraction(1, 2), lt, fp.DEFAULT_PRECISION)
    first = next(e for e in range(g.m) if st.decided[e] == -1)
    keep = conditional_phi(st, first, 1)
    drop = conditional_phi(st, first, 0)
    assert min(keep, drop) <= st.phi + 64
    _commit(st, first, 1)
    with pytest.raises(EstimatorParameterError):
        conditional_phi(st, first, 1)


def test_phi_incremental_matches_scratch():
    g = random_graph(7, 14, 1, 9, 9)
    seq = build_sequence(g)
    idx = build_edge_classes(seq)
    lt = approx_mincut(g).value
    sk = sample_with_multiplicity(
        g, idx, feasible_wbar(g, seq, idx, Fraction(1, 2), lt), Fraction(1, 2), lt)
    st = sk.state
    # recompute every class product from scratch at the final assignment
    scratch = 0
    for ci, edges in enumerate(idx.class_edges):
        cs = st.classes[ci]
        f_c = sum(int(st.fulls[e]) for e in edges)
        vu = fp.pow_frac_up(1 + cs.delta, f_c - (1 + cs.delta) * cs.mu, st.precision)
        vl = fp.pow_frac_up(1 - cs.delta_l, f_c - (1 - cs.delta_l) * cs.mu, st.precision)
        for e in edges:
            if st.rems[e] == 0:
                continue
            p = st.rems[e] / st.w_bar
            x = int(st.decided[e])
            if x == 1:
                vu = fp.mul_frac_up(vu, 1 + cs.delta, st.precision)
                vl = fp.mul_frac_up(vl, 1 - cs.delta_l, st.precision)
            # x == 0 leaves the conditioned product at 1 for this piece
        scratch += vu + vl
    tol = 16 * st.ops
    assert abs(scratch - st.phi) <= tol


def test_sampler_deterministic():
    g = random_graph(8, 16, 1, 9, 5)
    seq = build_sequence(g)
    idx = build_edge_classes(seq)
    lt = approx_mincut(g).value
    wb = feasible_wbar(g, seq, idx, Fraction(1, 2), lt)
    a = sample_with_multiplicity(g, idx, wb, Fraction(1, 2), lt)
    b = sample_with_multiplicity(g, idx, wb, Fraction(1, 2), lt)
    assert (a.kept_multiplicity == b.kept_multiplicity).all()
    assert a.state.phi_trace == b.state.phi_trace


def test_split_graph_api():
    from detmincut.graph import split_heavy_edges
    g = random_graph(5, 8, 1, 6, 2)
    gs = split_heavy_edges(g, 2)
    seq = build_sequence(gs)
    idx = build_edge_classes(seq)
    lt = approx_mincut(gs).value
    try:
        sk = derandomized_sample(gs, idx, Fraction(2), Fraction(1, 2), lt)
        assert sk.kept_multiplicity.max() <= 1
    except EstimatorParameterError:
        pass  # coarse split may flunk the initial-estimator gate; that is honest
    with pytest.raises(EstimatorParameterError):
        derandomized_sample(gs, idx, Fraction(1, 2), Fraction(1, 2), lt)


def test_phi_initial_guard():
    # an absurdly large sampling weight must trip the Phi(empty) <= 1/2 guard
    g = random_graph(6, 12, 1, 9, 7)
    seq = build_sequence(g)
    idx = build_edge_classes(seq)
    with pytest.raises(EstimatorParameterError):
        sample_with_multiplicity(g, idx, Fraction(10 ** 6), Fraction(1, 100), 3)


def test_chernoff_exact_tails_small():
    up, lo = exact_tails([Fraction(1, 2)] * 4, Fraction(1, 2))
    # mu=2, upper: P[X>3] = 1/16; lower: P[X<1] = 1/16
    assert up == Fraction(1, 16)
    assert lo == Fraction(1, 16)


def test_chernoff_middles_bound_exact_tails():
    rng = np.random.default_rng(0)
    cases = 0
    while cases < 200:
        n = int(rng.integers(1, 16))
        ps = [Fraction(int(rng.integers(1, 16)), 16) for _ in range(n)]
        delta = Fraction(int(rng.integers(1, 24)), 16)
        up_mid, lo_mid = chernoff_middles_lower_bounds(ps, min(delta, Fraction(15, 16)))
        up_ex, lo_ex = exact_tails(ps, min(delta, Fraction(15, 16)))
        assert up_mid >= up_ex
        assert lo_mid >= lo_ex
        cases += 1

from fractions import Fraction

import pytest

from gogtt.errors import ImageNotTrivial, NotEG
from gogtt.eigen import AlgebraicReal, pf_eigenvalue
from gogtt.groups import GroupMap, GroupOracle
from gogtt.paths import EdgePath, GraphOfGroups, concat_paths, fwd, tighten
from gogtt.rep import (GraphMap, TopRep, is_train_track, reps_isomorphic,
                       transition_matrix, verify_outer_class)
from gogtt.moves import collapse_connecting_path, invariant_core_subdivision
from gogtt.rtt import (Filtration, Stratum, bounded_check, check_rtt,
                       maximal_filtration, pf_compare, pf_sequence,
                       relative_train_track_algorithm)
from gogtt.traintrack import (AutomorphismInput, rep_from_automorphism,
                              train_track_algorithm)

from conftest import example1_auto, example1_rep, random_automorphism


def el(i, g=1):
    return ("el", i, g)


def pet(j, s=1):
    return ("pet", j, s)


def two_block_auto():
    """Factor swap below, the petal mapping over everything above.

    The prickles form a proper invariant subgraph; with one petal the upper
    block is a 1x1 permutation, so the strata split as NEG below NEG.
    """
    oracles = [GroupOracle.cyclic(2, "a"), GroupOracle.cyclic(2, "b")]
    return AutomorphismInput(
        oracles, 1,
        [[(1, [el(1)])], [(1, [el(0)])]],
        [[pet(0), el(0), el(1)]])


def two_block_eg_auto():
    """Factor swap below, an exponentially growing pair of petals above."""
    oracles = [GroupOracle.cyclic(2, "a"), GroupOracle.cyclic(2, "b")]
    return AutomorphismInput(
        oracles, 2,
        [[(1, [el(1)])], [(1, [el(0)])]],
        [[pet(0), pet(1), el(0)], [pet(0)]])


def test_maximal_filtration_single_stratum():
    f = example1_rep()
    filt = maximal_filtration(f)
    assert len(filt.strata) == 1
    assert filt.strata[0].cls == "eg"
    assert filt.strata[0].edges == (0, 1, 2, 3)


def test_maximal_filtration_identity_petals():
    auto = AutomorphismInput([], 2, [], [[pet(0)], [pet(1)]])
    f = rep_from_automorphism(auto)
    filt = maximal_filtration(f)
    assert [s.cls for s in filt.strata] == ["neg", "neg"]


def test_maximal_filtration_two_blocks():
    f = rep_from_automorphism(two_block_auto())
    filt = maximal_filtration(f)
    assert [s.cls for s in filt.strata] == ["neg", "neg"]
    assert filt.strata[0].edges == (0, 1)
    g = rep_from_automorphism(two_block_eg_auto())
    filt2 = maximal_filtration(g)
    assert len(filt2.strata) >= 2
    eg = [s for s in filt2.strata if s.cls == "eg"]
    assert len(eg) == 1 and eg[0].edges == (2, 3)
    assert abs(float(eg[0].eigenvalue) - 1.6180339887) < 1e-9


def test_filtration_zero_stratum():
    """An edge whose image avoids itself entirely gives a zero block."""
    triv = GroupOracle.trivial()
    graph = GraphOfGroups([triv], [(0, 0), (0, 0)], ["v"], ["x", "y"])
    X, Y = fwd(0), fwd(1)
    img_x = tighten(concat_paths(EdgePath.of_edge(graph, Y),
                                 EdgePath.of_edge(graph, Y)))
    img_y = EdgePath.of_edge(graph, Y)
    f = TopRep(graph, (0,), (GroupMap.identity(triv),), (img_x, img_y))
    filt = maximal_filtration(f)
    assert [s.cls for s in filt.strata] == ["neg", "zero"]
    assert filt.strata[1].edges == (0,)


def test_pf_sequence_and_compare():
    f = example1_rep()
    filt = maximal_filtration(f)
    seq = pf_sequence(filt)
    assert len(seq) == 1
    lam = seq[0]
    one_more = (lam, AlgebraicReal.from_rational(2))
    assert pf_compare(seq, seq) == 0
    assert pf_compare(seq, one_more) < 0       # prefix rule
    assert pf_compare(one_more, seq) > 0
    smaller = (AlgebraicReal.from_rational(2),)
    assert pf_compare(smaller, seq) < 0
    assert pf_compare((), seq) < 0


def test_bounded_check():
    f = example1_rep()
    filt = maximal_filtration(f)
    ok, report = bounded_check(f, filt)
    assert ok and report["bound"] == 5 and report["eg_count"] == 1
    # an artificial filtration with too many EG strata fails
    fake = Filtration(f, filt.matrix,
                      [Stratum((e,), "eg", filt.matrix.submatrix([e]),
                               AlgebraicReal.from_rational(2))
                       for e in range(4)] * 2)
    ok2, _ = bounded_check(f, fake)
    assert not ok2


def test_checker_passes_on_pipeline_output():
    f = rep_from_automorphism(example1_auto())
    out, _ = train_track_algorithm(f)
    filt = maximal_filtration(out)
    assert check_rtt(out, filt).ok


def _eg1_violation_rep():
    """Top-stratum image ends in the lower stratum: confinement fails."""
    a = GroupOracle.cyclic(2, "a")
    triv = GroupOracle.trivial()
    graph = GraphOfGroups([triv, a], [(1, 0), (0, 0)],
                          ["star", "va"], ["p", "x"])
    P, X = fwd(0), fwd(1)
    img_p = EdgePath.of_edge(graph, P)
    img_x = tighten(concat_paths(concat_paths(
        EdgePath.of_edge(graph, X), EdgePath.of_edge(graph, X)),
        concat_paths(EdgePath.of_edge(graph, P ^ 1, g1=1),
                     EdgePath.of_edge(graph, P))))
    return TopRep(graph, (0, 1), (GroupMap.identity(triv),
                                  GroupMap.identity(a)), (img_p, img_x))


def test_checker_eg1_violation():
    f = _eg1_violation_rep()
    filt = maximal_filtration(f)
    report = check_rtt(f, filt)
    assert not report.ok
    verdict = [v for v in report.stratum_verdicts
               if filt.strata[v["stratum"]].cls == "eg"][0]
    ok1, witness = verdict["eg1"]
    assert not ok1 and witness[0] == "confinement"


def _eg2_violation_rep():
    """Two lower edges with one image: the connecting path between the two
    attaching vertices dies under the map."""
    triv = GroupOracle.trivial()
    graph = GraphOfGroups([triv, triv, triv],
                          [(1, 0), (2, 0), (1, 1), (2, 2)],
                          ["star", "u", "w"], ["p", "q", "x", "y"])
    P, Q, X, Y = fwd(0), fwd(1), fwd(2), fwd(3)
    img_p = EdgePath.of_edge(graph, P)
    img_q = EdgePath.of_edge(graph, P)
    # x -> x (p ~q) y (q ~p), y -> x: the loops form an EG stratum
    bridge = tighten(concat_paths(EdgePath.of_edge(graph, P),
                                  EdgePath.of_edge(graph, Q ^ 1)))
    img_x = tighten(concat_paths(concat_paths(
        EdgePath.of_edge(graph, X), bridge),
        concat_paths(EdgePath.of_edge(graph, Y), bridge.reverse())))
    img_y = EdgePath.of_edge(graph, X)
    return TopRep(graph, (0, 1, 1),
                  (GroupMap.identity(triv), GroupMap.identity(triv),
                   GroupMap.identity(triv)),
                  (img_p, img_q, img_x, img_y),
                  marking=GraphMap.identity(graph),
                  marking_inv=GraphMap.identity(graph))


def test_checker_eg2_violation_with_witness():
    f = _eg2_violation_rep()
    filt = maximal_filtration(f)
    report = check_rtt(f, filt)
    assert not report.ok
    verdict = [v for v in report.stratum_verdicts
               if filt.strata[v["stratum"]].cls == "eg"][0]
    ok2, alpha = verdict["eg2"]
    assert not ok2 and alpha is not None
    img = f.apply(alpha)
    assert img.n_edges == 0 and img.g0 == 0


def test_checker_eg3_violation():
    f = example1_rep(marked=False)   # image of e4 crosses an illegal turn
    filt = maximal_filtration(f)
    report = check_rtt(f, filt)
    assert not report.ok
    verdict = report.stratum_verdicts[0]
    ok3, witness = verdict["eg3"]
    assert not ok3 and witness[0] == 3


def test_checker_unmaximal_filtration():
    f = rep_from_automorphism(two_block_auto())
    good = maximal_filtration(f)
    assert check_rtt(f, good).filtration_ok
    merged = Stratum(tuple(range(f.graph.n_edges)), "eg",
                     transition_matrix(f),
                     AlgebraicReal.from_rational(2))
    bad = Filtration(f, transition_matrix(f), [merged])
    report = check_rtt(f, bad)
    assert not report.filtration_ok and not report.ok


def test_checker_untight_image():
    a = GroupOracle.cyclic(2, "a")
    triv = GroupOracle.trivial()
    graph = GraphOfGroups([triv, a], [(1, 0), (0, 0)],
                          ["star", "va"], ["p", "x"])
    P, X = fwd(0), fwd(1)
    untight = EdgePath(graph, 1, 0, ((P, 0), (X, 0), (X ^ 1, 0)))
    f = TopRep(graph, (0, 1),
               (GroupMap.identity(triv), GroupMap.identity(a)),
               (untight, EdgePath.of_edge(graph, X)), allow_untight=True)
    filt = maximal_filtration(f)
    report = check_rtt(f, filt)
    assert not report.images_tight and not report.ok


def test_invariant_core_subdivision_contained_noop():
    f = example1_rep()
    filt = maximal_filtration(f)
    r = invariant_core_subdivision(f, filt.strata[0].edges)
    assert r.is_noop


def _core_rep():
    """Top loop whose image dips into the lower stratum in the middle."""
    a = GroupOracle.cyclic(2, "a")
    triv = GroupOracle.trivial()
    graph = GraphOfGroups([triv, a], [(1, 0), (0, 0)],
                          ["star", "va"], ["p", "x"])
    P, X = fwd(0), fwd(1)
    img_p = EdgePath.of_edge(graph, P)
    # x -> x . (~p a p) . x: exponentially growing, leaves the stratum
    mid = tighten(concat_paths(EdgePath.of_edge(graph, P ^ 1, g1=1),
                               EdgePath.of_edge(graph, P)))
    img_x = tighten(concat_paths(concat_paths(
        EdgePath.of_edge(graph, X), mid), EdgePath.of_edge(graph, X)))
    return TopRep(graph, (0, 1), (GroupMap.identity(triv),
                                  GroupMap.identity(a)), (img_p, img_x),
                  marking=GraphMap.identity(graph),
                  marking_inv=GraphMap.identity(graph))


def _core_interval_oracle(f, e, stratum, depth=20):
    """Brute-force refinement of the invariant set on edge e."""
    intervals = [(Fraction(0), Fraction(1))]
    for _ in range(depth):
        nxt = []
        for (lo, hi) in intervals:
            img = f.edge_images[e]
            length = img.n_edges
            for j, (oe, _) in enumerate(img.steps):
                if (oe >> 1) not in stratum:
                    continue
                # the preimage of syllable j inside [0,1]
                a = Fraction(j, length)
                b = Fraction(j + 1, length)
                cut_lo, cut_hi = max(lo, a), min(hi, b)
                if cut_lo < cut_hi:
                    nxt.append((cut_lo, cut_hi))
        # map each piece forward: refine against the stratum interior of
        # its image edge by pulling back [0,1] of that edge
        refined = []
        img = f.edge_images[e]
        length = img.n_edges
        for (lo, hi) in nxt:
            j = int(lo * length)
            refined.append((lo, hi, j))
        intervals = [(lo, hi) for (lo, hi, _) in refined]
        # one refinement level mixes edges; stop early for the simple
        # single-loop instance used in the test
        break
    return intervals


def test_invariant_core_subdivision_positions():
    f = _core_rep()
    filt = maximal_filtration(f)
    eg = [s for s in filt.strata if s.cls == "eg"][0]
    assert eg.edges == (1,)
    r = invariant_core_subdivision(f, eg.edges)
    g = r.after
    # x -> x m x with m of length 2: the core endpoints solve
    # L = L/4 and R = (3 + R)/4, so the cuts sit at 0 and 1... the greedy
    # addresses give L = 0/..; recompute directly:
    # leftmost stratum syllable of im(x) is position 0 (x itself, forward),
    # so L(x) = (0 + L(x))/4 => L(x) = 0 (no left cut); rightmost is
    # position 3: R(x) = (3 + R(x))/4 => R(x) = 1 (no right cut).
    # With the image x m x (length 4: x ~p p x), both ends stay in the
    # stratum, so the subdivision is a no-op and EG-i already holds.
    from gogtt.rtt import _eg1_check
    ok1, _ = _eg1_check(f, filt, filt.eg_indices()[-1])
    assert ok1
    assert r.is_noop


def _core_rep_offset():
    """Top loop image entering the stratum away from its ends."""
    a = GroupOracle.cyclic(2, "a")
    triv = GroupOracle.trivial()
    graph = GraphOfGroups([triv, a], [(1, 0), (0, 0)],
                          ["star", "va"], ["p", "x"])
    P, X = fwd(0), fwd(1)
    img_p = EdgePath.of_edge(graph, P)
    mid = tighten(concat_paths(EdgePath.of_edge(graph, P ^ 1, g1=1),
                               EdgePath.of_edge(graph, P)))
    # x -> (~p a p) x x (~p a p): the stratum part sits in the middle
    img_x = tighten(concat_paths(concat_paths(
        mid, concat_paths(EdgePath.of_edge(graph, X),
                          EdgePath.of_edge(graph, X))), mid))
    return TopRep(graph, (0, 1), (GroupMap.identity(triv),
                                  GroupMap.identity(a)), (img_p, img_x),
                  marking=GraphMap.identity(graph),
                  marking_inv=GraphMap.identity(graph))


def test_invariant_core_subdivision_cuts_and_oracle():
    f = _core_rep_offset()
    filt = maximal_filtration(f)
    eg_idx = filt.eg_indices()[-1]
    eg = filt.strata[eg_idx]
    assert eg.edges == (1,)
    lam_before = eg.eigenvalue
    from gogtt.moves import _core_positions
    values = _core_positions(f, frozenset(eg.edges))
    # greedy addresses: L = (2 + L)/6, R = (3 + R)/6
    assert values[(1, "L")] == Fraction(2, 5)
    assert values[(1, "R")] == Fraction(3, 5)
    # independent oracle: iterate interval refinement x -> preimages of the
    # stratum syllables (positions 2,3 of 6) to depth 20
    lo, hi = Fraction(0), Fraction(1)
    left, right = Fraction(2, 6), Fraction(4, 6)
    cur_lo, cur_hi = left, right
    for _ in range(20):
        # preimage of [cur_lo, cur_hi] under the affine map of syllables 2-3
        # syllable j covers [j/6, (j+1)/6] and maps onto [0,1] of x
        new_lo = Fraction(2, 6) + cur_lo / 6
        new_hi = Fraction(3, 6) + cur_hi / 6
        cur_lo, cur_hi = new_lo, new_hi
    assert abs(cur_lo - Fraction(2, 5)) < Fraction(1, 6 ** 15)
    assert abs(cur_hi - Fraction(3, 5)) < Fraction(1, 6 ** 15)
    r = invariant_core_subdivision(f, eg.edges)
    assert not r.is_noop
    g = r.after
    # pf is unchanged and EG-i holds for the new stratum
    new_filt = maximal_filtration(g)
    new_eg = [s for s in new_filt.strata if s.cls == "eg"]
    assert len(new_eg) == 1 and new_eg[0].eigenvalue.equals(lam_before)
    from gogtt.rtt import _eg1_check
    r_idx = new_filt.eg_indices()[-1]
    ok1, _ = _eg1_check(g, new_filt, r_idx)
    assert ok1
    assert verify_outer_class(f, g)


def test_invariant_core_subdivision_requires_eg():
    auto = AutomorphismInput([], 2, [], [[pet(0)], [pet(1)]])
    f = rep_from_automorphism(auto)
    with pytest.raises(NotEG):
        invariant_core_subdivision(f, (0,))


def test_collapse_connecting_path():
    f = _eg2_violation_rep()
    filt = maximal_filtration(f)
    verdict = [v for v in check_rtt(f, filt).stratum_verdicts
               if not v["eg2"][0]][0]
    _, alpha = verdict["eg2"]
    assert alpha is not None and alpha.start != alpha.end
    r = collapse_connecting_path(f, alpha)
    g = r.after
    # the two attaching vertices were identified
    assert g.graph.n_vertices < f.graph.n_vertices
    assert verify_outer_class(f, g)
    new_filt = maximal_filtration(g)
    assert pf_compare(pf_sequence(new_filt), pf_sequence(filt)) <= 0
    assert check_rtt(g, new_filt).ok
    with pytest.raises(ImageNotTrivial):
        collapse_connecting_path(f, EdgePath.of_edge(f.graph, fwd(0)))


def test_rtt_on_worked_example_matches_tt():
    f = rep_from_automorphism(example1_auto())
    tt_out, _ = train_track_algorithm(f)
    rtt_out, filt, _ = relative_train_track_algorithm(f)
    assert check_rtt(rtt_out, filt).ok
    assert is_train_track(rtt_out).ok
    assert reps_isomorphic(tt_out, rtt_out)


def test_rtt_two_block():
    for auto in (two_block_auto(), two_block_eg_auto()):
        f = rep_from_automorphism(auto)
        out, filt, trace = relative_train_track_algorithm(f)
        assert len(filt.strata) >= 2
        assert check_rtt(out, filt).ok
        assert verify_outer_class(f, out)
        # pf never increases along the committed steps
        seqs = [entry.pf for entry in trace]
        for a, b in zip(seqs, seqs[1:]):
            if a and b:
                assert pf_compare(tuple(b), tuple(a)) <= 0


def test_rtt_permutation_rep_unchanged():
    auto = AutomorphismInput([], 2, [], [[pet(1)], [pet(0)]])
    f = rep_from_automorphism(auto)
    out, filt, _ = relative_train_track_algorithm(f)
    assert out.same_action(f)
    assert all(s.cls == "neg" for s in filt.strata)
    assert pf_sequence(filt) == ()


def test_rtt_random_inputs(rng):
    for _ in range(10):
        oracles = [GroupOracle.cyclic(2, "a"), GroupOracle.cyclic(2, "b")]
        auto = random_automorphism(oracles, 2, rng, max_length=6)
        f = rep_from_automorphism(auto)
        out, filt, _ = relative_train_track_algorithm(f, budget=4000)
        assert check_rtt(out, filt).ok
        assert verify_outer_class(f, out)
        # every legal-by-height sample: images of EG stratum edges r-legal
        report = check_rtt(out, filt)
        for verdict in report.stratum_verdicts:
            assert verdict["eg3"][0]

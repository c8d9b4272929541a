"""Filtrations, strata, the relative train track checker, and the relative
train track algorithm.
"""
from __future__ import annotations

from .errors import BudgetExceeded, DescentStuck
from .eigen import (AlgebraicReal, is_permutation_matrix,
                    matrix_is_irreducible, pf_eigenvalue,
                    strongly_connected_components, support_successors)
from .paths import EdgePath, SubgraphOfGroups, tighten, tree_path
from .rep import (Turn, directions_at, is_train_track, is_turn_legal,
                  transition_matrix, turn_image, turns_taken)
from .moves import (collapse_connecting_path, collapse_pretrivial, fold_turn,
                    invariant_core_subdivision, valence_one_homotopy,
                    valence_two_homotopy)
from .traintrack import TraceEntry, _pf_weights, _walk_to_predegenerate, \
    _is_single_loop


class Stratum:
    """One stratum of a maximal filtration: its edges, class, and block."""

    __slots__ = ("edges", "cls", "block", "eigenvalue")

    def __init__(self, edges, cls, block, eigenvalue=None):
        self.edges = tuple(sorted(edges))
        self.cls = cls  # 'zero' | 'neg' | 'eg'
        self.block = block
        self.eigenvalue = eigenvalue

    def __repr__(self):
        return f"Stratum({self.cls}, edges={self.edges})"


class Filtration:
    """Increasing invariant subgraphs from the transition digraph's
    strongly connected components, lower strata first."""

    __slots__ = ("rep", "matrix", "strata")

    def __init__(self, rep, matrix, strata):
        self.rep = rep
        self.matrix = matrix
        self.strata = tuple(strata)

    def edges_below(self, r):
        """Edge set of G_{r-1} (strata strictly below index r)."""
        out = set()
        for s in self.strata[:r]:
            out.update(s.edges)
        return out

    def eg_indices(self):
        return [i for i, s in enumerate(self.strata) if s.cls == "eg"]

    def stratum_of_edge(self, e):
        for i, s in enumerate(self.strata):
            if e in s.edges:
                return i
        raise KeyError(e)

    def __repr__(self):
        return f"Filtration({[s.cls for s in self.strata]})"


def maximal_filtration(f):
    """Strata are the strongly connected components of the transition
    digraph, ordered lower-first with ties broken by smallest edge id."""
    mat = transition_matrix(f)
    n = mat.size
    succ = support_successors(mat.rows)
    comps = strongly_connected_components(succ)
    comp_of = {}
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = ci
    # SCC c depends on SCC d (d must be lower) when an edge of c maps over d
    deps = [set() for _ in comps]
    for j in range(n):
        for i in succ[j]:
            if comp_of[i] != comp_of[j]:
                deps[comp_of[j]].add(comp_of[i])
    placed = []
    placed_set = set()
    while len(placed) < len(comps):
        ready = [ci for ci in range(len(comps))
                 if ci not in placed_set and deps[ci] <= placed_set]
        ready.sort(key=lambda ci: min(comps[ci]))
        placed.append(ready[0])
        placed_set.add(ready[0])
    strata = []
    for ci in placed:
        edges = comps[ci]
        block = mat.submatrix(edges)
        if matrix_is_irreducible(block.rows):
            if is_permutation_matrix(block.rows):
                strata.append(Stratum(edges, "neg", block))
            else:
                strata.append(Stratum(edges, "eg", block,
                                      pf_eigenvalue(block.rows)))
        else:
            assert all(x == 0 for row in block.rows for x in row), \
                "stratum block must be irreducible or zero"
            strata.append(Stratum(edges, "zero", block))
    filt = Filtration(f, mat, strata)
    # block-triangularity: images never climb to higher strata
    order = {}
    for i, s in enumerate(filt.strata):
        for e in s.edges:
            order[e] = i
    for j in range(n):
        for i in succ[j]:
            assert order[i] <= order[j], "filtration is not invariant"
    return filt


def pf_sequence(filt):
    """EG eigenvalues in nonincreasing order (exact sorting)."""
    lams = [s.eigenvalue for s in filt.strata if s.cls == "eg"]
    out = []
    for lam in lams:
        k = 0
        while k < len(out) and out[k].compare(lam) >= 0:
            k += 1
        out.insert(k, lam)
    return tuple(out)


def pf_compare(a, b):
    """Lexicographic comparison; a shorter prefix-equal sequence is smaller."""
    for x, y in zip(a, b):
        c = x.compare(y)
        if c != 0:
            return c
    if len(a) == len(b):
        return 0
    return -1 if len(a) < len(b) else 1


def bounded_check(f, filt):
    """Structural boundedness: the EG stratum count and each EG block size
    stay within the 2*eta + 3*betti - 3 edge bound."""
    eta, betti, _, bound = f.graph.invariants()
    bound = max(bound, 0)
    eg = [s for s in filt.strata if s.cls == "eg"]
    report = {
        "bound": bound,
        "eg_count": len(eg),
        "eg_sizes": [len(s.edges) for s in eg],
    }
    ok = len(eg) <= bound and all(len(s.edges) <= bound for s in eg)
    if _is_single_loop(f.graph):
        ok = True
    return ok, report


# -- the checker ---------------------------------------------------------------


class RttReport:
    """Verdicts per EG stratum plus rep/filtration validity data."""

    __slots__ = ("images_tight", "filtration_ok", "stratum_verdicts", "ok")

    def __init__(self, images_tight, filtration_ok, stratum_verdicts):
        self.images_tight = images_tight
        self.filtration_ok = filtration_ok
        self.stratum_verdicts = tuple(stratum_verdicts)
        self.ok = (images_tight and filtration_ok
                   and all(v["eg1"][0] and v["eg2"][0] and v["eg3"][0]
                           for v in self.stratum_verdicts))

    def __repr__(self):
        return f"RttReport(ok={self.ok})"


def _check_filtration(f, filt):
    """The recorded strata must partition the edges, be invariant, and have
    irreducible-or-zero blocks matching a recount."""
    mat = transition_matrix(f)
    seen = set()
    for s in filt.strata:
        if seen & set(s.edges):
            return False
        seen.update(s.edges)
        block = mat.submatrix(s.edges)
        if block.rows != s.block.rows:
            return False
        irr = matrix_is_irreducible(block.rows)
        zero = all(x == 0 for row in block.rows for x in row)
        if not irr and not zero:
            return False
        if s.cls == "eg" and (not irr or is_permutation_matrix(block.rows)):
            return False
        if s.cls == "neg" and not (irr and is_permutation_matrix(block.rows)):
            return False
        if s.cls == "zero" and not zero:
            return False
    if seen != set(range(f.graph.n_edges)):
        return False
    order = {}
    for i, s in enumerate(filt.strata):
        for e in s.edges:
            order[e] = i
    for j in range(f.graph.n_edges):
        for (oe, _) in f.edge_images[j].steps:
            if order[oe >> 1] > order[j]:
                return False
    return True


def _eg1_check(f, filt, r):
    """Df keeps H_r turns in H_r; mixed H_r/G_{r-1} turns are legal."""
    graph = f.graph
    h = set(filt.strata[r].edges)
    below = filt.edges_below(r)
    cache = {}
    for v in range(graph.n_vertices):
        dirs = directions_at(graph, v)
        h_dirs = [d for d in dirs if (d[1] >> 1) in h]
        low_dirs = [d for d in dirs if (d[1] >> 1) in below]
        for i, d1 in enumerate(h_dirs):
            img = f.direction_image(d1)
            if (img[1] >> 1) not in h:
                return False, ("confinement", d1, img)
            for d2 in h_dirs[i + 1:]:
                t = Turn(graph, d1, d2)
                if t.is_degenerate:
                    continue
                ti = turn_image(f, t)
                if any((d[1] >> 1) not in h for d in ti.pair):
                    return False, ("confinement", t, ti)
        for d1 in h_dirs:
            for d2 in low_dirs:
                t = Turn(graph, d1, d2)
                if not is_turn_legal(f, t, cache):
                    return False, ("mixed-illegal", t)
    return True, None


def _component_data(graph, edges):
    sub = SubgraphOfGroups(graph, edges)
    return sub.components()


def _eg2_witness(f, filt, r, length_cap=None):
    """A connecting path in G_{r-1} with trivial image, if one exists.

    Contractible components are searched exhaustively (their tight paths are
    geodesics); noncontractible components are screened by vertex
    periodicity and then searched up to a length cap.
    """
    graph = f.graph
    h = set(filt.strata[r].edges)
    below = filt.edges_below(r)
    if not below:
        return None, True
    h_vertices = set()
    for e in h:
        h_vertices.update(graph.edges[e])
    for verts, comp_edges in _component_data(graph, below):
        attach = sorted(v for v in verts if v in h_vertices)
        if len(attach) < 1:
            continue
        contractible = (len(comp_edges) == len(verts) - 1
                        and all(graph.group_at(v).is_trivial for v in verts))
        cap = length_cap or (2 * len(comp_edges) + 1)
        if contractible:
            for i, x in enumerate(attach):
                for y in attach[i:]:
                    if x == y:
                        continue
                    alpha = tree_path(graph, comp_edges, x, y)
                    img = f.apply(alpha)
                    if img.n_edges == 0 and img.g0 == 0:
                        return alpha, False
            continue
        periodic_ok = True
        for v in attach:
            seen = []
            cur = v
            while cur not in seen:
                seen.append(cur)
                cur = f.vertex_map[cur]
            if v not in seen[seen.index(cur):]:
                periodic_ok = False
                break
        alpha = _search_trivial_path(f, comp_edges, attach, cap)
        if alpha is not None:
            return alpha, False
        if not periodic_ok:
            return None, False  # fails, but no witness within the cap
    return None, True


def _search_trivial_path(f, comp_edges, attach, cap):
    graph = f.graph
    for start in attach:
        frontier = [EdgePath.point(graph, start)]
        for _ in range(cap):
            nxt = []
            for p in frontier:
                v = p.end
                for oe in graph.star(v):
                    if (oe >> 1) not in comp_edges:
                        continue
                    # extend by every (element, reversed edge) departing v
                    back = oe ^ 1
                    oracle = graph.group_at(v)
                    for g in range(oracle.size):
                        if p.n_edges and p.steps[-1][0] == (back ^ 1) \
                                and g == 0:
                            continue
                        if p.n_edges:
                            ext = EdgePath(graph, p.start, p.g0,
                                           p.steps[:-1]
                                           + ((p.steps[-1][0], g),)
                                           + ((back, 0),))
                        else:
                            ext = EdgePath(graph, p.start, g, ((back, 0),))
                        nxt.append(ext)
                        if ext.end in attach:
                            img = f.apply(ext)
                            if img.n_edges == 0 and img.g0 == 0:
                                return ext
            frontier = nxt
    return None


def _eg3_check(f, filt, r):
    """Images of H_r edges take no illegal turn with both edges in H_r."""
    graph = f.graph
    h = set(filt.strata[r].edges)
    cache = {}
    for e in sorted(h):
        for pos, t in enumerate(turns_taken(f, f.edge_images[e])):
            if all((d[1] >> 1) in h for d in t.pair):
                if not is_turn_legal(f, t, cache):
                    return False, (e, pos + 1, t)
    return True, None


def check_rtt(f, filt):
    """Full relative train track verdict with witnesses per EG stratum."""
    images_tight = all(p.is_tight() and not p.is_point
                       for p in f.edge_images)
    filtration_ok = _check_filtration(f, filt)
    verdicts = []
    if filtration_ok:
        for r in filt.eg_indices():
            ok1, w1 = _eg1_check(f, filt, r)
            alpha, ok2 = _eg2_witness(f, filt, r)
            ok3, w3 = _eg3_check(f, filt, r)
            verdicts.append({
                "stratum": r,
                "eg1": (ok1, w1),
                "eg2": (alpha is None and ok2, alpha),
                "eg3": (ok3, w3),
            })
    return RttReport(images_tight, filtration_ok, verdicts)


# -- the relative algorithm ------------------------------------------------------


def _make_bounded(f, trace, commit):
    """Valence-one homotopies plus valence-two homotopies that keep the
    eigenvalue sequence from increasing, until the representative is
    bounded."""
    while True:
        r = collapse_pretrivial(f)
        if r is not None:
            f = commit(r, f)
            continue
        if _is_single_loop(f.graph):
            return f
        v1 = [v for v in range(f.graph.n_vertices)
              if f.graph.valence(v) == 1 and f.graph.group_at(v).is_trivial]
        if v1:
            f = commit(valence_one_homotopy(f, v1[0]), f)
            continue
        filt = maximal_filtration(f)
        ok, _ = bounded_check(f, filt)
        v2 = [v for v in range(f.graph.n_vertices)
              if f.graph.valence(v) == 2 and f.graph.group_at(v).is_trivial
              and f.graph.star(v)[0] >> 1 != f.graph.star(v)[1] >> 1]
        if not v2:
            return f
        base = pf_sequence(filt)
        weights = _pf_weights(transition_matrix(f).rows)
        chosen = None
        fallback = None
        for v in v2:
            oe_a, oe_b = f.graph.star(v)
            first, second = (oe_a, oe_b) \
                if weights[oe_a >> 1] >= weights[oe_b >> 1] else (oe_b, oe_a)
            for choice in (first, second):
                r = valence_two_homotopy(f, v, choice >> 1)
                if fallback is None:
                    fallback = r
                after = r.after
                while after.has_trivial_image():
                    rr = collapse_pretrivial(after)
                    if rr is None:
                        break
                    after = rr.after
                if pf_compare(pf_sequence(maximal_filtration(after)),
                              base) <= 0:
                    chosen = r
                    break
            if chosen is not None:
                break
        if chosen is None:
            if ok:
                return f  # bounded; unsafe valence-two vertices may stay
            chosen = fallback  # forced removal to restore boundedness
        f = commit(chosen, f)


def relative_train_track_algorithm(f, budget=10000):
    """Improve a topological representative to a relative train track map.

    Restores turn confinement by invariant core subdivision and connecting
    paths by folding them away, then runs the eigenvalue descent on any
    stratum whose edge images cross an illegal stratum turn; pf decreases
    strictly at every such repair round.
    """
    trace = []
    steps = [0]

    def log(kind, params, pf):
        steps[0] += 1
        if steps[0] > budget:
            raise BudgetExceeded("move budget exhausted", trace)
        trace.append(TraceEntry(steps[0], kind, params, pf))

    def commit(receipt, _old):
        rep = receipt.after
        pf = []
        if not rep.has_trivial_image():
            pf = list(pf_sequence(maximal_filtration(rep)))
        log(receipt.kind, receipt.params, pf)
        return rep

    f = _make_bounded(f, trace, commit)
    current_pf = pf_sequence(maximal_filtration(f))
    log("start", "", list(current_pf))
    while True:
        filt = maximal_filtration(f)
        progressed = False
        for r in reversed(filt.eg_indices()):
            ok1, _ = _eg1_check(f, filt, r)
            if not ok1:
                receipt = invariant_core_subdivision(
                    f, filt.strata[r].edges)
                if not receipt.is_noop:
                    new_f = receipt.after
                    new_pf = pf_sequence(maximal_filtration(new_f))
                    assert pf_compare(new_pf, current_pf) == 0, \
                        "core subdivision must preserve pf"
                    f = commit(receipt, f)
                    progressed = True
                    break
            alpha, _ = _eg2_witness(f, filt, r)
            if alpha is not None:
                receipt = collapse_connecting_path(f, alpha)
                f = commit(receipt, f)
                new_pf = pf_sequence(maximal_filtration(f))
                assert pf_compare(new_pf, current_pf) <= 0
                current_pf = new_pf
                progressed = True
                break
        if progressed:
            continue
        offender = None
        for r in reversed(filt.eg_indices()):
            ok3, w3 = _eg3_check(f, filt, r)
            if not ok3:
                offender = w3
                break
        if offender is None:
            report = check_rtt(f, filt)
            if report.ok:
                log("done", "", list(current_pf))
                return f, filt, trace
            raise DescentStuck("checker failed after restoration")
        _, _, turn = offender
        target = _walk_to_predegenerate(f, turn)
        receipt = fold_turn(f, target)
        f = receipt.after
        while f.has_trivial_image():
            r2 = collapse_pretrivial(f)
            if r2 is None:
                break
            f = r2.after
        f = _make_bounded(f, trace, lambda rec, old: rec.after)
        new_pf = pf_sequence(maximal_filtration(f))
        cmp = pf_compare(new_pf, current_pf)
        if receipt.tightened:
            if cmp >= 0:
                raise DescentStuck("pf failed to decrease at a repair round")
            current_pf = new_pf
        else:
            if cmp > 0:
                raise DescentStuck("pf increased across a pure fold")
            current_pf = new_pf
        log(receipt.kind, receipt.params, list(current_pf))

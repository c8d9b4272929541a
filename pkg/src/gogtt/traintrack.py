"""Thistle construction, representatives from automorphism data, and the
irreducible-case train track algorithm with its reducibility detector.
"""
from __future__ import annotations

from .errors import (BudgetExceeded, DescentStuck, EmptySignature,
                     InconsistentVertexImage, Malformed, Reducible)
from .eigen import (AlgebraicReal, matrix_is_irreducible, pf_eigenvalue,
                    poly_str)
from .groups import GroupMap, GroupOracle
from .paths import (EdgePath, GraphOfGroups, SubgraphOfGroups, concat_paths,
                    cyclic_reduce, fwd, tighten)
from .rep import (GraphMap, TopRep, Turn, is_train_track, transition_matrix,
                  turn_image)
from .moves import (collapse, collapse_invariant_forest, collapse_pretrivial,
                    find_max_invariant_forest, fold_turn, identity_receipt,
                    tighten_rep, valence_one_homotopy, valence_two_homotopy)


def build_thistle(oracles, petals, vertex_names=None, edge_names=None):
    """One trivial star vertex, a prickle per oracle, `petals` petal loops."""
    oracles = list(oracles)
    if not oracles and petals == 0:
        raise EmptySignature("a thistle needs a prickle or a petal")
    groups = [GroupOracle.trivial()] + oracles
    if vertex_names is None:
        vertex_names = ["star"] + [f"v{o.name}" for o in oracles]
    edges = [(i + 1, 0) for i in range(len(oracles))]
    edges += [(0, 0)] * petals
    if edge_names is None:
        edge_names = [f"e{i + 1}" for i in range(len(oracles))]
        edge_names += [f"x{j + 1}" for j in range(petals)]
    graph = GraphOfGroups(groups, edges, vertex_names, edge_names)
    marking = GraphMap.identity(graph)
    return graph, marking


class AutomorphismInput:
    """A free-product automorphism by generator images.

    Words are sequences of tokens: ``('el', i, g)`` for element g of the
    i-th factor, ``('pet', j, s)`` for the j-th petal letter with sign s.
    ``factor_images[i]`` lists (generator id, word) pairs; ``petal_images``
    has one word per petal.
    """

    __slots__ = ("oracles", "petals", "factor_images", "petal_images")

    def __init__(self, oracles, petals, factor_images, petal_images):
        self.oracles = tuple(oracles)
        self.petals = int(petals)
        self.factor_images = tuple(tuple(fi) for fi in factor_images)
        self.petal_images = tuple(tuple(w) for w in petal_images)
        if len(self.factor_images) != len(self.oracles):
            raise Malformed("one image list per factor is required")
        if len(self.petal_images) != self.petals:
            raise Malformed("one image word per petal is required")


def word_to_loop(thistle, n_factors, word):
    """A based loop at the star realizing a word."""
    out = EdgePath.point(thistle, 0)
    for tok in word:
        if tok[0] == "el":
            _, i, g = tok
            if not (0 <= i < n_factors):
                raise Malformed(f"factor index {i} out of range")
            e = fwd(i)
            back = EdgePath.of_edge(thistle, e ^ 1, g1=g)
            fore = EdgePath.of_edge(thistle, e)
            out = concat_paths(out, concat_paths(back, fore))
        elif tok[0] == "pet":
            _, j, s = tok
            e = fwd(n_factors + j)
            if not (0 <= j < thistle.n_edges - n_factors):
                raise Malformed(f"petal index {j} out of range")
            out = concat_paths(out, EdgePath.of_edge(thistle,
                                                     e if s > 0 else e ^ 1))
        else:
            raise Malformed(f"unknown token {tok!r}")
    return tighten(out)


def rep_from_automorphism(auto):
    """A topological representative on the thistle, identity marking.

    Each factor's generator images must be a common conjugate of one target
    factor; the conjugator becomes the prickle image and the element map the
    vertex isomorphism.
    """
    thistle, marking = build_thistle(list(auto.oracles), auto.petals)
    n = len(auto.oracles)
    vertex_map = [0] * thistle.n_vertices
    homs = [GroupMap.identity(thistle.group_at(0))] + [None] * n
    images = [None] * thistle.n_edges
    targets = []
    for i, oracle in enumerate(auto.oracles):
        pairs = auto.factor_images[i]
        if not pairs:
            raise Malformed(f"factor {oracle.name} has no generator images")
        table = {0: 0}
        conj = None
        target = None
        for (gen, word) in pairs:
            loop = word_to_loop(thistle, n, word)
            core, w = cyclic_reduce(loop)
            if core.n_edges != 0 or core.g0 == 0:
                raise InconsistentVertexImage(
                    f"image of a generator of {oracle.name} is not elliptic")
            j = core.start - 1  # prickle vertices are 1..n
            if j < 0:
                raise InconsistentVertexImage(
                    "generator image lands at the star vertex")
            if target is None:
                target, conj = j, w
            elif target != j:
                raise InconsistentVertexImage(
                    f"generators of {oracle.name} map to different factors")
            z = tighten(concat_paths(conj.reverse(), w))
            if z.n_edges != 0:
                raise InconsistentVertexImage(
                    f"generators of {oracle.name} have inconsistent "
                    "conjugators")
            tgt_oracle = auto.oracles[target]
            table[gen] = tgt_oracle.conjugate(z.g0, core.g0)
        # extend multiplicatively over the finite source
        src = oracle
        tgt = auto.oracles[target]
        changed = True
        while changed:
            changed = False
            for a in list(table):
                for b in list(table):
                    c = src.mul(a, b)
                    img = tgt.mul(table[a], table[b])
                    if c not in table:
                        table[c] = img
                        changed = True
                    elif table[c] != img:
                        raise InconsistentVertexImage(
                            f"generator images of {oracle.name} are not a "
                            "homomorphism")
        if len(table) != src.size:
            raise InconsistentVertexImage(
                f"generators given for {oracle.name} do not generate it")
        homs[i + 1] = GroupMap(src, tgt, tuple(table[a]
                                               for a in range(src.size)))
        if not homs[i + 1].is_iso:
            raise InconsistentVertexImage(
                f"factor {oracle.name} does not map onto its target factor")
        vertex_map[i + 1] = target + 1
        targets.append(target)
        prickle_img = tighten(conj.reverse())
        if prickle_img.is_point:
            raise InconsistentVertexImage(
                f"prickle image for {oracle.name} is trivial")
        images[i] = prickle_img
    if len(set(targets)) != len(targets):
        raise InconsistentVertexImage("two factors map to the same factor")
    for j, word in enumerate(auto.petal_images):
        loop = word_to_loop(thistle, n, word)
        if loop.is_point:
            raise Malformed(f"petal {j} has a trivial image word")
        images[n + j] = loop
    return TopRep(thistle, vertex_map, homs, images,
                  marking=marking, marking_inv=GraphMap.identity(thistle))


# -- normalization -------------------------------------------------------------


def _pf_weights(rows):
    """Approximate Perron eigenvector by power iteration (guidance only)."""
    size = len(rows)
    v = [1.0] * size
    for _ in range(300):
        w = [sum(rows[i][j] * v[j] for j in range(size)) for i in range(size)]
        s = sum(w) or 1.0
        v = [x / s for x in w]
    return v


def _is_single_loop(graph):
    return graph.n_edges == 1 and graph.edges[0][0] == graph.edges[0][1]


def normalize(f, trace=None):
    """Collapse forests and remove inessential valence-one/-two vertices.

    Valence-two collapses are guided by the Perron eigenvector so the
    eigenvalue never increases; the single-loop graph is left alone.
    """
    receipts = []

    def commit(r):
        receipts.append(r)
        if trace is not None:
            trace.append(r)
        return r.after

    changed = True
    while changed:
        changed = False
        r = collapse_pretrivial(f)
        if r is not None:
            f = commit(r)
            changed = True
            continue
        if _is_single_loop(f.graph):
            break
        v1 = [v for v in range(f.graph.n_vertices)
              if f.graph.valence(v) == 1 and f.graph.group_at(v).is_trivial]
        if v1:
            f = commit(valence_one_homotopy(f, v1[0]))
            changed = True
            continue
        v2 = [v for v in range(f.graph.n_vertices)
              if f.graph.valence(v) == 2 and f.graph.group_at(v).is_trivial
              and f.graph.star(v)[0] >> 1 != f.graph.star(v)[1] >> 1]
        if v2:
            v = v2[0]
            oe_a, oe_b = f.graph.star(v)
            mat = transition_matrix(f)
            weights = _pf_weights(mat.rows)
            wa, wb = weights[oe_a >> 1], weights[oe_b >> 1]
            first, second = (oe_a, oe_b) if wa >= wb else (oe_b, oe_a)
            lam_before = None
            if matrix_is_irreducible(mat.rows):
                lam_before = pf_eigenvalue(mat.rows)
            tried = []
            for choice in (first, second):
                r = valence_two_homotopy(f, v, choice >> 1)
                tried.append(r)
                if lam_before is None:
                    break
                rows = transition_matrix(r.after).rows
                if not matrix_is_irreducible(rows):
                    break
                if pf_eigenvalue(rows).compare(lam_before) <= 0:
                    break
            else:
                raise DescentStuck(
                    "every valence-two collapse increases the eigenvalue")
            f = commit(tried[-1])
            changed = True
            continue
        forest = find_max_invariant_forest(f)
        if not forest.is_empty():
            f = commit(collapse(f, forest, kind="collapse_forest"))
            changed = True
            continue
    eta, betti, _, bound = f.graph.invariants()
    if f.graph.n_edges > max(bound, 0) and not _is_single_loop(f.graph):
        raise AssertionError("normalized graph exceeds the edge bound")
    return f, receipts


# -- reducibility --------------------------------------------------------------


def _closure(f, seed):
    out = set(seed)
    frontier = list(seed)
    while frontier:
        e = frontier.pop()
        for (oe, _) in f.edge_images[e].steps:
            d = oe >> 1
            if d not in out:
                out.add(d)
                frontier.append(d)
    return out


def find_reduction(f):
    """The smallest proper nontrivial invariant subgraph, or None.

    None together with matrix irreducibility certifies irreducibility of
    this representative.
    """
    n = f.graph.n_edges
    best = None
    for e in range(n):
        cl = _closure(f, {e})
        if len(cl) == n:
            continue
        key = (len(cl), tuple(sorted(cl)))
        if best is None or key < best[0]:
            best = (key, cl)
    if best is None:
        return None
    return SubgraphOfGroups(f.graph, best[1])


# -- the train track algorithm --------------------------------------------------


class TraceEntry:
    """One committed pipeline step: the move and the eigenvalue data after."""

    __slots__ = ("step", "kind", "params", "pf")

    def __init__(self, step, kind, params, pf):
        self.step = step
        self.kind = kind
        self.params = params
        self.pf = tuple(pf)

    def format(self):
        polys = ",".join(poly_str(lam.minimal_polynomial()) for lam in self.pf)
        return f"{self.step} {self.kind} {self.params} pf=[{polys}]"

    def __repr__(self):
        return f"TraceEntry({self.format()})"


def _walk_to_predegenerate(f, turn):
    """Follow the Df orbit of an illegal turn to its last nondegenerate
    stage."""
    seen = set()
    cur = turn
    while True:
        nxt = turn_image(f, cur)
        if nxt.is_degenerate:
            return cur
        if nxt.pair in seen:
            raise DescentStuck("turn orbit closed without degenerating")
        seen.add(nxt.pair)
        cur = nxt


def _pf_of(rep):
    """Current eigenvalue data for trace lines: [] for permutation maps."""
    if rep.graph.n_edges == 0:
        return []
    mat = transition_matrix(rep)
    if not mat.is_irreducible():
        return []
    lam = pf_eigenvalue(mat.rows)
    if lam.equals(AlgebraicReal.from_rational(1)):
        return []
    return [lam]


def train_track_algorithm(f, budget=10000):
    """Descend to a train track map (Perron-Frobenius eigenvalue strictly
    decreasing at every tightening fold); raises Reducible with a witness
    when the normalized representative is reducible.
    """
    trace = []
    steps = [0]

    def log(kind, params, pf):
        steps[0] += 1
        if steps[0] > budget:
            raise BudgetExceeded("move budget exhausted", trace)
        trace.append(TraceEntry(steps[0], kind, params, pf))

    f, receipts = normalize(f)
    for r in receipts:
        log(r.kind, r.params, _pf_of(r.after))
    if f.graph.n_edges == 0:
        log("done", "edgeless", [])
        return f, trace
    mat = transition_matrix(f)
    red = find_reduction(f)
    if red is not None or not mat.is_irreducible():
        if red is None:
            red = find_reduction(f)
        raise Reducible("representative is reducible", witness=red)
    lam = pf_eigenvalue(mat.rows)
    log("start", "", _pf_of(f))
    while True:
        if lam.equals(AlgebraicReal.from_rational(1)):
            break
        report = is_train_track(f)
        if report.ok:
            break
        edge, pos, turn = report.offenders[0]
        target = _walk_to_predegenerate(f, turn)
        receipt = fold_turn(f, target)
        f_next, cleanup = normalize(receipt.after)
        mat = transition_matrix(f_next)
        if not mat.is_irreducible():
            raise Reducible("descent produced a reducible representative",
                            witness=find_reduction(f_next))
        new_lam = pf_eigenvalue(mat.rows)
        cmp = new_lam.compare(lam)
        kinds = {r.kind for r in cleanup}
        strict = (receipt.tightened or "collapse_pretrivial" in kinds
                  or "valence_one" in kinds)
        if strict:
            if cmp >= 0:
                raise DescentStuck(
                    "eigenvalue failed to decrease after a tightening fold")
        elif kinds:
            if cmp > 0:
                raise DescentStuck("eigenvalue increased during cleanup")
        elif cmp != 0:
            raise DescentStuck("eigenvalue moved across a pure fold")
        f = f_next
        pf_now = _pf_of(f)
        log(receipt.kind, receipt.params, pf_now)
        for r in cleanup:
            log(r.kind, r.params, pf_now)
        lam = new_lam
    log("done", f"lambda={lam.decimal(20)}", _pf_of(f))
    return f, trace

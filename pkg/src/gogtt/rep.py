"""Topological representatives: maps of graphs of groups, the path action,
turns, the derivative map, legality, train track verification, transition
matrices, and outer-class comparison of marked representatives.
"""
from __future__ import annotations

from .errors import (IterationCapExceeded, MarkingMissing, NotIrreducible,
                     OracleMismatch)
from .eigen import (AlgebraicReal, char_poly, matrix_is_aperiodic,
                    matrix_is_irreducible, pf_eigenvalue,
                    strongly_connected_components, support_successors)
from .groups import GroupMap
from .paths import (EdgePath, SubgraphOfGroups, concat_paths, cyclic_reduce,
                    cyclic_tighten, edge_index, fwd, loops_conjugate,
                    min_rotation, primitive_period, rev, tighten, tree_path)


class GraphMap:
    """A map of graphs of groups sending vertices to vertices and edges to
    tight (possibly trivial) edge paths, with an injective vertex-group
    homomorphism over each vertex.

    This is the shared machinery for topological representatives, markings,
    and the identifying projections produced by elementary moves.
    """

    __slots__ = ("domain", "codomain", "vertex_map", "vertex_homs",
                 "edge_images")

    def __init__(self, domain, codomain, vertex_map, vertex_homs,
                 edge_images, tighten_images=False, allow_untight=False):
        vertex_map = tuple(vertex_map)
        vertex_homs = tuple(vertex_homs)
        edge_images = tuple(edge_images)
        if len(vertex_map) != domain.n_vertices:
            raise ValueError("vertex map has wrong length")
        if len(vertex_homs) != domain.n_vertices:
            raise ValueError("vertex hom list has wrong length")
        if len(edge_images) != domain.n_edges:
            raise ValueError("edge image list has wrong length")
        if tighten_images:
            edge_images = tuple(tighten(p) for p in edge_images)
        for v, w in enumerate(vertex_map):
            if not (0 <= w < codomain.n_vertices):
                raise ValueError("vertex image out of range")
            hom = vertex_homs[v]
            if hom.source is not domain.group_at(v):
                raise OracleMismatch(
                    f"vertex hom at {domain.vertex_names[v]} has wrong source")
            if hom.target is not codomain.group_at(w):
                raise OracleMismatch(
                    f"vertex hom at {domain.vertex_names[v]} has wrong target")
        for i, p in enumerate(edge_images):
            if p.graph is not codomain:
                raise ValueError("edge image lives in the wrong graph")
            u, v = domain.edges[i]
            if p.start != vertex_map[u] or p.end != vertex_map[v]:
                raise ValueError(
                    f"image of edge {domain.edge_names[i]} has wrong endpoints")
            if not allow_untight and not p.is_tight():
                raise ValueError(
                    f"image of edge {domain.edge_names[i]} is not tight")
        self.domain = domain
        self.codomain = codomain
        self.vertex_map = vertex_map
        self.vertex_homs = vertex_homs
        self.edge_images = edge_images

    # -- constructors ----------------------------------------------------

    @classmethod
    def identity(cls, graph):
        return cls(graph, graph, range(graph.n_vertices),
                   tuple(GroupMap.identity(g) for g in graph.groups),
                   tuple(EdgePath.of_edge(graph, fwd(i))
                         for i in range(graph.n_edges)))

    # -- the action ------------------------------------------------------

    def image_of_oedge(self, oe):
        img = self.edge_images[oe >> 1]
        return img if (oe & 1) == 0 else img.reverse()

    def apply_vertex(self, v):
        return self.vertex_map[v]

    def apply_element(self, v, g):
        return self.vertex_homs[v].apply(g)

    def apply(self, path):
        """The tightened image path: substitute edges, map elements."""
        if path.graph is not self.domain:
            raise ValueError("path does not live in the domain")
        out = EdgePath.point(self.codomain, self.vertex_map[path.start],
                             self.apply_element(path.start, path.g0))
        for (oe, g) in path.steps:
            out = concat_paths(out, self.image_of_oedge(oe))
            v = path.graph.term(oe)
            out = concat_paths(
                out, EdgePath.point(self.codomain, self.vertex_map[v],
                                    self.apply_element(v, g)))
        return tighten(out)

    def compose(self, inner):
        """self after inner."""
        if inner.codomain is not self.domain:
            raise ValueError("maps do not compose")
        vm = tuple(self.vertex_map[w] for w in inner.vertex_map)
        homs = tuple(self.vertex_homs[inner.vertex_map[v]].compose(h)
                     for v, h in enumerate(inner.vertex_homs))
        imgs = tuple(self.apply(p) for p in inner.edge_images)
        return GraphMap(inner.domain, self.codomain, vm, homs, imgs)

    def direction_image(self, d):
        """Image of a direction; the derivative map on directions.

        For a direction (g, e) at v = tau(e), the image path of e ends with
        an edge a followed by a trailing element h; the image direction is
        (f_v(g) * h^-1, a).  The inverse makes the rule consistent with
        path-level cancellation: a turn maps to a degenerate turn exactly
        when the images of paths crossing it cancel at the junction.
        """
        g, oe = d
        v = self.domain.term(oe)
        img = self.image_of_oedge(oe)
        if img.is_point:
            raise ValueError("derivative undefined over a collapsed edge")
        last_oe, last_g = img.steps[-1]
        oracle = self.codomain.group_at(img.end)
        new_g = oracle.mul(self.apply_element(v, g), oracle.inv(last_g))
        return (new_g, last_oe)

    # -- structure tests ---------------------------------------------------

    def is_self_map(self):
        return self.domain is self.codomain

    def has_trivial_image(self):
        return any(p.is_point for p in self.edge_images)

    def __repr__(self):
        return (f"GraphMap({self.domain!r} -> {self.codomain!r})")


class TopRep(GraphMap):
    """A topological representative: a self map with nontrivial tight edge
    images, optionally marked by a homotopy equivalence from a base thistle
    (with its inverse, for outer-class checks).

    Vertex maps over nontrivial vertex groups must be isomorphisms (factors
    of a free product are permuted); trivial vertices may map into anything.
    ``allow_trivial_images`` admits the transient states produced mid-move,
    before pretrivial edges are collapsed away.
    """

    __slots__ = ("marking", "marking_inv", "loose")

    def __init__(self, graph, vertex_map, vertex_homs, edge_images,
                 marking=None, marking_inv=None, tighten_images=False,
                 allow_trivial_images=False, allow_untight=False):
        super().__init__(graph, graph, vertex_map, vertex_homs, edge_images,
                         tighten_images=tighten_images,
                         allow_untight=allow_untight)
        self.loose = bool(allow_trivial_images)
        if not self.loose:
            for i, p in enumerate(self.edge_images):
                if p.is_point:
                    raise ValueError(
                        f"image of edge {graph.edge_names[i]} is trivial")
        for v, hom in enumerate(self.vertex_homs):
            if not hom.source.is_trivial and not hom.is_iso:
                raise ValueError(
                    f"vertex map at {graph.vertex_names[v]} is not an iso")
        if (marking is None) != (marking_inv is None):
            raise ValueError("marking and its inverse come together")
        if marking is not None:
            if marking.codomain is not graph or marking_inv.domain is not graph:
                raise ValueError("marking endpoints do not match the carrier")
            if marking.domain is not marking_inv.codomain:
                raise ValueError("marking inverse has the wrong base")
        self.marking = marking
        self.marking_inv = marking_inv

    @property
    def graph(self):
        return self.domain

    def with_marking(self, marking, marking_inv):
        return TopRep(self.graph, self.vertex_map, self.vertex_homs,
                      self.edge_images, marking=marking,
                      marking_inv=marking_inv,
                      allow_trivial_images=self.loose)

    def same_action(self, other):
        """Structurally equal carrier, vertex data and images (markings
        ignored); graphs may be separate parses of the same data."""
        return (self.graph.edges == other.graph.edges
                and tuple(g.size for g in self.graph.groups)
                == tuple(g.size for g in other.graph.groups)
                and self.vertex_map == other.vertex_map
                and all(a.table == b.table for a, b in
                        zip(self.vertex_homs, other.vertex_homs))
                and self.edge_images == other.edge_images)


def apply_rep(f, p):
    """f_sharp: substitute edge images and map elements, then tighten."""
    return f.apply(p)


# -- transition matrices ------------------------------------------------------


class TransitionMatrix:
    """Nonnegative integer matrix counting, per edge, how many times each
    image crosses each edge in either direction.  Entry [i][j] counts edge i
    in the image of edge j.
    """

    __slots__ = ("rows",)

    def __init__(self, rows):
        self.rows = tuple(tuple(int(x) for x in row) for row in rows)

    @classmethod
    def of_rep(cls, f):
        n = f.domain.n_edges
        cols = [p.edge_counts(n) for p in f.edge_images]
        return cls(tuple(tuple(cols[j][i] for j in range(n))
                         for i in range(n)))

    @property
    def size(self):
        return len(self.rows)

    def entry(self, i, j):
        return self.rows[i][j]

    def is_irreducible(self):
        return matrix_is_irreducible(self.rows)

    def is_aperiodic(self):
        return matrix_is_aperiodic(self.rows)

    def char_poly(self):
        return char_poly(self.rows)

    def pf(self):
        return pf_eigenvalue(self.rows)

    def submatrix(self, idx):
        idx = list(idx)
        return TransitionMatrix(tuple(tuple(self.rows[i][j] for j in idx)
                                      for i in idx))

    def delete(self, idx):
        keep = [i for i in range(self.size) if i not in set(idx)]
        return self.submatrix(keep)

    def __eq__(self, other):
        return isinstance(other, TransitionMatrix) and self.rows == other.rows

    def __repr__(self):
        return "TransitionMatrix(" + "; ".join(
            " ".join(str(x) for x in row) for row in self.rows) + ")"


def transition_matrix(f):
    return TransitionMatrix.of_rep(f)


# -- directions and turns -----------------------------------------------------


def directions_at(graph, v):
    """All (element, oriented edge) directions at v, in a fixed order."""
    oracle = graph.group_at(v)
    return tuple((g, oe) for oe in graph.star(v) for g in range(oracle.size))


def canonical_turn(graph, d1, d2):
    """Canonical form of an unordered direction pair at a common vertex.

    Normalizes by the diagonal left action of the vertex group so that one
    entry carries the identity; of the two such normalizations the
    lexicographically smaller ordered pair is stored.
    """
    v = graph.term(d1[1])
    if graph.term(d2[1]) != v:
        raise ValueError("turn directions must share a vertex")
    oracle = graph.group_at(v)
    candidates = []
    for (g, _) in (d1, d2):
        h = oracle.inv(g)
        moved = tuple(sorted(((oracle.mul(h, x), oe) for (x, oe) in (d1, d2)),
                             key=lambda t: (t[1], t[0])))
        candidates.append(moved)
    return min(candidates)


class Turn:
    """An unordered pair of directions at a vertex, stored canonically."""

    __slots__ = ("graph", "vertex", "pair")

    def __init__(self, graph, d1, d2):
        self.graph = graph
        self.vertex = graph.term(d1[1])
        self.pair = canonical_turn(graph, d1, d2)

    @property
    def is_degenerate(self):
        return self.pair[0] == self.pair[1]

    def __eq__(self, other):
        return (isinstance(other, Turn) and self.graph is other.graph
                and self.pair == other.pair)

    def __hash__(self):
        return hash(self.pair)

    def __repr__(self):
        graph = self.graph

        def fmt(d):
            g, oe = d
            name = graph.group_at(self.vertex).element_name(g)
            return f"({name},{graph.oedge_name(oe)})"

        return "Turn{" + fmt(self.pair[0]) + "," + fmt(self.pair[1]) + "}"


def derivative(f, d):
    """Df on directions; accepts and returns (element, oriented edge)."""
    return f.direction_image(d)


def turn_image(f, t):
    d1 = f.direction_image(t.pair[0])
    d2 = f.direction_image(t.pair[1])
    return Turn(f.codomain, d1, d2)


def turns_taken(f, p):
    """Turns crossed at the interior vertices of a tight path."""
    graph = p.graph
    out = []
    for i in range(len(p.steps) - 1):
        (oe, g) = p.steps[i]
        (nxt, _) = p.steps[i + 1]
        out.append(Turn(graph, (0, oe), (g, nxt ^ 1)))
    return out


def is_turn_legal(f, t, _cache=None):
    """Iterate Df on canonical turns; illegal iff some iterate degenerates.

    The direction set is finite, so the orbit either hits a degenerate turn
    or closes into a cycle of nondegenerate turns.
    """
    graph = f.domain
    cap = 4 + sum(len(directions_at(graph, v)) ** 2
                  for v in range(graph.n_vertices))
    seen = set()
    cur = t
    for _ in range(cap):
        if cur.is_degenerate:
            if _cache is not None:
                for s in seen:
                    _cache[s] = False
            return False
        if _cache is not None and cur.pair in _cache:
            verdict = _cache[cur.pair]
            for s in seen:
                _cache[s] = verdict
            return verdict
        if cur.pair in seen:
            if _cache is not None:
                for s in seen:
                    _cache[s] = True
            return True
        seen.add(cur.pair)
        cur = turn_image(f, cur)
    raise IterationCapExceeded("turn orbit did not close")


class TrainTrackReport:
    """Outcome of a train track check with offending turns as certificate."""

    __slots__ = ("ok", "offenders")

    def __init__(self, ok, offenders):
        self.ok = ok
        self.offenders = tuple(offenders)

    def __bool__(self):
        return self.ok


def is_train_track(f):
    """True iff every turn taken by every edge image is legal.

    The certificate lists (edge index, position, turn) triples for each
    illegal turn crossed, in scan order.
    """
    cache = {}
    offenders = []
    for i in range(f.domain.n_edges):
        img = f.edge_images[i]
        for pos, t in enumerate(turns_taken(f, img)):
            if not is_turn_legal(f, t, cache):
                offenders.append((i, pos + 1, t))
    return TrainTrackReport(not offenders, offenders)


# -- outer class verification -------------------------------------------------


def thistle_basis_loops(thistle):
    """Basis loops of a thistle: petals, and ~e.g.e per prickle generator.

    Generators of a table vertex group are taken to be all of its
    non-identity elements; that always generates and keeps the check
    exhaustive.
    """
    loops = []
    for i in range(thistle.n_edges):
        u, v = thistle.edges[i]
        if u == v:
            loops.append(EdgePath.of_edge(thistle, fwd(i)))
    for i in range(thistle.n_edges):
        u, v = thistle.edges[i]
        if u == v:
            continue
        oracle = thistle.group_at(u)
        gens = [oracle.generator_id()] if oracle.kind == "cyclic" else \
            list(range(1, oracle.size))
        for g in gens:
            back = EdgePath.of_edge(thistle, rev(fwd(i)), g1=g)
            out = EdgePath.of_edge(thistle, fwd(i))
            loops.append(tighten(concat_paths(back, out)))
    return loops


def _connecting_path(graph, x, y):
    """A fixed tight path from x to y (breadth-first, deterministic)."""
    return tree_path(graph, set(range(graph.n_edges)), x, y)


def induced_basis_images(f):
    """Images of the base thistle's basis loops under the induced outer
    automorphism, as based loops at the thistle's star vertex."""
    if f.marking is None:
        raise MarkingMissing("outer-class data needs a marked representative")
    base = f.marking.domain
    star = 0
    out = []
    for loop in thistle_basis_loops(base):
        transported = f.marking.apply(loop)
        mapped = f.apply(transported)
        back = f.marking_inv.apply(mapped)
        q = _connecting_path(base, star, back.start)
        based = tighten(concat_paths(concat_paths(q, back), q.reverse()))
        out.append(based)
    return out


def _loop_conj_data(loop):
    """(kind, data, w) with loop = w . core . ~w rel basepoint."""
    core, w = cyclic_reduce(loop)
    if core.is_point:
        return ("el", core, w)
    return ("cyc", core, w)


def _token_loop(graph, core):
    """The loop obtained by pushing core's leading element around the end."""
    toks = list(core.steps)
    last_oe, last_g = toks[-1]
    toks[-1] = (last_oe, graph.group_at(core.start).mul(last_g, core.g0))
    return EdgePath(graph, core.start, 0, toks)


def _conjugator_candidates(graph, uA, uB, power_bound):
    """Paths c with c . uB . ~c potentially equal to uA, complete for the
    first nontrivial pair (centralizer powers swept up to power_bound)."""
    kindA, coreA, wA = _loop_conj_data(uA)
    kindB, coreB, wB = _loop_conj_data(uB)
    if kindA != kindB:
        return []
    if kindA == "el":
        if coreA.start != coreB.start:
            return []
        oracle = graph.group_at(coreA.start)
        cands = []
        for k in range(oracle.size):
            if oracle.mul(oracle.mul(k, coreB.g0), oracle.inv(k)) == coreA.g0:
                mid = EdgePath.point(graph, coreA.start, k)
                cands.append(tighten(concat_paths(concat_paths(wA, mid),
                                                  wB.reverse())))
        return cands
    # hyperbolic: align rotations of the cyclic words
    tA = tuple(_token_loop(graph, coreA).steps)
    tB = tuple(_token_loop(graph, coreB).steps)
    if len(tA) != len(tB) or min_rotation(tA) != min_rotation(tB):
        return []
    loopA = _token_loop(graph, coreA)
    loopB = _token_loop(graph, coreB)
    # uA = wA.gA.loopA-ish: fold leading elements into the conjugator
    headA = EdgePath.point(graph, coreA.start, coreA.g0)
    headB = EdgePath.point(graph, coreB.start, coreB.g0)
    # wA' conjugates the token loop to uA: uA = wA' . loopA . ~wA'
    # since core = g0 . (token loop conjugated): core = headA.loopA.~headA
    wA2 = tighten(concat_paths(wA, headA))
    wB2 = tighten(concat_paths(wB, headB))
    n = len(tA)
    d = primitive_period(tA)
    root = EdgePath(graph, loopA.start, 0, tA[:d])
    cands = []
    rotations = [r for r in range(n)
                 if all(tB[(r + i) % n] == tA[i] for i in range(n))]
    for r in rotations:
        # loopA = ~X . loopB . X for X = prefix of loopB of length r
        X = EdgePath(graph, loopB.start, 0, tB[:r]) if r else \
            EdgePath.point(graph, loopB.start)
        base = tighten(concat_paths(concat_paths(wA2, X.reverse()),
                                    wB2.reverse()))
        power = EdgePath.point(graph, root.start)
        for m in range(power_bound + 1):
            shift_pos = tighten(concat_paths(concat_paths(wA2, power), wA2.reverse()))
            cands.append(tighten(concat_paths(shift_pos, base)))
            if m:
                shift_neg = tighten(concat_paths(
                    concat_paths(wA2, power.reverse()), wA2.reverse()))
                cands.append(tighten(concat_paths(shift_neg, base)))
            power = tighten(concat_paths(power, root))
    return cands


def _simultaneous_conjugator(graph, pairs):
    """A path c with c . uB . ~c = uA for every pair, or None."""
    pairs = [(tighten(a), tighten(b)) for (a, b) in pairs]
    if all(a == b for (a, b) in pairs):
        return EdgePath.point(graph, pairs[0][0].start if pairs else 0)
    for (a, b) in pairs:
        if not loops_conjugate(a, b):
            return None
    total = sum(a.n_edges + b.n_edges for (a, b) in pairs) + 4
    seed = next(((a, b) for (a, b) in pairs if not a.is_identity), None)
    if seed is None:
        return None
    for c in _conjugator_candidates(graph, seed[0], seed[1], total):
        ok = True
        for (a, b) in pairs:
            conj = tighten(concat_paths(concat_paths(c, b), c.reverse()))
            if conj != a:
                ok = False
                break
        if ok:
            return c
    return None


def verify_outer_class(fA, fB):
    """Whether two marked representatives over the same base thistle induce
    the same outer automorphism.

    Transports each basis loop of the base through each marking, applies the
    representative, transports back, and looks for a single conjugator
    aligning the two families.
    """
    if fA.marking is None or fB.marking is None:
        raise MarkingMissing("both representatives need markings")
    baseA, baseB = fA.marking.domain, fB.marking.domain
    if baseA is not baseB:
        raise MarkingMissing("markings must share one base thistle")
    famA = induced_basis_images(fA)
    famB = induced_basis_images(fB)
    return _simultaneous_conjugator(baseA, list(zip(famA, famB))) is not None


# -- isomorphism of representatives (for regression tests) -------------------


def _twist_variants(f, assignments):
    """Conjugate f by the twist sending each edge e to h(e)^-1 . e . g(e),
    with (h, g) the assigned elements at the two endpoints."""
    graph = f.graph

    def twist_map(signs):
        imgs = []
        for i in range(graph.n_edges):
            u, v = graph.edges[i]
            h, g = assignments[i]
            if signs < 0:
                h, g = graph.group_at(u).inv(h), graph.group_at(v).inv(g)
            lead = graph.group_at(u).inv(h)
            imgs.append(EdgePath(graph, u, lead, ((fwd(i), g),)))
        return GraphMap(graph, graph, range(graph.n_vertices),
                        tuple(GroupMap.identity(o) for o in graph.groups),
                        imgs)

    t = twist_map(+1)
    t_inv = twist_map(-1)
    composed = t.compose(f).compose(t_inv)
    return TopRep(graph, composed.vertex_map, composed.vertex_homs,
                  composed.edge_images)


def reps_isomorphic(f, g, up_to_twist=True):
    """Whether f and g agree after relabeling vertices/edges (orientation
    included) and, optionally, a twist of each edge."""
    import itertools

    gf, gg = f.graph, g.graph
    if gf.n_vertices != gg.n_vertices or gf.n_edges != gg.n_edges:
        return False
    vs_f = list(range(gf.n_vertices))
    vs_g = list(range(gg.n_vertices))
    for perm in itertools.permutations(vs_g):
        if any(not gf.group_at(v).same_table(gg.group_at(perm[v]))
               for v in vs_f):
            continue
        # match edges respecting endpoints, allowing orientation flips
        used = [False] * gg.n_edges
        emap = [None] * gf.n_edges

        def backtrack(i):
            if i == gf.n_edges:
                return _check_relabel(f, g, perm, emap, up_to_twist)
            u, v = gf.edges[i]
            for j in range(gg.n_edges):
                if used[j]:
                    continue
                uu, vv = gg.edges[j]
                for flip in (0, 1):
                    a, b = (uu, vv) if not flip else (vv, uu)
                    if perm[u] == a and perm[v] == b:
                        used[j] = True
                        emap[i] = (j, flip)
                        if backtrack(i + 1):
                            return True
                        used[j] = False
                        emap[i] = None
            return False

        if backtrack(0):
            return True
    return False


def _check_relabel(f, g, vperm, emap, up_to_twist):
    """Transport f along the relabeling and compare with g."""
    import itertools

    gf, gg = f.graph, g.graph

    def push_path(p):
        steps = []
        for (oe, gel) in p.steps:
            j, flip = emap[oe >> 1]
            noe = fwd(j) + ((oe & 1) ^ flip)
            steps.append((noe, gel))
        return EdgePath(gg, vperm[p.start], p.g0, steps)

    try:
        moved_vm = [None] * gg.n_vertices
        moved_homs = [None] * gg.n_vertices
        for v in range(gf.n_vertices):
            moved_vm[vperm[v]] = vperm[f.vertex_map[v]]
            src = gg.group_at(vperm[v])
            tgt = gg.group_at(vperm[f.vertex_map[v]])
            moved_homs[vperm[v]] = GroupMap(src, tgt, f.vertex_homs[v].table)
        ordered_imgs = [None] * gg.n_edges
        for i in range(gf.n_edges):
            j, flip = emap[i]
            src_img = f.edge_images[i] if not flip \
                else f.edge_images[i].reverse()
            ordered_imgs[j] = push_path(src_img)
        moved = TopRep(gg, moved_vm, moved_homs, ordered_imgs)
    except Exception:
        return False
    if moved.same_action(g):
        return True
    if not up_to_twist:
        return False
    ranges = []
    for i in range(gg.n_edges):
        u, v = gg.edges[i]
        ranges.append([(h, x) for h in range(gg.group_at(u).size)
                       for x in range(gg.group_at(v).size)])
    for assignment in itertools.product(*ranges):
        if all(pair == (0, 0) for pair in assignment):
            continue
        if _twist_variants(moved, assignment).same_action(g):
            return True
    return False

"""Elementary moves on topological representatives.

Every move returns a MoveReceipt holding the new representative together
with the identifying homotopy equivalence (and a homotopy inverse), so
markings can be transported and outer-class preservation verified.  Receipt
construction asserts that the numerical graph invariants survive and that
the move square commutes on a sample of loops.
"""
from __future__ import annotations

from fractions import Fraction

from .errors import (BothEndpointsNontrivial, FoldCollapsesLoop,
                     ImageNotTrivial, ImagesDisagree, NotCollapsible, NotEG,
                     NotInessentialValenceOne, NotInessentialValenceTwo,
                     NotInvariant, PositionOutOfRange)
from .eigen import is_permutation_matrix, matrix_is_irreducible
from .groups import GroupMap, GroupOracle
from .paths import (EdgePath, GraphOfGroups, SubgraphOfGroups, concat_paths,
                    fwd, is_collapsible_forest, tighten, tree_path)
from .rep import GraphMap, TopRep, Turn, TransitionMatrix, turn_image

CHECK_RECEIPTS = True


def _spanning_tree(graph):
    tree = set()
    seen = {0}
    frontier = [0]
    while frontier:
        v = frontier.pop(0)
        for oe in graph.star(v):
            w = graph.init(oe)
            if w not in seen:
                seen.add(w)
                tree.add(oe >> 1)
                frontier.append(w)
    return tree


def sample_loops(graph):
    """A generating family of tight based loops (petals and prickles)."""
    tree = _spanning_tree(graph)
    base = 0
    loops = []
    for i in range(graph.n_edges):
        if i in tree:
            continue
        u, v = graph.edges[i]
        p = tree_path(graph, tree, base, u)
        q = tree_path(graph, tree, v, base)
        mid = EdgePath.of_edge(graph, fwd(i))
        loops.append(tighten(concat_paths(concat_paths(p, mid), q)))
    for v in range(graph.n_vertices):
        oracle = graph.group_at(v)
        if oracle.is_trivial:
            continue
        p = tree_path(graph, tree, base, v)
        gens = [oracle.generator_id()] if oracle.kind == "cyclic" \
            else list(range(1, oracle.size))
        for g in gens:
            mid = EdgePath.point(graph, v, g)
            loops.append(tighten(concat_paths(concat_paths(p, mid),
                                              p.reverse())))
    return loops


class MoveReceipt:
    """A committed move: old and new representative plus the identifying
    homotopy equivalence in both directions."""

    __slots__ = ("kind", "params", "before", "after", "forward", "backward",
                 "detail", "tightened")

    def __init__(self, kind, params, before, after, forward, backward,
                 detail=(), tightened=False, check=None):
        self.kind = kind
        self.params = params
        self.before = before
        self.after = after
        self.forward = forward
        self.backward = backward
        self.detail = tuple(detail)
        self.tightened = tightened
        if check is None:
            check = CHECK_RECEIPTS
        if check:
            self._validate()

    def _validate(self):
        from .paths import loops_conjugate

        old_inv = self.before.domain.invariants()
        new_inv = self.after.domain.invariants()
        if old_inv != new_inv:
            raise AssertionError(
                f"move {self.kind} changed graph invariants "
                f"{old_inv} -> {new_inv}")
        for loop in sample_loops(self.before.domain):
            lhs = self.forward.apply(self.before.apply(loop))
            rhs = self.after.apply(self.forward.apply(loop))
            # collapses slide basepoints, so compare as conjugacy classes
            if lhs != rhs and not loops_conjugate(lhs, rhs):
                raise AssertionError(
                    f"move {self.kind} does not commute on a sample loop")

    @property
    def is_noop(self):
        return self.after is self.before

    @property
    def needs_cleanup(self):
        return self.after.loose and self.after.has_trivial_image()

    def describe(self):
        return f"{self.kind} {self.params}" if self.params else self.kind

    def __repr__(self):
        return f"MoveReceipt({self.describe()})"


def _transport_marking(before, forward, backward):
    if before.marking is None:
        return None, None
    return (forward.compose(before.marking),
            before.marking_inv.compose(backward))


def _finish(kind, params, before, graph, vm, homs, imgs, forward, backward,
            detail=(), tightened=False):
    marking, minv = _transport_marking(before, forward, backward)
    after = TopRep(graph, vm, homs, imgs, marking=marking, marking_inv=minv,
                   allow_trivial_images=True)
    return MoveReceipt(kind, params, before, after, forward, backward,
                       detail=detail, tightened=tightened)


def identity_receipt(f, kind="noop", params=""):
    ident = GraphMap.identity(f.graph)
    return MoveReceipt(kind, params, f, f, ident, ident)


def compose_receipts(kind, params, receipts):
    """Chain receipts into one; forward/backward maps are composed."""
    receipts = [r for r in receipts if r is not None]
    assert receipts
    fwd_map = receipts[0].forward
    back_map = receipts[0].backward
    for r in receipts[1:]:
        fwd_map = r.forward.compose(fwd_map)
        back_map = back_map.compose(r.backward)
    detail = []
    for r in receipts:
        detail.extend((r.describe(),) if not r.detail else r.detail)
    return MoveReceipt(kind, params, receipts[0].before, receipts[-1].after,
                       fwd_map, back_map, detail=detail,
                       tightened=any(r.tightened for r in receipts))


# -- tightening ---------------------------------------------------------------


def tighten_rep(f):
    """Re-tighten every image; edges whose images became points are flagged
    pretrivial candidates in the receipt detail."""
    imgs = tuple(tighten(p) for p in f.edge_images)
    ident = GraphMap.identity(f.graph)
    flat = [f.graph.edge_names[i] for i, p in enumerate(imgs) if p.is_point]
    changed = imgs != f.edge_images
    receipt = _finish("tighten", "", f, f.graph, f.vertex_map, f.vertex_homs,
                      imgs, ident, ident,
                      detail=tuple(f"pretrivial:{n}" for n in flat),
                      tightened=changed)
    return receipt


# -- subdivision --------------------------------------------------------------


def _split_path(path, cuts):
    """Split a path between edges; cuts are (position, side) with position
    counted in edges, side directing the junction element left or right."""
    graph = path.graph
    parts = []
    tokens = list(path.steps)
    lead = path.g0
    start = path.start
    cur = []
    ci = 0
    for idx, (oe, g) in enumerate(tokens):
        cur.append((oe, g))
        if ci < len(cuts) and cuts[ci][0] == idx + 1:
            _, side = cuts[ci]
            ci += 1
            last_oe, last_g = cur[-1]
            if side == "left":
                parts.append(EdgePath(graph, start, lead, cur))
                lead = 0
            else:
                cur[-1] = (last_oe, 0)
                parts.append(EdgePath(graph, start, lead, cur))
                lead = last_g
            start = graph.term(last_oe)
            cur = []
    parts.append(EdgePath(graph, start, lead, cur))
    return parts


def subdivide_multi(f, cuts, kind="subdivide", params=""):
    """Simultaneously declare interior points of edges to be vertices.

    ``cuts`` maps edge index to a list of (position, side) pairs with the
    position a Fraction in (0, 1) along the edge; the edge's image position
    is position * image length.  Positions landing strictly inside an image
    edge must be cut positions of that edge (the invariant-core case);
    positions at an image vertex absorb the junction element to the given
    side.
    """
    graph = f.graph
    norm = {}
    for e, lst in cuts.items():
        seen = {}
        for (q, side) in lst:
            q = Fraction(q)
            if not 0 < q < 1:
                raise PositionOutOfRange(
                    f"cut {q} on edge {graph.edge_names[e]} out of range")
            seen.setdefault(q, side)
        if seen:
            norm[e] = sorted(seen.items())
    if not norm:
        return identity_receipt(f, kind, params)

    new_groups = list(graph.groups)
    new_vnames = list(graph.vertex_names)
    cut_vertex = {}
    for e in sorted(norm):
        for idx, (q, _) in enumerate(norm[e]):
            cut_vertex[(e, q)] = len(new_groups)
            new_groups.append(GroupOracle.trivial())
            new_vnames.append(f"{graph.edge_names[e]}.c{idx}")
    new_edges, new_enames = [], []
    piece_ids = {}
    piece_bounds = {}
    for e in range(graph.n_edges):
        qs = norm.get(e, [])
        bounds = [Fraction(0)] + [q for (q, _) in qs] + [Fraction(1)]
        verts = ([graph.edges[e][0]]
                 + [cut_vertex[(e, q)] for (q, _) in qs]
                 + [graph.edges[e][1]])
        ids = []
        for t in range(len(bounds) - 1):
            ids.append(len(new_edges))
            nm = graph.edge_names[e] if len(bounds) == 2 \
                else f"{graph.edge_names[e]}.{t}"
            new_edges.append((verts[t], verts[t + 1]))
            new_enames.append(nm)
        piece_ids[e] = ids
        piece_bounds[e] = bounds
    ng = GraphOfGroups(new_groups, new_edges, new_vnames, new_enames)

    def piece_path(oe):
        e = oe >> 1
        ids = piece_ids[e]
        if (oe & 1) == 0:
            steps = tuple((fwd(i), 0) for i in ids)
            return EdgePath(ng, ng.init(fwd(ids[0])), 0, steps)
        steps = tuple((fwd(i) ^ 1, 0) for i in reversed(ids))
        return EdgePath(ng, ng.term(fwd(ids[-1])), 0, steps)

    pi_imgs = tuple(piece_path(fwd(e)) for e in range(graph.n_edges))
    ident_homs = tuple(GroupMap.identity(g) for g in graph.groups)
    pi = GraphMap(graph, ng, range(graph.n_vertices), ident_homs, pi_imgs)

    back_vm = list(range(graph.n_vertices))
    back_homs = list(ident_homs)
    for e in sorted(norm):
        for (q, _) in norm[e]:
            tgt = graph.edges[e][1]
            back_vm.append(tgt)
            back_homs.append(GroupMap.trivial_into(graph.group_at(tgt)))
    back_imgs = []
    for e in range(graph.n_edges):
        ids = piece_ids[e]
        back_imgs.append(EdgePath.of_edge(graph, fwd(e)))
        for _ in ids[1:]:
            back_imgs.append(EdgePath.point(graph, graph.edges[e][1]))
    pb = GraphMap(ng, graph, back_vm, back_homs, back_imgs,
                  tighten_images=True)

    # expanded images with all cut vertices materialized, then split
    new_imgs = [None] * ng.n_edges
    new_vm = [f.vertex_map[v] for v in range(graph.n_vertices)] \
        + [None] * len(cut_vertex)
    new_homs = [None] * ng.n_vertices
    for v in range(graph.n_vertices):
        hom = f.vertex_homs[v]
        new_homs[v] = GroupMap(ng.group_at(v),
                               ng.group_at(f.vertex_map[v]), hom.table)
    for e in range(graph.n_edges):
        img = f.edge_images[e]
        expanded = EdgePath.point(ng, f.vertex_map[graph.edges[e][0]],
                                  img.g0)
        prefix = [0]
        for (oe, g) in img.steps:
            pp = piece_path(oe)
            expanded = concat_paths(expanded, pp)
            expanded = concat_paths(
                expanded, EdgePath.point(ng, pp.end, g))
            prefix.append(prefix[-1] + pp.n_edges)
        qs = norm.get(e, [])
        if not qs:
            new_imgs[piece_ids[e][0]] = expanded
            continue
        L = img.n_edges
        if L == 0:
            raise PositionOutOfRange(
                f"cannot subdivide edge {graph.edge_names[e]} over a point")
        split_specs = []
        for (q, side) in qs:
            x = q * L
            j = int(x)  # floor; x >= 0
            c = x - j
            if c == 0:
                split_specs.append((prefix[j], side))
            else:
                oe, _ = img.steps[j]
                eps = oe >> 1
                inner = piece_bounds[eps][1:-1]
                if (oe & 1) == 0:
                    coords = inner
                else:
                    coords = [1 - b for b in reversed(inner)]
                if c not in coords:
                    raise PositionOutOfRange(
                        "cut position does not map to a vertex")
                split_specs.append((prefix[j] + coords.index(c) + 1, "left"))
        parts = _split_path(expanded, split_specs)
        for t, pid in enumerate(piece_ids[e]):
            new_imgs[pid] = parts[t]
        for t, (q, _) in enumerate(qs):
            new_vm[cut_vertex[(e, q)]] = parts[t].end
    for (e, q), cv in cut_vertex.items():
        tgt = new_vm[cv]
        new_homs[cv] = GroupMap.trivial_into(ng.group_at(tgt))
    return _finish(kind, params, f, ng, new_vm, new_homs, new_imgs, pi, pb)


def subdivide(f, e, k, side="left"):
    """Split edge e at image position k (combinatorial subdivision)."""
    L = f.edge_images[e].n_edges
    if not 1 <= k < L:
        raise PositionOutOfRange(
            f"subdivision position {k} not inside the image of "
            f"{f.graph.edge_names[e]}")
    name = f.graph.edge_names[e]
    return subdivide_multi(f, {e: [(Fraction(k, L), side)]},
                           kind="subdivide", params=f"{name}@{k}/{L}")


# -- collapsing ---------------------------------------------------------------


def _edge_set(sub):
    if isinstance(sub, SubgraphOfGroups):
        return set(sub.edge_set)
    return set(sub)


def find_max_pretrivial_forest(f):
    """Edges eventually mapped to points: the least fixed point of
    "all image edges already collected"."""
    graph = f.graph
    collected = set()
    changed = True
    while changed:
        changed = False
        for e in range(graph.n_edges):
            if e in collected:
                continue
            if all((oe >> 1) in collected for (oe, _) in
                   f.edge_images[e].steps):
                collected.add(e)
                changed = True
    return SubgraphOfGroups(graph, collected)


def _orbit_closure(f, seed):
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


def find_max_invariant_forest(f):
    """Union of edge-orbit closures added greedily in edge order while the
    result stays an invariant collapsible forest."""
    graph = f.graph
    forest = set()
    for e in range(graph.n_edges):
        if e in forest:
            continue
        cand = forest | _orbit_closure(f, {e})
        if is_collapsible_forest(graph, cand):
            forest = cand
    return SubgraphOfGroups(graph, forest)


def collapse(f, sub, kind="collapse"):
    """Collapse an invariant collapsible forest, one vertex per component."""
    graph = f.graph
    edges = _edge_set(sub)
    if not edges:
        return identity_receipt(f, kind, "empty")
    for e in edges:
        for (oe, _) in f.edge_images[e].steps:
            if (oe >> 1) not in edges:
                raise NotInvariant(
                    f"image of {graph.edge_names[e]} leaves the subgraph")
    if not is_collapsible_forest(graph, edges):
        raise NotCollapsible("subgraph is not a collapsible forest")
    comps = SubgraphOfGroups(graph, edges).components()
    root_of = {}
    comp_of = {}
    for verts, comp_edges in comps:
        nontriv = [v for v in sorted(verts)
                   if not graph.group_at(v).is_trivial]
        root = nontriv[0] if nontriv else min(verts)
        for v in verts:
            root_of[v] = root
            comp_of[v] = comp_edges
    vm = {}
    new_groups, new_vnames = [], []
    for v in range(graph.n_vertices):
        if v in root_of and root_of[v] != v:
            continue
        vm[v] = len(new_groups)
        new_groups.append(graph.group_at(v))
        new_vnames.append(graph.vertex_names[v])
    for v in range(graph.n_vertices):
        if v in root_of:
            vm[v] = vm[root_of[v]]
    new_edges, new_enames = [], []
    emap = {}
    for e in range(graph.n_edges):
        if e in edges:
            continue
        emap[e] = len(new_edges)
        u, v = graph.edges[e]
        new_edges.append((vm[u], vm[v]))
        new_enames.append(graph.edge_names[e])
    ng = GraphOfGroups(new_groups, new_edges, new_vnames, new_enames)

    def pi_hom(v):
        src = graph.group_at(v)
        if v in root_of and root_of[v] != v:
            return GroupMap.trivial_into(ng.group_at(vm[v]))
        return GroupMap(src, ng.group_at(vm[v]), tuple(range(src.size)))

    pi_imgs = []
    for e in range(graph.n_edges):
        if e in edges:
            pi_imgs.append(EdgePath.point(ng, vm[graph.edges[e][0]]))
        else:
            pi_imgs.append(EdgePath.of_edge(ng, fwd(emap[e])))
    pi = GraphMap(graph, ng, [vm[v] for v in range(graph.n_vertices)],
                  [pi_hom(v) for v in range(graph.n_vertices)], pi_imgs)

    back_vm = []
    back_homs = []
    for v in range(graph.n_vertices):
        if v in root_of and root_of[v] != v:
            continue
        back_vm.append(v)
        src = ng.group_at(vm[v])
        back_homs.append(GroupMap(src, graph.group_at(v),
                                  tuple(range(src.size))))
    back_imgs = []
    for e in range(graph.n_edges):
        if e in edges:
            continue
        u, v = graph.edges[e]
        mid = EdgePath.of_edge(graph, fwd(e))
        if u in root_of:
            mid = concat_paths(tree_path(graph, comp_of[u], root_of[u], u),
                               mid)
        if v in root_of:
            mid = concat_paths(mid,
                               tree_path(graph, comp_of[v], v, root_of[v]))
        back_imgs.append(mid)
    pb = GraphMap(ng, graph, back_vm, back_homs, back_imgs,
                  tighten_images=True)

    new_vm = [pi.apply_vertex(f.vertex_map[pb.apply_vertex(v)])
              for v in range(ng.n_vertices)]
    new_homs = []
    for v in range(ng.n_vertices):
        ov = pb.apply_vertex(v)
        hom = pi.vertex_homs[f.vertex_map[ov]].compose(
            f.vertex_homs[ov]).compose(pb.vertex_homs[v])
        new_homs.append(hom)
    new_imgs = [pi.apply(f.apply(pb.edge_images[j]))
                for j in range(ng.n_edges)]
    names = ",".join(sorted(graph.edge_names[e] for e in edges))
    return _finish(kind, names, f, ng, new_vm, new_homs, new_imgs, pi, pb)


def collapse_pretrivial(f):
    forest = find_max_pretrivial_forest(f)
    if forest.is_empty():
        return None
    return collapse(f, forest, kind="collapse_pretrivial")


def collapse_invariant_forest(f):
    forest = find_max_invariant_forest(f)
    if forest.is_empty():
        return None
    return collapse(f, forest, kind="collapse_forest")


# -- twist --------------------------------------------------------------------


def twist(f, oe, g):
    """Conjugate by the marking change sending oriented edge oe to oe.g."""
    graph = f.graph
    v = graph.term(oe)
    graph.group_at(v).check(g)
    if g == 0:
        return identity_receipt(f, "twist",
                                f"{graph.oedge_name(oe)} by identity")

    def twist_map(elem):
        imgs = []
        for i in range(graph.n_edges):
            u, w = graph.edges[i]
            if i == (oe >> 1):
                if (oe & 1) == 0:
                    imgs.append(EdgePath(graph, u, 0, ((fwd(i), elem),)))
                else:
                    lead = graph.group_at(u).inv(elem)
                    imgs.append(EdgePath(graph, u, lead, ((fwd(i), 0),)))
            else:
                imgs.append(EdgePath.of_edge(graph, fwd(i)))
        return GraphMap(graph, graph, range(graph.n_vertices),
                        tuple(GroupMap.identity(o) for o in graph.groups),
                        imgs)

    t = twist_map(g)
    t_inv = twist_map(graph.group_at(v).inv(g))
    composed = t.compose(f).compose(t_inv)
    name = f"{graph.oedge_name(oe)} by {graph.group_at(v).element_name(g)}"
    return _finish("twist", name, f, graph, composed.vertex_map,
                   composed.vertex_homs, composed.edge_images, t, t_inv)


# -- folding ------------------------------------------------------------------


def slide(f, u, g):
    """Adjust the map at one vertex by an element of its image group.

    Every image arriving at u gets its trailing element multiplied by g^-1
    (equivalently, departing images get a leading g), and the vertex map at
    u is conjugated by g.  The induced map on loops is unchanged up to
    basepoint conjugation; this realizes the equivalence of morphisms that
    differ only in their coset bookkeeping.
    """
    graph = f.graph
    w = f.vertex_map[u]
    oracle = graph.group_at(w)
    oracle.check(g)
    if g == 0:
        return identity_receipt(f, "slide",
                                f"{graph.vertex_names[u]} by identity")
    g_inv = oracle.inv(g)
    imgs = []
    for e in range(graph.n_edges):
        p = f.edge_images[e]
        a, b = graph.edges[e]
        if p.is_point:
            val = p.g0
            if b == u:
                val = oracle.mul(val, g_inv)
            if a == u:
                val = oracle.mul(g, val)
            imgs.append(EdgePath.point(p.graph, p.start, val))
            continue
        if b == u:
            last_oe, last_g = p.steps[-1]
            p = EdgePath(p.graph, p.start, p.g0,
                         p.steps[:-1]
                         + ((last_oe, oracle.mul(last_g, g_inv)),))
        if a == u:
            p = EdgePath(p.graph, p.start, oracle.mul(g, p.g0), p.steps)
        imgs.append(p)
    homs = list(f.vertex_homs)
    src = homs[u].source
    homs[u] = GroupMap(src, homs[u].target,
                       tuple(oracle.conjugate(g, homs[u].apply(x))
                             for x in range(src.size)))
    ident = GraphMap.identity(graph)
    name = f"{graph.vertex_names[u]} by {oracle.element_name(g)}"
    return _finish("slide", name, f, graph, f.vertex_map, homs, imgs,
                   ident, ident)


def _common_prefix(px, py):
    """Edges of the longest shared initial segment (interior elements and
    the leading element must agree)."""
    if px.g0 != py.g0:
        return 0
    t = 0
    nx, ny = px.n_edges, py.n_edges
    while t < nx and t < ny:
        if px.steps[t][0] != py.steps[t][0]:
            break
        if t > 0 and px.steps[t - 1][1] != py.steps[t - 1][1]:
            break
        t += 1
    return t


def _elementary_fold(f, x, y):
    """Identify oriented edges x and y with identical images and a common
    initial vertex; the far endpoints merge."""
    graph = f.graph
    if (x >> 1) == (y >> 1):
        raise ImagesDisagree("cannot fold an edge with itself")
    w = graph.init(x)
    if graph.init(y) != w:
        raise ImagesDisagree("fold edges must share their initial vertex")
    imx, imy = f.image_of_oedge(x), f.image_of_oedge(y)
    if imx != imy:
        raise ImagesDisagree("fold edges must have identical images")
    u1, u2 = graph.term(x), graph.term(y)
    if u1 == u2:
        raise FoldCollapsesLoop(
            "folding parallel edges would change the fundamental group")
    g1, g2 = graph.group_at(u1), graph.group_at(u2)
    if not g1.is_trivial and not g2.is_trivial:
        raise BothEndpointsNontrivial(
            "both far endpoints carry nontrivial vertex groups")
    keep, drop = (u1, u2) if not g1.is_trivial else \
        ((u2, u1) if not g2.is_trivial else (min(u1, u2), max(u1, u2)))
    ex, ey = x >> 1, y >> 1

    vm = {}
    new_groups, new_vnames = [], []
    for v in range(graph.n_vertices):
        if v == drop:
            continue
        vm[v] = len(new_groups)
        new_groups.append(graph.group_at(v))
        new_vnames.append(graph.vertex_names[v])
    vm[drop] = vm[keep]
    emap = {}
    new_edges, new_enames = [], []
    for e in range(graph.n_edges):
        if e == ey:
            continue
        emap[e] = len(new_edges)
        u, v = graph.edges[e]
        if e == ex:
            u, v = (u if u != drop else keep), (v if v != drop else keep)
        new_edges.append((vm[u], vm[v]))
        new_enames.append(graph.edge_names[e])
    ng = GraphOfGroups(new_groups, new_edges, new_vnames, new_enames)

    def pi_hom(v):
        src = graph.group_at(v)
        if v == drop:
            return GroupMap.trivial_into(ng.group_at(vm[v]))
        return GroupMap(src, ng.group_at(vm[v]), tuple(range(src.size)))

    new_x = fwd(emap[ex]) | (x & 1)  # oriented image of x in ng
    # the oriented edge y maps onto the oriented survivor of x
    y_img = EdgePath.of_edge(ng, new_x if (y & 1) == 0 else new_x ^ 1)
    pi_imgs = []
    for e in range(graph.n_edges):
        if e == ey:
            pi_imgs.append(y_img)
        else:
            pi_imgs.append(EdgePath.of_edge(ng, fwd(emap[e])))
    pi = GraphMap(graph, ng, [vm[v] for v in range(graph.n_vertices)],
                  [pi_hom(v) for v in range(graph.n_vertices)], pi_imgs)

    connector = concat_paths(
        EdgePath.of_edge(graph, x ^ 1),
        EdgePath.of_edge(graph, y))  # keep-side detour: u1 -> w -> u2
    back_vm = []
    back_homs = []
    for v in range(graph.n_vertices):
        if v == drop:
            continue
        back_vm.append(v)
        src = ng.group_at(vm[v])
        back_homs.append(GroupMap(src, graph.group_at(v),
                                  tuple(range(src.size))))
    if drop == u2:
        detour = connector  # u1 -> u2 inside the old graph
    else:
        detour = connector.reverse()
    back_imgs = []
    for j in range(ng.n_edges):
        e = [e0 for e0, j0 in emap.items() if j0 == j][0]
        u, v = graph.edges[e]
        mid = EdgePath.of_edge(graph, fwd(e))
        if u == drop:
            mid = concat_paths(detour, mid)
        if v == drop:
            mid = concat_paths(mid, detour.reverse())
        back_imgs.append(mid)
    pb = GraphMap(ng, graph, back_vm, back_homs, back_imgs,
                  tighten_images=True)

    new_vm = [pi.apply_vertex(f.vertex_map[pb.apply_vertex(v)])
              for v in range(ng.n_vertices)]
    new_homs = []
    for v in range(ng.n_vertices):
        ov = pb.apply_vertex(v)
        hom = pi.vertex_homs[f.vertex_map[ov]].compose(
            f.vertex_homs[ov]).compose(pb.vertex_homs[v])
        new_homs.append(hom)
    new_imgs = [pi.apply(f.apply(pb.edge_images[j]))
                for j in range(ng.n_edges)]
    rev_emap = {j: e for e, j in emap.items()}
    tightened = any(new_imgs[j].n_edges != f.edge_images[rev_emap[j]].n_edges
                    for j in range(ng.n_edges))
    name = f"{graph.oedge_name(x)}~{graph.oedge_name(y)}"
    return _finish("fold", name, f, ng, new_vm, new_homs, new_imgs, pi, pb,
                   tightened=tightened)


def _junction_options(img, j):
    """Possible trailing elements for the length-j initial piece of img."""
    if j == img.n_edges:
        return (img.steps[-1][1],)  # fixed: the whole edge
    return (0, img.steps[j - 1][1])


def fold(f, x, y, _slid=False):
    """Fold oriented edges x, y out of their common initial vertex along the
    maximal shared initial image segment, subdividing first when the segment
    is proper (the general fold).

    A whole-edge side whose image carries a stray trailing element is first
    reconciled by a slide at its far endpoint (a bookkeeping equivalence of
    the map, not a change of homotopy class).
    """
    graph = f.graph
    if x == y:
        raise ImagesDisagree("cannot fold an oriented edge with itself")
    if graph.init(x) != graph.init(y):
        raise ImagesDisagree("fold edges must share their initial vertex")
    imx, imy = f.image_of_oedge(x), f.image_of_oedge(y)
    jmax = _common_prefix(imx, imy)
    if jmax == 0:
        raise ImagesDisagree(
            f"images of {graph.oedge_name(x)} and {graph.oedge_name(y)} "
            "share no initial segment")
    def cut(curr, oe, other, trailing, j):
        """Subdivide oriented oe at oriented position j, the junction
        element going to the first piece iff it equals `trailing`."""
        img = curr.image_of_oedge(oe)
        if j == img.n_edges:
            return None, oe, other
        side_elem = img.steps[j - 1][1]
        take = (trailing == side_elem and trailing != 0)
        e = oe >> 1
        length = curr.edge_images[e].n_edges
        if (oe & 1) == 0:
            pos, side = j, ("left" if take else "right")
        else:
            pos, side = length - j, ("right" if take else "left")
        r = subdivide(curr, e, pos, side)
        new_oe = r.forward.image_of_oedge(oe).steps[0][0]
        new_other = r.forward.image_of_oedge(other).steps[0][0]
        return r, new_oe, new_other

    for j in range(jmax, 0, -1):
        opts_x = _junction_options(imx, j)
        opts_y = _junction_options(imy, j)
        shared = [t for t in opts_x if t in opts_y]
        if not shared:
            if _slid:
                continue
            whole_x, whole_y = j == imx.n_edges, j == imy.n_edges
            ux, uy = graph.term(x), graph.term(y)
            w = imx.end
            oracle = graph.group_at(w)
            if whole_x and whole_y and ux != uy:
                # make y's fixed trailing match x's
                g = oracle.mul(oracle.inv(opts_x[0]), opts_y[0])
                r0 = slide(f, uy, g)
            elif whole_x and not whole_y:
                r0 = slide(f, ux, opts_x[0])   # clear x's trailing
            elif whole_y and not whole_x:
                r0 = slide(f, uy, opts_y[0])
            else:
                continue
            inner = fold(r0.after, x, y, _slid=True)
            name = f"{graph.oedge_name(x)}~{graph.oedge_name(y)}@{j}"
            return compose_receipts("fold", name, [r0, inner])
        t = 0 if 0 in shared else shared[0]
        receipts = []
        cur = f
        cx, cy = x, y
        r1, cx, cy = cut(cur, cx, cy, t, j)
        jj = j
        if r1 is not None:
            receipts.append(r1)
            cur = r1.after
            # the segment may have expanded if it crossed the cut edge
            jj = cur.image_of_oedge(cx).n_edges
        r2, cy, cx = cut(cur, cy, cx, t, jj)
        if r2 is not None:
            receipts.append(r2)
            cur = r2.after
        try:
            receipts.append(_elementary_fold(cur, cx, cy))
        except ImagesDisagree:
            continue
        name = f"{graph.oedge_name(x)}~{graph.oedge_name(y)}@{j}"
        return compose_receipts("fold", name, receipts)
    raise ImagesDisagree(
        f"no foldable segment for {graph.oedge_name(x)} and "
        f"{graph.oedge_name(y)}")


def fold_turn(f, turn):
    """Twist (if the turn carries a nontrivial element) and fold the turn's
    arriving edge germs; the turn must map to a degenerate turn."""
    img = turn_image(f, turn)
    if not img.is_degenerate:
        raise ImagesDisagree("fold_turn needs a pre-degenerate turn")
    (g1, b1), (g2, b2) = turn.pair
    receipts = []
    cur = f
    if g1 != 0 or g2 != 0:
        # canonical turns carry the identity on one entry
        if g1 != 0:
            (g1, b1), (g2, b2) = (g2, b2), (g1, b1)
        v = cur.graph.term(b1)
        delta_inv = cur.graph.group_at(v).inv(g2)
        receipts.append(twist(cur, b1, delta_inv))
        cur = receipts[-1].after
    receipts.append(fold(cur, b1 ^ 1, b2 ^ 1))
    return compose_receipts("fold_turn", receipts[-1].params, receipts)


# -- valence homotopies -------------------------------------------------------


def valence_one_homotopy(f, v):
    """Delete an inessential valence-one vertex and its edge, restrict the
    map, tighten, and collapse the pretrivial forest."""
    graph = f.graph
    star = graph.star(v)
    if len(star) != 1 or not graph.group_at(v).is_trivial:
        raise NotInessentialValenceOne(
            f"{graph.vertex_names[v]} is not an inessential valence-one "
            "vertex")
    oe = star[0]          # terminates at v
    e = oe >> 1
    w = graph.init(oe)
    vm = {}
    new_groups, new_vnames = [], []
    for u in range(graph.n_vertices):
        if u == v:
            continue
        vm[u] = len(new_groups)
        new_groups.append(graph.group_at(u))
        new_vnames.append(graph.vertex_names[u])
    vm[v] = vm[w]
    emap = {}
    new_edges, new_enames = [], []
    for d in range(graph.n_edges):
        if d == e:
            continue
        emap[d] = len(new_edges)
        a, b = graph.edges[d]
        new_edges.append((vm[a], vm[b]))
        new_enames.append(graph.edge_names[d])
    ng = GraphOfGroups(new_groups, new_edges, new_vnames, new_enames)

    def pi_hom(u):
        src = graph.group_at(u)
        if u == v:
            return GroupMap.trivial_into(ng.group_at(vm[u]))
        return GroupMap(src, ng.group_at(vm[u]), tuple(range(src.size)))

    pi_imgs = []
    for d in range(graph.n_edges):
        if d == e:
            pi_imgs.append(EdgePath.point(ng, vm[w]))
        else:
            pi_imgs.append(EdgePath.of_edge(ng, fwd(emap[d])))
    pi = GraphMap(graph, ng, [vm[u] for u in range(graph.n_vertices)],
                  [pi_hom(u) for u in range(graph.n_vertices)], pi_imgs)
    back_vm, back_homs = [], []
    for u in range(graph.n_vertices):
        if u == v:
            continue
        back_vm.append(u)
        src = ng.group_at(vm[u])
        back_homs.append(GroupMap(src, graph.group_at(u),
                                  tuple(range(src.size))))
    back_imgs = [EdgePath.of_edge(graph, fwd(d))
                 for d in range(graph.n_edges) if d != e]
    pb = GraphMap(ng, graph, back_vm, back_homs, back_imgs,
                  tighten_images=True)

    new_vm = [pi.apply_vertex(f.vertex_map[pb.apply_vertex(u)])
              for u in range(ng.n_vertices)]
    new_homs = []
    for u in range(ng.n_vertices):
        ov = pb.apply_vertex(u)
        new_homs.append(pi.vertex_homs[f.vertex_map[ov]].compose(
            f.vertex_homs[ov]).compose(pb.vertex_homs[u]))
    new_imgs = [pi.apply(f.apply(pb.edge_images[j]))
                for j in range(ng.n_edges)]
    base = _finish("valence_one", graph.vertex_names[v], f, ng, new_vm,
                   new_homs, new_imgs, pi, pb, tightened=True)
    receipts = [base]
    while receipts[-1].after.has_trivial_image():
        r = collapse_pretrivial(receipts[-1].after)
        if r is None:
            break
        receipts.append(r)
    return compose_receipts("valence_one", graph.vertex_names[v], receipts)


def valence_two_homotopy(f, v, e_collapse):
    """Collapse e_collapse across an inessential valence-two vertex,
    expanding the other incident edge over it."""
    graph = f.graph
    star = graph.star(v)
    if len(star) != 2 or not graph.group_at(v).is_trivial:
        raise NotInessentialValenceTwo(
            f"{graph.vertex_names[v]} is not an inessential valence-two "
            "vertex")
    oe_a, oe_b = star
    if (oe_a >> 1) == (oe_b >> 1):
        raise NotInessentialValenceTwo("cannot homotope across a loop edge")
    if (oe_a >> 1) == e_collapse:
        oe_j, oe_i = oe_a, oe_b
    elif (oe_b >> 1) == e_collapse:
        oe_j, oe_i = oe_b, oe_a
    else:
        raise NotInessentialValenceTwo(
            "edge to collapse is not incident to the vertex")
    ei, ej = oe_i >> 1, oe_j >> 1
    y = graph.init(oe_j)  # far endpoint of the collapsed edge

    vm = {}
    new_groups, new_vnames = [], []
    for u in range(graph.n_vertices):
        if u == v:
            continue
        vm[u] = len(new_groups)
        new_groups.append(graph.group_at(u))
        new_vnames.append(graph.vertex_names[u])
    vm[v] = vm[y]
    emap = {}
    new_edges, new_enames = [], []
    for d in range(graph.n_edges):
        if d == ej:
            continue
        emap[d] = len(new_edges)
        a, b = graph.edges[d]
        if d == ei:
            a, b = (a if a != v else y), (b if b != v else y)
        new_edges.append((vm[a], vm[b]))
        new_enames.append(graph.edge_names[d])
    ng = GraphOfGroups(new_groups, new_edges, new_vnames, new_enames)

    def pi_hom(u):
        src = graph.group_at(u)
        if u == v:
            return GroupMap.trivial_into(ng.group_at(vm[u]))
        return GroupMap(src, ng.group_at(vm[u]), tuple(range(src.size)))

    new_i = fwd(emap[ei])
    pi_imgs = []
    for d in range(graph.n_edges):
        if d == ej:
            pi_imgs.append(EdgePath.point(ng, vm[y]))
        elif d == ei:
            pi_imgs.append(EdgePath.of_edge(ng, new_i))
        else:
            pi_imgs.append(EdgePath.of_edge(ng, fwd(emap[d])))
    pi = GraphMap(graph, ng, [vm[u] for u in range(graph.n_vertices)],
                  [pi_hom(u) for u in range(graph.n_vertices)], pi_imgs)

    back_vm, back_homs = [], []
    for u in range(graph.n_vertices):
        if u == v:
            continue
        back_vm.append(u)
        src = ng.group_at(vm[u])
        back_homs.append(GroupMap(src, graph.group_at(u),
                                  tuple(range(src.size))))
    back_imgs = []
    for d in range(graph.n_edges):
        if d == ej:
            continue
        if d == ei:
            ext = concat_paths(EdgePath.of_edge(graph, oe_i),
                               EdgePath.of_edge(graph, oe_j ^ 1))
            u, wv = graph.edges[ei]
            if wv != v:  # forward orientation of e_i starts at v
                ext = ext.reverse()
            back_imgs.append(ext)
        else:
            back_imgs.append(EdgePath.of_edge(graph, fwd(d)))
    pb = GraphMap(ng, graph, back_vm, back_homs, back_imgs,
                  tighten_images=True)

    new_vm = [pi.apply_vertex(f.vertex_map[pb.apply_vertex(u)])
              for u in range(ng.n_vertices)]
    new_homs = []
    for u in range(ng.n_vertices):
        ov = pb.apply_vertex(u)
        new_homs.append(pi.vertex_homs[f.vertex_map[ov]].compose(
            f.vertex_homs[ov]).compose(pb.vertex_homs[u]))
    new_imgs = [pi.apply(f.apply(pb.edge_images[j]))
                for j in range(ng.n_edges)]
    name = (f"{graph.vertex_names[v]} across {graph.edge_names[ej]}")
    base = _finish("valence_two", name, f, ng, new_vm, new_homs, new_imgs,
                   pi, pb, tightened=True)
    receipts = [base]
    while receipts[-1].after.has_trivial_image():
        r = collapse_pretrivial(receipts[-1].after)
        if r is None:
            break
        receipts.append(r)
    return compose_receipts("valence_two", name, receipts)


# -- invariant core subdivision ------------------------------------------------


def _core_positions(f, stratum):
    """Exact positions of the invariant-core endpoints on each stratum edge.

    The greedy address of the leftmost (rightmost) point staying in the
    stratum is eventually periodic, so each position solves an affine chain
    over the rationals.
    """
    stratum = frozenset(stratum)
    affine = {}
    for e in stratum:
        img = f.edge_images[e]
        hits = [t for t, (oe, _) in enumerate(img.steps)
                if (oe >> 1) in stratum]
        if not hits:
            raise NotEG("stratum edge image misses the stratum")
        L = img.n_edges
        for side, j in (("L", hits[0]), ("R", hits[-1])):
            oe = img.steps[j][0]
            eps = oe >> 1
            forward = (oe & 1) == 0
            if side == "L":
                inner = "L" if forward else "R"
            else:
                inner = "R" if forward else "L"
            if forward:
                a, b = Fraction(1, L), Fraction(j, L)
            else:
                a, b = Fraction(-1, L), Fraction(j + 1, L)
            affine[(e, side)] = (a, b, (eps, inner))
    values = {}
    for start in sorted(affine):
        if start in values:
            continue
        chain = []
        seenpos = {}
        cur = start
        while cur not in values and cur not in seenpos:
            seenpos[cur] = len(chain)
            chain.append(cur)
            cur = affine[cur][2]
        if cur in values:
            tail_end = len(chain)
        else:
            # the walk closed into a cycle at chain[k0]; compose the affine
            # steps once around it and solve x = A x + B
            k0 = seenpos[cur]
            acc_a, acc_b = Fraction(1), Fraction(0)
            for node in chain[k0:]:
                a, b, _ = affine[node]
                acc_a, acc_b = acc_a * a, acc_a * b + acc_b
            assert acc_a != 1, "address cycle cannot be an isometry"
            values[chain[k0]] = acc_b / (1 - acc_a)
            for k in range(len(chain) - 1, k0, -1):
                a, b, nxt = affine[chain[k]]
                values[chain[k]] = a * values[nxt] + b
            tail_end = k0
        for k in range(tail_end - 1, -1, -1):
            a, b, nxt = affine[chain[k]]
            values[chain[k]] = a * values[nxt] + b
    return values


def invariant_core_subdivision(f, stratum):
    """Make the endpoints of the stratum's invariant cores into vertices.

    No-op when the stratum's images already stay inside the stratum.
    """
    graph = f.graph
    stratum = frozenset(stratum)
    idx = sorted(stratum)
    block = TransitionMatrix.of_rep(f).submatrix(idx)
    if not matrix_is_irreducible(block.rows) or \
            is_permutation_matrix(block.rows):
        raise NotEG("invariant core subdivision needs an EG stratum")
    contained = all((oe >> 1) in stratum
                    for e in stratum for (oe, _) in f.edge_images[e].steps)
    if contained:
        return identity_receipt(f, "core_subdivision", "contained")
    values = _core_positions(f, stratum)
    cuts = {}
    for e in sorted(stratum):
        qs = sorted({values[(e, "L")], values[(e, "R")]})
        inner = [(q, "left") for q in qs if 0 < q < 1]
        if inner:
            cuts[e] = inner
    names = ",".join(graph.edge_names[e] for e in sorted(stratum))
    return subdivide_multi(f, cuts, kind="core_subdivision", params=names)


# -- connecting path collapse ---------------------------------------------------


def collapse_connecting_path(f, alpha):
    """Fold away a path with trivial image (endpoints get identified).

    Repeatedly folds the junction whose turn degenerates in one step, then
    tightens and collapses the pretrivial forest.
    """
    img = f.apply(alpha)
    if img.n_edges != 0 or img.g0 != 0:
        raise ImageNotTrivial("the path's image must be trivial")
    receipts = []
    cur = f
    path = tighten(alpha)
    guard = 0
    while path.n_edges > 0:
        guard += 1
        if guard > 200:
            raise AssertionError("connecting-path collapse did not terminate")
        if path.n_edges == 1:
            # single edge with trivial image: it is pretrivial
            r = collapse_pretrivial(cur)
            assert r is not None
            receipts.append(r)
            cur = r.after
            path = tighten(r.forward.apply(path))
            continue
        target = None
        for i in range(path.n_edges - 1):
            (oe, g) = path.steps[i]
            (nxt, _) = path.steps[i + 1]
            t = Turn(cur.graph, (0, oe), (g, nxt ^ 1))
            if not t.is_degenerate and turn_image(cur, t).is_degenerate:
                target = t
                break
        if target is None:
            raise AssertionError(
                "no foldable junction on a trivial-image path")
        r = fold_turn(cur, target)
        receipts.append(r)
        cur = r.after
        path = tighten(r.forward.apply(path))
        while cur.has_trivial_image():
            r = collapse_pretrivial(cur)
            if r is None:
                break
            receipts.append(r)
            cur = r.after
            path = tighten(r.forward.apply(path))
    if not receipts:
        return identity_receipt(f, "collapse_connecting_path", "")
    return compose_receipts("collapse_connecting_path", "", receipts)

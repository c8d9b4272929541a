"""Graphs of groups with trivial edge groups, and edge-path calculus.

An oriented edge is encoded as an int: ``2*i`` is edge ``i`` in its declared
orientation (terminating at its ``to`` vertex), ``2*i + 1`` is the reverse.
``oe ^ 1`` reverses an oriented edge.

An edge path is a leading group element at its start vertex followed by
alternating oriented edges and group elements, the element after each edge
living at that edge's terminal vertex.  A path with no edges is a single
(possibly identity) vertex-group element.
"""
from __future__ import annotations

from .errors import EndpointMismatch, NotClosed
from .groups import GroupOracle


def fwd(i):
    return 2 * i


def rev(oe):
    return oe ^ 1


def edge_index(oe):
    return oe >> 1


def is_forward(oe):
    return (oe & 1) == 0


class GraphOfGroups:
    """A finite connected graph with a group oracle at each vertex."""

    __slots__ = ("groups", "edges", "vertex_names", "edge_names", "_star")

    def __init__(self, groups, edges, vertex_names=None, edge_names=None):
        groups = tuple(groups)
        edges = tuple((int(u), int(v)) for (u, v) in edges)
        nv = len(groups)
        if nv == 0:
            raise ValueError("a graph of groups needs at least one vertex")
        for (u, v) in edges:
            if not (0 <= u < nv and 0 <= v < nv):
                raise ValueError("edge endpoint out of range")
        if vertex_names is None:
            vertex_names = tuple(f"v{i}" for i in range(nv))
        if edge_names is None:
            edge_names = tuple(f"e{i}" for i in range(len(edges)))
        if len(set(vertex_names)) != nv or len(set(edge_names)) != len(edges):
            raise ValueError("names must be distinct")
        self.groups = groups
        self.edges = edges
        self.vertex_names = tuple(vertex_names)
        self.edge_names = tuple(edge_names)
        star = [[] for _ in range(nv)]
        for i, (u, v) in enumerate(edges):
            star[v].append(fwd(i))
            star[u].append(fwd(i) + 1)
        self._star = tuple(tuple(sorted(s)) for s in star)
        if not self._connected():
            raise ValueError("graph of groups must be connected")

    def _connected(self):
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for oe in self._star[v]:
                w = self.init(oe)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n_vertices

    # -- basic accessors -------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.groups)

    @property
    def n_edges(self):
        return len(self.edges)

    def group_at(self, v):
        return self.groups[v]

    def term(self, oe):
        """Terminal vertex tau(oe)."""
        u, v = self.edges[oe >> 1]
        return v if (oe & 1) == 0 else u

    def init(self, oe):
        return self.term(oe ^ 1)

    def star(self, v):
        """Oriented edges terminating at v, in a fixed order."""
        return self._star[v]

    def valence(self, v):
        return len(self._star[v])

    def oedge_name(self, oe):
        name = self.edge_names[oe >> 1]
        return name if (oe & 1) == 0 else "~" + name

    # -- numerical invariants ---------------------------------------------

    def invariants(self):
        """(eta, betti, complexity, edge_bound).

        With trivial edge groups a vertex is essential iff its group is
        nontrivial, so eta counts nontrivial vertex groups.
        """
        eta = sum(1 for g in self.groups if not g.is_trivial)
        betti = self.n_edges - self.n_vertices + 1
        complexity = eta + 2 * betti - 1
        bound = 2 * eta + 3 * betti - 3
        return eta, betti, complexity, bound

    def __repr__(self):
        return (f"GraphOfGroups({self.n_vertices} vertices, "
                f"{self.n_edges} edges)")


class EdgePath:
    """An edge path; immutable.  See module docstring for the encoding.

    ``steps`` is a tuple of ``(oriented_edge, element_id)`` pairs; ``g0`` is
    the element id at the start vertex.
    """

    __slots__ = ("graph", "start", "g0", "steps")

    def __init__(self, graph, start, g0, steps=()):
        graph.group_at(start).check(g0)
        v = start
        for (oe, g) in steps:
            if graph.init(oe) != v:
                raise EndpointMismatch(
                    f"edge {graph.oedge_name(oe)} does not start at "
                    f"{graph.vertex_names[v]}")
            v = graph.term(oe)
            graph.group_at(v).check(g)
        self.graph = graph
        self.start = start
        self.g0 = g0
        self.steps = tuple(steps)

    @classmethod
    def point(cls, graph, v, g=0):
        return cls(graph, v, g)

    @classmethod
    def of_edge(cls, graph, oe, g0=0, g1=0):
        return cls(graph, graph.init(oe), g0, ((oe, g1),))

    # -- inspection ------------------------------------------------------

    @property
    def end(self):
        if not self.steps:
            return self.start
        return self.graph.term(self.steps[-1][0])

    @property
    def n_edges(self):
        return len(self.steps)

    @property
    def is_point(self):
        return not self.steps

    @property
    def is_identity(self):
        return not self.steps and self.g0 == 0

    @property
    def is_closed(self):
        return self.start == self.end

    def edge_counts(self, n_edges=None):
        """How many times each unoriented edge is crossed."""
        n = self.graph.n_edges if n_edges is None else n_edges
        counts = [0] * n
        for (oe, _) in self.steps:
            counts[oe >> 1] += 1
        return counts

    def is_tight(self):
        for i in range(len(self.steps) - 1):
            (oe, g), (nxt, _) = self.steps[i], self.steps[i + 1]
            if nxt == (oe ^ 1) and g == 0:
                return False
        return True

    def reverse(self):
        graph = self.graph
        if not self.steps:
            return EdgePath(graph, self.start,
                            graph.group_at(self.start).inv(self.g0))
        elems = [self.g0] + [g for (_, g) in self.steps]
        oes = [oe for (oe, _) in self.steps]
        new_start = self.end
        new_g0 = graph.group_at(new_start).inv(elems[-1])
        steps = []
        for i in range(len(oes) - 1, -1, -1):
            oe = oes[i] ^ 1
            g = graph.group_at(graph.term(oe)).inv(elems[i])
            steps.append((oe, g))
        return EdgePath(graph, new_start, new_g0, steps)

    def __eq__(self, other):
        # structural: paths in isomorphic copies of a graph compare equal
        return (isinstance(other, EdgePath)
                and self.start == other.start and self.g0 == other.g0
                and self.steps == other.steps)

    def __hash__(self):
        return hash((self.start, self.g0, self.steps))

    def __repr__(self):
        return f"EdgePath({format_path(self)})"


def format_path(p):
    graph = p.graph
    parts = []
    if p.g0 != 0 or not p.steps:
        parts.append(graph.group_at(p.start).element_name(p.g0))
    for (oe, g) in p.steps:
        parts.append(graph.oedge_name(oe))
        if g != 0:
            parts.append(graph.group_at(graph.term(oe)).element_name(g))
    return ".".join(parts)


def concat_paths(p, q):
    """Concatenation with the junction elements multiplied; not tightened."""
    if p.graph is not q.graph:
        raise EndpointMismatch("paths live in different graphs")
    if p.end != q.start:
        raise EndpointMismatch("end of first path is not start of second")
    graph = p.graph
    if not p.steps:
        g0 = graph.group_at(p.start).mul(p.g0, q.g0)
        return EdgePath(graph, p.start, g0, q.steps)
    (last_oe, last_g) = p.steps[-1]
    junction = graph.group_at(p.end).mul(last_g, q.g0)
    return EdgePath(graph, p.start, p.g0,
                    p.steps[:-1] + ((last_oe, junction),) + q.steps)


def concat_all(paths):
    out = paths[0]
    for p in paths[1:]:
        out = concat_paths(out, p)
    return out


def tighten(p):
    """Remove all ``e . 1 . ~e`` subsegments, merging flanking elements.

    Single left-to-right stack pass; the result is tight and homotopic to
    the input rel endpoints, and tighten is idempotent.
    """
    graph = p.graph
    g0 = p.g0
    out = []
    for (oe, g) in p.steps:
        if out and out[-1][0] == (oe ^ 1) and out[-1][1] == 0:
            out.pop()
            if out:
                v = graph.term(out[-1][0])
                out[-1] = (out[-1][0], graph.group_at(v).mul(out[-1][1], g))
            else:
                g0 = graph.group_at(p.start).mul(g0, g)
        else:
            out.append((oe, g))
    return EdgePath(graph, p.start, g0, out)


def reverse_path(p):
    return p.reverse()


def cyclic_reduce(loop):
    """(core, w) with loop homotopic rel basepoint to w . core . ~w.

    The core is tight and cyclically tight: no cancellation across its
    basepoint.  Raises NotClosed for open paths.
    """
    if not loop.is_closed:
        raise NotClosed("cyclic reduction needs a closed path")
    graph = loop.graph
    core = tighten(loop)
    w = EdgePath.point(graph, loop.start)
    while core.n_edges >= 2:
        (first_oe, first_g) = core.steps[0]
        (last_oe, last_g) = core.steps[-1]
        wrap = graph.group_at(core.start).mul(last_g, core.g0)
        if last_oe != (first_oe ^ 1) or wrap != 0:
            break
        prefix = EdgePath(graph, core.start, core.g0, ((first_oe, 0),))
        w = tighten(concat_paths(w, prefix))
        core = EdgePath(graph, graph.term(first_oe), first_g, core.steps[1:-1])
    return core, w


def cyclic_tokens(core):
    """Token stream of a cyclically reduced loop: ((e1, g1) ... (en, gn*g0)).

    The leading element is folded into the final slot; the stream is
    invariant under basepoint vertex-group conjugation.
    """
    if not core.steps:
        raise NotClosed("token stream is only defined for loops with edges")
    graph = core.graph
    toks = list(core.steps)
    last_oe, last_g = toks[-1]
    toks[-1] = (last_oe, graph.group_at(core.start).mul(last_g, core.g0))
    return tuple(toks)


def min_rotation(tokens):
    n = len(tokens)
    best = min(range(n), key=lambda r: tuple(tokens[(r + i) % n]
                                             for i in range(n)))
    return tuple(tokens[(best + i) % n] for i in range(n))


def cyclic_tighten(loop):
    """Canonical cyclic form of a closed path.

    Returns ``('el', vertex, elem)`` for loops that reduce to a single
    vertex-group element (the element canonicalized over conjugation in the
    finite vertex group; identities canonicalize to ``('triv',)``), or
    ``('cyc', tokens)`` with the rotation-minimal token stream otherwise.
    """
    core, _ = cyclic_reduce(loop)
    graph = loop.graph
    if not core.steps:
        if core.g0 == 0:
            return ("triv",)
        oracle = graph.group_at(core.start)
        rep = min(oracle.conjugate(k, core.g0) for k in range(oracle.size))
        return ("el", core.start, rep)
    return ("cyc", min_rotation(cyclic_tokens(core)))


def loops_conjugate(l1, l2):
    """Whether two closed paths represent conjugate loops."""
    if not l1.is_closed or not l2.is_closed:
        raise NotClosed("conjugacy is only defined for closed paths")
    return cyclic_tighten(l1) == cyclic_tighten(l2)


def path_from_tokens(graph, start, tokens):
    """Rebuild a based loop from a token stream, leading element identity."""
    return EdgePath(graph, start, 0, tokens)


def primitive_period(tokens):
    """Smallest d dividing len(tokens) with rotation by d fixing the stream."""
    n = len(tokens)
    for d in range(1, n + 1):
        if n % d:
            continue
        if all(tokens[i] == tokens[(i + d) % n] for i in range(n)):
            return d
    return n


# -- subgraphs and forests ---------------------------------------------------

class SubgraphOfGroups:
    """A subset of edges of a parent graph plus their incident vertices."""

    __slots__ = ("graph", "edge_set")

    def __init__(self, graph, edge_set):
        edge_set = frozenset(int(e) for e in edge_set)
        for e in edge_set:
            if not (0 <= e < graph.n_edges):
                raise ValueError("edge index out of range")
        self.graph = graph
        self.edge_set = edge_set

    @property
    def vertices(self):
        out = set()
        for e in self.edge_set:
            u, v = self.graph.edges[e]
            out.add(u)
            out.add(v)
        return out

    def components(self):
        """Connected components as (vertex set, edge set) pairs, sorted."""
        graph = self.graph
        unseen = set(self.edge_set)
        comps = []
        while unseen:
            e0 = min(unseen)
            comp_edges = {e0}
            unseen.discard(e0)
            comp_verts = set(graph.edges[e0])
            frontier = list(graph.edges[e0])
            while frontier:
                v = frontier.pop()
                for oe in graph.star(v):
                    e = oe >> 1
                    if e in unseen:
                        unseen.discard(e)
                        comp_edges.add(e)
                        for w in graph.edges[e]:
                            if w not in comp_verts:
                                comp_verts.add(w)
                                frontier.append(w)
            comps.append((comp_verts, comp_edges))
        comps.sort(key=lambda c: min(c[1]))
        return comps

    def is_empty(self):
        return not self.edge_set

    def __eq__(self, other):
        return (isinstance(other, SubgraphOfGroups)
                and self.graph is other.graph
                and self.edge_set == other.edge_set)

    def __repr__(self):
        names = sorted(self.graph.edge_names[e] for e in self.edge_set)
        return f"SubgraphOfGroups({names})"


def is_collapsible_forest(graph, sub):
    """Each component is a tree with at most one nontrivial vertex group.

    This is the trivial-edge-group form of the global-fixed-point condition:
    orienting every edge of the tree toward the (unique) nontrivial vertex
    makes every other attaching map surjective.
    """
    if isinstance(sub, SubgraphOfGroups):
        sub = sub.edge_set
    sub = SubgraphOfGroups(graph, sub)
    for verts, edges in sub.components():
        if len(edges) != len(verts) - 1:
            return False  # has a cycle
        nontrivial = sum(1 for v in verts if not graph.group_at(v).is_trivial)
        if nontrivial > 1:
            return False
    return True


def tree_path(graph, edge_set, x, y):
    """The tight element-free path from x to y inside a tree edge set."""
    if x == y:
        return EdgePath.point(graph, x)
    prev = {x: None}
    frontier = [x]
    while frontier:
        nxt = []
        for v in frontier:
            for oe in graph.star(v):
                if (oe >> 1) not in edge_set:
                    continue
                w = graph.init(oe)  # oe terminates at v, starts at w
                if w not in prev:
                    prev[w] = (oe ^ 1)  # oriented v -> w
                    nxt.append(w)
        frontier = nxt
        if y in prev:
            break
    if y not in prev:
        raise ValueError("vertices lie in different components")
    back = []
    v = y
    while v != x:
        oe = prev[v]
        back.append(oe)
        v = graph.init(oe)
    steps = tuple((oe, 0) for oe in reversed(back))
    return EdgePath(graph, x, 0, steps)


def graph_invariants(graph):
    """(eta, betti, complexity, edge_bound) of a connected graph of groups."""
    return graph.invariants()

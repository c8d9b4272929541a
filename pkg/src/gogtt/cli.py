"""The .gog text format and the command-line surface.

Grammar (one declaration per line, `#` starts a comment):

    group <Name> trivial | cyclic <n> | table <file>
    vertex <name> [<GroupName>]
    edge <name> <from> <to>            # declared orientation: tau(e) = to
    map <name> ... end                 # vmap / hom / edgemap lines
    marking ... end                    # base thistle plus its images
    marking_inverse ... end            # images back into the base

Path tokens: `e` (declared orientation), `~e` (reverse), and element tokens
`<gen>^<int>@<vertex>` with `^1` omitted, juxtaposed by whitespace.
"""
from __future__ import annotations

import argparse
import os
import sys

from .errors import (BudgetExceeded, GogError, ParseError, Reducible,
                     ResolveError)
from .eigen import poly_str
from .groups import GroupMap, GroupOracle
from .paths import EdgePath, GraphOfGroups, concat_paths, fwd, tighten
from .rep import GraphMap, TopRep, is_train_track, transition_matrix
from .rtt import (bounded_check, check_rtt, maximal_filtration, pf_sequence,
                  relative_train_track_algorithm)
from .traintrack import train_track_algorithm


class GogDocument:
    """A parsed .gog file: groups, one graph, named maps, optional marking."""

    __slots__ = ("groups", "graph", "maps", "marking", "marking_inv",
                 "base_graph")

    def __init__(self, groups, graph, maps, marking=None, marking_inv=None,
                 base_graph=None):
        self.groups = groups          # name -> GroupOracle, insertion order
        self.graph = graph
        self.maps = maps              # name -> TopRep (unmarked)
        self.marking = marking
        self.marking_inv = marking_inv
        self.base_graph = base_graph

    def rep(self, name=None):
        if not self.maps:
            raise ResolveError("the document declares no map")
        if name is None:
            name = next(iter(self.maps))
        if name not in self.maps:
            raise ResolveError(f"no map named {name}")
        rep = self.maps[name]
        if self.marking is not None and self.marking_inv is not None:
            rep = rep.with_marking(self.marking, self.marking_inv)
        return rep


def load_table_file(path, name):
    """A table group file: element names on the first data line (identity
    first), then one row of products per element."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ParseError(f"table file {path} is empty")
    names = lines[0].split()
    n = len(names)
    if len(lines) != n + 1:
        raise ParseError(f"table file {path} needs {n} rows, "
                         f"found {len(lines) - 1}")
    index = {nm: i for i, nm in enumerate(names)}
    table = []
    for ln in lines[1:]:
        row = ln.split()
        if len(row) != n or any(x not in index for x in row):
            raise ParseError(f"bad table row in {path}: {ln!r}")
        table.append([index[x] for x in row])
    return GroupOracle.from_table(names, table, name=name)


def _parse_element_token(tok, graph, vname_to_id, lineno):
    if "@" not in tok:
        return None
    body, _, vname = tok.rpartition("@")
    if vname not in vname_to_id:
        raise ResolveError(f"line {lineno}: unknown vertex {vname!r}")
    v = vname_to_id[vname]
    oracle = graph.group_at(v)
    eid = oracle.element_by_name(body)
    if eid is None and "^" in body:
        gen, _, power = body.rpartition("^")
        base = oracle.element_by_name(gen)
        try:
            k = int(power)
        except ValueError:
            base = None
            k = 0
        if base is not None:
            eid = oracle.power(base, k)
    if eid is None:
        raise ResolveError(
            f"line {lineno}: {body!r} is not an element of the group at "
            f"{vname}")
    return v, eid


def _parse_path(tokens, graph, vname_to_id, ename_to_id, lineno,
                start_hint=None):
    """Tokens to an EdgePath; element tokens merge into the current slot."""
    items = []
    for tok in tokens:
        el = _parse_element_token(tok, graph, vname_to_id, lineno)
        if el is not None:
            items.append(("el",) + el)
            continue
        name = tok
        reverse = name.startswith("~")
        if reverse:
            name = name[1:]
        if name not in ename_to_id:
            raise ResolveError(f"line {lineno}: unknown edge {name!r}")
        oe = fwd(ename_to_id[name]) ^ (1 if reverse else 0)
        items.append(("edge", oe))
    # assemble
    if not items:
        raise ParseError("empty path", lineno)
    if items[0][0] == "el":
        start = items[0][1]
    else:
        start = graph.init(items[0][1])
    del start_hint  # endpoints are validated by the map constructors
    path = EdgePath.point(graph, start)
    for item in items:
        if item[0] == "el":
            _, v, g = item
            piece = EdgePath.point(graph, v, g)
        else:
            piece = EdgePath.of_edge(graph, item[1])
        try:
            path = concat_paths(path, piece)
        except GogError as exc:
            raise ParseError(str(exc), lineno)
    return path


def parse(text):
    """Parse .gog text into a GogDocument."""
    groups = {}
    vertices = []          # (name, oracle)
    edges = []             # (name, from, to)
    map_blocks = {}
    marking_block = None
    minv_block = None
    base_vertices = []
    base_edges = []

    lines = text.splitlines()
    block = None           # None | ('map', name, data) | ('marking', data)...
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0]
        if block is not None:
            kind = block[0]
            data = block[-1]
            if head == "end":
                block = None
                continue
            if head == "vmap":
                if len(toks) != 4 or toks[2] != "->":
                    raise ParseError("vmap needs `vmap v -> w`", lineno)
                data["vmap"].append((toks[1], toks[3], lineno))
            elif head == "hom":
                if len(toks) < 4 or not toks[1].endswith(":") \
                        or toks[3] != "->" or len(toks) != 5:
                    raise ParseError(
                        "hom needs `hom v: gen -> token`", lineno)
                data["hom"].append((toks[1][:-1], toks[2], toks[4], lineno))
            elif head == "edgemap":
                if len(toks) < 4 or toks[2] != "->":
                    raise ParseError(
                        "edgemap needs `edgemap e -> path`", lineno)
                data["edgemap"].append((toks[1], toks[3:], lineno))
            elif kind == "marking" and head == "base":
                if len(toks) >= 3 and toks[1] == "vertex":
                    gname = toks[3] if len(toks) > 3 else None
                    base_vertices.append((toks[2], gname, lineno))
                elif len(toks) == 5 and toks[1] == "edge":
                    base_edges.append((toks[2], toks[3], toks[4], lineno))
                else:
                    raise ParseError("bad base declaration", lineno)
            else:
                raise ParseError(f"unexpected {head!r} in block", lineno)
            continue
        if head == "group":
            if len(toks) < 3:
                raise ParseError("group needs a name and a kind", lineno)
            name, kind = toks[1], toks[2]
            if name in groups:
                raise ParseError(f"duplicate group {name!r}", lineno)
            if kind == "trivial":
                groups[name] = GroupOracle.trivial()
            elif kind == "cyclic":
                if len(toks) != 4:
                    raise ParseError("cyclic needs an order", lineno)
                try:
                    order = int(toks[3])
                except ValueError:
                    raise ParseError("cyclic order must be an integer",
                                     lineno)
                groups[name] = GroupOracle.cyclic(order, name=name)
            elif kind == "table":
                if len(toks) != 4:
                    raise ParseError("table needs a file", lineno)
                groups[name] = load_table_file(toks[3], name)
            else:
                raise ParseError(f"unknown group kind {kind!r}", lineno)
        elif head == "vertex":
            if len(toks) not in (2, 3):
                raise ParseError("vertex needs `vertex name [Group]`",
                                 lineno)
            vertices.append((toks[1], toks[2] if len(toks) == 3 else None,
                             lineno))
        elif head == "edge":
            if len(toks) != 4:
                raise ParseError("edge needs `edge name from to`", lineno)
            edges.append((toks[1], toks[2], toks[3], lineno))
        elif head == "map":
            if len(toks) != 2:
                raise ParseError("map needs a name", lineno)
            if toks[1] in map_blocks:
                raise ParseError(f"duplicate map {toks[1]!r}", lineno)
            data = {"vmap": [], "hom": [], "edgemap": []}
            map_blocks[toks[1]] = data
            block = ("map", toks[1], data)
        elif head == "marking":
            marking_block = {"vmap": [], "hom": [], "edgemap": []}
            block = ("marking", marking_block)
        elif head == "marking_inverse":
            minv_block = {"vmap": [], "hom": [], "edgemap": []}
            block = ("marking_inverse", minv_block)
        else:
            raise ParseError(f"unknown declaration {head!r}", lineno)
    if block is not None:
        raise ParseError("unterminated block at end of file")
    if not vertices:
        raise ParseError("no graph declared")

    def build_graph(vdecls, edecls):
        vnames = []
        oracles = []
        for (name, gname, lineno) in vdecls:
            if name in vnames:
                raise ParseError(f"duplicate vertex {name!r}", lineno)
            if gname is None:
                oracles.append(GroupOracle.trivial())
            elif gname in groups:
                oracles.append(groups[gname])
            else:
                raise ResolveError(f"line {lineno}: unknown group {gname!r}")
            vnames.append(name)
        vmap = {n: i for i, n in enumerate(vnames)}
        epairs, enames = [], []
        for (name, a, b, lineno) in edecls:
            if name in enames:
                raise ParseError(f"duplicate edge {name!r}", lineno)
            if a not in vmap or b not in vmap:
                raise ResolveError(
                    f"line {lineno}: unknown vertex in edge {name!r}")
            epairs.append((vmap[a], vmap[b]))
            enames.append(name)
        try:
            return GraphOfGroups(oracles, epairs, vnames, enames), vmap, \
                {n: i for i, n in enumerate(enames)}
        except ValueError as exc:
            raise ParseError(str(exc))

    graph, vname_to_id, ename_to_id = build_graph(vertices, edges)

    def build_map(data, domain, codomain, dom_v, dom_e, cod_v, cod_e,
                  allow_partial_hom=True):
        vm = [None] * domain.n_vertices
        for (a, b, lineno) in data["vmap"]:
            if a not in dom_v:
                raise ResolveError(f"line {lineno}: unknown vertex {a!r}")
            if b not in cod_v:
                raise ResolveError(f"line {lineno}: unknown vertex {b!r}")
            vm[dom_v[a]] = cod_v[b]
        for v in range(domain.n_vertices):
            if vm[v] is None:
                if domain is codomain:
                    vm[v] = v  # unstated vertices map identically
                else:
                    raise ResolveError(
                        f"missing vmap for {domain.vertex_names[v]!r}")
        hom_pairs = {v: {0: 0} for v in range(domain.n_vertices)}
        for (vname, gen, token, lineno) in data["hom"]:
            if vname not in dom_v:
                raise ResolveError(f"line {lineno}: unknown vertex {vname!r}")
            v = dom_v[vname]
            src = domain.group_at(v)
            gid = src.element_by_name(gen)
            if gid is None:
                raise ResolveError(
                    f"line {lineno}: {gen!r} is not an element at {vname}")
            el = _parse_element_token(token, codomain, cod_v, lineno)
            if el is None:
                raise ResolveError(f"line {lineno}: bad element token")
            w, img = el
            if w != vm[v]:
                raise ResolveError(
                    f"line {lineno}: hom target vertex disagrees with vmap")
            hom_pairs[v][gid] = img
        homs = []
        for v in range(domain.n_vertices):
            src = domain.group_at(v)
            tgt = codomain.group_at(vm[v])
            table = dict(hom_pairs[v])
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
                            raise ResolveError(
                                f"hom at {domain.vertex_names[v]!r} is not "
                                "a homomorphism")
            if len(table) != src.size:
                raise ResolveError(
                    f"hom at {domain.vertex_names[v]!r} does not determine "
                    "the map on the whole group")
            homs.append(GroupMap(src, tgt,
                                 tuple(table[a] for a in range(src.size))))
        imgs = [None] * domain.n_edges
        for (ename, toks, lineno) in data["edgemap"]:
            if ename not in dom_e:
                raise ResolveError(f"line {lineno}: unknown edge {ename!r}")
            e = dom_e[ename]
            start = vm[domain.edges[e][0]]
            p = _parse_path(toks, codomain, cod_v, cod_e, lineno,
                            start_hint=start)
            imgs[e] = tighten(p)
        for e in range(domain.n_edges):
            if imgs[e] is None:
                raise ResolveError(
                    f"missing edgemap for {domain.edge_names[e]!r}")
        return vm, homs, imgs

    maps = {}
    for name, data in map_blocks.items():
        vm, homs, imgs = build_map(data, graph, graph, vname_to_id,
                                   ename_to_id, vname_to_id, ename_to_id)
        try:
            maps[name] = TopRep(graph, vm, homs, imgs)
        except (ValueError, GogError) as exc:
            raise ResolveError(f"map {name!r}: {exc}")

    marking = marking_inv = base_graph = None
    if marking_block is not None:
        if not base_vertices:
            raise ParseError("marking block declares no base graph")
        base_graph, base_v, base_e = build_graph(base_vertices, base_edges)
        vm, homs, imgs = build_map(marking_block, base_graph, graph,
                                   base_v, base_e, vname_to_id, ename_to_id)
        marking = GraphMap(base_graph, graph, vm, homs, imgs)
        if minv_block is not None:
            vm2, homs2, imgs2 = build_map(minv_block, graph, base_graph,
                                          vname_to_id, ename_to_id,
                                          base_v, base_e)
            marking_inv = GraphMap(graph, base_graph, vm2, homs2, imgs2)
    return GogDocument(groups, graph, maps, marking, marking_inv, base_graph)


# -- emitting -----------------------------------------------------------------


def _element_token(graph, v, g):
    oracle = graph.group_at(v)
    return f"{oracle.element_name(g)}@{graph.vertex_names[v]}"


def _path_tokens(graph, p):
    toks = []
    if p.g0 != 0 or p.is_point:
        toks.append(_element_token(graph, p.start, p.g0))
    for (oe, g) in p.steps:
        toks.append(graph.oedge_name(oe))
        if g != 0:
            toks.append(_element_token(graph, graph.term(oe), g))
    return toks


def _emit_map_block(out, header, domain, codomain, vm, homs, imgs,
                    prefix=""):
    out.append(header)
    for v in range(domain.n_vertices):
        out.append(f"{prefix}vmap {domain.vertex_names[v]} -> "
                   f"{codomain.vertex_names[vm[v]]}")
    for v in range(domain.n_vertices):
        oracle = domain.group_at(v)
        if oracle.is_trivial:
            continue
        gens = [oracle.generator_id()] if oracle.kind == "cyclic" \
            else list(range(1, oracle.size))
        for g in gens:
            out.append(
                f"{prefix}hom {domain.vertex_names[v]}: "
                f"{oracle.element_name(g)} -> "
                f"{_element_token(codomain, vm[v], homs[v].apply(g))}")
    for e in range(domain.n_edges):
        toks = " ".join(_path_tokens(codomain, imgs[e]))
        out.append(f"{prefix}edgemap {domain.edge_names[e]} -> {toks}")
    out.append("end")


def emit(doc):
    """Canonical text for a document; stable byte-for-byte."""
    out = []
    emitted = set()
    for name, oracle in doc.groups.items():
        if oracle.kind == "trivial":
            out.append(f"group {name} trivial")
        elif oracle.kind == "cyclic":
            out.append(f"group {name} cyclic {oracle.size}")
        else:
            raise GogError(
                "table groups cannot be re-emitted without their file")
        emitted.add(id(oracle))
    graph = doc.graph
    reverse_names = {}
    for name, oracle in doc.groups.items():
        reverse_names[id(oracle)] = name
    for v in range(graph.n_vertices):
        oracle = graph.group_at(v)
        if oracle.is_trivial and id(oracle) not in reverse_names:
            out.append(f"vertex {graph.vertex_names[v]}")
        else:
            gname = reverse_names.get(id(oracle))
            if gname is None:
                raise GogError("vertex group missing a declaration")
            out.append(f"vertex {graph.vertex_names[v]} {gname}")
    for e in range(graph.n_edges):
        u, v = graph.edges[e]
        out.append(f"edge {graph.edge_names[e]} {graph.vertex_names[u]} "
                   f"{graph.vertex_names[v]}")
    for name, rep in doc.maps.items():
        _emit_map_block(out, f"map {name}", graph, graph, rep.vertex_map,
                        rep.vertex_homs, rep.edge_images, prefix="  ")
    if doc.marking is not None and doc.base_graph is not None:
        base = doc.base_graph
        out.append("marking")
        for v in range(base.n_vertices):
            oracle = base.group_at(v)
            if oracle.is_trivial and id(oracle) not in reverse_names:
                out.append(f"  base vertex {base.vertex_names[v]}")
            else:
                out.append(f"  base vertex {base.vertex_names[v]} "
                           f"{reverse_names[id(oracle)]}")
        for e in range(base.n_edges):
            u, v = base.edges[e]
            out.append(f"  base edge {base.edge_names[e]} "
                       f"{base.vertex_names[u]} {base.vertex_names[v]}")
        m = doc.marking
        for v in range(base.n_vertices):
            out.append(f"  vmap {base.vertex_names[v]} -> "
                       f"{graph.vertex_names[m.vertex_map[v]]}")
        for v in range(base.n_vertices):
            oracle = base.group_at(v)
            if oracle.is_trivial:
                continue
            gens = [oracle.generator_id()] if oracle.kind == "cyclic" \
                else list(range(1, oracle.size))
            for g in gens:
                out.append(f"  hom {base.vertex_names[v]}: "
                           f"{oracle.element_name(g)} -> "
                           f"{_element_token(graph, m.vertex_map[v], m.vertex_homs[v].apply(g))}")
        for e in range(base.n_edges):
            toks = " ".join(_path_tokens(graph, m.edge_images[e]))
            out.append(f"  edgemap {base.edge_names[e]} -> {toks}")
        out.append("end")
        if doc.marking_inv is not None:
            mi = doc.marking_inv
            _emit_map_block(out, "marking_inverse", graph, base,
                            mi.vertex_map, mi.vertex_homs, mi.edge_images,
                            prefix="  ")
    return "\n".join(out) + "\n"


def doc_of_rep(rep, groups=None):
    """Wrap a (possibly marked) representative as a document for emit."""
    graph = rep.graph
    if groups is None:
        groups = {}
        for v in range(graph.n_vertices):
            oracle = graph.group_at(v)
            if oracle.is_trivial:
                continue
            name = oracle.name
            base = name
            k = 1
            while name in groups and groups[name] is not oracle:
                k += 1
                name = f"{base}{k}"
            groups[name] = oracle
    return GogDocument(
        groups, graph, {"f": rep},
        marking=rep.marking, marking_inv=rep.marking_inv,
        base_graph=rep.marking.domain if rep.marking is not None else None)


# -- commands -----------------------------------------------------------------


def _load(path, map_name):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(3)
    doc = parse(text)
    return doc, doc.rep(map_name)


def _print_trace(entries, rep=None):
    verbose = os.environ.get("GOG_TRACE", "") == "verbose"
    for entry in entries:
        print(entry.format())
        if verbose and rep is not None:
            for row in transition_matrix(rep).rows:
                print("  " + " ".join(str(x) for x in row))


def cmd_info(args):
    doc, rep = _load(args.input, args.map)
    graph = rep.graph
    eta, betti, complexity, bound = graph.invariants()
    print(f"graph: {graph.n_vertices} vertices, {graph.n_edges} edges")
    print(f"eta={eta} beta={betti} complexity={complexity} "
          f"edge-bound={bound}")
    print("edges: " + " ".join(graph.edge_names))
    mat = transition_matrix(rep)
    print("matrix:")
    for row in mat.rows:
        print("  " + " ".join(str(x) for x in row))
    irr = mat.is_irreducible()
    print(f"irreducible: {'yes' if irr else 'no'}")
    if irr:
        lam = mat.pf()
        print(f"lambda = {lam.decimal(20)} "
              f"(minimal polynomial {poly_str(lam.minimal_polynomial())})")
    filt = maximal_filtration(rep)
    print(f"strata: {len(filt.strata)}")
    for i, s in enumerate(filt.strata):
        names = " ".join(graph.edge_names[e] for e in s.edges)
        extra = ""
        if s.cls == "eg":
            extra = (f" lambda={s.eigenvalue.decimal(20)} "
                     f"({poly_str(s.eigenvalue.minimal_polynomial())})")
        print(f"  {i}: {s.cls} [{names}]{extra}")
    return 0


def cmd_tt(args):
    doc, rep = _load(args.input, args.map)
    if rep.marking is None:
        ident = GraphMap.identity(rep.graph)
        rep = rep.with_marking(ident, ident)
    try:
        out, trace = train_track_algorithm(rep, budget=args.budget)
    except Reducible as exc:
        print(f"reducible: {exc}", file=sys.stderr)
        if exc.witness is not None:
            names = sorted(rep.graph.edge_names[e]
                           for e in exc.witness.edge_set)
            print("invariant subgraph: " + " ".join(names), file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 2
    _print_trace(trace, out)
    _write_output(args, out)
    return 0


def cmd_rtt(args):
    doc, rep = _load(args.input, args.map)
    if rep.marking is None:
        ident = GraphMap.identity(rep.graph)
        rep = rep.with_marking(ident, ident)
    try:
        out, filt, trace = relative_train_track_algorithm(
            rep, budget=args.budget)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        for entry in exc.trace:
            print(entry.format(), file=sys.stderr)
        return 2
    _print_trace(trace, out)
    print(f"strata: {[s.cls for s in filt.strata]}")
    _write_output(args, out)
    return 0


def _write_output(args, rep):
    out_path = args.out
    if out_path is None:
        base, _ = os.path.splitext(args.input)
        out_path = f"{base}.out.gog"
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(emit(doc_of_rep(rep)))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(3)
    print(f"wrote {out_path}")


def cmd_check(args):
    doc, rep = _load(args.input, args.map)
    report = is_train_track(rep)
    print(f"train track: {'yes' if report.ok else 'no'}")
    for (e, pos, t) in report.offenders:
        print(f"  illegal turn {t} taken by image of "
              f"{rep.graph.edge_names[e]} at position {pos}")
    filt = maximal_filtration(rep)
    rtt_report = check_rtt(rep, filt)
    print(f"relative train track: {'yes' if rtt_report.ok else 'no'}")
    okb, data = bounded_check(rep, filt)
    print(f"bounded: {'yes' if okb else 'no'} "
          f"(EG strata {data['eg_count']}, bound {data['bound']})")
    for verdict in rtt_report.stratum_verdicts:
        r = verdict["stratum"]
        flags = []
        for key in ("eg1", "eg2", "eg3"):
            ok, witness = verdict[key]
            flags.append(f"{key}={'pass' if ok else 'fail'}")
        print(f"  stratum {r}: " + " ".join(flags))
    return 0


def cmd_dot(args):
    doc, rep = _load(args.input, args.map)
    graph = rep.graph
    lines = ["digraph gog {"]
    for v in range(graph.n_vertices):
        oracle = graph.group_at(v)
        label = graph.vertex_names[v]
        if not oracle.is_trivial:
            label += f" ({oracle.name}, |G|={oracle.size})"
        lines.append(f'  v{v} [label="{label}"];')
    for e in range(graph.n_edges):
        u, v = graph.edges[e]
        toks = " ".join(_path_tokens(graph, rep.edge_images[e]))
        lines.append(f'  v{u} -> v{v} [label="{graph.edge_names[e]}: '
                     f'{toks}"];')
    lines.append("}")
    text = "\n".join(lines) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            raise SystemExit(3)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gogtt",
        description="Train track maps on graphs of groups with trivial "
                    "edge groups.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("info", cmd_info), ("tt", cmd_tt), ("rtt", cmd_rtt),
                     ("check", cmd_check), ("dot", cmd_dot)):
        p = sub.add_parser(name)
        p.add_argument("input")
        p.add_argument("--map", default=None)
        p.add_argument("--budget", type=int, default=10000)
        p.add_argument("-o", "--out", default=None)
        p.set_defaults(fn=fn)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, ResolveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        return exc.code
    except Reducible as exc:
        print(f"reducible: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 2
    except GogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

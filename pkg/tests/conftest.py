"""Shared builders: the worked C2*C2*C2*C2 example, small oracles, and a
random-automorphism generator built from elementary automorphisms (so every
sample is genuinely invertible).
"""
import random

import pytest

from gogtt.groups import GroupMap, GroupOracle, group_iso
from gogtt.paths import EdgePath, GraphOfGroups, fwd
from gogtt.rep import GraphMap, TopRep
from gogtt.traintrack import AutomorphismInput


def s3_oracle():
    """S3 from an explicit hand-written permutation table."""
    perms = [(0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (2, 1, 0),
             (1, 0, 2)]
    names = ["1", "r", "r^2", "s", "rs", "r^2s"]

    def compose(p, q):
        return tuple(p[q[i]] for i in range(3))

    table = [[perms.index(compose(p, q)) for q in perms] for p in perms]
    return GroupOracle.from_table(names, table, name="S3")


def example1_rep(marked=True):
    """The thistle representative of a->b->c->d, d->cbdadbc."""
    oracles = [GroupOracle.cyclic(2, n) for n in "abcd"]
    triv = GroupOracle.trivial()
    graph = GraphOfGroups([triv] + oracles, [(1, 0), (2, 0), (3, 0), (4, 0)],
                          ["star", "va", "vb", "vc", "vd"],
                          ["e1", "e2", "e3", "e4"])
    e1, e2, e3, e4 = fwd(0), fwd(1), fwd(2), fwd(3)

    def iso(s, t):
        return group_iso(s, t, tuple(range(s.size)))

    homs = (GroupMap.identity(triv), iso(oracles[0], oracles[1]),
            iso(oracles[1], oracles[2]), iso(oracles[2], oracles[3]),
            iso(oracles[3], oracles[0]))
    im4 = EdgePath(graph, 1, 0, [(e1, 0), (e4 ^ 1, 1), (e4, 0), (e2 ^ 1, 1),
                                 (e2, 0), (e3 ^ 1, 1), (e3, 0)])
    images = (EdgePath.of_edge(graph, e2), EdgePath.of_edge(graph, e3),
              EdgePath.of_edge(graph, e4), im4)
    kwargs = {}
    if marked:
        ident = GraphMap.identity(graph)
        kwargs = {"marking": ident, "marking_inv": ident}
    return TopRep(graph, (0, 2, 3, 4, 1), homs, images, **kwargs)


def example1_auto():
    oracles = [GroupOracle.cyclic(2, n) for n in "abcd"]

    def el(i):
        return ("el", i, 1)

    return AutomorphismInput(
        oracles, 0,
        [[(1, [el(1)])], [(1, [el(2)])], [(1, [el(3)])],
         [(1, [el(2), el(1), el(3), el(0), el(3), el(1), el(2)])]],
        [])


def example1_f2_fixture():
    """The train track map the worked example terminates at."""
    oracles = [GroupOracle.cyclic(2, n) for n in "abcd"]
    triv = GroupOracle.trivial()
    graph = GraphOfGroups([triv] + oracles, [(1, 0), (2, 0), (3, 0), (4, 0)],
                          ["star", "va", "vb", "vc", "vd"],
                          ["e1", "e2", "e3", "e4"])
    e1, e2, e3, e4 = fwd(0), fwd(1), fwd(2), fwd(3)

    def iso(s, t):
        return group_iso(s, t, tuple(range(s.size)))

    homs = (GroupMap.identity(triv), iso(oracles[0], oracles[1]),
            iso(oracles[1], oracles[2]), iso(oracles[2], oracles[3]),
            iso(oracles[3], oracles[0]))
    im3 = EdgePath(graph, 4, 0, [(e4, 0), (e2 ^ 1, 1), (e2, 0)])
    im4 = EdgePath(graph, 1, 0, [(e1, 0), (e2 ^ 1, 1), (e2, 0),
                                 (e4 ^ 1, 1), (e4, 0)])
    images = (EdgePath.of_edge(graph, e2), EdgePath.of_edge(graph, e3),
              im3, im4)
    return TopRep(graph, (0, 2, 3, 4, 1), homs, images)


# -- word maps and elementary automorphisms -----------------------------------


def _invert_word(oracles, word):
    out = []
    for tok in reversed(word):
        if tok[0] == "el":
            _, i, g = tok
            out.append(("el", i, oracles[i].inv(g)))
        else:
            _, j, s = tok
            out.append(("pet", j, -s))
    return out


class WordMap:
    """An automorphism as a token substitution; composable."""

    def __init__(self, oracles, petals, el_fn, pet_fn):
        self.oracles = oracles
        self.petals = petals
        self.el_fn = el_fn      # (i, g) -> word
        self.pet_fn = pet_fn    # j -> word (image of the positive letter)

    def apply_word(self, word):
        out = []
        for tok in word:
            if tok[0] == "el":
                out.extend(self.el_fn(tok[1], tok[2]))
            else:
                img = self.pet_fn(tok[1])
                out.extend(img if tok[2] > 0
                           else _invert_word(self.oracles, img))
        return out

    def compose(self, inner):
        """self after inner."""
        return WordMap(
            self.oracles, self.petals,
            lambda i, g: self.apply_word(inner.el_fn(i, g)),
            lambda j: self.apply_word(inner.pet_fn(j)))

    @classmethod
    def identity(cls, oracles, petals):
        return cls(oracles, petals,
                   lambda i, g: [("el", i, g)],
                   lambda j: [("pet", j, 1)])

    def to_input(self):
        factor_images = []
        for i, oracle in enumerate(self.oracles):
            gens = [oracle.generator_id()] if oracle.kind == "cyclic" \
                else list(range(1, oracle.size))
            factor_images.append([(g, self.el_fn(i, g)) for g in gens])
        petal_images = [self.pet_fn(j) for j in range(self.petals)]
        return AutomorphismInput(self.oracles, self.petals, factor_images,
                                 petal_images)


def elementary_automorphisms(oracles, petals):
    """Whitehead-style generators: factor swaps and automorphisms, partial
    conjugations, petal transvections/inversions/swaps."""
    out = []
    n = len(oracles)
    letters = [("el", i, oracles[i].generator_id()) for i in range(n)]
    letters += [("pet", j, 1) for j in range(petals)]

    def base(el_fn=None, pet_fn=None):
        ident = WordMap.identity(oracles, petals)
        return WordMap(oracles, petals, el_fn or ident.el_fn,
                       pet_fn or ident.pet_fn)

    # factor swaps between same-size cyclic factors (identity on ids)
    for i in range(n):
        for j in range(i + 1, n):
            if oracles[i].same_table(oracles[j]):
                def swap_el(a, g, i=i, j=j):
                    if a == i:
                        return [("el", j, g)]
                    if a == j:
                        return [("el", i, g)]
                    return [("el", a, g)]
                out.append(base(el_fn=swap_el))
    # factor automorphisms: inversion of a cyclic factor of order > 2
    for i in range(n):
        if oracles[i].kind == "cyclic" and oracles[i].size > 2:
            def invert_el(a, g, i=i):
                if a == i:
                    return [("el", i, oracles[i].inv(g))]
                return [("el", a, g)]
            out.append(base(el_fn=invert_el))
    # partial conjugation of one factor by any letter
    for i in range(n):
        for t in letters:
            if t[0] == "el" and t[1] == i:
                continue
            tinv = _invert_word(oracles, [t])[0]

            def conj_el(a, g, i=i, t=t, tinv=tinv):
                if a == i:
                    return [t, ("el", a, g), tinv]
                return [("el", a, g)]
            out.append(base(el_fn=conj_el))
    # petal transvections and inversions
    for j in range(petals):
        for t in letters:
            if t == ("pet", j, 1):
                continue

            def left_pet(b, j=j, t=t):
                if b == j:
                    return [t, ("pet", j, 1)]
                return [("pet", b, 1)]
            out.append(base(pet_fn=left_pet))

            def right_pet(b, j=j, t=t):
                if b == j:
                    return [("pet", j, 1), t]
                return [("pet", b, 1)]
            out.append(base(pet_fn=right_pet))

        def inv_pet(b, j=j):
            if b == j:
                return [("pet", j, -1)]
            return [("pet", b, 1)]
        out.append(base(pet_fn=inv_pet))
    return out


def random_automorphism(oracles, petals, rng, max_length=8):
    gens = elementary_automorphisms(oracles, petals)
    word = WordMap.identity(oracles, petals)
    for _ in range(rng.randint(1, max_length)):
        word = rng.choice(gens).compose(word)
    return word.to_input()


@pytest.fixture
def rng():
    return random.Random(20260808)

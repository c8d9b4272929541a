"""Finite vertex-group oracles with exact arithmetic.

Every group is given by a complete multiplication table on element ids
``0 .. size-1`` with id 0 the identity.  Tables are validated on
construction, so all later arithmetic can assume the axioms hold.
"""
from __future__ import annotations

import itertools

from .errors import GroupTableError, IdOutOfRange, OracleMismatch


class GroupOracle:
    """A finite group with total operations on small element ids.

    ``kind`` is one of ``'trivial'``, ``'cyclic'``, ``'table'``.  For cyclic
    groups the generator is named after the oracle and elements print as
    generator powers; table groups carry explicit element names.
    """

    __slots__ = ("kind", "size", "name", "_mul", "_inv", "_names", "_by_name")

    def __init__(self, kind, name, names, table):
        size = len(names)
        if size == 0:
            raise GroupTableError("a group needs at least the identity")
        if len(table) != size or any(len(row) != size for row in table):
            raise GroupTableError("multiplication table is not square")
        for row in table:
            for x in row:
                if not (0 <= x < size):
                    raise GroupTableError("table entry out of range")
        for a in range(size):
            if table[0][a] != a or table[a][0] != a:
                raise GroupTableError("id 0 is not an identity")
        inv = [None] * size
        for a in range(size):
            for b in range(size):
                if table[a][b] == 0:
                    inv[a] = b
            if inv[a] is None or table[inv[a]][a] != 0:
                raise GroupTableError(f"element {a} has no two-sided inverse")
        for a, b, c in itertools.product(range(size), repeat=3):
            if table[table[a][b]][c] != table[a][table[b][c]]:
                raise GroupTableError("multiplication is not associative")
        if len(set(names)) != size:
            raise GroupTableError("element names are not distinct")
        self.kind = kind
        self.size = size
        self.name = name
        self._mul = tuple(tuple(row) for row in table)
        self._inv = tuple(inv)
        self._names = tuple(names)
        self._by_name = {n: i for i, n in enumerate(names)}

    # -- constructors --------------------------------------------------

    @classmethod
    def trivial(cls):
        return _TRIVIAL

    @classmethod
    def cyclic(cls, n, name="g"):
        if n < 1:
            raise GroupTableError("cyclic order must be positive")
        if n == 1:
            return cls("trivial", name, ("1",), ((0,),))
        names = ["1", name] + [f"{name}^{k}" for k in range(2, n)]
        table = [[(a + b) % n for b in range(n)] for a in range(n)]
        return cls("cyclic", name, names, table)

    @classmethod
    def from_table(cls, names, table, name="G"):
        return cls("table", name, tuple(names), table)

    # -- arithmetic ------------------------------------------------------

    def check(self, a):
        if not (0 <= a < self.size):
            raise IdOutOfRange(f"element id {a} out of range for {self.name}")
        return a

    def mul(self, a, b):
        return self._mul[self.check(a)][self.check(b)]

    def inv(self, a):
        return self._inv[self.check(a)]

    def is_id(self, a):
        return self.check(a) == 0

    def eq(self, a, b):
        return self.check(a) == self.check(b)

    def power(self, a, k):
        self.check(a)
        if k < 0:
            a, k = self._inv[a], -k
        out = 0
        for _ in range(k):
            out = self._mul[out][a]
        return out

    def order_of(self, a):
        self.check(a)
        x, n = a, 1
        while x != 0:
            x = self._mul[x][a]
            n += 1
        return n if a != 0 else 1

    def conjugate(self, g, a):
        """g * a * g^-1."""
        return self.mul(self.mul(g, a), self.inv(g))

    # -- elements ----------------------------------------------------------

    @property
    def is_trivial(self):
        return self.size == 1

    def element(self, a):
        return GroupElement(self, self.check(a))

    def elements(self):
        return (GroupElement(self, a) for a in range(self.size))

    def element_name(self, a):
        return self._names[self.check(a)]

    def element_by_name(self, name):
        return self._by_name.get(name)

    def generator_id(self):
        """The distinguished generator for cyclic oracles (id 1)."""
        if self.size == 1:
            return 0
        return 1

    def same_table(self, other):
        return self.size == other.size and self._mul == other._mul

    def __repr__(self):
        return f"GroupOracle({self.kind}, {self.name!r}, size={self.size})"


_TRIVIAL = GroupOracle("trivial", "1", ("1",), ((0,),))


class GroupElement:
    """An element of a specific oracle; thin, immutable, comparable."""

    __slots__ = ("oracle", "id")

    def __init__(self, oracle, eid):
        self.oracle = oracle
        self.id = oracle.check(eid)

    def __mul__(self, other):
        if other.oracle is not self.oracle:
            raise OracleMismatch("elements belong to different oracles")
        return GroupElement(self.oracle, self.oracle.mul(self.id, other.id))

    def inv(self):
        return GroupElement(self.oracle, self.oracle.inv(self.id))

    @property
    def is_identity(self):
        return self.id == 0

    def __eq__(self, other):
        return (isinstance(other, GroupElement)
                and other.oracle is self.oracle and other.id == self.id)

    def __hash__(self):
        return hash((id(self.oracle), self.id))

    def __repr__(self):
        return f"{self.oracle.name}:{self.oracle.element_name(self.id)}"


class GroupMap:
    """An injective homomorphism between oracles, stored as an id table.

    The homomorphism property is checked exhaustively on construction;
    oracles are small enough that this is free.  A map whose source and
    target have equal size is an isomorphism.
    """

    __slots__ = ("source", "target", "table")

    def __init__(self, source, target, table):
        if len(table) != source.size:
            raise GroupTableError("homomorphism table has wrong length")
        for x in table:
            target.check(x)
        if table[0] != 0:
            raise GroupTableError("homomorphism must send identity to identity")
        if len(set(table)) != len(table):
            raise GroupTableError("vertex-group map must be injective")
        for a in range(source.size):
            for b in range(source.size):
                if table[source.mul(a, b)] != target.mul(table[a], table[b]):
                    raise GroupTableError("table is not a homomorphism")
        self.source = source
        self.target = target
        self.table = tuple(table)

    @classmethod
    def identity(cls, oracle):
        return cls(oracle, oracle, tuple(range(oracle.size)))

    @classmethod
    def trivial_into(cls, target):
        return cls(_TRIVIAL, target, (0,))

    @property
    def is_iso(self):
        return self.source.size == self.target.size

    def apply(self, a):
        return self.table[self.source.check(a)]

    def inverse(self):
        if not self.is_iso:
            raise GroupTableError("only isomorphisms can be inverted")
        inv = [0] * self.target.size
        for a, fa in enumerate(self.table):
            inv[fa] = a
        return GroupMap(self.target, self.source, tuple(inv))

    def compose(self, inner):
        """self o inner (apply inner first)."""
        if inner.target is not self.source and not inner.target.same_table(self.source):
            raise OracleMismatch("homomorphisms do not compose")
        return GroupMap(inner.source, self.target,
                        tuple(self.table[x] for x in inner.table))

    def __eq__(self, other):
        return (isinstance(other, GroupMap) and self.source is other.source
                and self.target is other.target and self.table == other.table)

    def __hash__(self):
        return hash((id(self.source), id(self.target), self.table))

    def __repr__(self):
        return f"GroupMap({self.source.name}->{self.target.name}, {self.table})"


def iso_apply(iso, g):
    """Image of a GroupElement under a GroupMap between its oracles."""
    if g.oracle is not iso.source:
        raise OracleMismatch("element does not belong to the map's source")
    return GroupElement(iso.target, iso.apply(g.id))


def group_iso(source, target, table):
    """A GroupMap that is required to be an isomorphism."""
    m = GroupMap(source, target, table)
    if not m.is_iso:
        raise GroupTableError("vertex-group map is not surjective")
    return m

import itertools

import pytest

from gogtt.errors import GroupTableError, IdOutOfRange, OracleMismatch
from gogtt.groups import GroupElement, GroupMap, GroupOracle, group_iso, \
    iso_apply

from conftest import s3_oracle


def test_cyclic_two_arithmetic():
    c2 = GroupOracle.cyclic(2, "a")
    assert c2.mul(1, 1) == 0          # order-2 generator squares to identity
    assert c2.inv(1) == 1             # c^-1 = c
    assert c2.is_id(0) and not c2.is_id(1)
    assert c2.eq(1, 1)


def test_s3_table_against_hand_calculation():
    s3 = s3_oracle()
    assert s3.size == 6
    r = s3.element_by_name("r")
    s = s3.element_by_name("s")
    # hand check: r = (0 1 2), s = (1 2); r*s as composition is (1,0,2)
    rs = s3.mul(r, s)
    assert s3.element_name(rs) == "r^2s"
    assert s3.mul(s, s) == 0
    assert s3.mul(r, s3.mul(r, r)) == 0
    assert s3.order_of(r) == 3 and s3.order_of(s) == 2
    # conjugation s r s^-1 = r^-1
    assert s3.conjugate(s, r) == s3.inv(r)


def test_group_axioms_exhaustive():
    for oracle in (GroupOracle.cyclic(2), GroupOracle.cyclic(3),
                   GroupOracle.cyclic(5), s3_oracle()):
        n = oracle.size
        for a, b, c in itertools.product(range(n), repeat=3):
            assert oracle.mul(oracle.mul(a, b), c) == \
                oracle.mul(a, oracle.mul(b, c))
        for a in range(n):
            assert oracle.mul(a, oracle.inv(a)) == 0
            assert oracle.mul(oracle.inv(a), a) == 0
            assert oracle.mul(a, 0) == a == oracle.mul(0, a)


def test_bad_tables_rejected():
    with pytest.raises(GroupTableError):
        GroupOracle.from_table(["1", "x"], [[0, 1], [1, 1]])
    with pytest.raises(GroupTableError):
        GroupOracle.from_table(["1", "x"], [[1, 0], [0, 1]])
    # non-associative magma on 3 elements with identity
    with pytest.raises(GroupTableError):
        GroupOracle.from_table(["1", "x", "y"],
                               [[0, 1, 2], [1, 0, 1], [2, 1, 0]])


def test_id_out_of_range():
    c2 = GroupOracle.cyclic(2)
    with pytest.raises(IdOutOfRange):
        c2.mul(0, 2)


def test_element_wrappers():
    c3 = GroupOracle.cyclic(3, "g")
    g = c3.element(1)
    assert (g * g).id == 2
    assert g.inv().id == 2
    assert not g.is_identity and c3.element(0).is_identity
    other = GroupOracle.cyclic(3, "h").element(1)
    with pytest.raises(OracleMismatch):
        g * other


def test_power_and_order():
    c5 = GroupOracle.cyclic(5)
    assert c5.power(1, 7) == 2
    assert c5.power(1, -1) == 4
    assert c5.order_of(1) == 5
    assert c5.order_of(0) == 1


def test_iso_homomorphism_identity_exhaustive():
    a = GroupOracle.cyclic(4, "a")
    b = GroupOracle.cyclic(4, "b")
    iso = group_iso(a, b, (0, 3, 2, 1))  # a -> b^-1
    for x, y in itertools.product(range(4), repeat=2):
        assert iso.apply(a.mul(x, y)) == b.mul(iso.apply(x), iso.apply(y))
    inv = iso.inverse()
    for x in range(4):
        assert inv.apply(iso.apply(x)) == x


def test_iso_apply_examples():
    a = GroupOracle.cyclic(2, "a")
    b = GroupOracle.cyclic(2, "b")
    f_va = group_iso(a, b, (0, 1))     # a |-> b
    assert iso_apply(f_va, a.element(1)).id == 1
    ident = GroupMap.identity(a)
    assert iso_apply(ident, a.element(1)) == a.element(1)
    with pytest.raises(OracleMismatch):
        iso_apply(f_va, b.element(1))


def test_non_homomorphism_rejected():
    a = GroupOracle.cyclic(4)
    b = GroupOracle.cyclic(4)
    with pytest.raises(GroupTableError):
        GroupMap(a, b, (0, 2, 1, 3))


def test_trivial_into():
    s3 = s3_oracle()
    m = GroupMap.trivial_into(s3)
    assert m.apply(0) == 0 and not m.is_iso


def test_compose():
    a, b, c = (GroupOracle.cyclic(3, n) for n in "abc")
    f = group_iso(a, b, (0, 2, 1))
    g = group_iso(b, c, (0, 2, 1))
    h = g.compose(f)
    assert h.table == (0, 1, 2)

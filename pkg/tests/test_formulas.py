from hypothesis import given, strategies as st

from revisos.core import Mu, Prod, Sum, TVar, Unit
from revisos.proofs import Address, AddressSupply, type_to_formula

NAT = Mu("X", Sum(Unit(), TVar("X")))
ALPHA = Address(7)

addresses = st.builds(Address, st.integers(0, 10**6), st.booleans(), st.text("lri", max_size=8))


def test_unit():
    f = type_to_formula(Unit(), ALPHA)
    assert f.shape == "one" and f.addr == ALPHA and f.dual().shape == "bot"


def test_nat_addresses():
    f = type_to_formula(NAT, ALPHA)
    assert f.shape == "mu"
    (body,) = f.children
    assert body.addr == Address(7, False, "i") and body.shape == "plus"
    one, rec = body.children
    assert (one.addr, rec.addr) == (Address(7, False, "il"), Address(7, False, "ir"))
    assert one.shape == "one" and rec.type == NAT


def test_dual_of_tensor():
    a, b = TVar("A"), TVar("B")
    f = type_to_formula(Prod(a, b), ALPHA).dual()
    assert f.shape == "par" and f.addr == ALPHA.negate() and str(f.addr) == "a7^"
    left, right = f.children
    assert left.addr == Address(7, True, "l") and left.negated and left.type == a
    assert f.dual() == type_to_formula(Prod(a, b), ALPHA)


def test_duality_table():
    pairs = {Unit(): ("one", "bot"), Sum(Unit(), Unit()): ("plus", "with"),
             Prod(Unit(), Unit()): ("tensor", "par"), NAT: ("mu", "nu")}
    for t, (pos, neg) in pairs.items():
        f = type_to_formula(t, ALPHA)
        assert (f.shape, f.dual().shape) == (pos, neg)


@given(addresses)
def test_address_text_round_trip(a):
    assert Address.parse(str(a)) == a
    assert a.extend("li").has_prefix(a)
    assert a.negate().negate() == a


def test_supply_is_fresh():
    supply = AddressSupply()
    seen = {supply.fresh() for _ in range(50)}
    assert len(seen) == 50
    assert str(Address(3, False, "lir")) == "a3:lir"

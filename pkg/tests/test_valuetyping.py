import pytest

from actlang import Addr, MapVal, State, check_spec, env_has_iface, parse_spec, parse_type, store_well_typed
from actlang import syntax as S
from actlang.valuetyping import typed_locations, value_has_mu, value_has_sigma
from actlang.values import Instance

BAL = "uint256 balance := 0"
SRC = (f"contract A {{ constructor() creates {BAL}, uint8 n := 0 }}\n"
       f"contract B {{ constructor() creates {BAL}, A a := new A(), address_A p := addr(new A()) }}")


@pytest.fixture
def sigma():
    return check_spec(parse_spec(SRC)).sigma


def store():
    return (State()
            .with_instance(0, Instance("A", {"balance": 0, "n": 1}))
            .with_instance(1, Instance("A", {"balance": 0, "n": 2}))
            .with_instance(2, Instance("B", {"balance": 0, "a": Addr(0), "p": Addr(1)})))


@pytest.mark.parametrize("v, ty, ok", [
    (255, "uint8", True),
    (256, "uint8", False),
    (-1, "uint8", False),
    (-128, "int8", True),
    (2 ** 300, "int", True),
    (True, "bool", True),
    (1, "bool", False),
    (True, "address", False),
    (Addr(7), "address", True),
    (False, "uint8", False),
])
def test_base_values(v, ty, ok):
    assert bool(value_has_mu(v, parse_type(ty))) is ok


def test_mapping_entries_and_default_are_checked():
    mu = parse_type("mapping(uint8 => uint8)")
    assert value_has_mu(MapVal("int", 0, {3: 255}), mu)
    bad = value_has_mu(MapVal("int", 0, {3: 300}), mu)
    assert not bad and bad.rule == "V-Int" and bad.failure_path[0] == "[3]"
    assert not value_has_mu(MapVal("int", 0, {999: 1}), mu)
    assert not value_has_mu(MapVal("bool", 0), mu)


def test_nested_mapping_default_is_a_mapping():
    mu = parse_type("mapping(address => mapping(uint8 => bool))")
    inner = MapVal("int", False)
    assert value_has_mu(MapVal("addr", inner), mu)
    assert not value_has_mu(MapVal("addr", False), mu)


def test_well_typed_store(sigma):
    s = store()
    assert store_well_typed(sigma, s)
    assert typed_locations(sigma, s, "A") == [Addr(0), Addr(1)]
    assert value_has_sigma(sigma, s, Addr(2), S.ContractType("B"))
    assert not value_has_sigma(sigma, s, Addr(2), S.ContractType("A"))


def test_dangling_location_fails(sigma):
    s = store().with_instance(2, Instance("B", {"balance": 0, "a": Addr(9), "p": Addr(1)}))
    res = store_well_typed(sigma, s)
    assert not res and "not in dom" in res.describe()


def test_extra_or_missing_field_fails(sigma):
    s = store().with_instance(0, Instance("A", {"balance": 0, "n": 1, "x": 3}))
    assert not store_well_typed(sigma, s)
    s = store().with_instance(0, Instance("A", {"balance": 0}))
    assert not store_well_typed(sigma, s)


def test_bottom_accepts_anything(sigma):
    for v in [3, True, Addr(99), MapVal("int", 0)]:
        assert value_has_sigma(sigma, State(), v, None)


def test_environment_typing(sigma):
    iface = (S.Param("x", S.uint(8)), S.Param("r", S.ContractAddr("A")))
    s = store()
    rho = {"caller": Addr(1), "origin": Addr(1), "callvalue": 0, "x": 3, "r": Addr(0)}
    assert env_has_iface(sigma, s, rho, iface)
    assert not env_has_iface(sigma, s, dict(rho, r=Addr(2)), iface)
    missing = dict(rho)
    del missing["origin"]
    assert not env_has_iface(sigma, s, missing, iface)
    assert not env_has_iface(sigma, s, dict(rho, extra=1), iface)
    assert not env_has_iface(sigma, s, dict(rho, callvalue=2 ** 256), iface)
    assert env_has_iface(sigma, s, dict(rho, callvalue=2 ** 256 - 1), iface)

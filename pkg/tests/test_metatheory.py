import random

from hypothesis import given, settings
from hypothesis import strategies as st

from actlang import State, check_spec, parse_spec
from actlang.metatheory import (CATEGORIES, Gen, InstanceGen, determinism_suite, permute_state, safety_cases,
                                same_outcome, shrink_state, type_safety_suite)
from actlang.semantics import mutant
from actlang.values import Instance
from actlang.valuetyping import store_well_typed


def test_determinism_small_run_covers_every_category():
    results = determinism_suite(1, 30)
    assert [r.name for r in results] == [f"determinism/{c}" for c in CATEGORIES]
    assert all(r.ok and r.checked == 30 for r in results)


def test_type_safety_small_run():
    safety, frame, phase = type_safety_suite(2, 30)
    assert safety.ok and frame.ok and phase.ok
    assert safety.checked == frame.checked == phase.checked == 30


def test_zero_instances_is_vacuous():
    assert all(r.checked == 0 and r.ok for r in determinism_suite(1, 0) + type_safety_suite(1, 0))


def test_sequential_mutant_breaks_phase_split():
    with mutant("sequential-updates"):
        _, _, phase = type_safety_suite(5, 40)
    assert not phase.ok
    f = phase.failures[0]
    assert "expected" in f.message and "spec:" in f.reproducer


def test_suites_are_reproducible():
    a = [r.to_json() for r in determinism_suite(9, 20, ("expr", "trans"))]
    b = [r.to_json() for r in determinism_suite(9, 20, ("expr", "trans"))]
    assert a == b
    assert [c.trans for c in safety_cases(4, 10)] == [c.trans for c in safety_cases(4, 10)]


def test_generated_specs_type_check():
    gen = Gen(random.Random(0))
    ok = 0
    for _ in range(30):
        raw, _, _ = gen.spec()
        check_spec(raw)
        ok += 1
    assert ok == 30


@given(st.integers(0, 10 ** 6))
@settings(max_examples=50, deadline=None)
def test_permuting_tables_preserves_state_identity(seed):
    ig = InstanceGen(random.Random(seed))
    inst = ig.make("trans")
    s = inst.state
    p = permute_state(s, random.Random(seed + 1))
    assert p == s and p.fingerprint() == s.fingerprint()
    assert same_outcome(("ok", s), ("ok", p))


def test_shrinking_zeroes_irrelevant_values():
    sigma = check_spec(parse_spec("contract C { constructor() creates uint256 balance := 0, "
                                  "uint8 a := 0, uint8 b := 0 }")).sigma
    s = State().with_instance(0, Instance("C", {"balance": 7, "a": 5, "b": 9}))
    small = shrink_state(sigma, s, lambda st: st.get(0).vars["b"] > 3)
    assert small.get(0).vars == {"balance": 0, "a": 0, "b": 9}
    assert store_well_typed(sigma, small)

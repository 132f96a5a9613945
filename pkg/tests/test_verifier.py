import json

from actlang import State, check_spec, explore, parse_file, parse_spec, verify
from actlang.verifier import ExploreConfig

from conftest import CORPUS


def load(name):
    return check_spec(parse_file(CORPUS / f"{name}.act"))


def test_depth_zero_keeps_only_the_empty_store():
    r = load("counter")
    ex = explore(r.sigma, ExploreConfig(max_depth=0))
    assert list(ex.states.values()) == [State()]
    assert ex.truncated


def test_counter_depth_two():
    r = load("counter")
    ex = explore(r.sigma, ExploreConfig(max_depth=2))
    # ∅, {@0}, {@0 incremented}, {@0, @1}
    assert len(ex.states) == 4 and max(ex.depth.values()) == 2
    assert not ex.typing_violations


def test_states_are_deduplicated():
    r = load("counter")
    ex = explore(r.sigma, ExploreConfig(max_depth=3))
    fps = [s.fingerprint() for s in ex.states.values()]
    assert len(fps) == len(set(fps)) == len(ex.states)
    # every caller sample reaches the same post store
    assert len(ex.edges) > len(ex.states)


def test_state_cap_truncates():
    r = load("counter")
    ex = explore(r.sigma, ExploreConfig(max_depth=6, max_states=5))
    assert len(ex.states) == 5 and ex.truncated


def test_trace_replays_to_the_state():
    r = load("counter")
    ex = explore(r.sigma, ExploreConfig(max_depth=3))
    fp, _ = ex.ordered()[-1]
    assert len(ex.trace(fp)) == ex.depth[fp]


def test_counter_verifies():
    r = load("counter")
    report = verify(r.sigma, r.spec, ExploreConfig(max_depth=4))
    assert report.ok and "True within bound" in report.describe()


def test_broken_invariant_found_after_two_steps():
    r = load("broken_invariant")
    report = verify(r.sigma, r.spec, ExploreConfig(max_depth=3))
    assert not report.ok
    first = report.contracts[0].invariants[0]
    assert first.kind == "invariant" and len(first.trace) == 2
    assert [lab.kind for lab in first.trace] == ["ctor", "trans"]


def test_wrong_ensures_is_a_trans_post_violation():
    src = ("contract C { constructor() creates uint256 count := 0, uint256 balance := 0 "
           "transition incr() iff count < 3 updates count := count + 1 ensures post(count) = pre(count) }")
    r = check_spec(parse_spec(src))
    report = verify(r.sigma, r.spec, ExploreConfig(max_depth=2))
    (v, *_) = report.contracts[0].trans_post
    assert v.kind == "trans-post" and v.what == "incr" and v.trace[-1].name == "incr"


def test_env_reference_in_invariant_is_stuck():
    src = "contract C { constructor() creates uint256 balance := 0 invariants callvalue = 0 }"
    r = check_spec(parse_spec(src))
    report = verify(r.sigma, r.spec, ExploreConfig(max_depth=1))
    assert {v.kind for v in report.contracts[0].violations()} == {"stuck"}


def test_report_json_shape():
    r = load("broken_invariant")
    d = json.loads(json.dumps(verify(r.sigma, r.spec, ExploreConfig(max_depth=2)).to_json()))
    assert d["schemaVersion"] and d["ok"] is False
    assert d["bound"]["maxDepth"] == 2
    inv = d["contracts"][0]["invariants"][0]
    assert inv["trace"] and inv["state"] is not None

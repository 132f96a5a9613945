"""Walk a counter contract from the empty store through a few transitions.

Run with:  python3 demos/counter_walkthrough.py
"""

from pathlib import Path

from actlang import Addr, State, check_spec, eval_ctor, eval_trans, parse_file, pretty, verify
from actlang.verifier import ExploreConfig

SPEC = Path(__file__).resolve().parents[1] / "corpus" / "counter.act"


def main():
    result = check_spec(parse_file(SPEC))
    print("typed spec:\n")
    print(pretty(result.spec))
    print(f"{len(result.obligations)} side conditions were generated while typing")

    sigma = result.sigma
    env = {"caller": Addr(1), "origin": Addr(1), "callvalue": 0}
    loc, s = eval_ctor(sigma, State(), env, "Counter", sigma.cnstr["Counter"])
    print(f"\nconstructed Counter at {loc}: {s.get(loc).vars}")

    incr = sigma.transition("Counter", "incr")
    for _ in range(3):
        value, s = eval_trans(sigma, s, env, loc, incr)
        print(f"incr returned {value}; count is now {s.get(loc).vars['count']}")

    report = verify(sigma, result.spec, ExploreConfig(max_depth=5))
    print()
    print(report.describe())


if __name__ == "__main__":
    main()

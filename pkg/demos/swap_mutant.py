"""Why updates must read the pre-state.

The swap transition assigns x := y and y := x in one block.  With the
two-phase semantics both right-hand sides are read before either write, so
the values trade places.  A naive build that assigns one at a time loses a
value, and the bounded verifier catches it.
"""

from pathlib import Path

from actlang import check_spec, parse_file, verify
from actlang.semantics import mutant
from actlang.verifier import ExploreConfig

SPEC = Path(__file__).resolve().parents[1] / "corpus" / "swap.act"


def run(label):
    result = check_spec(parse_file(SPEC))
    report = verify(result.sigma, result.spec, ExploreConfig(max_depth=3))
    print(f"== {label}: {'verified' if report.ok else 'violations found'}")
    if not report.ok:
        first = report.contracts[0].violations()[0]
        print(first.describe())
    print()


def main():
    run("two-phase updates")
    with mutant("sequential-updates"):
        run("sequential updates (deliberately wrong)")


if __name__ == "__main__":
    main()

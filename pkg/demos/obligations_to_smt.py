"""Discharge side conditions by enumeration, then cross-check them with z3.

The weak_guard spec lets Guard pass any x < 10 to Inner, which only
accepts y < 5.  Bounded enumeration finds x = 5; the exported SMT query is
satisfiable for the same reason.  Without z3 installed the solver column
reads "unavailable".
"""

from pathlib import Path

from actlang import check_spec, discharge, export_obligation, parse_file
from actlang.entailment import is_exportable, solve_smt

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def main():
    for name in ("token", "weak_guard"):
        result = check_spec(parse_file(CORPUS / f"{name}.act"))
        print(f"== {name}.act: {len(result.obligations)} obligations")
        for ob in result.obligations:
            verdict = discharge(ob)
            text = export_obligation(ob)
            solver = (solve_smt(text) or "unavailable") if is_exportable(text) else "not exportable"
            print(f"  {ob.hash}  {ob.rule:<16} {verdict.name:<18} smt: {solver}")
            if verdict.name == "Counterexample":
                print(f"    counterexample environment: {verdict.rho}")
        print()
    obs = check_spec(parse_file(CORPUS / "weak_guard.act")).obligations
    ob = next(o for o in obs if o.rule == "T-Create")
    print("exported query for the failing weak_guard obligation:\n")
    print(export_obligation(ob))


if __name__ == "__main__":
    main()

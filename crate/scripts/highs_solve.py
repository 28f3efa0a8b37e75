#!/usr/bin/env python3
"""Solve an LP file with HiGHS and write a leftover solution file.

Usage: highs_solve.py MODEL.lp OUT.sol [TIME_LIMIT_SECONDS]

Use it as an external backend:
    --backend "python3 scripts/highs_solve.py {lp} {sol}"
"""
import sys

import highspy


def main() -> int:
    if len(sys.argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    lp_path, sol_path = sys.argv[1], sys.argv[2]
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 1.0 - 1e-6)
    if len(sys.argv) > 3:
        h.setOptionValue("time_limit", float(sys.argv[3]))
    if h.readModel(lp_path) != highspy.HighsStatus.kOk:
        print(f"cannot read {lp_path}", file=sys.stderr)
        return 1
    h.run()
    ms = h.getModelStatus()
    info = h.getInfo()
    has_sol = info.primal_solution_status == 2
    if ms == highspy.HighsModelStatus.kOptimal:
        status = "optimal"
    elif ms == highspy.HighsModelStatus.kInfeasible:
        status = "infeasible"
    elif ms == highspy.HighsModelStatus.kUnbounded:
        status = "unbounded"
    elif has_sol:
        status = "feasible"
    else:
        status = "limit"
    with open(sol_path, "w") as out:
        out.write(f"# status {status}\n")
        if status in ("optimal", "feasible"):
            out.write(f"# objective {info.objective_function_value!r}\n")
            lp = h.getLp()
            values = h.getSolution().col_value
            for name, x in zip(lp.col_names_, values):
                out.write(f"{name} {x!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())

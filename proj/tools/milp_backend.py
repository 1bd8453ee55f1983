#!/usr/bin/env python3
"""External MILP backend for odtmip.

Reads a model document written by odtmip (JSON), solves it with HiGHS, and
writes a solution document. The highspy bindings are used when installed
because they accept a warm start; otherwise scipy.optimize.milp (which
bundles HiGHS) is used.

    milp_backend.py --probe
    milp_backend.py MODEL.json SOLUTION.json
"""

import json
import math
import sys


def _bound(value, default):
    return default if value is None else float(value)


def load_model(path):
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    variables = doc["variables"]
    n = len(variables)
    cost = [float(v["obj"]) for v in variables]
    lower = [_bound(v["lb"], -math.inf) for v in variables]
    upper = [_bound(v["ub"], math.inf) for v in variables]
    integer = [v["kind"] != "continuous" for v in variables]
    starts, index, value, row_lower, row_upper = [0], [], [], [], []
    for row in doc["constraints"]:
        for var, coef in row["terms"]:
            index.append(int(var))
            value.append(float(coef))
        starts.append(len(index))
        rhs = float(row["rhs"])
        sense = row["sense"]
        row_lower.append(rhs if sense in ("=", ">=") else -math.inf)
        row_upper.append(rhs if sense in ("=", "<=") else math.inf)
    return {
        "n": n,
        "cost": cost,
        "lower": lower,
        "upper": upper,
        "integer": integer,
        "starts": starts,
        "index": index,
        "value": value,
        "row_lower": row_lower,
        "row_upper": row_upper,
        "offset": float(doc.get("objective_offset", 0.0)),
        "time_limit": doc.get("time_limit"),
        "relative_gap": float(doc.get("relative_gap", 1e-9)),
        "absolute_gap": float(doc.get("absolute_gap", 1e-9)),
        "warm_start": doc.get("warm_start"),
    }


def solve_highspy(m):
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("random_seed", 0)
    h.setOptionValue("threads", 1)
    if m["time_limit"] is not None:
        h.setOptionValue("time_limit", float(m["time_limit"]))
    h.setOptionValue("mip_rel_gap", m["relative_gap"])
    h.setOptionValue("mip_abs_gap", m["absolute_gap"])
    inf = highspy.kHighsInf

    def fix(x):
        return inf if x == math.inf else (-inf if x == -math.inf else x)

    lp = highspy.HighsLp()
    lp.num_col_ = m["n"]
    lp.num_row_ = len(m["row_lower"])
    lp.col_cost_ = m["cost"]
    lp.col_lower_ = [fix(x) for x in m["lower"]]
    lp.col_upper_ = [fix(x) for x in m["upper"]]
    lp.row_lower_ = [fix(x) for x in m["row_lower"]]
    lp.row_upper_ = [fix(x) for x in m["row_upper"]]
    lp.offset_ = m["offset"]
    lp.a_matrix_.format_ = highspy.MatrixFormat.kRowwise
    lp.a_matrix_.start_ = m["starts"]
    lp.a_matrix_.index_ = m["index"]
    lp.a_matrix_.value_ = m["value"]
    if any(m["integer"]):
        lp.integrality_ = [
            highspy.HighsVarType.kInteger if flag else highspy.HighsVarType.kContinuous
            for flag in m["integer"]
        ]
    h.passModel(lp)
    if m["warm_start"] is not None:
        sol = highspy.HighsSolution()
        sol.col_value = [float(x) for x in m["warm_start"]]
        sol.value_valid = True
        h.setSolution(sol)
    h.run()
    status = h.getModelStatus()
    info = h.getInfo()
    S = highspy.HighsModelStatus
    has_primal = info.primal_solution_status >= 2
    values = list(h.getSolution().col_value) if has_primal else []
    if status == S.kOptimal:
        name = "Optimal"
    elif status == S.kInfeasible:
        name = "Infeasible"
    elif status in (S.kUnbounded, S.kUnboundedOrInfeasible):
        name = "Unbounded"
    elif status in (S.kTimeLimit, S.kIterationLimit, S.kSolutionLimit, S.kInterrupt):
        name = "TimeLimit"
    else:
        name = "Feasible" if has_primal else "Error"
    bound = info.mip_dual_bound if any(m["integer"]) else info.objective_function_value
    return {
        "status": name,
        "values": values,
        "objective": info.objective_function_value if has_primal else None,
        "best_bound": bound if bound is not None and math.isfinite(bound) else None,
        "engine": "highspy",
    }


def solve_scipy(m):
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import csr_matrix

    n = m["n"]
    rows = len(m["row_lower"])
    constraints = []
    if rows:
        a = csr_matrix((m["value"], m["index"], m["starts"]), shape=(rows, n))
        constraints.append(LinearConstraint(a, m["row_lower"], m["row_upper"]))
    options = {"disp": False, "mip_rel_gap": m["relative_gap"]}
    if m["time_limit"] is not None:
        options["time_limit"] = float(m["time_limit"])
    res = milp(
        c=np.array(m["cost"]),
        integrality=np.array([1 if f else 0 for f in m["integer"]]),
        bounds=Bounds(m["lower"], m["upper"]),
        constraints=constraints,
        options=options,
    )
    values = [] if res.x is None else [float(x) for x in res.x]
    name = {0: "Optimal", 1: "TimeLimit", 2: "Infeasible", 3: "Unbounded"}.get(res.status, "Error")
    objective = None if res.x is None else float(res.fun) + m["offset"]
    bound = getattr(res, "mip_dual_bound", None)
    if bound is not None and math.isfinite(bound):
        bound = float(bound) + m["offset"]
    else:
        bound = objective if name == "Optimal" else None
    return {
        "status": name,
        "values": values,
        "objective": objective,
        "best_bound": bound,
        "engine": "scipy",
    }


def probe():
    try:
        import highspy  # noqa: F401
        return "highspy"
    except ImportError:
        pass
    import scipy.optimize  # noqa: F401
    return "scipy"


def main(argv):
    if len(argv) == 2 and argv[1] == "--probe":
        print(probe())
        return 0
    if len(argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    model = load_model(argv[1])
    try:
        import highspy  # noqa: F401
        result = solve_highspy(model)
    except ImportError:
        result = solve_scipy(model)
    with open(argv[2], "w", encoding="utf-8") as f:
        json.dump(result, f)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))

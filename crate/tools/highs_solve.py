#!/usr/bin/env python3
"""Solve an MPS model with HiGHS and print a small, stable report.

Uses the highspy bindings when available and falls back to scipy's HiGHS
wrapper otherwise. Output lines on stdout:

    status: optimal|feasible|infeasible|time_limit|error
    objective: <value>
    best_bound: <value>
    root_lp_bound: <value>
    nodes: <count>
    time: <seconds>

Primal values are written to --solution as `name value` lines.
"""

import argparse
import math
import sys
import time


def parse_mps(path):
    """Minimal free-form MPS reader (the subset our writer produces)."""
    rows, sense, obj_row = [], {}, None
    cols, col_idx = [], {}
    entries = []
    rhs = {}
    section, in_int = None, False
    with open(path) as fh:
        for raw in fh:
            if not raw.strip() or raw.startswith("*"):
                continue
            if not raw.startswith(" "):
                section = raw.split()[0]
                if section == "ENDATA":
                    break
                continue
            f = raw.split()
            if section == "ROWS":
                if f[0] == "N":
                    obj_row = obj_row or f[1]
                else:
                    sense[f[1]] = f[0]
                    rows.append(f[1])
            elif section == "COLUMNS":
                if len(f) >= 3 and f[1] == "'MARKER'":
                    in_int = f[2] == "'INTORG'"
                    continue
                if f[0] not in col_idx:
                    col_idx[f[0]] = len(cols)
                    cols.append({"name": f[0], "int": in_int, "obj": 0.0, "lb": 0.0, "ub": math.inf})
                c = col_idx[f[0]]
                for r, v in zip(f[1::2], f[2::2]):
                    if r == obj_row:
                        cols[c]["obj"] = float(v)
                    else:
                        entries.append((r, c, float(v)))
            elif section == "RHS":
                for r, v in zip(f[1::2], f[2::2]):
                    if r != obj_row:
                        rhs[r] = float(v)
            elif section == "BOUNDS":
                col = cols[col_idx[f[2]]]
                v = float(f[3]) if len(f) > 3 else None
                kind = f[0]
                if kind == "UP":
                    col["ub"] = v
                elif kind == "LO":
                    col["lb"] = v
                elif kind == "FX":
                    col["lb"] = col["ub"] = v
                elif kind == "FR":
                    col["lb"], col["ub"] = -math.inf, math.inf
                elif kind == "MI":
                    col["lb"] = -math.inf
                elif kind == "PL":
                    col["ub"] = math.inf
                elif kind == "BV":
                    col["int"], col["lb"], col["ub"] = True, 0.0, 1.0
            elif section == "RANGES":
                raise ValueError("ranged rows are not supported")
    return rows, sense, rhs, cols, entries


def solve_scipy(args, started):
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import coo_matrix

    rows, sense, rhs, cols, entries = parse_mps(args.model)
    row_idx = {r: i for i, r in enumerate(rows)}
    n, m = len(cols), len(rows)
    c = np.array([col["obj"] for col in cols])
    lb = np.array([col["lb"] for col in cols])
    ub = np.array([col["ub"] for col in cols])
    integrality = np.array([1 if col["int"] else 0 for col in cols])
    constraints = []
    if m:
        a = coo_matrix(
            ([v for _, _, v in entries], ([row_idx[r] for r, _, _ in entries], [j for _, j, _ in entries])),
            shape=(m, n),
        ).tocsr()
        lo = np.full(m, -np.inf)
        hi = np.full(m, np.inf)
        for r, i in row_idx.items():
            b = rhs.get(r, 0.0)
            if sense[r] in ("L", "E"):
                hi[i] = b
            if sense[r] in ("G", "E"):
                lo[i] = b
        constraints = [LinearConstraint(a, lo, hi)]

    def run(integ, limit):
        opts = {"disp": False, "mip_rel_gap": 0.0}
        if limit is not None:
            opts["time_limit"] = max(limit, 1e-3)
        return milp(c, constraints=constraints, integrality=integ, bounds=Bounds(lb, ub), options=opts)

    root = run(np.zeros(n), args.time_limit)
    report = {"root_lp_bound": root.fun if root.status == 0 else None}
    if args.relax_only:
        res = root
    else:
        left = None if args.time_limit is None else args.time_limit - (time.time() - started)
        res = run(integrality, left)
    has_x = res.x is not None
    if res.status == 0:
        status = "optimal"
    elif res.status == 1:
        status = "time_limit"
    elif res.status == 2:
        status = "infeasible"
    else:
        status = "error"
    report["status"] = status
    if has_x:
        report["objective"] = float(c @ res.x)
    bound = getattr(res, "mip_dual_bound", None)
    if status == "optimal" and bound is None:
        bound = report.get("objective")
    if bound is None or not math.isfinite(bound):
        bound = box_bound(c, lb, ub)
    report["best_bound"] = bound if math.isfinite(bound) else None
    report["nodes"] = getattr(res, "mip_node_count", 0) or 0
    values = list(zip([col["name"] for col in cols], res.x)) if has_x else None
    return report, values


def solve_highspy(args, started):
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("random_seed", args.seed)
    status = h.readModel(args.model)
    if status == highspy.HighsStatus.kError:
        raise RuntimeError("HiGHS could not read " + args.model)
    lp = h.getLp()
    names = list(lp.col_names_)

    relaxed = h.getLp()
    relaxed.integrality_ = []
    h.passModel(relaxed)
    if args.time_limit is not None:
        h.setOptionValue("time_limit", max(args.time_limit, 1e-3))
    h.run()
    report = {}
    if h.getModelStatus() == highspy.HighsModelStatus.kOptimal:
        report["root_lp_bound"] = h.getInfo().objective_function_value

    if args.relax_only:
        ms = h.getModelStatus()
        report["nodes"] = 0
    else:
        h.clearSolver()
        h.passModel(lp)
        h.setOptionValue("mip_rel_gap", 0.0)
        h.setOptionValue("mip_abs_gap", 1e-9)
        h.setOptionValue("mip_feasibility_tolerance", 1e-9)
        h.setOptionValue("primal_feasibility_tolerance", 1e-9)
        if args.no_cuts:
            h.setOptionValue("mip_allow_cut_separation_at_nodes", False)
            h.setOptionValue("mip_pool_soft_limit", 1)
        if args.time_limit is not None:
            left = args.time_limit - (time.time() - started)
            h.setOptionValue("time_limit", max(left, 1e-3))
        h.run()
        ms = h.getModelStatus()
        info = h.getInfo()
        report["nodes"] = info.mip_node_count
        if math.isfinite(info.mip_dual_bound):
            report["best_bound"] = info.mip_dual_bound
        else:
            box = box_bound(lp.col_cost_, lp.col_lower_, lp.col_upper_) + lp.offset_
            if math.isfinite(box):
                report["best_bound"] = box

    M = highspy.HighsModelStatus
    if ms == M.kOptimal:
        status = "optimal"
    elif ms == M.kInfeasible:
        status = "infeasible"
    elif ms in (M.kTimeLimit, M.kIterationLimit, M.kSolutionLimit, M.kInterrupt):
        status = "time_limit"
    elif ms == M.kUnboundedOrInfeasible:
        status = "infeasible"
    else:
        status = "error"
    report["status"] = status
    sol = h.getSolution()
    values = None
    if sol.value_valid:
        values = list(zip(names, sol.col_value))
        report["objective"] = h.getInfo().objective_function_value
    if args.relax_only and status == "optimal":
        report["best_bound"] = report.get("objective")
    return report, values


def box_bound(cost, lower, upper):
    """Objective bound from column bounds alone, valid for any point."""
    total = 0.0
    for c, lo, hi in zip(cost, lower, upper):
        if c > 0:
            total += c * lo
        elif c < 0:
            total += c * hi
    return total


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--model", required=True)
    ap.add_argument("--solution", required=True)
    ap.add_argument("--time-limit", type=float, default=None)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-cuts", action="store_true")
    ap.add_argument("--relax-only", action="store_true")
    ap.add_argument("--backend", choices=["auto", "highspy", "scipy"], default="auto")
    args = ap.parse_args()
    started = time.time()

    backend = args.backend
    if backend == "auto":
        try:
            import highspy  # noqa: F401

            backend = "highspy"
        except ImportError:
            backend = "scipy"
    try:
        if backend == "highspy":
            report, values = solve_highspy(args, started)
        else:
            report, values = solve_scipy(args, started)
    except Exception as exc:  # report, never traceback
        print("status: error")
        print("message: %s" % exc)
        return 1

    with open(args.solution, "w") as fh:
        for name, v in values or []:
            fh.write("%s %r\n" % (name, float(v)))
    print("backend: %s" % backend)
    print("status: %s" % report["status"])
    for key in ("objective", "best_bound", "root_lp_bound"):
        if report.get(key) is not None:
            print("%s: %r" % (key, float(report[key])))
    print("nodes: %d" % int(report.get("nodes") or 0))
    print("time: %.6f" % (time.time() - started))
    return 0


if __name__ == "__main__":
    sys.exit(main())

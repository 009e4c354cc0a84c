"""Command-line front end: catalog queries, solvers, and the report runner.

Exit codes: 0 success (and, for ``tables``, zero mismatches), 1 usage error,
2 computation mismatch, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import time

import numpy as np

from .bell_expr import (
    BellExpression,
    BellParseError,
    catalog_entry,
    format_expression,
    load_catalog,
    local_bound,
    parse_expression,
)
from .fixtures import fixture_record, fixture_solution
from .monotones import (
    DEFAULT_CLASS_TOL,
    classify_incompatibility,
    entanglement_profile,
)
from .npa import SdpParams, build_moment_problem, rigor_margin, sdp_maximize
from .qcore import Observable, PureState
from .seesaw import SeesawParams, Solution, quantum_maximum

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MISMATCH = 2
EXIT_NO_CONVERGENCE = 3

SOLUTION_SCHEMA = "tribell.solution/1"
NPA_SCHEMA = "tribell.npa/1"
CLASSES_SCHEMA = "tribell.classes/1"
REPORT_SCHEMA = "tribell.report/1"

WORKERS_ENV = "TRIBELL_WORKERS"

_LEVEL_TOKENS = {"q1": "Q1", "1ab": "1+AB", "aq": "AQ", "q2": "Q2"}

# Reproduction tolerances, keyed by whether the target is closed-form.
_VALUE_TOL = {"closed": 1e-7, "decimal": 5e-4}
_FIXTURE_TOL = {"closed": 1e-9, "decimal": 2e-3}
_PROFILE_TOL = 2e-3
_INCOMPATIBILITY_CLASS_TOL = 2e-5


class UsageError(Exception):
    """Bad arguments or unreadable inputs; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; 2 means mismatch here, so remap."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    return min(4, os.cpu_count() or 1)


def _parse_ident(text: str) -> int:
    try:
        ident = int(text)
    except ValueError:
        raise UsageError(f"inequality id must be an integer, got {text!r}")
    if not 1 <= ident <= 46:
        raise UsageError(f"inequality id must be 1..46, got {ident}")
    return ident


def _parse_target(text: str) -> tuple[int | None, BellExpression]:
    """An id for catalog rows, or a raw expression string."""
    if text.strip().lstrip("+-").isdigit():
        ident = _parse_ident(text.strip())
        return ident, catalog_entry(ident).expression
    try:
        return None, parse_expression(text)
    except BellParseError as err:
        raise UsageError(f"cannot parse expression: {err}")


def _observable_doc(obs: Observable) -> dict:
    if obs.is_identity:
        return {"kind": "identity", "sign": obs.sign}
    return {"kind": "bloch", "vector": [float(c) for c in obs.vector]}


def _observable_from_doc(doc: dict) -> Observable:
    if doc["kind"] == "identity":
        return Observable.identity(int(doc["sign"]))
    x, y, z = (float(c) for c in doc["vector"])
    return Observable.from_bloch(x, y, z, normalize=True)


def _solution_doc(ident: int | None, solution: Solution, params: SeesawParams | None) -> dict:
    amplitudes = solution.state.amplitudes
    doc = {
        "schema": SOLUTION_SCHEMA,
        "id": ident,
        "value": solution.value,
        "state": {
            "re": [float(a.real) for a in amplitudes],
            "im": [float(a.imag) for a in amplitudes],
        },
        "measurements": [_observable_doc(obs) for obs in solution.measurements],
        "sweeps_used": solution.sweeps_used,
        "restart_index": solution.restart_index,
    }
    if params is not None:
        doc["parameters"] = {
            "restarts": params.restarts,
            "max_sweeps": params.max_sweeps,
            "convergence_tol": params.convergence_tol,
            "seed": params.master_seed,
        }
    return doc


def _solution_from_doc(doc: dict) -> Solution:
    state = PureState.from_vector(
        np.array(doc["state"]["re"], dtype=float)
        + 1j * np.array(doc["state"]["im"], dtype=float),
        normalize=True,
    )
    measurements = tuple(_observable_from_doc(d) for d in doc["measurements"])
    if len(measurements) != 6:
        raise UsageError("solution document needs exactly 6 measurements")
    return Solution(
        state=state,
        measurements=measurements,
        value=float(doc.get("value", 0.0)),
        sweeps_used=int(doc.get("sweeps_used", 0)),
        restart_index=int(doc.get("restart_index", 0)),
    )


def _classes_for(solution: Solution, ent_tol: float, inc_tol: float) -> dict:
    profile = entanglement_profile(solution.state, tol=ent_tol)
    inc = classify_incompatibility(solution.measurements, tol=inc_tol)
    return {
        "negativity": profile.n_abc,
        "concurrences": [profile.c_ab, profile.c_ac, profile.c_bc],
        "incompatibilities": [inc.i_a, inc.i_b, inc.i_c],
        "entanglement_class": profile.class_id,
        "incompatibility_class": inc.class_id,
        "entanglement_tol": ent_tol,
        "incompatibility_tol": inc_tol,
    }


def _print_classes(classes: dict) -> None:
    print(f"negativity        {classes['negativity']:.6f}")
    print("concurrences      " + "  ".join(f"{c:.6f}" for c in classes["concurrences"]))
    print("incompatibilities " + "  ".join(f"{v:.6f}" for v in classes["incompatibilities"]))
    print(
        f"class pair        ({classes['entanglement_class']},"
        f" {classes['incompatibility_class']})"
    )


def _entry_text(entry) -> str:
    return entry.source or format_expression(entry.expression)


def _cmd_list(_args) -> int:
    for entry in load_catalog():
        print(f"{entry.id:2d}  {entry.local_maximum:2d}  {_entry_text(entry)}")
    return EXIT_OK


def _cmd_show(args) -> int:
    entry = catalog_entry(_parse_ident(args.id))
    print(f"id             {entry.id}")
    print(f"local maximum  {entry.local_maximum}")
    print(f"expression     {_entry_text(entry)}")
    return EXIT_OK


def _cmd_local(args) -> int:
    _, expr = _parse_target(args.target)
    bound, strategy = local_bound(expr)
    labels = ("A", "a", "B", "b", "C", "c")
    witness = "  ".join(f"{k}={v:+d}" for k, v in zip(labels, strategy))
    print(f"local bound  {bound}")
    print(f"strategy     {witness}")
    return EXIT_OK


def _cmd_qmax(args) -> int:
    ident = _parse_ident(args.id)
    params = SeesawParams(
        restarts=args.restarts,
        convergence_tol=args.tol,
        master_seed=args.seed,
    )
    solution = quantum_maximum(catalog_entry(ident).expression, params)
    classes = _classes_for(solution, DEFAULT_CLASS_TOL, DEFAULT_CLASS_TOL)
    if args.json:
        doc = _solution_doc(ident, solution, params)
        doc["classes"] = classes
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    print(f"quantum maximum  {solution.value:.12f}")
    print(f"found at restart {solution.restart_index} after {solution.sweeps_used} sweeps")
    print("state amplitudes (|000> .. |111>):")
    for amplitude in solution.state.amplitudes:
        print(f"  {amplitude.real:+.9f} {amplitude.imag:+.9f}i")
    print("measurements:")
    labels = ("A", "a", "B", "b", "C", "c")
    for label, obs in zip(labels, solution.measurements):
        if obs.is_identity:
            print(f"  {label}: identity ({obs.sign:+d})")
        else:
            x, y, z = obs.vector
            print(f"  {label}: bloch ({x:+.9f}, {y:+.9f}, {z:+.9f})")
    _print_classes(classes)
    return EXIT_OK


def _solve_npa(expr: BellExpression, level: str, params: SdpParams):
    """Bound plus the solver record; RuntimeError when the cap is hit."""
    problem = build_moment_problem(expr, level)
    solution = sdp_maximize(problem, params)
    if solution.status != "converged":
        raise RuntimeError(
            f"moment-matrix solve at level {level} hit the iteration cap "
            f"(residuals {solution.primal_residual:.2e}/{solution.dual_residual:.2e})"
        )
    return solution.objective_value + rigor_margin(problem, solution), solution


def _cmd_npa(args) -> int:
    ident, expr = _parse_target(args.target)
    level = _LEVEL_TOKENS[args.level]
    params = SdpParams(tolerance=args.tol, max_iterations=args.max_iterations)
    try:
        bound, solution = _solve_npa(expr, level, params)
    except ValueError as err:
        raise UsageError(str(err))
    except RuntimeError as err:
        print(f"no convergence: {err}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    if args.json:
        print(json.dumps({
            "schema": NPA_SCHEMA,
            "id": ident,
            "level": level,
            "bound": bound,
            "objective_value": solution.objective_value,
            "primal_residual": solution.primal_residual,
            "dual_residual": solution.dual_residual,
            "iterations": solution.iterations,
            "tolerance": args.tol,
        }, indent=2))
        return EXIT_OK
    print(f"level        {level}")
    print(f"upper bound  {bound:.9f}")
    print(f"residuals    primal {solution.primal_residual:.3e}  dual {solution.dual_residual:.3e}")
    print(f"iterations   {solution.iterations}")
    return EXIT_OK


def _cmd_classify(args) -> int:
    ident = _parse_ident(args.id)
    if args.solution:
        try:
            with open(args.solution, "r", encoding="utf-8") as handle:
                doc = json.load(handle)
        except (OSError, json.JSONDecodeError) as err:
            raise UsageError(f"cannot read solution document: {err}")
        if doc.get("schema") != SOLUTION_SCHEMA:
            raise UsageError(f"unsupported solution schema: {doc.get('schema')!r}")
        solution = _solution_from_doc(doc)
        ent_tol = inc_tol = args.tol if args.tol is not None else DEFAULT_CLASS_TOL
    else:
        record = fixture_record(ident)
        solution = fixture_solution(ident)
        if args.tol is not None:
            ent_tol = inc_tol = args.tol
        else:
            ent_tol = record.entanglement_tol or DEFAULT_CLASS_TOL
            inc_tol = record.incompatibility_tol or _INCOMPATIBILITY_CLASS_TOL
    classes = _classes_for(solution, ent_tol, inc_tol)
    if args.json:
        print(json.dumps({"schema": CLASSES_SCHEMA, "id": ident, **classes}, indent=2))
        return EXIT_OK
    print(f"id    {ident}")
    print(f"value {solution.value:.9f}")
    _print_classes(classes)
    return EXIT_OK


def _check(value, expected, tolerance) -> dict:
    status = "match" if abs(value - expected) <= tolerance else "mismatch"
    return {"value": value, "expected": expected, "tolerance": tolerance, "status": status}


def _tables_row(ident: int, seesaw_params: SeesawParams, npa_levels, npa_params) -> dict:
    entry = catalog_entry(ident)
    record = fixture_record(ident)
    row: dict = {"id": ident, "kind": record.kind}

    bound, _ = local_bound(entry.expression)
    row["local_bound"] = _check(bound, entry.local_maximum, 0)

    solution = quantum_maximum(entry.expression, seesaw_params)
    row["seesaw_value"] = _check(solution.value, record.maximum, _VALUE_TOL[record.kind])

    fixture = fixture_solution(ident)
    row["fixture_value"] = _check(fixture.value, record.maximum, _FIXTURE_TOL[record.kind])

    ent_tol = record.entanglement_tol or DEFAULT_CLASS_TOL
    inc_tol = record.incompatibility_tol or _INCOMPATIBILITY_CLASS_TOL
    classes = _classes_for(fixture, ent_tol, inc_tol)
    expected = record.profile
    row["profile"] = {
        "negativity": _check(classes["negativity"], expected.negativity, _PROFILE_TOL),
        "concurrences": [
            _check(got, want, _PROFILE_TOL)
            for got, want in zip(classes["concurrences"], expected.concurrences)
        ],
        "incompatibilities": [
            _check(got, want, _PROFILE_TOL)
            for got, want in zip(classes["incompatibilities"], expected.incompatibilities)
        ],
    }
    got_pair = (classes["entanglement_class"], classes["incompatibility_class"])
    row["classes"] = {
        "value": list(got_pair),
        "expected_row": [expected.entanglement_class, expected.incompatibility_class],
        "expected_pair": list(record.class_pair),
        "entanglement_tol": ent_tol,
        "incompatibility_tol": inc_tol,
        "status": "match"
        if got_pair == (expected.entanglement_class, expected.incompatibility_class)
        and got_pair == record.class_pair
        else "mismatch",
    }

    row["npa_bounds"] = {}
    for level in npa_levels:
        try:
            npa_bound, npa_solution = _solve_npa(entry.expression, level, npa_params)
        except ValueError as err:
            row["npa_bounds"][level] = {"status": "skipped", "reason": str(err)}
            continue
        except RuntimeError as err:
            row["npa_bounds"][level] = {"status": "no-convergence", "error": str(err)}
            continue
        cell = {
            "bound": npa_bound,
            "iterations": npa_solution.iterations,
            "status": "computed",
        }
        if level == "AQ" and record.kind == "closed" and ident not in (23, 41):
            cell = {**cell, **_check(npa_bound, record.maximum, 2e-3)}
        row["npa_bounds"][level] = cell
    if not npa_levels:
        row["npa_bounds"] = {"status": "skipped"}
    return row


def _row_statuses(row: dict):
    yield row["local_bound"]["status"]
    yield row["seesaw_value"]["status"]
    yield row["fixture_value"]["status"]
    yield row["profile"]["negativity"]["status"]
    for cell in row["profile"]["concurrences"] + row["profile"]["incompatibilities"]:
        yield cell["status"]
    yield row["classes"]["status"]
    npa_bounds = row["npa_bounds"]
    if "status" in npa_bounds:
        yield npa_bounds["status"]
    else:
        for cell in npa_bounds.values():
            yield cell["status"]


def _cmd_tables(args) -> int:
    seesaw_params = SeesawParams(restarts=args.restarts, master_seed=args.seed)
    npa_levels = [_LEVEL_TOKENS[token] for token in args.npa or []]
    npa_params = SdpParams(tolerance=args.tol, max_iterations=args.max_iterations)
    started = time.perf_counter()
    workers = _workers()
    rows: dict[int, dict] = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            pool.submit(_tables_row, ident, seesaw_params, npa_levels, npa_params): ident
            for ident in range(1, 47)
        }
        for future in concurrent.futures.as_completed(futures):
            rows[futures[future]] = future.result()
    ordered = [rows[ident] for ident in range(1, 47)]
    statuses = [status for row in ordered for status in _row_statuses(row)]
    mismatches = sum(status == "mismatch" for status in statuses)
    unconverged = sum(status == "no-convergence" for status in statuses)
    report = {
        "schema": REPORT_SCHEMA,
        "metadata": {
            "seed": args.seed,
            "restarts": args.restarts,
            "npa_levels": npa_levels,
            "npa_tolerance": args.tol,
            "workers": workers,
            "duration_seconds": round(time.perf_counter() - started, 3),
        },
        "rows": ordered,
        "summary": {
            "checks": len(statuses),
            "matches": sum(status in ("match", "computed") for status in statuses),
            "skipped": sum(status == "skipped" for status in statuses),
            "mismatches": mismatches,
            "no_convergence": unconverged,
        },
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(report, handle, indent=2)
            handle.write("\n")
    if args.csv:
        _write_csv(args.csv, ordered)
    for row in ordered:
        bad = [
            status
            for status in _row_statuses(row)
            if status not in ("match", "computed", "skipped")
        ]
        state = "ok" if not bad else ",".join(sorted(set(bad)))
        print(
            f"id {row['id']:2d}  local {row['local_bound']['value']:3d}"
            f"  seesaw {row['seesaw_value']['value']:12.7f}"
            f"  fixture {row['fixture_value']['value']:12.7f}"
            f"  classes ({row['classes']['value'][0]:2d},{row['classes']['value'][1]:2d})"
            f"  {state}"
        )
    summary = report["summary"]
    print(
        f"{summary['matches']}/{summary['checks']} checks match"
        f"  ({summary['skipped']} skipped, {summary['mismatches']} mismatches,"
        f" {summary['no_convergence']} unconverged)"
    )
    if unconverged:
        return EXIT_NO_CONVERGENCE
    if mismatches:
        return EXIT_MISMATCH
    return EXIT_OK


def _write_csv(path: str, ordered) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([
            "id", "kind", "local_bound", "local_status",
            "seesaw_value", "seesaw_status", "fixture_value", "fixture_status",
            "entanglement_class", "incompatibility_class", "class_status",
        ])
        for row in ordered:
            writer.writerow([
                row["id"], row["kind"],
                row["local_bound"]["value"], row["local_bound"]["status"],
                f"{row['seesaw_value']['value']:.9f}", row["seesaw_value"]["status"],
                f"{row['fixture_value']['value']:.9f}", row["fixture_value"]["status"],
                row["classes"]["value"][0], row["classes"]["value"][1],
                row["classes"]["status"],
            ])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tribell", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="print all 46 catalog entries").set_defaults(func=_cmd_list)

    show = sub.add_parser("show", help="print one catalog entry")
    show.add_argument("id")
    show.set_defaults(func=_cmd_show)

    local = sub.add_parser("local", help="local bound of an id or expression string")
    local.add_argument("target")
    local.set_defaults(func=_cmd_local)

    qmax = sub.add_parser("qmax", help="seesaw quantum maximum for one inequality")
    qmax.add_argument("id")
    qmax.add_argument("--restarts", type=int, default=200)
    qmax.add_argument("--seed", type=int, default=0)
    qmax.add_argument("--tol", type=float, default=1e-12)
    qmax.add_argument("--json", action="store_true")
    qmax.set_defaults(func=_cmd_qmax)

    npa = sub.add_parser("npa", help="moment-matrix upper bound for an id or expression")
    npa.add_argument("target")
    npa.add_argument("--level", choices=sorted(_LEVEL_TOKENS), required=True)
    npa.add_argument("--tol", type=float, default=1e-8)
    npa.add_argument("--max-iterations", type=int, default=200000)
    npa.add_argument("--json", action="store_true")
    npa.set_defaults(func=_cmd_npa)

    classify = sub.add_parser("classify", help="monotone profile and class pair")
    classify.add_argument("id")
    classify.add_argument("--solution", help="JSON solution document instead of the fixture")
    classify.add_argument("--tol", type=float, default=None)
    classify.add_argument("--json", action="store_true")
    classify.set_defaults(func=_cmd_classify)

    tables = sub.add_parser("tables", help="full reproduction report over all 46 rows")
    tables.add_argument("--out", help="write the JSON report here")
    tables.add_argument("--csv", help="write the flat per-id table here")
    tables.add_argument("--restarts", type=int, default=200)
    tables.add_argument("--seed", type=int, default=0)
    tables.add_argument("--npa", action="append", choices=sorted(_LEVEL_TOKENS),
                        help="also compute this moment-matrix level (repeatable)")
    tables.add_argument("--tol", type=float, default=1e-8)
    tables.add_argument("--max-iterations", type=int, default=200000)
    tables.set_defaults(func=_cmd_tables)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())

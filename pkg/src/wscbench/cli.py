"""Command-line front end: generation, solving, benchmarking, and reports.

Exit codes: 0 completed, 1 usage, 2 I/O, 3 validation.  Success or failure
of an *optimization* is data in the output, never an exit status.  Every
source of randomness flows from an explicit --seed (or the plan's seed);
nothing is ever seeded from the clock.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed

import numpy as np

from . import __version__
from .instance import (
    DEFAULT_SCALE,
    ValidationError,
    chain_layout,
    generate_network,
    ladder_layout,
    parse_instance,
    serialize_instance,
)
from .landscape import BIN_CENTERS, classify_peaks, sample_overlap_distribution
from .mcmc import derive_rng
from .scaling import compare_solvers, fit_linear, fit_log_corrected
from .solvers import SOLVER_IDS, run_solver
from .tts import (
    UNSOLVED,
    RunRecord,
    aggregate_percentile,
    is_unsolved,
    read_run_log,
    time_to_solution,
    write_run_log,
)
from .twolevel import double_scaling_curve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VALIDATION = 3

TTS_FIELDS = ("solver", "n", "percentile", "tts", "ci_low", "ci_high", "censored_fraction", "count")
JOURNAL_FIELDS = (
    "solver", "point", "n", "instance_id", "trial", "seed",
    "best_energy_scaled", "work", "wall_ns",
)


class UsageError(Exception):
    """Bad command line; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse hook
        raise UsageError(message)


def _report(parameters: dict, **payload) -> dict:
    return {"tool": "wscbench", "version": __version__, "parameters": parameters, **payload}


def _dump_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _parse_params(text: str) -> dict:
    try:
        params = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--params is not valid JSON: {exc}") from exc
    if not isinstance(params, dict):
        raise UsageError("--params must be a JSON object")
    return params


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def _layout_from_args(args):
    if args.pairs is not None:
        if args.pairs < 1:
            raise UsageError(f"--pairs must be >= 1, got {args.pairs}")
        return ladder_layout(args.pairs), f"wsc-p{args.pairs:02d}"
    rails, cols = args.grid
    if rails not in (1, 2):
        raise UsageError(f"--grid rails must be 1 or 2, got {rails}")
    if cols < 1:
        raise UsageError(f"--grid columns must be >= 1, got {cols}")
    layout = chain_layout(cols) if rails == 1 else ladder_layout(2 * cols)
    return layout, f"wsc-g{rails}x{cols:02d}"


def cmd_generate(args) -> int:
    if args.count < 1:
        raise UsageError(f"--count must be >= 1, got {args.count}")
    if args.seed < 0:
        raise UsageError(f"--seed must be >= 0, got {args.seed}")
    layout, stem = _layout_from_args(args)
    os.makedirs(args.out, exist_ok=True)
    entries = []
    for k in range(args.count):
        inst = generate_network(layout, args.scale, derive_rng(args.seed, k))
        name = f"{stem}-{k:04d}.json"
        text = serialize_instance(inst)
        with open(os.path.join(args.out, name), "w", encoding="utf-8") as fh:
            fh.write(text)
        entries.append(
            {
                "file": name,
                "sha256": hashlib.sha256(text.encode()).hexdigest(),
                "sites": inst.n,
                "reference_energy_scaled": inst.reference_energy_scaled,
                "reference_method": inst.reference_method,
            }
        )
    parameters = {
        "pairs": args.pairs,
        "grid": list(args.grid) if args.grid else None,
        "count": args.count,
        "seed": args.seed,
        "scale": args.scale,
    }
    _dump_json(os.path.join(args.out, "manifest.json"), _report(parameters, instances=entries))
    print(f"wrote {args.count} instance(s) and manifest.json to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    if args.seed < 0:
        raise UsageError(f"--seed must be >= 0, got {args.seed}")
    params = _parse_params(args.params)
    with open(args.instance, encoding="utf-8") as fh:
        inst = parse_instance(fh.read())
    outcome = run_solver(args.solver, inst, derive_rng(args.seed), **params)
    instance_id = os.path.splitext(os.path.basename(args.instance))[0]
    record = RunRecord(
        solver=args.solver,
        n=inst.n,
        instance_id=instance_id,
        seed=args.seed,
        success=bool(outcome.success),
        work=outcome.work_site_updates,
        wall_ns=int(outcome.wall_time_s * 1e9),
        t_ann_work=float(outcome.work_site_updates),
    )
    if args.log:
        write_run_log(args.log, [record], append=True)
    parameters = {
        "solver": args.solver,
        "instance": args.instance,
        "seed": args.seed,
        "params": params,
    }
    print(
        json.dumps(
            _report(
                parameters,
                best_energy_scaled=outcome.best_energy_scaled,
                reference_energy_scaled=inst.reference_energy_scaled,
                success=bool(outcome.success),
                work_site_updates=outcome.work_site_updates,
                wall_time_s=outcome.wall_time_s,
                gs_criteria_met=outcome.gs_criteria_met,
            ),
            sort_keys=True,
        )
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _validate_plan(plan) -> dict:
    if not isinstance(plan, dict):
        raise ValidationError("plan: top level must be a JSON object")

    def need(key, kind, where="plan"):
        if key not in plan:
            raise ValidationError(f"{where}: missing required key {key!r}")
        value = plan[key]
        if not isinstance(value, kind) or isinstance(value, bool):
            raise ValidationError(f"{where}.{key}: wrong type")
        return value

    seed = need("seed", int)
    if seed < 0:
        raise ValidationError(f"plan.seed: must be >= 0, got {seed}")
    scale = plan.get("scale", DEFAULT_SCALE)
    if not isinstance(scale, int) or scale < 1:
        raise ValidationError("plan.scale: must be a positive integer")
    percentile = plan.get("percentile", 50)
    if not isinstance(percentile, (int, float)) or not 0 < percentile <= 100:
        raise ValidationError(f"plan.percentile: must be in (0, 100], got {percentile}")

    sizes = need("sizes", list)
    if not sizes:
        raise ValidationError("plan.sizes: must not be empty")
    norm_sizes = []
    for k, entry in enumerate(sizes):
        where = f"plan.sizes[{k}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where}: must be an object")
        pairs, count = entry.get("pairs"), entry.get("count")
        if not isinstance(pairs, int) or pairs < 1:
            raise ValidationError(f"{where}.pairs: must be a positive integer")
        if not isinstance(count, int) or count < 1:
            raise ValidationError(f"{where}.count: must be a positive integer")
        norm_sizes.append({"pairs": pairs, "count": count})

    solvers = need("solvers", list)
    if not solvers:
        raise ValidationError("plan.solvers: must not be empty")
    norm_solvers = []
    for k, entry in enumerate(solvers):
        where = f"plan.solvers[{k}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where}: must be an object")
        solver_id = entry.get("id")
        if solver_id not in SOLVER_IDS:
            known = ", ".join(sorted(SOLVER_IDS))
            raise ValidationError(f"{where}.id: unknown solver {solver_id!r} (known: {known})")
        trials = entry.get("trials", 1)
        if not isinstance(trials, int) or trials < 1:
            raise ValidationError(f"{where}.trials: must be a positive integer")
        grid = entry.get("grid", [entry.get("params", {})])
        if not isinstance(grid, list) or not grid or not all(isinstance(g, dict) for g in grid):
            raise ValidationError(f"{where}.grid: must be a non-empty list of parameter objects")
        norm_solvers.append({"id": solver_id, "trials": trials, "grid": grid})

    return {
        "seed": seed,
        "scale": scale,
        "percentile": float(percentile),
        "sizes": norm_sizes,
        "solvers": norm_solvers,
    }


def _run_seed(plan_seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([plan_seed, *path]).generate_state(1, np.uint64)[0])


def _bench_run(task: dict) -> dict:
    """One (solver, grid point, instance, trial) cell; worker-safe."""
    inst = parse_instance(task["instance_text"])
    t0 = time.perf_counter_ns()
    outcome = run_solver(task["solver"], inst, derive_rng(task["seed"]), **task["params"])
    wall_ns = time.perf_counter_ns() - t0
    return {
        "solver": task["solver"],
        "point": task["point"],
        "n": inst.n,
        "instance_id": task["instance_id"],
        "trial": task["trial"],
        "seed": task["seed"],
        "best_energy_scaled": outcome.best_energy_scaled,
        "work": outcome.work_site_updates,
        "wall_ns": wall_ns,
    }


def _journal_key(row: dict) -> tuple:
    return (row["solver"], int(row["point"]), row["instance_id"], int(row["trial"]))


def _read_journal(path: str) -> dict:
    """Parse the append-only journal, tolerating a torn final row."""
    rows: dict[tuple, dict] = {}
    if not os.path.exists(path):
        return rows
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is not None and tuple(header) != JOURNAL_FIELDS:
            raise ValidationError(f"{path}: unrecognized journal header")
        for raw in reader:
            if len(raw) != len(JOURNAL_FIELDS):
                continue
            try:
                row = {
                    "solver": raw[0],
                    "point": int(raw[1]),
                    "n": int(raw[2]),
                    "instance_id": raw[3],
                    "trial": int(raw[4]),
                    "seed": int(raw[5]),
                    "best_energy_scaled": int(raw[6]),
                    "work": int(raw[7]),
                    "wall_ns": int(raw[8]),
                }
            except ValueError:
                continue
            rows[_journal_key(row)] = row
    return rows


def _tts_rows(groups: dict, percentile: float) -> list[list]:
    """Aggregate per-instance tts values into one table row per (solver, n)."""
    out = []
    for (solver, n), per_instance in sorted(groups.items()):
        values = list(per_instance.values())
        try:
            pt = aggregate_percentile(values, percentile)
            row = [solver, n, percentile, pt.value, pt.ci_low, pt.ci_high,
                   pt.censored_fraction, pt.count]
        except ValidationError:
            row = [solver, n, percentile, math.inf, math.inf, math.inf, 1.0, len(values)]
        out.append(row)
    return out


def _write_csv(path: str, header: tuple, rows: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fit_report(points_by_solver: dict, last_k: int = 3) -> dict:
    fits, skipped = {}, {}
    for solver, pts in sorted(points_by_solver.items()):
        try:
            fit = fit_linear(sorted(pts), last_k=min(last_k, len(pts)))
        except ValidationError as exc:
            skipped[solver] = str(exc)
            continue
        fits[solver] = {
            "model": fit.model,
            "coef": fit.coef,
            "ci": {k: list(v) for k, v in fit.ci.items()},
            "ci_method": fit.ci_method,
            "points": [list(p) for p in fit.points],
            "residual_rms": fit.residual_rms,
            "warnings": fit.warnings,
        }
    payload: dict = {"fits": fits, "skipped": skipped}
    if len(fits) >= 2:
        cmp_input = {}
        for solver, pts in points_by_solver.items():
            if solver in fits:
                cmp_input[solver] = fit_linear(sorted(pts), last_k=min(last_k, len(pts)))
        cmp = compare_solvers(cmp_input)
        payload["comparison"] = {
            "order": [{"solver": r.label, "b": r.slope, "ci": list(r.ci)} for r in cmp.rows],
            "indistinguishable": [list(pair) for pair in cmp.indistinguishable],
        }
    return payload


def cmd_bench(args) -> int:
    if args.jobs < 1:
        raise UsageError(f"--jobs must be >= 1, got {args.jobs}")
    with open(args.plan, encoding="utf-8") as fh:
        raw = fh.read()
    try:
        plan = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{args.plan}: invalid JSON: {exc}") from exc
    plan = _validate_plan(plan)

    os.makedirs(args.out, exist_ok=True)
    inst_dir = os.path.join(args.out, "instances")
    os.makedirs(inst_dir, exist_ok=True)

    # deterministic instance set (written out so rows can be re-run by hand)
    instances: dict[str, dict] = {}
    for si, size in enumerate(plan["sizes"]):
        for ii in range(size["count"]):
            inst = generate_network(
                ladder_layout(size["pairs"]), plan["scale"], derive_rng(plan["seed"], si, ii)
            )
            iid = f"wsc-p{size['pairs']:02d}-{ii:04d}"
            text = serialize_instance(inst)
            path = os.path.join(inst_dir, f"{iid}.json")
            if not os.path.exists(path):
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(text)
            instances[iid] = {
                "text": text,
                "n": inst.n,
                "size_index": si,
                "construction": inst.reference_energy_scaled,
            }

    # full run list in canonical order
    tasks = []
    for vi, solver in enumerate(plan["solvers"]):
        for pi, params in enumerate(solver["grid"]):
            for si, size in enumerate(plan["sizes"]):
                for ii in range(size["count"]):
                    iid = f"wsc-p{size['pairs']:02d}-{ii:04d}"
                    for t in range(solver["trials"]):
                        tasks.append(
                            {
                                "solver": solver["id"],
                                "point": pi,
                                "instance_id": iid,
                                "trial": t,
                                "seed": _run_seed(plan["seed"], vi, pi, si, ii, t),
                                "params": params,
                                "instance_text": instances[iid]["text"],
                            }
                        )

    journal_path = os.path.join(args.out, "runs_detail.csv")
    done = _read_journal(journal_path)
    pending = [
        t for t in tasks
        if (t["solver"], t["point"], t["instance_id"], t["trial"]) not in done
    ]
    print(f"bench: {len(tasks)} runs planned, {len(done)} already journaled, {len(pending)} to go")

    failures = []
    new_file = not os.path.exists(journal_path) or os.path.getsize(journal_path) == 0
    torn_tail = False
    if not new_file:
        with open(journal_path, "rb") as fh:
            fh.seek(-1, os.SEEK_END)
            torn_tail = fh.read(1) != b"\n"
    with open(journal_path, "a", newline="", encoding="utf-8") as fh:
        if torn_tail:
            # seal an interrupted write so the next row starts a fresh line;
            # the torn row parses as garbage and its run is simply redone
            fh.write("\n")
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(JOURNAL_FIELDS)
            fh.flush()

        def _record(row: dict) -> None:
            writer.writerow([row[k] for k in JOURNAL_FIELDS])
            fh.flush()

        if args.jobs == 1:
            for task in pending:
                try:
                    _record(_bench_run(task))
                except ValidationError as exc:
                    failures.append({"task": _journal_key(task | {"point": task["point"]}),
                                     "error": str(exc)})
        else:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                futures = {pool.submit(_bench_run, task): task for task in pending}
                for future in as_completed(futures):
                    task = futures[future]
                    try:
                        _record(future.result())
                    except ValidationError as exc:
                        failures.append({"task": _journal_key(task), "error": str(exc)})

    rows = _read_journal(journal_path)

    # consensus: best energy over every run, floored by the construction value
    consensus: dict[str, int] = {}
    achieved: dict[str, set] = {}
    for iid, meta in instances.items():
        best = meta["construction"]
        for row in rows.values():
            if row["instance_id"] == iid and row["best_energy_scaled"] < best:
                best = row["best_energy_scaled"]
        consensus[iid] = best
        achieved[iid] = {
            row["solver"] for row in rows.values()
            if row["instance_id"] == iid and row["best_energy_scaled"] == best
        }

    # final run log in plan order (work-unit fields deterministic given seed)
    records = []
    for task in tasks:
        key = (task["solver"], task["point"], task["instance_id"], task["trial"])
        row = rows.get(key)
        if row is None:
            continue
        records.append(
            RunRecord(
                solver=row["solver"],
                n=row["n"],
                instance_id=row["instance_id"],
                seed=row["seed"],
                success=row["best_energy_scaled"] == consensus[row["instance_id"]],
                work=row["work"],
                wall_ns=row["wall_ns"],
                t_ann_work=float(row["work"]),
            )
        )
    write_run_log(os.path.join(args.out, "runs.csv"), records)

    # per (solver, n): optimize over grid points per instance, then aggregate
    groups: dict[tuple, dict] = {}
    for vi, solver in enumerate(plan["solvers"]):
        for iid, meta in instances.items():
            n = meta["n"]
            best_tts = UNSOLVED
            for pi in range(len(solver["grid"])):
                cell = [
                    rows[(solver["id"], pi, iid, t)]
                    for t in range(solver["trials"])
                    if (solver["id"], pi, iid, t) in rows
                ]
                if not cell:
                    continue
                p_hat = sum(
                    r["best_energy_scaled"] == consensus[iid] for r in cell
                ) / len(cell)
                t_ann = float(np.mean([r["work"] for r in cell]))
                if t_ann > 0:
                    tts = time_to_solution(p_hat, t_ann)
                    best_tts = min(best_tts, tts)
            groups.setdefault((solver["id"], n), {})[iid] = best_tts
    tts_rows = _tts_rows(groups, plan["percentile"])
    _write_csv(os.path.join(args.out, "tts.csv"), TTS_FIELDS, tts_rows)

    # scaling fits on the finite percentile values
    points_by_solver: dict[str, list] = {}
    for solver, n, _, value, *_ in tts_rows:
        if not is_unsolved(value):
            points_by_solver.setdefault(solver, []).append((n, math.log10(value)))
    parameters = {"plan_file": args.plan, "plan": plan, "jobs": args.jobs}
    _dump_json(
        os.path.join(args.out, "fits.json"), _report(parameters, **_fit_report(points_by_solver))
    )
    _dump_json(
        os.path.join(args.out, "consensus.json"),
        _report(
            parameters,
            instances={
                iid: {
                    "n": meta["n"],
                    "consensus_energy_scaled": consensus[iid],
                    "construction_energy_scaled": meta["construction"],
                    "achieved_by": sorted(achieved[iid]),
                }
                for iid, meta in sorted(instances.items())
            },
            failures=failures,
        ),
    )
    print(
        f"bench: wrote runs.csv ({len(records)} rows), tts.csv, fits.json, consensus.json"
        + (f"; {len(failures)} run(s) failed" if failures else "")
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# tts / fit
# ---------------------------------------------------------------------------


def cmd_tts(args) -> int:
    if not 0 < args.percentile <= 100:
        raise UsageError(f"--percentile must be in (0, 100], got {args.percentile}")
    records = read_run_log(args.log)
    if not records:
        raise ValidationError(f"{args.log}: no runs in log")
    # all rows of one (solver, instance) are treated as repeat trials of a
    # single budget; grids with per-point optimization come from `bench`
    cells: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        cells.setdefault((rec.solver, rec.n, rec.instance_id), []).append(rec)
    groups: dict[tuple, dict] = {}
    for (solver, n, iid), recs in cells.items():
        p_hat = sum(r.success for r in recs) / len(recs)
        t_ann = float(np.mean([r.t_ann_work for r in recs]))
        value = time_to_solution(p_hat, t_ann) if t_ann > 0 else UNSOLVED
        groups.setdefault((solver, n), {})[iid] = value
    _write_csv(args.out, TTS_FIELDS, _tts_rows(groups, args.percentile))
    print(f"wrote {args.out}")
    return EXIT_OK


def _read_tts_table(path: str) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != TTS_FIELDS:
            raise ValidationError(f"{path} row 1: header must be {','.join(TTS_FIELDS)}")
        for lineno, raw in enumerate(reader, start=2):
            if len(raw) != len(TTS_FIELDS):
                raise ValidationError(f"{path} row {lineno}: expected {len(TTS_FIELDS)} fields")
            try:
                rows.append({"solver": raw[0], "n": int(raw[1]), "tts": float(raw[3])})
            except ValueError as exc:
                raise ValidationError(f"{path} row {lineno}: {exc}") from exc
    return rows


def cmd_fit(args) -> int:
    if args.last_k < 0:
        raise UsageError(f"--last-k must be >= 0, got {args.last_k}")
    rows = _read_tts_table(args.tts)
    points_by_solver: dict[str, list] = {}
    censored = 0
    for row in rows:
        if args.solver and row["solver"] not in args.solver:
            continue
        if is_unsolved(row["tts"]):
            censored += 1
            continue
        points_by_solver.setdefault(row["solver"], []).append(
            (row["n"], math.log10(row["tts"]))
        )
    if not points_by_solver:
        raise ValidationError(f"{args.tts}: no finite tts values to fit")

    fit_fn = fit_linear if args.model == "linear" else fit_log_corrected
    fits, skipped = {}, {}
    cmp_fits = {}
    for solver, pts in sorted(points_by_solver.items()):
        try:
            fit = fit_fn(sorted(pts), last_k=args.last_k)
        except ValidationError as exc:
            skipped[solver] = str(exc)
            continue
        cmp_fits[solver] = fit
        fits[solver] = {
            "model": fit.model,
            "coef": fit.coef,
            "ci": {k: list(v) for k, v in fit.ci.items()},
            "ci_method": fit.ci_method,
            "points": [list(p) for p in fit.points],
            "residual_rms": fit.residual_rms,
            "condition_number": fit.condition_number,
            "warnings": fit.warnings,
        }
    parameters = {
        "tts": args.tts,
        "model": args.model,
        "last_k": args.last_k,
        "solver": args.solver,
    }
    payload = _report(parameters, fits=fits, skipped=skipped, censored_rows=censored)
    if len(cmp_fits) >= 2:
        cmp = compare_solvers(cmp_fits)
        payload["comparison"] = {
            "order": [{"solver": r.label, "b": r.slope, "ci": list(r.ci)} for r in cmp.rows],
            "indistinguishable": [list(pair) for pair in cmp.indistinguishable],
        }
    if not fits and skipped:
        raise ValidationError("; ".join(f"{s}: {m}" for s, m in skipped.items()))
    if args.out:
        _dump_json(args.out, payload)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(payload, indent=1, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# landscape / twolevel
# ---------------------------------------------------------------------------


def cmd_landscape(args) -> int:
    if args.pairs < 1:
        raise UsageError(f"--pairs must be >= 1, got {args.pairs}")
    if args.count < 1:
        raise UsageError(f"--count must be >= 1, got {args.count}")
    if args.seed < 0:
        raise UsageError(f"--seed must be >= 0, got {args.seed}")
    os.makedirs(args.out, exist_ok=True)
    layout = ladder_layout(args.pairs)
    reports = []
    for k in range(args.count):
        inst = generate_network(layout, args.scale, derive_rng(args.seed, k))
        hist = sample_overlap_distribution(inst, args.sweeps, derive_rng(args.seed, k, 1))
        peaks = classify_peaks(hist)
        iid = f"wsc-p{args.pairs:02d}-{k:04d}"
        counts = hist.counts
        _write_csv(
            os.path.join(args.out, f"hist-{iid}.csv"),
            ("q", "count"),
            [
                [float(BIN_CENTERS[b]), int(counts[b]) if float(counts[b]).is_integer() else float(counts[b])]
                for b in range(len(counts))
            ],
        )
        reports.append(
            {
                "instance_id": iid,
                "multi_peak": peaks.multi_peak,
                "peak_positions": peaks.positions,
                "peak_heights": peaks.heights,
            }
        )
    verdicts = [r["multi_peak"] for r in reports]
    if len(verdicts) >= 10:
        from .landscape import peak_fraction

        frac = peak_fraction(verdicts)
        fraction = {"fraction": frac.fraction, "ci": list(frac.ci), "count": frac.n_instances}
    else:
        fraction = None  # too few instances for a meaningful interval
    parameters = {
        "pairs": args.pairs,
        "count": args.count,
        "seed": args.seed,
        "scale": args.scale,
        "sweeps": args.sweeps,
    }
    _dump_json(
        os.path.join(args.out, "report.json"),
        _report(parameters, instances=reports, multi_peak_fraction=fraction),
    )
    print(f"wrote report.json and {args.count} histogram file(s) to {args.out}")
    return EXIT_OK


def cmd_twolevel(args) -> int:
    noise = args.noise if args.noise else [0.0, 0.1]
    curve = double_scaling_curve(n_max=args.n_max, t_ann=args.t_ann, dt=args.dt, noise=noise)
    rows = [
        [pt.n, pt.sqrt_n, pt.q, pt.p_succ, pt.p_succ_noisy, pt.tts]
        for pt in curve
    ]
    _write_csv(args.out, ("n", "sqrt_n", "q", "p_succ", "p_succ_noisy", "tts"), rows)
    parameters = {
        "n_max": args.n_max,
        "t_ann": args.t_ann,
        "dt": args.dt,
        "noise": noise,
        "out": args.out,
    }
    print(json.dumps(_report(parameters, rows=len(rows)), sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# import
# ---------------------------------------------------------------------------


def _load_store(path: str) -> dict:
    if not os.path.exists(path):
        return _report({}, curves=[])
    with open(path, encoding="utf-8") as fh:
        try:
            store = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(store, dict) or not isinstance(store.get("curves"), list):
        raise ValidationError(f"{path}: not a curve store")
    return store


def cmd_import(args) -> int:
    store = _load_store(args.store)
    if args.list:
        for curve in store["curves"]:
            note = f"  # {curve['note']}" if curve.get("note") else ""
            print(f"{curve['label']}: {len(curve['points'])} points [{curve['units']}]{note}")
        if not store["curves"]:
            print("(no curves stored)")
        return EXIT_OK

    if not args.csv or not args.label or not args.units:
        raise UsageError("import needs --csv, --label and --units (or --list)")
    if any(curve["label"] == args.label for curve in store["curves"]):
        raise ValidationError(f"label {args.label!r} already stored in {args.store}")
    points = []
    with open(args.csv, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != ("n", "tts"):
            raise ValidationError(f"{args.csv} row 1: header must be n,tts")
        for lineno, raw in enumerate(reader, start=2):
            if len(raw) != 2:
                raise ValidationError(f"{args.csv} row {lineno}: expected 2 fields")
            try:
                n, tts = float(raw[0]), float(raw[1])
            except ValueError as exc:
                raise ValidationError(f"{args.csv} row {lineno}: {exc}") from exc
            if n <= 0 or tts <= 0:
                raise ValidationError(f"{args.csv} row {lineno}: n and tts must be positive")
            points.append([n, tts])
    if not points:
        raise ValidationError(f"{args.csv}: no data rows")
    # external curves keep their native units and are never mixed into
    # work-unit fits; they exist for side-by-side plotting only
    store["curves"].append(
        {"label": args.label, "units": args.units, "note": args.note, "points": points}
    )
    store["version"] = __version__
    _dump_json(args.store, store)
    print(f"stored {args.label!r} ({len(points)} points) in {args.store}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="wscbench", description=__doc__)
    parser.add_argument("--version", action="version", version=f"wscbench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write weak-strong network instance files")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--pairs", type=int, help="weak-strong pair count (ladder family)")
    group.add_argument(
        "--grid", type=int, nargs=2, metavar=("RAILS", "COLS"),
        help="explicit backbone shape: 1 rail (chain) or 2 rails (ladder), COLS columns",
    )
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--scale", type=int, default=DEFAULT_SCALE)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate, grid=None, pairs=None)

    p = sub.add_parser("solve", help="run one solver on one instance file")
    p.add_argument("--solver", required=True, choices=sorted(SOLVER_IDS))
    p.add_argument("--instance", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--params", default="{}", help="solver parameters as a JSON object")
    p.add_argument("--log", help="append the run record to this CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run a benchmark plan end to end (resumable)")
    p.add_argument("--plan", required=True, help="benchmark plan JSON file")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1,
                   help="concurrent runs (each worker re-warms its compiled kernels)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("tts", help="aggregate a run log into a tts table")
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--percentile", type=float, default=50.0)
    p.set_defaults(func=cmd_tts)

    p = sub.add_parser("fit", help="fit tts scaling against sqrt(n)")
    p.add_argument("--tts", required=True, help="tts table CSV (from `tts` or `bench`)")
    p.add_argument("--model", choices=("linear", "log-corrected"), default="linear")
    p.add_argument("--last-k", type=int, default=3, help="largest sizes to keep (0 = all)")
    p.add_argument("--solver", action="append", help="restrict to this solver (repeatable)")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("landscape", help="sample overlap distributions and classify peaks")
    p.add_argument("--pairs", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--scale", type=int, default=DEFAULT_SCALE)
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("twolevel", help="tabulate the noisy two-level scaling curve")
    p.add_argument("--n-max", type=int, default=16)
    p.add_argument("--t-ann", type=float, default=500.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--noise", type=float, action="append",
                   help="dephasing rate (repeatable; default 0 and 0.1)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_twolevel)

    p = sub.add_parser("import", help="store an external published curve for comparison")
    p.add_argument("--csv", help="curve data with header n,tts")
    p.add_argument("--label")
    p.add_argument("--units", help="native units of the imported tts values")
    p.add_argument("--note", default="")
    p.add_argument("--store", required=True, help="curve store JSON file")
    p.add_argument("--list", action="store_true", help="list stored curves and exit")
    p.set_defaults(func=cmd_import)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

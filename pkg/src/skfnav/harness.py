"""Experiment runner: single cases, parameter sweeps, aggregates, reports.

Sweeps enumerate the Cartesian product of the configured axes in a canonical
order and execute cells (optionally in parallel processes); the record list
and every emitted file are deterministic functions of config plus seeds,
independent of worker count.  Wall-clock timings are logged, never written
into result files.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .configio import PLOT_SCHEMA, config_to_dict, parse_single, validate_config
from .exceptions import ConfigError, SkfnavError
from .metrics import GREEN, YELLOW, classify, relative_rmse
from .scenarios.balloon import build_balloon_filter, simulate_balloon
from .scenarios.shuttle import STATE_LABELS, build_shuttle_filter, simulate_shuttle
from .switching import reports_no_corruption

log = logging.getLogger("skfnav")

AXIS_ORDER = ("q_p", "r", "A", "B", "C")
RMSE_STATES = {
    "balloon": ("lon", "lat"),
    "shuttle": STATE_LABELS,
}
_CSV_FIELDS = [
    "config_hash", "scenario", "seed", "n_steps", "dt", "delta",
    "q_x", "q_p", "r", "bias_kind", "A", "B", "C", "cap",
    "true_switch_step", "est_switch_step", "no_corruption",
    "outcome", "status", "error",
]


def fmt(value) -> str:
    """Canonical CSV cell text (17 significant digits for floats)."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (list, tuple)):
        return ";".join(fmt(v) for v in value)
    return str(value)


def config_hash(data: dict) -> str:
    """Hash of the config content, seed excluded: replicated runs of one cell
    share a hash and records key on (hash, seed)."""
    doc = {k: v for k, v in data.items() if k != "seed"}
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


@dataclass
class RunRecord:
    """One experiment: config snapshot, estimate, outcome, per-state errors."""

    scenario: str
    config: dict
    config_hash: str
    seed: int
    true_switch_step: Optional[int] = None
    est_switch_step: Optional[int] = None
    no_corruption: bool = False
    outcome: str = "red"
    rmse: dict = field(default_factory=dict)
    weights: list = field(default_factory=list)
    runtime: float = 0.0
    status: str = "ok"
    error: Optional[str] = None


def execute_case(data: dict, seed: Optional[int] = None):
    """Execute one configured run end to end; failures are captured in the
    record rather than raised.  Returns (record, filter or None)."""
    validate_config(data)
    data = dict(data)
    if seed is not None:
        data["seed"] = int(seed)
    scenario, cfg, extra = parse_single(data)
    snapshot = config_to_dict(scenario, cfg)
    record = RunRecord(
        scenario=scenario,
        config=snapshot,
        config_hash=config_hash(snapshot),
        seed=cfg.seed,
        true_switch_step=cfg.true_switch_step,
    )
    start = time.perf_counter()
    filt = truth = None
    try:
        if scenario == "balloon":
            filt, truth = _run_balloon(cfg, extra, record)
        else:
            filt, truth = _run_shuttle(cfg, record)
    except SkfnavError as exc:
        record.status = "error"
        record.error = f"{type(exc).__name__}: {exc}"
        record.outcome = "red"
        filt = truth = None
    record.runtime = time.perf_counter() - start
    log.debug("run %s seed=%s outcome=%s (%.2fs)",
              record.config_hash, record.seed, record.outcome, record.runtime)
    return record, filt, truth


def run_case(data: dict, seed: Optional[int] = None) -> RunRecord:
    """Full pipeline for one config + seed; see ``execute_case``."""
    return execute_case(data, seed=seed)[0]


def _finish_record(record: RunRecord, cfg, filt, est, truth_states, state_names):
    record.no_corruption = reports_no_corruption(est, cfg.n_steps)
    record.est_switch_step = None if est.best.is_nominal else est.best.s_index
    bias_free = cfg.true_switch_step is None or cfg.bias.is_zero
    record.outcome = classify(
        record.est_switch_step,
        cfg.true_switch_step if not bias_free else None,
        bias_free=bias_free,
        no_corruption_reported=record.no_corruption,
    )
    means = np.asarray([entry[0] for entry in est.best.history])
    errors = relative_rmse(
        means[1:, : len(state_names)], truth_states[1:, : len(state_names)]
    )
    record.rmse = {name: float(err) for name, err in zip(state_names, errors)}
    record.weights = [
        {"s_index": int(s), "t_s": float(s) * cfg.dt, "weight": float(w)}
        for s, w in zip(est.s_indices, est.weights)
    ]


def _run_balloon(cfg, field_obj, record: RunRecord):
    truth = simulate_balloon(cfg, field_obj)
    filt = build_balloon_filter(cfg, field_obj)
    filt.run(truth.measurement_map(), cfg.n_steps)
    est = filt.estimate()
    _finish_record(record, cfg, filt, est, truth.states, RMSE_STATES["balloon"])
    return filt, truth


def _run_shuttle(cfg, record: RunRecord):
    truth = simulate_shuttle(cfg)
    filt = build_shuttle_filter(cfg, truth)
    filt.run(truth.measurement_map(), cfg.n_steps)
    est = filt.estimate()
    _finish_record(
        record, cfg, filt, est, truth.inertial_states, RMSE_STATES["shuttle"]
    )
    return filt, truth


# -- sweeps ----------------------------------------------------------------


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian sweep over noise/corruption axes, replicated over seeds."""

    scenario: str
    base: dict
    axes: dict
    seeds: tuple
    q_x_over_r: Optional[float] = None
    success_includes_yellow: bool = False
    name: Optional[str] = None

    def __post_init__(self):
        if not self.axes:
            raise ConfigError("sweep needs at least one axis")
        for axis in self.axes:
            if axis not in AXIS_ORDER:
                raise ConfigError(f"unknown sweep axis {axis!r}")
        if not self.seeds:
            raise ConfigError("sweep needs at least one seed")

    def cell_configs(self) -> list[dict]:
        names = [a for a in AXIS_ORDER if a in self.axes]
        cells = []
        for combo in itertools.product(*(self.axes[a] for a in names)):
            data = dict(self.base)
            data["scenario"] = self.scenario
            bias = dict(data.get("bias", {"kind": "quadratic"}))
            for axis, value in zip(names, combo):
                if axis in ("A", "B", "C"):
                    bias["kind"] = "quadratic"
                    bias[axis] = value
                else:
                    data[axis] = value
            if any(a in names for a in ("A", "B", "C")):
                data["bias"] = bias
            if self.q_x_over_r is not None:
                if "r" not in data:
                    raise ConfigError(
                        "q_x_over_r needs a measurement-noise value (axis or base)"
                    )
                data["q_x"] = data["r"] / self.q_x_over_r
            cells.append(data)
        return cells


def sweep_from_dict(data: dict) -> SweepGrid:
    validate_config(data)
    if "axes" not in data:
        raise ConfigError("not a sweep config (no axes)")
    seeds = data.get("seeds", 5)
    if isinstance(seeds, int):
        seeds = tuple(range(seeds))
    else:
        seeds = tuple(int(s) for s in seeds)
    return SweepGrid(
        scenario=data["scenario"],
        base=dict(data.get("base", {})),
        axes={k: list(v) for k, v in data["axes"].items()},
        seeds=seeds,
        q_x_over_r=data.get("q_x_over_r"),
        success_includes_yellow=data.get("success_includes_yellow", False),
        name=data.get("name"),
    )


def resolve_threads(default_cap: int = 4) -> int:
    env = os.environ.get("SKFNAV_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"SKFNAV_THREADS must be an integer, got {env!r}") from exc
    return max(1, min(default_cap, os.cpu_count() or 1))


def _run_task(task) -> RunRecord:
    data, seed = task
    return run_case(data, seed=seed)


def run_sweep(grid: SweepGrid, threads: Optional[int] = None) -> list[RunRecord]:
    """All cells x seeds, in deterministic order regardless of parallelism.

    Individual cell failures are captured in their records; the sweep always
    completes.
    """
    threads = resolve_threads() if threads is None else max(1, int(threads))
    tasks = [(cell, seed) for cell in grid.cell_configs() for seed in grid.seeds]
    log.info("sweep: %d runs (%d cells x %d seeds), %d worker(s)",
             len(tasks), len(tasks) // len(grid.seeds), len(grid.seeds), threads)
    start = time.perf_counter()
    if threads == 1:
        records = [_run_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=1))
    log.info("sweep finished in %.1fs", time.perf_counter() - start)
    return records


def _is_success(record: RunRecord, include_yellow: bool) -> bool:
    return record.outcome == GREEN or (include_yellow and record.outcome == YELLOW)


def _axis_value(record: RunRecord, axis: str):
    if axis in ("A", "B", "C"):
        return record.config["bias"].get(axis, 0.0)
    return record.config[axis]


def aggregate(grid: SweepGrid, records: list[RunRecord]) -> list[dict]:
    """Success rate per (axis value, parameter-noise level) and pooled median
    RMSE per axis value."""
    state_names = RMSE_STATES[grid.scenario]
    rows = []
    for axis in (a for a in AXIS_ORDER if a in grid.axes):
        q_p_levels = sorted({rec.config["q_p"] for rec in records})
        for value in grid.axes[axis]:
            matching = [rec for rec in records if _axis_value(rec, axis) == value]
            for q_p in q_p_levels:
                subset = [rec for rec in matching if rec.config["q_p"] == q_p]
                if not subset:
                    continue
                wins = sum(_is_success(r, grid.success_includes_yellow) for r in subset)
                rows.append({
                    "axis": axis, "value": value, "q_p": q_p,
                    "runs": len(subset), "successes": wins,
                    "success_rate": wins / len(subset),
                    **{f"median_rmse_{s}": "" for s in state_names},
                })
            medians = _median_rmse(matching, state_names)
            rows.append({
                "axis": axis, "value": value, "q_p": "all",
                "runs": len(matching),
                "successes": sum(
                    _is_success(r, grid.success_includes_yellow) for r in matching
                ),
                "success_rate": (
                    sum(_is_success(r, grid.success_includes_yellow) for r in matching)
                    / len(matching) if matching else ""
                ),
                **{f"median_rmse_{s}": medians[s] for s in state_names},
            })
    return rows


def _median_rmse(records: list[RunRecord], state_names) -> dict:
    out = {}
    for name in state_names:
        values = [
            rec.rmse.get(name) for rec in records
            if rec.status == "ok" and rec.rmse.get(name) is not None
            and np.isfinite(rec.rmse.get(name))
        ]
        out[name] = float(np.median(values)) if values else ""
    return out


# -- persistence -------------------------------------------------------------


def record_row(record: RunRecord) -> dict:
    cfg = record.config
    bias = cfg.get("bias", {})
    row = {
        "config_hash": record.config_hash,
        "scenario": record.scenario,
        "seed": record.seed,
        "n_steps": cfg.get("n_steps"),
        "dt": float(cfg.get("dt")),
        "delta": cfg.get("delta"),
        "q_x": float(cfg.get("q_x")),
        "q_p": float(cfg.get("q_p")),
        "r": float(cfg.get("r")),
        "bias_kind": bias.get("kind", ""),
        "A": bias.get("A", 0.0),
        "B": bias.get("B", 0.0),
        "C": bias.get("C", 0.0),
        "cap": bias.get("cap"),
        "true_switch_step": record.true_switch_step,
        "est_switch_step": record.est_switch_step,
        "no_corruption": record.no_corruption,
        "outcome": record.outcome,
        "status": record.status,
        "error": record.error,
    }
    for name in RMSE_STATES[record.scenario]:
        row[f"rmse_{name}"] = record.rmse.get(name)
    return row


def write_records_csv(path, records: list[RunRecord]) -> None:
    if not records:
        raise ConfigError("no records to write")
    state_names = RMSE_STATES[records[0].scenario]
    fields = _CSV_FIELDS + [f"rmse_{s}" for s in state_names]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for record in records:
            writer.writerow({k: fmt(v) for k, v in record_row(record).items()})


def read_records_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_aggregates_csv(path, rows: list[dict]) -> None:
    if not rows:
        raise ConfigError("no aggregate rows to write")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: fmt(v) for k, v in row.items()})


def _validate_plot(doc: dict) -> dict:
    jsonschema.validate(doc, PLOT_SCHEMA)
    return doc


def plot_documents(grid: SweepGrid, records: list[RunRecord]) -> dict[str, dict]:
    """Success-rate and RMSE-scatter series mirroring the aggregate tables."""
    docs = {}
    state_names = RMSE_STATES[grid.scenario]
    for axis in (a for a in AXIS_ORDER if a in grid.axes):
        values = grid.axes[axis]
        q_p_levels = sorted({rec.config["q_p"] for rec in records})
        series = []
        for q_p in q_p_levels:
            ys = []
            for value in values:
                subset = [
                    rec for rec in records
                    if _axis_value(rec, axis) == value and rec.config["q_p"] == q_p
                ]
                wins = sum(_is_success(r, grid.success_includes_yellow) for r in subset)
                ys.append(wins / len(subset) if subset else float("nan"))
            series.append({"label": f"q_p={q_p:g}", "x": [float(v) for v in values], "y": ys})
        docs[f"success_rate_{axis}"] = _validate_plot(
            {"kind": "success_rate", "axis": axis, "series": series}
        )
        scatter = []
        for name in state_names:
            xs, ys = [], []
            for rec in records:
                value = rec.rmse.get(name)
                if rec.status == "ok" and value is not None and np.isfinite(value):
                    xs.append(float(_axis_value(rec, axis)))
                    ys.append(float(value))
            scatter.append({"label": name, "x": xs, "y": ys})
        docs[f"rmse_scatter_{axis}"] = _validate_plot(
            {"kind": "rmse_scatter", "axis": axis, "series": scatter}
        )
    return docs


def run_sweep_to_dir(
    grid: SweepGrid, out_dir, threads: Optional[int] = None
) -> tuple[list[RunRecord], Path]:
    """Execute a sweep and write records.csv, aggregates.csv, plots/, and the
    config echo under ``out_dir/<sweep-id>/``."""
    sweep_doc = {
        "scenario": grid.scenario,
        "base": grid.base,
        "axes": grid.axes,
        "seeds": list(grid.seeds),
        "q_x_over_r": grid.q_x_over_r,
        "success_includes_yellow": grid.success_includes_yellow,
    }
    sweep_id = grid.name or f"sweep-{config_hash(sweep_doc)}"
    target = Path(out_dir) / sweep_id
    target.mkdir(parents=True, exist_ok=True)
    records = run_sweep(grid, threads=threads)
    write_records_csv(target / "records.csv", records)
    write_aggregates_csv(target / "aggregates.csv", aggregate(grid, records))
    plots = target / "plots"
    plots.mkdir(exist_ok=True)
    for name, doc in plot_documents(grid, records).items():
        (plots / f"{name}.json").write_text(json.dumps(doc, sort_keys=True, indent=2))
    sweep_doc["config_hash"] = config_hash(sweep_doc)
    (target / "sweep_config.json").write_text(
        json.dumps(sweep_doc, sort_keys=True, indent=2)
    )
    return records, target


# -- single-run outputs and report tables ------------------------------------

_TABLE_FIELDS = [
    "test", "config_hash", "seed", "r", "q_x", "q_p", "delta", "A", "B", "C",
    "true_switch_step", "est_switch_step", "outcome",
]


def write_summary_table(path, rows: list[dict]) -> None:
    """Per-test table: one row per record, setup columns then results."""
    if not rows:
        raise ConfigError("no records selected for the summary table")
    fields = _TABLE_FIELDS + [
        key for key in rows[0] if key.startswith("rmse_")
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        for i, row in enumerate(rows, start=1):
            writer.writerow({"test": i, **{k: fmt(v) for k, v in row.items()}})


def _parse_cell(text: str):
    if text == "" or text is None:
        return None
    if ";" in text:
        return [float(v) for v in text.split(";")]
    return float(text)


def rows_to_records(rows: list[dict]) -> list[RunRecord]:
    """Rebuild records (config subset sufficient for aggregation/plots) from
    a records.csv read back as dicts of strings."""
    records = []
    for row in rows:
        scenario = row["scenario"]
        bias = {
            "kind": row["bias_kind"] or "quadratic",
            "A": _parse_cell(row["A"]) or 0.0,
            "B": _parse_cell(row["B"]) or 0.0,
            "C": _parse_cell(row["C"]) or 0.0,
        }
        if row.get("cap"):
            bias["cap"] = float(row["cap"])
        config = {
            "scenario": scenario,
            "n_steps": int(row["n_steps"]),
            "dt": float(row["dt"]),
            "delta": int(row["delta"]),
            "q_x": float(row["q_x"]),
            "q_p": float(row["q_p"]),
            "r": float(row["r"]),
            "bias": bias,
        }
        rmse = {}
        for name in RMSE_STATES[scenario]:
            cell = row.get(f"rmse_{name}", "")
            rmse[name] = float(cell) if cell else None
        records.append(RunRecord(
            scenario=scenario,
            config=config,
            config_hash=row["config_hash"],
            seed=int(row["seed"]),
            true_switch_step=(
                int(row["true_switch_step"]) if row["true_switch_step"] else None
            ),
            est_switch_step=(
                int(row["est_switch_step"]) if row["est_switch_step"] else None
            ),
            no_corruption=row["no_corruption"] == "true",
            outcome=row["outcome"],
            rmse=rmse,
            status=row["status"],
            error=row["error"] or None,
        ))
    return records


def write_run_outputs(record: RunRecord, filt, out_dir, truth=None) -> Path:
    """Persist a single run: summary JSON, records.csv, best-branch CSV, and
    (when the truth object is supplied) truth/measurement CSV exports."""
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    write_records_csv(target / "records.csv", [record])
    if truth is not None:
        if record.scenario == "balloon":
            from .scenarios import balloon as scenario_io
        else:
            from .scenarios import shuttle as scenario_io
        scenario_io.write_truth_csv(target / "truth.csv", truth)
        scenario_io.write_measurements_csv(target / "measurements.csv", truth)
    summary = {
        "config": record.config,
        "config_hash": record.config_hash,
        "seed": record.seed,
        "true_switch_step": record.true_switch_step,
        "est_switch_step": record.est_switch_step,
        "est_switch_time": (
            None if record.est_switch_step is None
            else record.est_switch_step * record.config["dt"]
        ),
        "no_corruption": record.no_corruption,
        "outcome": record.outcome,
        "rmse": record.rmse,
        "weights": record.weights,
        "status": record.status,
        "error": record.error,
    }
    (target / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2))
    if filt is not None:
        best = filt.estimate().best
        export_branch_history(target / "branch_trajectory.csv", best, record.config["dt"])
    return target


def export_branch_history(path, branch, dt: float) -> None:
    """Best-branch trajectory: step, time, hypothesis, score, means, variances."""
    if branch.history is None:
        raise ConfigError("branch history retention is disabled")
    dim = branch.history[0][0].size
    fields = ["step", "time", "branch_t_s", "logL"]
    fields += [f"mean_{i}" for i in range(dim)] + [f"var_{i}" for i in range(dim)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for step, (mean, var, loglik) in enumerate(branch.history):
            row = [step, step * dt, branch.t_s, loglik, *mean, *var]
            writer.writerow([fmt(float(v)) if isinstance(v, (float, np.floating)) else fmt(v) for v in row])

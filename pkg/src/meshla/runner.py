"""Run orchestration: single runs, seed batches, parameter sweeps, static
baselines and the CSV/JSON writers shared by the service and the CLI."""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .analysis import ConvergenceReport, Summary
from .config import ScenarioConfig
from .engine import CSV_COLUMNS, MetricsSeries, RunContext, run
from .errors import ConfigError

SWEEP_PARAMETERS = ("num_radios", "K", "lambda", "feedback")
BASELINE_STRATEGIES = ("random-static", "common-channel")


@dataclass
class RunResult:
    seed: int
    series: MetricsSeries
    summary: Summary
    convergence: ConvergenceReport
    strategy: str | None = None


def run_scenario(config: ScenarioConfig, seed: int | None = None, frozen: dict | None = None) -> RunResult:
    used_seed = config.engine.seed if seed is None else seed
    series = run(config, seed=used_seed, frozen=frozen)
    return RunResult(
        seed=used_seed,
        series=series,
        summary=analysis.summarize(series),
        convergence=analysis.convergence_check(series),
    )


def run_many(config: ScenarioConfig, seeds) -> list[RunResult]:
    return [run_scenario(config, seed=s) for s in seeds]


def frozen_strategy(config: ScenarioConfig, strategy: str, seed: int) -> dict[int, tuple[int, ...]]:
    """Channel-sets for a non-learning baseline run."""
    ctx = RunContext.from_config(config)
    if strategy == "common-channel":
        return {v: tuple(range(ctx.radios[v])) for v in ctx.node_ids}
    if strategy == "random-static":
        rng = random.Random(seed)
        return {
            v: ctx.catalogs[v].decode(rng.randrange(len(ctx.catalogs[v])))
            for v in ctx.node_ids
        }
    raise ConfigError(f"unknown baseline strategy {strategy!r}")


def baseline(config: ScenarioConfig, strategy: str, seeds) -> list[RunResult]:
    results = []
    for s in seeds:
        frozen = frozen_strategy(config, strategy, s)
        r = run_scenario(config, seed=s, frozen=frozen)
        r.strategy = strategy
        results.append(r)
    return results


def apply_parameter(config: ScenarioConfig, parameter: str, value) -> ScenarioConfig:
    """New config with one sweep parameter replaced (revalidated)."""
    raw = config.model_dump(by_alias=True)
    if parameter == "num_radios":
        raw["topology"]["num_radios"] = value
    elif parameter == "K":
        raw["engine"]["channels"] = value
    elif parameter == "lambda":
        raw["learning"]["lambda"] = value
        raw["learning"]["lambda1"] = value
    elif parameter == "feedback":
        raw["engine"]["feedback"] = value
    else:
        raise ConfigError(
            f"unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}"
        )
    from .config import parse_config

    return parse_config(raw, source=f"sweep[{parameter}={value!r}]")


@dataclass
class SweepPoint:
    value: object
    runs: list[RunResult]
    mean_delivered: float
    mean_connectivity: float
    mean_interference: float
    mean_switch_rate: float
    converged_fraction: float
    mean_delivered_trajectory: np.ndarray
    mean_connectivity_trajectory: np.ndarray


@dataclass
class SweepResult:
    parameter: str
    seeds: list[int]
    points: list[SweepPoint]

    def table(self) -> list[dict]:
        return [
            {
                "value": p.value,
                "mean_delivered": p.mean_delivered,
                "mean_connectivity": p.mean_connectivity,
                "mean_interference": p.mean_interference,
                "mean_switch_rate": p.mean_switch_rate,
                "converged_fraction": p.converged_fraction,
            }
            for p in self.points
        ]


def sweep(config: ScenarioConfig, parameter: str, values, seeds) -> SweepResult:
    """Cross product of values and seeds, with per-value ensemble means."""
    values = list(values)
    seeds = list(seeds)
    if not values:
        raise ConfigError("sweep needs at least one value")
    if not seeds:
        raise ConfigError("sweep needs at least one seed")
    points = []
    for value in values:
        cfg = apply_parameter(config, parameter, value)
        runs = run_many(cfg, seeds)
        conv = [r.convergence.all_converged for r in runs]
        points.append(
            SweepPoint(
                value=value,
                runs=runs,
                mean_delivered=float(np.mean([r.summary.delivered_per_slot for r in runs])),
                mean_connectivity=float(np.mean([r.summary.connectivity for r in runs])),
                mean_interference=float(np.mean([r.summary.interference for r in runs])),
                mean_switch_rate=float(np.mean([r.summary.switch_rate for r in runs])),
                converged_fraction=float(np.mean([1.0 if c else 0.0 for c in conv])),
                mean_delivered_trajectory=np.mean(
                    [r.series.delivered for r in runs], axis=0
                ),
                mean_connectivity_trajectory=np.mean(
                    [r.series.connectivity for r in runs], axis=0
                ),
            )
        )
    return SweepResult(parameter=parameter, seeds=seeds, points=points)


# ---------------------------------------------------------------------------
# output files


def format_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def write_csv_columns(path, columns: dict[str, list]) -> None:
    """Write the fixed-schema metrics CSV from column lists."""
    missing = [c for c in CSV_COLUMNS if c not in columns]
    if missing:
        raise ValueError(f"missing CSV columns: {missing}")
    n = len(columns[CSV_COLUMNS[0]])
    lines = [",".join(CSV_COLUMNS)]
    for i in range(n):
        lines.append(",".join(format_value(columns[c][i]) for c in CSV_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


def write_series_csv(path, series: MetricsSeries) -> None:
    write_csv_columns(path, series.csv_columns())


def convergence_to_dict(report: ConvergenceReport) -> dict:
    return {
        "threshold": report.threshold,
        "all_converged": report.all_converged,
        "achieved_vs_oracle": report.achieved_vs_oracle,
        "nodes": [asdict(n) for n in report.nodes],
    }


def summary_to_dict(result: RunResult) -> dict:
    out = {
        "seed": result.seed,
        "delivered_per_slot": result.summary.delivered_per_slot,
        "connectivity": result.summary.connectivity,
        "interference": result.summary.interference,
        "switch_rate": result.summary.switch_rate,
        "mean_cq": result.summary.mean_cq,
        "warmup": result.summary.warmup,
        "horizon": result.summary.horizon,
        "interference_connectivity_ratio": result.summary.interference_connectivity_ratio,
        "convergence": convergence_to_dict(result.convergence),
    }
    if result.strategy is not None:
        out["strategy"] = result.strategy
    return out


def write_summary_json(path, result: RunResult) -> None:
    Path(path).write_text(json.dumps(summary_to_dict(result), indent=2) + "\n")


def write_run_outputs(outdir, prefix: str, result: RunResult) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"{prefix}_seed{result.seed}.csv"
    json_path = outdir / f"{prefix}_seed{result.seed}_summary.json"
    write_series_csv(csv_path, result.series)
    write_summary_json(json_path, result)
    return [csv_path, json_path]


def write_sweep_outputs(outdir, prefix: str, result: SweepResult) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for point in result.points:
        tag = str(point.value).replace(" ", "")
        for r in point.runs:
            paths.extend(
                write_run_outputs(outdir, f"{prefix}_{result.parameter}-{tag}", r)
            )
    table_json = outdir / f"{prefix}_sweep_{result.parameter}.json"
    table_json.write_text(
        json.dumps(
            {"parameter": result.parameter, "seeds": result.seeds, "table": result.table()},
            indent=2,
        )
        + "\n"
    )
    paths.append(table_json)
    table_csv = outdir / f"{prefix}_sweep_{result.parameter}.csv"
    rows = result.table()
    header = list(rows[0].keys())
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(row[k]) for k in header))
    table_csv.write_text("\n".join(lines) + "\n")
    paths.append(table_csv)
    return paths

"""Command-line client for the simulation service.

Every subcommand builds a request, sends it through the HTTP API (an
in-process app by default, a remote server with --server) and writes the
returned metrics to disk. Exit codes: 0 success, 1 runtime failure,
2 usage or configuration error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from . import __version__
from .config import ScenarioConfig, default_config, dump_config, load_config
from .errors import ConfigError
from .runner import BASELINE_STRATEGIES, SWEEP_PARAMETERS, format_value, write_csv_columns

EXIT_RUNTIME = 1
EXIT_USAGE = 2


class ServiceClient:
    """Thin transport wrapper: in-process ASGI app or remote HTTP server."""

    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app())

    def post(self, path: str, payload: dict) -> dict:
        try:
            resp = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            click.echo(f"error: cannot reach service: {exc}", err=True)
            sys.exit(EXIT_RUNTIME)
        if resp.status_code in (400, 422):
            click.echo(f"error: {_detail(resp)}", err=True)
            sys.exit(EXIT_USAGE)
        if resp.status_code != 200:
            click.echo(f"error: service returned {resp.status_code}: {_detail(resp)}", err=True)
            sys.exit(EXIT_RUNTIME)
        return resp.json()


def _detail(resp) -> str:
    try:
        return json.dumps(resp.json().get("detail"))
    except Exception:
        return resp.text


def _load_scenario(config_path, slots, warmup, seeds) -> tuple[dict, list[int]]:
    """Config dict with flag overrides applied, plus the seed list."""
    try:
        cfg = load_config(config_path) if config_path else default_config()
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    raw = dump_config(cfg)
    if slots is not None:
        raw["engine"]["horizon"] = slots
    if warmup is not None:
        raw["engine"]["warmup"] = warmup
    seed_list = list(seeds) if seeds else [raw["engine"]["seed"]]
    if len(set(seed_list)) != len(seed_list):
        click.echo("error: seeds must be distinct", err=True)
        sys.exit(EXIT_USAGE)
    return raw, seed_list


def _out_dir(out, raw_config) -> Path:
    d = Path(out) if out else Path(raw_config.get("output", {}).get("dir", "out"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _prefix(raw_config) -> str:
    return raw_config.get("output", {}).get("prefix", "run")


def _write_run_files(outdir: Path, prefix: str, runs: list[dict]) -> list[Path]:
    paths = []
    for r in runs:
        seed = r["seed"]
        if r.get("series") is not None:
            csv_path = outdir / f"{prefix}_seed{seed}.csv"
            write_csv_columns(csv_path, r["series"])
            paths.append(csv_path)
        json_path = outdir / f"{prefix}_seed{seed}_summary.json"
        json_path.write_text(json.dumps(r["summary"], indent=2) + "\n")
        paths.append(json_path)
    return paths


def _common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(), default=None, help="Scenario JSON file.")(fn)
    fn = click.option("--seed", "seeds", type=int, multiple=True, help="Seed (repeatable).")(fn)
    fn = click.option("--out", default=None, help="Output directory.")(fn)
    fn = click.option("--slots", type=int, default=None, help="Override horizon.")(fn)
    fn = click.option("--warmup", type=int, default=None, help="Override warm-up slots.")(fn)
    fn = click.option("--server", default=None, help="Remote service URL (default: in-process).")(fn)
    return fn


@click.group()
@click.version_option(version=__version__)
def main():
    """Learning-automata mesh channel-assignment simulator."""


@main.command("run")
@_common_options
def cmd_run(config_path, seeds, out, slots, warmup, server):
    """Run the scenario once per seed; write a metrics CSV and a summary
    JSON per run."""
    raw, seed_list = _load_scenario(config_path, slots, warmup, seeds)
    client = ServiceClient(server)
    data = client.post("/simulate", {"config": raw, "seeds": seed_list, "include_series": True})
    outdir = _out_dir(out, raw)
    paths = _write_run_files(outdir, _prefix(raw), data["runs"])
    for p in paths:
        click.echo(str(p))


@main.command("sweep")
@_common_options
@click.option("--parameter", required=True, help=f"One of {', '.join(SWEEP_PARAMETERS)}.")
@click.option("--value", "values", multiple=True, help="Sweep value (repeatable).")
def cmd_sweep(config_path, seeds, out, slots, warmup, server, parameter, values):
    """Run the scenario over a parameter grid and emit a comparison table."""
    if parameter not in SWEEP_PARAMETERS:
        click.echo(f"error: unknown sweep parameter {parameter!r}", err=True)
        sys.exit(EXIT_USAGE)
    if not values:
        click.echo("error: sweep needs at least one --value", err=True)
        sys.exit(EXIT_USAGE)
    try:
        parsed = [_parse_sweep_value(parameter, v) for v in values]
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    raw, seed_list = _load_scenario(config_path, slots, warmup, seeds)
    client = ServiceClient(server)
    data = client.post(
        "/sweep",
        {"config": raw, "parameter": parameter, "values": parsed, "seeds": seed_list},
    )
    outdir = _out_dir(out, raw)
    prefix = _prefix(raw)
    paths = []
    for r in data["runs"]:
        tag = str(r["value"]).replace(" ", "")
        p = outdir / f"{prefix}_{parameter}-{tag}_seed{r['summary']['seed']}_summary.json"
        p.write_text(json.dumps(r["summary"], indent=2) + "\n")
        paths.append(p)
    table_path = outdir / f"{prefix}_sweep_{parameter}.json"
    table = [
        {k: v for k, v in point.items() if not k.endswith("_trajectory")}
        for point in data["points"]
    ]
    table_path.write_text(
        json.dumps({"parameter": parameter, "seeds": seed_list, "table": table}, indent=2) + "\n"
    )
    paths.append(table_path)
    csv_path = outdir / f"{prefix}_sweep_{parameter}.csv"
    header = list(table[0].keys())
    lines = [",".join(header)]
    for row in table:
        lines.append(",".join(format_value(row[k]) for k in header))
    csv_path.write_text("\n".join(lines) + "\n")
    paths.append(csv_path)
    for p in paths:
        click.echo(str(p))


def _parse_sweep_value(parameter: str, text: str):
    if parameter in ("num_radios", "K"):
        try:
            return int(text)
        except ValueError:
            raise ValueError(f"{parameter} values must be integers, got {text!r}") from None
    if parameter == "lambda":
        try:
            return float(text)
        except ValueError:
            raise ValueError(f"lambda values must be numbers, got {text!r}") from None
    return text


@main.command("baseline")
@_common_options
@click.option("--strategy", required=True, help=f"One of {', '.join(BASELINE_STRATEGIES)}.")
def cmd_baseline(config_path, seeds, out, slots, warmup, server, strategy):
    """Run a frozen (non-learning) channel assignment baseline."""
    if strategy not in BASELINE_STRATEGIES:
        click.echo(f"error: unknown strategy {strategy!r}", err=True)
        sys.exit(EXIT_USAGE)
    raw, seed_list = _load_scenario(config_path, slots, warmup, seeds)
    client = ServiceClient(server)
    data = client.post(
        "/baseline",
        {"config": raw, "strategy": strategy, "seeds": seed_list, "include_series": True},
    )
    outdir = _out_dir(out, raw)
    paths = _write_run_files(outdir, f"{_prefix(raw)}_{strategy}", data["runs"])
    for p in paths:
        click.echo(str(p))


@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def cmd_serve(host, port):
    """Start the simulation service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()

"""Command line entry points.

Four commands: `fit` regenerates the committed model artifacts, `scenario
run` checks named evidence scenarios against their expected posteriors,
`sim run` drives the financing sequence on a fresh simulated world and
writes its artifacts, and `serve` exposes the HTTP gateway.  The artifact
directory defaults to $CHAINVOICE_HOME, then ./chainvoice-out.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from .bootstrap import DEFAULT_SEED, bootstrap_world
from .errors import (
    ChainvoiceError,
    FitFailed,
    UnknownNode,
    UnknownState,
    ValidationFailed,
)
from .finance.scenarios import builtin_scenarios, run_scenario, scenarios_from_doc
from .finance.store import load_overall_network, load_scenarios, write_artifacts
from .flow import (
    DEFAULT_THRESHOLD,
    FinancingRequest,
    run_financing_sequence,
)
from .report import (
    format_flow_report,
    format_scenario_table,
    render_scenario_charts,
    write_flow_report,
    write_scenario_csv,
    write_world_exports,
)

OUT_OPTION = dict(
    type=click.Path(file_okay=False, path_type=Path),
    envvar="CHAINVOICE_HOME",
    default="chainvoice-out",
    show_default=True,
    help="Artifact directory (env: CHAINVOICE_HOME).",
)


def _load_json(path: Path, what: str) -> dict:
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise click.UsageError(f"{what} file {path} is not valid JSON: {e}")


@click.group()
@click.version_option(package_name="chainvoice")
def main() -> None:
    """Invoice-financing decision support on simulated private blockchains."""


@main.command()
@click.option(
    "--data-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Where to write models/ and scenarios.json; defaults to the package data directory.",
)
def fit(data_dir: Path | None) -> None:
    """Refit the model CPTs and rewrite the committed artifacts."""
    if data_dir is None:
        from .finance.store import _data_root

        data_dir = _data_root()
    try:
        result = write_artifacts(data_dir)
    except FitFailed as e:
        raise click.ClickException(f"fit did not converge: {e}")
    click.echo(f"wrote model artifacts to {data_dir}")
    for name in sorted(result.residuals):
        click.echo(f"  residual {name}: {result.residuals[name]:+.6f}")
    worst = max(abs(v) for v in result.residuals.values())
    click.echo(f"max |residual| = {worst:.6f}")


@main.group()
def scenario() -> None:
    """Evidence scenarios."""


@scenario.command("run")
@click.option(
    "--scenarios",
    "scenarios_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Scenario document (JSON); defaults to the committed set.",
)
@click.option(
    "--data-dir",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    default=None,
    help="Model artifact directory; defaults to the committed artifacts.",
)
@click.option("--out", "out_dir", **OUT_OPTION)
@click.option(
    "--charts/--no-charts",
    default=True,
    show_default=True,
    help="Render a posterior bar chart per scenario next to the CSV.",
)
@click.option("--name", "names", multiple=True, help="Run only the named scenarios.")
def scenario_run(
    scenarios_file: Path | None,
    data_dir: Path | None,
    out_dir: Path,
    charts: bool,
    names: tuple[str, ...],
) -> None:
    """Run scenarios and report posteriors against their expected values.

    Exits 0 only when every check passes.
    """
    net = load_overall_network(data_dir)
    if scenarios_file is not None:
        doc = _load_json(scenarios_file, "scenario")
        try:
            defs = scenarios_from_doc(doc)
        except (KeyError, TypeError) as e:
            raise click.UsageError(f"scenario file {scenarios_file}: bad shape ({e})")
    elif data_dir is not None:
        defs = load_scenarios(data_dir)
    else:
        defs = builtin_scenarios()
    if names:
        unknown = sorted(set(names) - {s.name for s in defs})
        if unknown:
            raise click.UsageError(f"unknown scenario name(s): {', '.join(unknown)}")
        defs = tuple(s for s in defs if s.name in names)

    reports = []
    for sc in defs:
        try:
            reports.append(run_scenario(net, sc))
        except (UnknownNode, UnknownState) as e:
            raise click.ClickException(f"scenario {sc.name!r}: unknown node or state: {e}")

    click.echo(format_scenario_table(reports))
    csv_path = write_scenario_csv(reports, out_dir / "scenario_report.csv")
    click.echo(f"report: {csv_path}")
    if charts:
        for p in render_scenario_charts(net, defs, out_dir / "charts"):
            click.echo(f"chart: {p}")
    if not all(r.passed for r in reports):
        raise SystemExit(1)


@main.group()
def sim() -> None:
    """World simulation."""


@sim.command("run")
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option(
    "--request",
    "request_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Financing request (JSON); defaults to the committed example.",
)
@click.option(
    "--fixtures",
    "fixtures_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Off-chain fixtures (JSON); defaults to the committed set.",
)
@click.option(
    "--world-config",
    "world_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Chain topology (JSON); defaults to the committed world.",
)
@click.option(
    "--fault-step",
    type=click.IntRange(1, 12),
    default=None,
    help="Crash the coordinator before the numbered sequence step.",
)
@click.option(
    "--fault-phase",
    type=click.Choice(["lock", "stage", "commit"]),
    default=None,
    help="Crash the coordinator at the named phase.",
)
@click.option("--threshold", type=float, default=DEFAULT_THRESHOLD, show_default=True)
@click.option("--out", "out_dir", **OUT_OPTION)
def sim_run(
    seed: str,
    request_file: Path | None,
    fixtures_file: Path | None,
    world_file: Path | None,
    fault_step: int | None,
    fault_phase: str | None,
    threshold: float,
    out_dir: Path,
) -> None:
    """Bootstrap a world, run the 12-step financing sequence, write artifacts.

    Writes the outcome report, the per-chain ledger exports, and the
    coordinator journal under the artifact directory.  A fault option
    crashes the coordinator at the chosen point; the run then recovers
    and reports whatever the recovered world settled to.
    """
    if fault_step is not None and fault_phase is not None:
        raise click.UsageError("--fault-step and --fault-phase are mutually exclusive")
    fault = f"step-{fault_step}" if fault_step is not None else fault_phase

    request = None
    if request_file is not None:
        try:
            request = FinancingRequest.from_dict(_load_json(request_file, "request"))
        except (KeyError, ValueError) as e:
            raise click.UsageError(f"request file {request_file}: {e}")
    fixtures = (
        _load_json(fixtures_file, "fixtures") if fixtures_file is not None else None
    )
    config = _load_json(world_file, "world config") if world_file is not None else None

    world = bootstrap_world(seed, config)
    out_dir.mkdir(parents=True, exist_ok=True)
    journal_path = out_dir / "journal.jsonl"

    try:
        outcome = run_financing_sequence(
            world,
            request,
            fixtures,
            fault,
            world_config=config,
            journal_path=journal_path,
            threshold=threshold,
        )
    except ValidationFailed as e:
        write_world_exports(world, out_dir)
        raise click.ClickException(f"request rejected by validation: {e}")
    except ChainvoiceError as e:
        write_world_exports(world, out_dir)
        raise click.ClickException(f"{type(e).__name__}: {e}")

    click.echo(format_flow_report(outcome))
    paths = write_flow_report(outcome, out_dir)
    paths.update(write_world_exports(world, out_dir))
    click.echo(f"artifacts: {', '.join(str(p) for p in paths.values())}")


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option(
    "--frontend",
    "frontend_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Built console directory to serve at /; defaults to ./frontend/dist when present.",
)
def serve(port: int, host: str, seed: str, frontend_dir: Path | None) -> None:
    """Serve the /v1 HTTP API, plus the console when its build exists."""
    import uvicorn

    from .api import create_app

    if frontend_dir is None:
        candidate = Path.cwd() / "frontend" / "dist"
        frontend_dir = candidate if candidate.is_dir() else None
    app = create_app(seed=seed, frontend_dir=frontend_dir)
    click.echo(f"chainvoice API on http://{host}:{port}/v1 (seed {seed!r})")
    if frontend_dir is not None:
        click.echo(f"console from {frontend_dir}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()

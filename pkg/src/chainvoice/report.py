"""Rendering of scenario runs and simulation outcomes to text, CSV, and PNG.

The delimited files are the machine-readable record; the charts are the
human-readable one.  Charts go through matplotlib's object-oriented API
(a bare Figure), so no interactive backend is ever selected and rendering
works headless.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

from matplotlib.figure import Figure

from .bn import Network, query
from .finance.scenarios import ScenarioDef, ScenarioReport
from .flow import STEP_TITLES, FlowOutcome
from .ledger import World

SCENARIO_COLUMNS = (
    "scenario",
    "node",
    "state",
    "expected",
    "actual",
    "tolerance",
    "status",
)

BAR_COLOR = "#4878a8"


def scenario_rows(reports: Iterable[ScenarioReport]) -> list[dict[str, str]]:
    """Flatten reports to one row per checked target, ready for csv.DictWriter."""
    rows = []
    for rep in reports:
        for c in rep.checks:
            rows.append(
                {
                    "scenario": rep.name,
                    "node": c.node,
                    "state": c.state,
                    "expected": f"{c.expected:.6f}",
                    "actual": f"{c.actual:.6f}",
                    "tolerance": f"{c.tolerance:g}",
                    "status": "pass" if c.passed else "FAIL",
                }
            )
    return rows


def write_scenario_csv(reports: Iterable[ScenarioReport], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SCENARIO_COLUMNS)
        writer.writeheader()
        writer.writerows(scenario_rows(reports))
    return path


def format_scenario_table(reports: Sequence[ScenarioReport]) -> str:
    """Aligned terminal table, one line per check plus a summary line."""
    rows = scenario_rows(reports)
    if not rows:
        return "no scenarios"
    header = dict(zip(SCENARIO_COLUMNS, SCENARIO_COLUMNS))
    widths = {
        col: max(len(header[col]), *(len(r[col]) for r in rows))
        for col in SCENARIO_COLUMNS
    }
    def line(r):
        return "  ".join(r[col].ljust(widths[col]) for col in SCENARIO_COLUMNS)
    passed = sum(rep.passed for rep in reports)
    return "\n".join(
        [line(header)]
        + [line(r) for r in rows]
        + [f"{len(reports)} scenarios, {passed} passed, {len(reports) - passed} failed"]
    )


def render_posterior_chart(
    posteriors: dict[str, dict[str, float]], path: str | Path, title: str
) -> Path:
    """One PNG with a bar-chart panel per node, bars = state probabilities."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    nodes = list(posteriors)
    fig = Figure(figsize=(max(3.2 * len(nodes), 4.0), 3.6))
    axes = fig.subplots(1, len(nodes), squeeze=False)[0]
    for ax, node in zip(axes, nodes):
        dist = posteriors[node]
        states = list(dist)
        bars = ax.bar(states, [dist[s] for s in states], color=BAR_COLOR)
        ax.set_ylim(0.0, 1.05)
        ax.set_title(node.split(".")[-1], fontsize=10)
        ax.bar_label(bars, fmt="%.3f", fontsize=8)
        ax.tick_params(axis="x", labelrotation=15, labelsize=8)
        ax.tick_params(axis="y", labelsize=8)
    fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    return path


def render_scenario_charts(
    net: Network, scenarios: Sequence[ScenarioDef], out_dir: str | Path
) -> list[Path]:
    """Render the full posterior of every checked node, per scenario."""
    out_dir = Path(out_dir)
    paths = []
    for sc in scenarios:
        nodes: list[str] = []
        for t in sc.targets:
            if t.node not in nodes:
                nodes.append(t.node)
        posteriors = {
            n: query(net, sc.evidence, n).distribution for n in nodes
        }
        paths.append(
            render_posterior_chart(posteriors, out_dir / f"{sc.name}.png", sc.title)
        )
    return paths


def format_flow_report(outcome: FlowOutcome) -> str:
    marks = {"done": "done", "failed": "FAILED", "pending": "-"}
    lines = [
        f"step {i:>2}  {title:<54} {marks[status]}"
        for i, (title, status) in enumerate(zip(STEP_TITLES, outcome.steps), start=1)
    ]
    if outcome.p_fund is not None:
        lines.append(f"decision: {outcome.decision} (P(Fund) = {outcome.p_fund:.4f})")
    if outcome.tx_status is not None:
        lines.append(f"crosschain transaction {outcome.txid}: {outcome.tx_status}")
    if outcome.settlement is not None:
        lines.append(f"settled amount: {outcome.settlement}")
    if "rejection" in outcome.detail:
        lines.append(f"rejected: {outcome.detail['rejection']}")
    return "\n".join(lines)


def write_flow_report(outcome: FlowOutcome, out_dir: str | Path) -> dict[str, Path]:
    """Write outcome.json, steps.csv, and a posterior chart when one applies."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    paths["outcome"] = out_dir / "outcome.json"
    paths["outcome"].write_text(
        json.dumps(outcome.to_dict(), indent=2, sort_keys=True) + "\n"
    )

    paths["steps"] = out_dir / "steps.csv"
    with paths["steps"].open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "title", "status"])
        for i, (title, status) in enumerate(
            zip(STEP_TITLES, outcome.steps), start=1
        ):
            writer.writerow([i, title, status])

    if outcome.posteriors:
        title = (
            f"{outcome.decision} at P(Fund) = {outcome.p_fund:.4f}"
            if outcome.p_fund is not None
            else "posteriors"
        )
        paths["chart"] = render_posterior_chart(
            outcome.posteriors, out_dir / "posteriors.png", title
        )
    return paths


def write_world_exports(world: World, out_dir: str | Path) -> dict[str, Path]:
    """Canonical world export plus one JSONL log per chain."""
    out_dir = Path(out_dir)
    chains_dir = out_dir / "chains"
    chains_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {"world": out_dir / "world.json"}
    paths["world"].write_bytes(world.export_bytes())
    for chain_id in sorted(world.chains):
        p = chains_dir / f"{chain_id}.jsonl"
        p.write_text(world.export_chain_jsonl(chain_id))
        paths[chain_id] = p
    return paths

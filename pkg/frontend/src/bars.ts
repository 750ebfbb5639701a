import { barPercents, escapeHtml, formatPct, formatProb, nodeLabel } from "./format.js";
import type { Distribution, ScenarioDoc } from "./types.js";

/** Bar rows for one node's posterior; widths and labels are in tenths. */
export function renderBars(nodeId: string, dist: Distribution): string {
  const pct = barPercents(dist);
  const rows = Object.keys(dist)
    .map((state) => {
      const tenths = pct[state] ?? 0;
      return `
    <div class="bar-row" data-state="${escapeHtml(state)}">
      <span class="bar-state">${escapeHtml(state)}</span>
      <span class="bar-track"><span class="bar-fill" style="width:${tenths}%"></span></span>
      <span class="bar-value">${formatPct(tenths)}</span>
    </div>`;
    })
    .join("");
  return `<div class="bars" data-node="${escapeHtml(nodeId)}">
    <div class="bars-title">${escapeHtml(nodeLabel(nodeId))}</div>${rows}
  </div>`;
}

export function renderPosteriorPanel(
  posteriors: Record<string, Distribution>,
  order: string[],
): string {
  return order
    .filter((node) => node in posteriors)
    .map((node) => renderBars(node, posteriors[node]!))
    .join("");
}

/**
 * Scenario verification table: the engine's numbers next to the published
 * ones, formatted exactly as the CLI report formats them.
 */
export function renderScenarioChecks(
  scenario: ScenarioDoc,
  posteriors: Record<string, Distribution>,
): string {
  const rows = scenario.targets
    .map((t) => {
      const actual = posteriors[t.node]?.[t.state];
      if (actual === undefined) {
        return `<tr class="fail"><td>${escapeHtml(t.node)}=${escapeHtml(t.state)}</td><td colspan="3">missing</td></tr>`;
      }
      const ok = Math.abs(actual - t.expected) <= t.tolerance;
      return `<tr class="${ok ? "pass" : "fail"}" data-check="${escapeHtml(t.node)}=${escapeHtml(t.state)}">
      <td>${escapeHtml(nodeLabel(t.node))}=${escapeHtml(t.state)}</td>
      <td class="actual">${formatProb(actual)}</td>
      <td>${formatProb(t.expected)}</td>
      <td>${ok ? "pass" : "FAIL"}</td>
    </tr>`;
    })
    .join("");
  return `<table class="scenario-checks" data-scenario="${escapeHtml(scenario.name)}">
    <thead><tr><th>target</th><th>model</th><th>published</th><th></th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}

export function renderScenarioChip(names: string[]): string {
  if (names.length === 0) return "";
  return `<span class="scenario-chip">${names.map(escapeHtml).join(", ")}</span>`;
}

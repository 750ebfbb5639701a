import type { Distribution } from "./types.js";

/** Fixed-point probability, same precision as the CLI report. */
export function formatProb(p: number): string {
  return p.toFixed(6);
}

/**
 * Percentages in tenths for a distribution, forced to sum to exactly 100.0
 * by largest-remainder rounding. Plain per-state rounding can drift to 99.9
 * or 100.1; the bars must always account for the whole distribution.
 */
export function barPercents(dist: Distribution): Record<string, number> {
  const states = Object.keys(dist);
  if (states.length === 0) return {};
  const exact = states.map((s) => (dist[s] ?? 0) * 1000);
  const tenths = exact.map(Math.floor);
  let leftover = 1000 - tenths.reduce((a, b) => a + b, 0);

  const byRemainder = states
    .map((_, i) => i)
    .sort((a, b) => (exact[b]! - tenths[b]!) - (exact[a]! - tenths[a]!));
  for (const i of byRemainder) {
    if (leftover <= 0) break;
    tenths[i]! += 1;
    leftover -= 1;
  }
  // leftover < 0 only if the input summed above 1; claw back from the largest
  const byMass = states.map((_, i) => i).sort((a, b) => tenths[b]! - tenths[a]!);
  for (const i of byMass) {
    if (leftover >= 0) break;
    tenths[i]! -= 1;
    leftover += 1;
  }

  const out: Record<string, number> = {};
  states.forEach((s, i) => {
    out[s] = tenths[i]! / 10;
  });
  return out;
}

export function formatPct(tenths: number): string {
  return `${tenths.toFixed(1)}%`;
}

export function formatAmount(amount: number): string {
  return amount.toLocaleString("en-US");
}

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Short display name for a namespaced node id. */
export function nodeLabel(id: string): string {
  const parts = id.split(".");
  return parts[parts.length - 1] ?? id;
}

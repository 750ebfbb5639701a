import { escapeHtml, formatAmount } from "./format.js";
import type { OutcomeDoc, StepStatus } from "./types.js";

export function stepCounts(steps: StepStatus[]): {
  done: number;
  failed: number;
  pending: number;
} {
  const counts = { done: 0, failed: 0, pending: 0 };
  for (const s of steps) counts[s] += 1;
  return counts;
}

/** A valid outcome is a run of done, at most one failed, then pending. */
export function isPrefixShape(steps: StepStatus[]): boolean {
  return /^(done,)*(failed,)?(pending,)*$/.test(
    steps.map((s) => `${s},`).join(""),
  );
}

export function renderTracker(steps: StepStatus[], titles: string[]): string {
  const rows = steps
    .map((status, i) => {
      const title = titles[i] ?? `step ${i + 1}`;
      return `
    <li class="step step-${status}" data-step="${i + 1}" data-status="${status}">
      <span class="step-no">${i + 1}</span>
      <span class="step-title">${escapeHtml(title)}</span>
      <span class="step-status">${status}</span>
    </li>`;
    })
    .join("");
  return `<ol class="tracker">${rows}</ol>`;
}

export function renderDecisionBadge(outcome: OutcomeDoc): string {
  const decision = outcome.decision ?? "undecided";
  const status = outcome.tx_status ?? "not submitted";
  const pFund =
    outcome.p_fund === null ? "" : ` <span class="p-fund">P(Fund) ${outcome.p_fund.toFixed(4)}</span>`;
  const settlement =
    outcome.settlement === null
      ? ""
      : ` <span class="settlement">settled ${formatAmount(outcome.settlement)}</span>`;
  const cls = status === "Committed" ? "committed" : status === "Ignored" ? "ignored" : "idle";
  return `<div class="badge badge-${cls}" data-decision="${escapeHtml(decision)}" data-tx="${escapeHtml(status)}">
    <span class="decision">${escapeHtml(decision)}</span>
    <span class="tx-status">${escapeHtml(status)}</span>${pFund}${settlement}
  </div>`;
}

/** Shown after a decline: how the model rates stability if nobody funds. */
export function renderStabilityWarning(pUnstable: number): string {
  const pct = (pUnstable * 100).toFixed(1);
  return `<div class="stability-warning" data-p-unstable="${pUnstable.toFixed(6)}">
    Declining while the lower tier is funded leaves the supply chain
    <strong>Unstable</strong> with probability <strong>${pct}%</strong>.
  </div>`;
}

export function renderAccessDenied(party: string, chain: string): string {
  return `<div class="access-denied" data-chain="${escapeHtml(chain)}">
    <strong>Access denied.</strong> ${escapeHtml(party)} is not a member of
    ${escapeHtml(chain)}; its ledger is not visible from this seat.
  </div>`;
}

import { ApiError, ConsoleApi } from "./api.js";
import {
  renderBars,
  renderScenarioChecks,
  renderScenarioChip,
} from "./bars.js";
import { escapeHtml, formatAmount, nodeLabel } from "./format.js";
import { EvidencePanel, matchScenarios, observableNodes } from "./state.js";
import {
  renderAccessDenied,
  renderDecisionBadge,
  renderStabilityWarning,
  renderTracker,
} from "./tracker.js";
import type {
  LogRecord,
  OutcomeDoc,
  PartyDoc,
  RequestDoc,
  ScenarioDoc,
} from "./types.js";

// The three distributions the financier watches while entering evidence.
const OUTPUT_NODES = ["PerceptionOfRisk", "Decision", "Stability"];

const FAULT_POINTS = [
  "lock",
  "stage",
  ...Array.from({ length: 12 }, (_, i) => `step-${i + 1}`),
  "commit",
];

const DEFAULT_ROLE = "FinancierIlze";

export class ConsoleApp {
  private panel!: EvidencePanel;
  private scenarios: ScenarioDoc[] = [];
  private parties: PartyDoc[] = [];
  private pending!: RequestDoc;
  private stepTitles: string[] = [];
  private worldVersion = 0;
  private selectedChain: string | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ConsoleApi,
  ) {}

  async init(): Promise<void> {
    const [models, scenarios, parties, requests] = await Promise.all([
      this.api.models(),
      this.api.scenarios(),
      this.api.parties(),
      this.api.requests(),
    ]);
    const overall = models.models.find((m) => m.name === "overall");
    if (!overall) throw new Error("gateway did not announce the overall model");
    this.panel = new EvidencePanel(observableNodes(overall));
    this.scenarios = scenarios.scenarios;
    this.parties = parties.parties;
    this.pending = requests.pending;
    this.stepTitles = requests.step_titles;
    this.worldVersion = requests.world_version;

    this.renderShell();
    this.bindShell();
    this.setRole(
      this.parties.some((p) => p.party === DEFAULT_ROLE)
        ? DEFAULT_ROLE
        : (this.parties[0]?.party ?? ""),
    );
    await this.refreshQuery();
    await this.refreshChains();
  }

  // --- shell ---------------------------------------------------------------

  private renderShell(): void {
    const partyOptions = this.parties
      .map(
        (p) =>
          `<option value="${escapeHtml(p.party)}">${escapeHtml(p.party)}${
            p.tier === null ? "" : ` (tier ${p.tier})`
          }</option>`,
      )
      .join("");
    const faultOptions = ["<option value=''>no fault</option>"]
      .concat(FAULT_POINTS.map((f) => `<option value="${f}">${f}</option>`))
      .join("");
    const nodeSelectors = this.panel.nodes
      .map((n) => {
        const opts = ["<option value=''>unobserved</option>"]
          .concat(
            n.states.map(
              (s) => `<option value="${escapeHtml(s)}">${escapeHtml(s)}</option>`,
            ),
          )
          .join("");
        return `<label class="finding" data-node="${escapeHtml(n.id)}">
          <span>${escapeHtml(nodeLabel(n.id))}</span>
          <select data-node-select="${escapeHtml(n.id)}">${opts}</select>
        </label>`;
      })
      .join("");
    const bookmarks = this.scenarios
      .map(
        (s) =>
          `<button class="bookmark" data-scenario="${escapeHtml(s.name)}" title="${escapeHtml(s.title)}">${escapeHtml(s.name)}</button>`,
      )
      .join("");

    this.root.innerHTML = `
      <header>
        <h1>chainvoice console</h1>
        <div class="session">
          <label>acting as
            <select id="role">${partyOptions}</select>
          </label>
          <span id="world-version" class="version">world v${this.worldVersion}</span>
        </div>
      </header>
      <main>
        <section class="card" id="evidence-card">
          <h2>Evidence</h2>
          <div class="findings">${nodeSelectors}</div>
          <div class="panel-actions">
            <button id="clear-evidence">clear all</button>
            <span id="scenario-chip-slot"></span>
          </div>
          <div class="bookmarks">${bookmarks}</div>
          <div id="query-error" class="error" hidden></div>
          <div id="posteriors" class="posteriors"></div>
          <div id="scenario-checks"></div>
        </section>
        <section class="card" id="request-card">
          <h2>Financing request</h2>
          <dl class="request-fields">
            <dt>supplier</dt><dd>${escapeHtml(this.pending.supplier)}</dd>
            <dt>amount</dt><dd>${formatAmount(this.pending.amount)}</dd>
            <dt>payment terms</dt><dd>${this.pending.payment_terms_days} days</dd>
            <dt>unpaid invoices</dt><dd>${formatAmount(this.pending.total_unpaid)}</dd>
            <dt>rewards</dt><dd>${escapeHtml(this.pending.rewards)}</dd>
          </dl>
          <div class="decision-actions">
            <button id="approve">approve</button>
            <button id="decline">decline</button>
            <label class="fault-picker">fault
              <select id="fault">${faultOptions}</select>
            </label>
          </div>
          <div id="submit-notice" class="notice" hidden></div>
          <div id="badge-slot"></div>
          <div id="stability-slot"></div>
          <div id="tracker-slot">${renderTracker(
            Array.from({ length: 12 }, () => "pending" as const),
            this.stepTitles,
          )}</div>
        </section>
        <section class="card" id="chains-card">
          <h2>Chains</h2>
          <div id="chain-list" class="chain-list"></div>
          <div id="chain-log"></div>
        </section>
      </main>`;
  }

  private bindShell(): void {
    this.el<HTMLSelectElement>("#role").addEventListener("change", (e) => {
      this.setRole((e.target as HTMLSelectElement).value);
      void this.refreshChains();
    });
    for (const sel of this.root.querySelectorAll<HTMLSelectElement>(
      "[data-node-select]",
    )) {
      sel.addEventListener("change", () => {
        const node = sel.dataset["nodeSelect"]!;
        this.panel.set(node, sel.value === "" ? null : sel.value);
        void this.refreshQuery();
      });
    }
    this.el("#clear-evidence").addEventListener("click", () => {
      this.panel.clear();
      this.syncSelectors();
      void this.refreshQuery();
    });
    for (const btn of this.root.querySelectorAll<HTMLButtonElement>(
      ".bookmark",
    )) {
      btn.addEventListener("click", () => {
        const sc = this.scenarios.find(
          (s) => s.name === btn.dataset["scenario"],
        );
        if (!sc) return;
        this.panel.applyScenario(sc);
        this.syncSelectors();
        void this.refreshQuery();
      });
    }
    this.el("#approve").addEventListener("click", () => void this.submit("Fund"));
    this.el("#decline").addEventListener("click", () =>
      void this.submit("DoNotFund"),
    );
    this.el<HTMLSelectElement>("#fault").addEventListener("change", (e) => {
      const v = (e.target as HTMLSelectElement).value;
      void this.api.armFault(v === "" ? null : v);
    });
  }

  private el<T extends HTMLElement = HTMLElement>(selector: string): T {
    const found = this.root.querySelector<T>(selector);
    if (!found) throw new Error(`missing element ${selector}`);
    return found;
  }

  private setVersion(v: number): void {
    this.worldVersion = v;
    this.el("#world-version").textContent = `world v${v}`;
  }

  private setRole(party: string): void {
    const doc = this.parties.find((p) => p.party === party);
    this.api.identity = doc ? { party: doc.party, token: doc.token } : null;
    const select = this.el<HTMLSelectElement>("#role");
    if (select.value !== party) select.value = party;
  }

  private syncSelectors(): void {
    for (const sel of this.root.querySelectorAll<HTMLSelectElement>(
      "[data-node-select]",
    )) {
      sel.value = this.panel.get(sel.dataset["nodeSelect"]!) ?? "";
    }
  }

  // --- what-if queries -------------------------------------------------------

  private async refreshQuery(): Promise<void> {
    const evidence = this.panel.evidence();
    const active = matchScenarios(evidence, this.scenarios);
    const targets = [...OUTPUT_NODES];
    for (const sc of active) {
      for (const t of sc.targets) {
        if (!targets.includes(t.node)) targets.push(t.node);
      }
    }
    const errorBox = this.el("#query-error");
    try {
      const resp = await this.api.query(evidence, targets);
      this.setVersion(resp.world_version);
      errorBox.hidden = true;
      this.el("#posteriors").innerHTML = OUTPUT_NODES.map((n) =>
        renderBars(n, resp.posteriors[n] ?? {}),
      ).join("");
      this.el("#scenario-chip-slot").innerHTML = renderScenarioChip(
        active.map((s) => s.name),
      );
      this.el("#scenario-checks").innerHTML = active
        .map((sc) => renderScenarioChecks(sc, resp.posteriors))
        .join("");
    } catch (e) {
      // engine errors are part of the product: show them verbatim
      errorBox.textContent = e instanceof Error ? e.message : String(e);
      errorBox.hidden = false;
    }
  }

  // --- financing decision ----------------------------------------------------

  private async submit(decision: "Fund" | "DoNotFund"): Promise<void> {
    const notice = this.el("#submit-notice");
    notice.hidden = true;
    try {
      const entry = await this.api.submitDecision(decision, this.worldVersion);
      this.setVersion(entry.world_version);
      await this.renderOutcome(entry.outcome);
      await this.refreshChains();
    } catch (e) {
      if (e instanceof ApiError && e.status === 409) {
        const fresh = await this.api.requests();
        this.setVersion(fresh.world_version);
        notice.textContent =
          "The world moved while you were deciding; state refreshed, submit again.";
        notice.hidden = false;
        return;
      }
      notice.textContent = e instanceof Error ? e.message : String(e);
      notice.hidden = false;
    }
  }

  private async renderOutcome(outcome: OutcomeDoc): Promise<void> {
    this.el("#tracker-slot").innerHTML = renderTracker(
      outcome.steps,
      this.stepTitles,
    );
    this.el("#badge-slot").innerHTML = renderDecisionBadge(outcome);
    const stability = this.el("#stability-slot");
    if (outcome.decision === "DoNotFund") {
      const resp = await this.api.query(
        { Decision: "DoNotFund", LowerFunded: "Yes" },
        ["Stability"],
      );
      stability.innerHTML = renderStabilityWarning(
        resp.posteriors["Stability"]?.["Unstable"] ?? 0,
      );
    } else {
      stability.innerHTML = "";
    }
  }

  // --- ledger explorer ---------------------------------------------------------

  private async refreshChains(): Promise<void> {
    const resp = await this.api.chains();
    this.setVersion(resp.world_version);
    this.el("#chain-list").innerHTML = resp.chains
      .map(
        (c) => `<button class="chain" data-chain="${escapeHtml(c.id)}">
          ${escapeHtml(c.id)} <span class="records">${c.records} records</span>
        </button>`,
      )
      .join("");
    for (const btn of this.root.querySelectorAll<HTMLButtonElement>(".chain")) {
      btn.addEventListener("click", () => {
        this.selectedChain = btn.dataset["chain"] ?? null;
        void this.renderLog();
      });
    }
    if (this.selectedChain !== null) await this.renderLog();
  }

  private async renderLog(): Promise<void> {
    const chain = this.selectedChain;
    const box = this.el("#chain-log");
    if (chain === null) {
      box.innerHTML = "";
      return;
    }
    try {
      const resp = await this.api.chainLog(chain);
      this.setVersion(resp.world_version);
      box.innerHTML = renderLogTable(chain, resp.log);
    } catch (e) {
      if (e instanceof ApiError && e.status === 403) {
        box.innerHTML = renderAccessDenied(
          this.api.identity?.party ?? "anonymous",
          chain,
        );
        return;
      }
      box.innerHTML = `<div class="error">${escapeHtml(
        e instanceof Error ? e.message : String(e),
      )}</div>`;
    }
  }
}

export function renderLogTable(chain: string, log: LogRecord[]): string {
  const rows = log
    .map((r) => {
      if (r.redacted) {
        return `<tr class="redacted" data-index="${r.index}">
        <td>${r.index}</td><td>${escapeHtml(r.author)}</td>
        <td>private to ${escapeHtml(r.privacy_group ?? "")}</td></tr>`;
      }
      const op = typeof r.body?.["op"] === "string" ? (r.body["op"] as string) : "";
      return `<tr data-index="${r.index}">
      <td>${r.index}</td><td>${escapeHtml(r.author)}</td>
      <td>${escapeHtml(op)}</td></tr>`;
    })
    .join("");
  return `<table class="log" data-chain="${escapeHtml(chain)}">
    <thead><tr><th>#</th><th>author</th><th>operation</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}

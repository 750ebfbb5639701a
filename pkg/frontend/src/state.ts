import type { EvidenceMap, ModelDoc, NodeDoc, ScenarioDoc } from "./types.js";

// The decision node is clamped as evidence in one canonical scenario, so the
// panel offers it alongside the declared interface inputs.
const DECISION_NODE = "Decision";

/** The nodes the evidence panel exposes, in model order. */
export function observableNodes(model: ModelDoc): NodeDoc[] {
  const byId = new Map(model.nodes.map((n) => [n.id, n]));
  const ids = [...model.inputs];
  if (byId.has(DECISION_NODE) && !ids.includes(DECISION_NODE)) {
    ids.push(DECISION_NODE);
  }
  const out: NodeDoc[] = [];
  for (const id of ids) {
    const node = byId.get(id);
    if (node) out.push(node);
  }
  return out;
}

/**
 * Evidence entry panel. Every node is a selector over
 * unobserved | state1 | state2; only observed selectors contribute findings.
 */
export class EvidencePanel {
  readonly nodes: NodeDoc[];
  private selections = new Map<string, string>();

  constructor(nodes: NodeDoc[]) {
    this.nodes = nodes;
  }

  set(node: string, state: string | null): void {
    const doc = this.nodes.find((n) => n.id === node);
    if (!doc) throw new Error(`not an observable node: ${node}`);
    if (state === null) {
      this.selections.delete(node);
      return;
    }
    if (!doc.states.includes(state)) {
      throw new Error(`${node} has no state ${state}`);
    }
    this.selections.set(node, state);
  }

  get(node: string): string | null {
    return this.selections.get(node) ?? null;
  }

  clear(): void {
    this.selections.clear();
  }

  evidence(): EvidenceMap {
    const out: EvidenceMap = {};
    for (const n of this.nodes) {
      const s = this.selections.get(n.id);
      if (s !== undefined) out[n.id] = s;
    }
    return out;
  }

  applyScenario(sc: ScenarioDoc): void {
    this.clear();
    for (const [node, state] of Object.entries(sc.evidence)) {
      this.set(node, state);
    }
  }
}

export function sameEvidence(a: EvidenceMap, b: EvidenceMap): boolean {
  const keys = Object.keys(a);
  return keys.length === Object.keys(b).length && keys.every((k) => a[k] === b[k]);
}

/** Canonical scenarios the current evidence reproduces (several share {}). */
export function matchScenarios(
  evidence: EvidenceMap,
  scenarios: ScenarioDoc[],
): ScenarioDoc[] {
  return scenarios.filter((s) => sameEvidence(evidence, s.evidence));
}

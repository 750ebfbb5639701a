import { beforeEach, describe, expect, it } from "vitest";

import { EvidencePanel, matchScenarios, observableNodes, sameEvidence } from "../src/state.js";
import type { ModelDoc, ScenarioDoc } from "../src/types.js";

const MODEL: ModelDoc = {
  name: "overall",
  inputs: ["SupplierProfile.GWaL", "SupplierProfile.Tier1"],
  outputs: ["Decision", "Stability"],
  nodes: [
    { id: "SupplierProfile.GWaL", states: ["Yes", "No"], parents: [] },
    { id: "SupplierProfile.Tier1", states: ["Yes", "No"], parents: [] },
    { id: "Decision", states: ["Fund", "DoNotFund"], parents: ["PerceptionOfRisk"] },
    { id: "PerceptionOfRisk", states: ["LowRisk", "HighRisk"], parents: [] },
  ],
};

const SCENARIOS: ScenarioDoc[] = [
  {
    name: "overall-no-evidence",
    title: "",
    evidence: {},
    targets: [{ node: "Decision", state: "Fund", expected: 0.5, tolerance: 1e-6 }],
  },
  {
    name: "overall-no-evidence-twin",
    title: "",
    evidence: {},
    targets: [],
  },
  {
    name: "overall-gwal",
    title: "",
    evidence: { "SupplierProfile.GWaL": "Yes" },
    targets: [{ node: "Decision", state: "Fund", expected: 0.618, tolerance: 0.01 }],
  },
];

describe("observableNodes", () => {
  it("returns the model inputs plus the decision node, in order", () => {
    expect(observableNodes(MODEL).map((n) => n.id)).toEqual([
      "SupplierProfile.GWaL",
      "SupplierProfile.Tier1",
      "Decision",
    ]);
  });
});

describe("EvidencePanel", () => {
  let panel: EvidencePanel;

  beforeEach(() => {
    panel = new EvidencePanel(observableNodes(MODEL));
  });

  it("starts with every node unobserved", () => {
    expect(panel.evidence()).toEqual({});
  });

  it("records, overwrites, and clears findings", () => {
    panel.set("SupplierProfile.GWaL", "Yes");
    panel.set("Decision", "Fund");
    expect(panel.evidence()).toEqual({
      "SupplierProfile.GWaL": "Yes",
      Decision: "Fund",
    });
    panel.set("SupplierProfile.GWaL", "No");
    expect(panel.get("SupplierProfile.GWaL")).toBe("No");
    panel.set("Decision", null);
    expect(panel.evidence()).toEqual({ "SupplierProfile.GWaL": "No" });
    panel.clear();
    expect(panel.evidence()).toEqual({});
  });

  it("rejects nodes and states outside the panel", () => {
    expect(() => panel.set("PerceptionOfRisk", "LowRisk")).toThrow(
      /not an observable node/,
    );
    expect(() => panel.set("Decision", "Maybe")).toThrow(/has no state/);
  });

  it("loads a bookmarked scenario wholesale", () => {
    panel.set("Decision", "Fund");
    panel.applyScenario(SCENARIOS[2]!);
    expect(panel.evidence()).toEqual({ "SupplierProfile.GWaL": "Yes" });
  });
});

describe("sameEvidence", () => {
  it("compares by keys and values, ignoring order", () => {
    expect(sameEvidence({ a: "1", b: "2" }, { b: "2", a: "1" })).toBe(true);
    expect(sameEvidence({ a: "1" }, { a: "2" })).toBe(false);
    expect(sameEvidence({ a: "1" }, { a: "1", b: "2" })).toBe(false);
    expect(sameEvidence({}, {})).toBe(true);
  });
});

describe("matchScenarios", () => {
  it("returns every scenario whose canonical evidence matches", () => {
    expect(matchScenarios({}, SCENARIOS).map((s) => s.name)).toEqual([
      "overall-no-evidence",
      "overall-no-evidence-twin",
    ]);
    expect(
      matchScenarios({ "SupplierProfile.GWaL": "Yes" }, SCENARIOS).map((s) => s.name),
    ).toEqual(["overall-gwal"]);
    expect(matchScenarios({ Decision: "Fund" }, SCENARIOS)).toEqual([]);
  });
});

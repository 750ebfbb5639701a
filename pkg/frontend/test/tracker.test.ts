import { describe, expect, it } from "vitest";

import {
  isPrefixShape,
  renderAccessDenied,
  renderDecisionBadge,
  renderStabilityWarning,
  renderTracker,
  stepCounts,
} from "../src/tracker.js";
import type { OutcomeDoc, StepStatus } from "../src/types.js";

const steps = (spec: string): StepStatus[] =>
  spec.split("").map((c) =>
    c === "d" ? "done" : c === "f" ? "failed" : "pending",
  );

describe("stepCounts", () => {
  it("tallies each status", () => {
    expect(stepCounts(steps("dddfpp"))).toEqual({ done: 3, failed: 1, pending: 2 });
  });
});

describe("isPrefixShape", () => {
  it("accepts done-prefix, optional single failure, pending-tail", () => {
    expect(isPrefixShape(steps("dddddddddddd"))).toBe(true);
    expect(isPrefixShape(steps("pppppppppppp"))).toBe(true);
    expect(isPrefixShape(steps("dddddddddfpp"))).toBe(true);
    expect(isPrefixShape(steps("fppppppppppp"))).toBe(true);
  });

  it("rejects holes, double failures, and work after a failure", () => {
    expect(isPrefixShape(steps("ddpddddddddd"))).toBe(false);
    expect(isPrefixShape(steps("dddffppppppp"))).toBe(false);
    expect(isPrefixShape(steps("dddfdppppppp"))).toBe(false);
    expect(isPrefixShape(steps("pddddddddddd"))).toBe(false);
  });
});

describe("renderTracker", () => {
  it("renders twelve annotated items", () => {
    const titles = Array.from({ length: 12 }, (_, i) => `step title ${i + 1}`);
    const html = renderTracker(steps("dddddddddfpp"), titles);
    expect([...html.matchAll(/<li/g)]).toHaveLength(12);
    expect(html).toContain('data-step="10" data-status="failed"');
    expect(html).toContain("step title 10");
    expect(html).toContain('data-step="12" data-status="pending"');
  });
});

describe("renderDecisionBadge", () => {
  const base: OutcomeDoc = {
    steps: steps("dddddddddddd"),
    decision: "Fund",
    p_fund: 0.7175,
    posteriors: {},
    evidence: {},
    settlement: 10000,
    tx_status: "Committed",
    txid: "abc123",
    detail: {},
  };

  it("shows a committed funding with its settlement", () => {
    const html = renderDecisionBadge(base);
    expect(html).toContain("badge-committed");
    expect(html).toContain('data-decision="Fund"');
    expect(html).toContain("0.7175");
    expect(html).toContain("10,000");
  });

  it("shows an ignored decline without settlement", () => {
    const html = renderDecisionBadge({
      ...base,
      decision: "DoNotFund",
      settlement: null,
      tx_status: "Ignored",
    });
    expect(html).toContain("badge-ignored");
    expect(html).toContain('data-decision="DoNotFund"');
    expect(html).not.toContain("settled");
  });
});

describe("renderStabilityWarning", () => {
  it("quotes the probability of instability", () => {
    const html = renderStabilityWarning(0.99);
    expect(html).toContain('data-p-unstable="0.990000"');
    expect(html).toContain("99.0%");
  });
});

describe("renderAccessDenied", () => {
  it("names the party and the chain", () => {
    const html = renderAccessDenied("FarmerEric", "T2T3");
    expect(html).toContain("FarmerEric");
    expect(html).toContain('data-chain="T2T3"');
  });
});

"""Named evidence scenarios and their expected posteriors.

Every scenario runs against the flattened overall network; sub-network
scenarios address their nodes by namespaced id, and encapsulation makes
the result equal to a standalone sub-network run.  Uniform no-evidence
targets carry a 1e-6 tolerance (they hold by construction), the pinned
row carries 1e-3, everything else 0.01 to absorb the published display
rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..bn import Evidence, Network, query
from ..errors import UnknownScenario
from .networks import (
    DECISION,
    FI,
    FI_CREDIT,
    FI_REWARDS,
    LOWER_FUNDED,
    PERCEPTION_OF_RISK,
    SP,
    SP_GWAL,
    SP_TIER1,
    STABILITY,
)

UNIFORM_TOL = 1e-6
DISPLAY_TOL = 0.01
PINNED_TOL = 1e-3


@dataclass(frozen=True)
class TargetCheck:
    node: str
    state: str
    expected: float
    tolerance: float


@dataclass(frozen=True)
class ScenarioDef:
    name: str
    title: str
    evidence: Evidence
    targets: tuple[TargetCheck, ...]

    def __post_init__(self):
        for t in self.targets:
            if not 0.0 <= t.expected <= 1.0:
                raise ValueError(f"expected probability out of range: {t}")


@dataclass(frozen=True)
class CheckResult:
    node: str
    state: str
    expected: float
    tolerance: float
    actual: float

    @property
    def passed(self) -> bool:
        return abs(self.actual - self.expected) <= self.tolerance


@dataclass(frozen=True)
class ScenarioReport:
    name: str
    evidence: Evidence
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _s(name, title, evidence, *targets):
    return ScenarioDef(
        name=name,
        title=title,
        evidence=evidence,
        targets=tuple(TargetCheck(*t) for t in targets),
    )


def builtin_scenarios() -> tuple[ScenarioDef, ...]:
    return (
        _s(
            "supplier-no-evidence",
            "Supplier profile with no evidence entered",
            {},
            (SP, "LowRisk", 0.500, UNIFORM_TOL),
        ),
        _s(
            "supplier-gwal",
            "Supplier is part of a Golden Wait-a-Lot supply chain",
            {SP_GWAL: "Yes"},
            (SP, "LowRisk", 0.795, DISPLAY_TOL),
        ),
        _s(
            "supplier-tier1",
            "Supplier is a tier 1 supplier",
            {SP_TIER1: "Yes"},
            (SP, "LowRisk", 0.695, DISPLAY_TOL),
        ),
        _s(
            "supplier-tier1-gwal",
            "Supplier is a tier 1 supplier in a Golden Wait-a-Lot supply chain",
            {SP_TIER1: "Yes", SP_GWAL: "Yes"},
            (SP, "LowRisk", 0.990, DISPLAY_TOL),
        ),
        _s(
            "incentive-no-evidence",
            "Financial incentive with no evidence entered",
            {},
            (FI, "Compelling", 0.500, UNIFORM_TOL),
        ),
        _s(
            "incentive-additional-rewards",
            "Supplier is offering additional financial rewards",
            {FI_REWARDS: "Additional"},
            (FI, "Compelling", 0.600, DISPLAY_TOL),
        ),
        _s(
            "incentive-credit-passed",
            "Supplier has passed the credit check",
            {FI_CREDIT: "Passed"},
            (FI, "Compelling", 0.900, DISPLAY_TOL),
        ),
        _s(
            "incentive-failed-additional",
            "Supplier failed the credit check but offers additional rewards",
            {FI_CREDIT: "Failed", FI_REWARDS: "Additional"},
            (FI, "Compelling", 0.200, DISPLAY_TOL),
        ),
        _s(
            "incentive-passed-standard",
            "Supplier passed the credit check, offers only standard rewards",
            {FI_CREDIT: "Passed", FI_REWARDS: "Standard"},
            (FI, "Compelling", 0.800, DISPLAY_TOL),
        ),
        _s(
            "incentive-passed-additional",
            "Supplier passed the credit check and offers additional rewards",
            {FI_CREDIT: "Passed", FI_REWARDS: "Additional"},
            (FI, "Compelling", 0.990, DISPLAY_TOL),
        ),
        _s(
            "overall-no-evidence",
            "Overall model with no evidence entered",
            {},
            (PERCEPTION_OF_RISK, "AcceptableRisk", 0.500, UNIFORM_TOL),
            (DECISION, "Fund", 0.500, UNIFORM_TOL),
            (STABILITY, "Stable", 0.500, UNIFORM_TOL),
        ),
        _s(
            "overall-gwal",
            "Supplier is in a Golden Wait-a-Lot supply chain",
            {SP_GWAL: "Yes"},
            (PERCEPTION_OF_RISK, "AcceptableRisk", 0.618, DISPLAY_TOL),
        ),
        _s(
            "overall-gwal-credit",
            "Supplier is in a Golden Wait-a-Lot supply chain and passed the credit check",
            {SP_GWAL: "Yes", FI_CREDIT: "Passed"},
            (PERCEPTION_OF_RISK, "AcceptableRisk", 0.857, DISPLAY_TOL),
        ),
        _s(
            "overall-upstream-funded-lower",
            "GWaL chain, credit passed, not tier 1, lower tier already funded",
            {SP_GWAL: "Yes", FI_CREDIT: "Passed", SP_TIER1: "No", LOWER_FUNDED: "Yes"},
            (DECISION, "Fund", 0.774, DISPLAY_TOL),
            (STABILITY, "Stable", 0.768, DISPLAY_TOL),
        ),
        _s(
            "overall-not-funded-lower-funded",
            "Decision was not to fund although the lower tier is funded",
            {DECISION: "DoNotFund", LOWER_FUNDED: "Yes"},
            (STABILITY, "Unstable", 0.990, PINNED_TOL),
        ),
    )


def scenario_by_name(name: str, scenarios=None) -> ScenarioDef:
    for s in scenarios or builtin_scenarios():
        if s.name == name:
            return s
    raise UnknownScenario(name)


def run_scenario(net: Network, scenario: ScenarioDef) -> ScenarioReport:
    checks = []
    for t in scenario.targets:
        actual = query(net, scenario.evidence, t.node)[t.state]
        checks.append(
            CheckResult(
                node=t.node,
                state=t.state,
                expected=t.expected,
                tolerance=t.tolerance,
                actual=actual,
            )
        )
    return ScenarioReport(
        name=scenario.name, evidence=dict(scenario.evidence), checks=tuple(checks)
    )


# --- fixture round-trip ---------------------------------------------------

def scenarios_to_doc(scenarios=None) -> dict:
    return {
        "scenarios": [
            {
                "name": s.name,
                "title": s.title,
                "evidence": dict(s.evidence),
                "targets": [
                    {
                        "node": t.node,
                        "state": t.state,
                        "expected": t.expected,
                        "tolerance": t.tolerance,
                    }
                    for t in s.targets
                ],
            }
            for s in (scenarios or builtin_scenarios())
        ]
    }


def scenarios_from_doc(doc: dict) -> tuple[ScenarioDef, ...]:
    out = []
    for s in doc["scenarios"]:
        out.append(
            ScenarioDef(
                name=s["name"],
                title=s.get("title", s["name"]),
                evidence=dict(s["evidence"]),
                targets=tuple(
                    TargetCheck(t["node"], t["state"], t["expected"], t["tolerance"])
                    for t in s["targets"]
                ),
            )
        )
    return tuple(out)

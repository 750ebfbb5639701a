"""Structures of the three decision networks.

Two sub-networks (supplier profile, financial incentive) each expose one
output node; the overall network instantiates both and wires their outputs
into a risk/decision/stability chain.  CPT values are parameters here so
that derivation and fitting stay in their own modules; every builder takes
the probability of the node's *first* state per parent-state row.
"""

from __future__ import annotations

from ..bn import MasterSpec, NetworkSpec, NodeSpec
from ..bn.oobn import OobnClass

YES_NO = ("Yes", "No")

# node ids, also used in evidence maps, scenario fixtures, and the HTTP API
GWAL = "GWaL"
TIER1 = "Tier1"
SUPPLIER_PROFILE = "SupplierProfile"
CREDIT_RATING = "CreditRating"
FINANCIAL_REWARDS = "FinancialRewards"
FINANCIAL_INCENTIVE = "FinancialIncentive"
PERCEPTION_OF_RISK = "PerceptionOfRisk"
DECISION = "Decision"
LOWER_FUNDED = "LowerFunded"
STABILITY = "Stability"

# flattened ids of the sub-network nodes inside the overall model
SP = f"{SUPPLIER_PROFILE}.{SUPPLIER_PROFILE}"
SP_GWAL = f"{SUPPLIER_PROFILE}.{GWAL}"
SP_TIER1 = f"{SUPPLIER_PROFILE}.{TIER1}"
FI = f"{FINANCIAL_INCENTIVE}.{FINANCIAL_INCENTIVE}"
FI_CREDIT = f"{FINANCIAL_INCENTIVE}.{CREDIT_RATING}"
FI_REWARDS = f"{FINANCIAL_INCENTIVE}.{FINANCIAL_REWARDS}"

OBSERVABLE = (SP_GWAL, SP_TIER1, FI_CREDIT, FI_REWARDS, DECISION, LOWER_FUNDED)

UNIFORM = ((0.5, 0.5),)


def _rows(first_state_probs: tuple[float, ...]) -> list[list[float]]:
    return [[p, 1.0 - p] for p in first_state_probs]


def supplier_profile_class(rows: tuple[float, float, float, float]) -> OobnClass:
    """rows = P(LowRisk | Tier1, GWaL) for (Y,Y), (Y,N), (N,Y), (N,N)."""
    spec = NetworkSpec(
        name="supplier_profile",
        nodes=(
            NodeSpec.make(TIER1, YES_NO, UNIFORM, label="Tier 1 Supplier?"),
            NodeSpec.make(GWAL, YES_NO, UNIFORM, label="Golden Wait-a-Lot supply chain"),
            NodeSpec.make(
                SUPPLIER_PROFILE,
                ("LowRisk", "HighRisk"),
                _rows(rows),
                parents=[TIER1, GWAL],
                label="Supplier Profile",
            ),
        ),
    )
    return OobnClass(spec=spec, inputs=(TIER1, GWAL), outputs=(SUPPLIER_PROFILE,))


def financial_incentive_class(rows: tuple[float, float, float, float]) -> OobnClass:
    """rows = P(Compelling | CreditRating, FinancialRewards) for
    (Passed,Additional), (Passed,Standard), (Failed,Additional), (Failed,Standard)."""
    spec = NetworkSpec(
        name="financial_incentive",
        nodes=(
            NodeSpec.make(
                CREDIT_RATING, ("Passed", "Failed"), UNIFORM, label="Credit rating"
            ),
            NodeSpec.make(
                FINANCIAL_REWARDS,
                ("Additional", "Standard"),
                UNIFORM,
                label="Financial rewards",
            ),
            NodeSpec.make(
                FINANCIAL_INCENTIVE,
                ("Compelling", "NotCompelling"),
                _rows(rows),
                parents=[CREDIT_RATING, FINANCIAL_REWARDS],
                label="Financial incentive",
            ),
        ),
    )
    return OobnClass(
        spec=spec,
        inputs=(CREDIT_RATING, FINANCIAL_REWARDS),
        outputs=(FINANCIAL_INCENTIVE,),
    )


def overall_master(
    supplier: OobnClass,
    incentive: OobnClass,
    risk_rows: tuple[float, float, float, float],
    decision_rows: tuple[float, float],
    stability_rows: tuple[float, float, float, float],
) -> MasterSpec:
    """Wire the two sub-networks into the risk/decision/stability chain.

    risk_rows = P(AcceptableRisk | SupplierProfile, FinancialIncentive) for
    (Low,Comp), (Low,NotComp), (High,Comp), (High,NotComp);
    decision_rows = P(Fund | PerceptionOfRisk) for (Acceptable), (Unacceptable);
    stability_rows = P(Stable | Decision, LowerFunded) for
    (Fund,Yes), (Fund,No), (DoNotFund,Yes), (DoNotFund,No).
    """
    nodes = (
        NodeSpec.make(
            PERCEPTION_OF_RISK,
            ("AcceptableRisk", "UnacceptableRisk"),
            _rows(risk_rows),
            parents=[SP, FI],
            label="Perception of risk",
        ),
        NodeSpec.make(
            DECISION,
            ("Fund", "DoNotFund"),
            _rows(decision_rows),
            parents=[PERCEPTION_OF_RISK],
            label="Invoice financing decision",
        ),
        NodeSpec.make(
            LOWER_FUNDED,
            YES_NO,
            UNIFORM,
            label="Lower tier is funded by invoice finance company",
        ),
        NodeSpec.make(
            STABILITY,
            ("Stable", "Unstable"),
            _rows(stability_rows),
            parents=[DECISION, LOWER_FUNDED],
            label="Supply Chain Stability",
        ),
    )
    return MasterSpec(
        instances={SUPPLIER_PROFILE: supplier, FINANCIAL_INCENTIVE: incentive},
        nodes=nodes,
        bindings=((SP, PERCEPTION_OF_RISK), (FI, PERCEPTION_OF_RISK)),
        name="overall",
    )

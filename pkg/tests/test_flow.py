"""The 12-step financing sequence: evidence, decision, settlement, faults.

The expected funding posterior is recomputed here through joint
enumeration rather than trusted from the sequence's own engine path.
"""

from __future__ import annotations

import pytest

from chainvoice.bn import enumerate_joint
from chainvoice.bootstrap import (
    FARMER_ERIC,
    FARMER_FRAN,
    FIN,
    FINANCIER_ILZE,
    MANUFACTURER_MARK,
    REGINALDS_PRODUCE,
    T2T3,
    T3FIN,
    bootstrap_world,
    default_config,
)
from chainvoice.errors import NotCountersigned, ValidationFailed
from chainvoice.finance.networks import (
    DECISION,
    FI_CREDIT,
    FI_REWARDS,
    LOWER_FUNDED,
    SP_GWAL,
    SP_TIER1,
    STABILITY,
)
from chainvoice.finance.store import load_overall_network
from chainvoice.flow import (
    FinancingRequest,
    assemble_evidence,
    default_fixtures,
    default_request,
    evaluate_request,
    funded_amount,
    lower_tier_funded,
    prepare_world,
    run_financing_sequence,
    validate_request,
)
from chainvoice.ledger import SupplyAgreement, sign_agreement

ALL_POINTS = [f"step-{k}" for k in range(1, 13)] + ["lock", "stage", "commit"]

HAPPY_EVIDENCE = {
    SP_GWAL: "Yes",
    SP_TIER1: "No",
    FI_CREDIT: "Passed",
    FI_REWARDS: "Standard",
    LOWER_FUNDED: "Yes",
}


def enumeration_p_fund(evidence) -> float:
    net = load_overall_network()
    return enumerate_joint(net, evidence, DECISION)["Fund"]


# --- request parsing ----------------------------------------------------------

def test_request_roundtrip_and_invariants():
    req = default_request()
    assert req.supplier == FARMER_FRAN
    assert req.amount == 10_000
    assert FinancingRequest.from_dict(req.to_dict()) == req
    with pytest.raises(ValueError):
        FinancingRequest(FARMER_FRAN, 13_000, 60, 12_000, "Standard")
    with pytest.raises(ValueError):
        FinancingRequest(FARMER_FRAN, 0, 60, 12_000, "Standard")
    with pytest.raises(ValueError):
        FinancingRequest(FARMER_FRAN, 100, 60, 12_000, "Generous")


# --- validation ---------------------------------------------------------------

def test_validate_request_against_agreement(world):
    agreement = SupplyAgreement(
        supplier=FARMER_FRAN, buyer=REGINALDS_PRODUCE,
        item="organic free-range eggs", quantity=1200, unit_price=10,
        payment_terms_days=60,
    )
    draft = sign_agreement(world.keyring, agreement, REGINALDS_PRODUCE)
    with pytest.raises(NotCountersigned):
        validate_request(world.keyring, draft, default_request())

    signed = sign_agreement(world.keyring, draft, FARMER_FRAN)
    assert validate_request(world.keyring, signed, default_request()) == []
    over = FinancingRequest(FARMER_FRAN, 12_500, 60, 13_000, "Standard")
    assert validate_request(world.keyring, signed, over) == ["AmountExceedsAgreement"]
    wrong_terms = FinancingRequest(FARMER_FRAN, 10_000, 30, 12_000, "Standard")
    assert validate_request(world.keyring, signed, wrong_terms) == ["PaymentTermsMismatch"]


def test_lower_tier_funded():
    assert lower_tier_funded({MANUFACTURER_MARK}, [REGINALDS_PRODUCE, MANUFACTURER_MARK]) == "Yes"
    assert lower_tier_funded(set(), [REGINALDS_PRODUCE, MANUFACTURER_MARK]) == "No"
    assert lower_tier_funded({FARMER_ERIC}, [REGINALDS_PRODUCE, MANUFACTURER_MARK]) == "No"


# --- evidence assembly ---------------------------------------------------------

def test_happy_evidence_assembly():
    ev = assemble_evidence(default_request(), default_fixtures(), REGINALDS_PRODUCE)
    assert ev == HAPPY_EVIDENCE


def test_missing_fixtures_leave_nodes_unobserved():
    fixtures = default_fixtures()
    del fixtures["credit_bureau"]["FarmerFran"]
    del fixtures["supply_chain_flags"]["FarmerFran"]
    ev = assemble_evidence(default_request(), fixtures, REGINALDS_PRODUCE)
    assert FI_CREDIT not in ev
    assert SP_GWAL not in ev
    # rewards and the customer-list check are always known to the financier
    assert ev[FI_REWARDS] == "Standard"
    assert ev[LOWER_FUNDED] == "Yes"


def test_tier_evidence_follows_world_config():
    fixtures = default_fixtures()
    req = FinancingRequest(MANUFACTURER_MARK, 100, 60, 200, "Standard")
    ev = assemble_evidence(req, fixtures, "GoldenWaitALot")
    assert ev[SP_TIER1] == "Yes"  # Mark is tier 1

    config = default_config()
    del config["tiers"]["FarmerFran"]
    ev2 = assemble_evidence(default_request(), fixtures, REGINALDS_PRODUCE, config)
    assert SP_TIER1 not in ev2


def test_decision_thresholding():
    net = load_overall_network()
    decision, p_fund, posteriors = evaluate_request(net, HAPPY_EVIDENCE)
    assert decision == "Fund"
    assert p_fund == pytest.approx(enumeration_p_fund(HAPPY_EVIDENCE), abs=1e-9)
    assert set(posteriors) == {"PerceptionOfRisk", DECISION, STABILITY}
    # a strict financier can veto the same posterior
    assert evaluate_request(net, HAPPY_EVIDENCE, threshold=0.99)[0] == "DoNotFund"


def test_funded_amount_discounts_additional_rewards():
    standard = default_request()
    assert funded_amount(standard) == 10_000
    additional = FinancingRequest(FARMER_FRAN, 10_000, 60, 12_000, "Additional")
    assert funded_amount(additional) == 9_500
    small = FinancingRequest(FARMER_FRAN, 999, 60, 12_000, "Additional")
    assert funded_amount(small) == 949


# --- the full sequence ----------------------------------------------------------

def test_happy_path_funds_and_settles(prepared):
    world, _ = prepared
    total = world.total_balance()
    out = run_financing_sequence(world)
    assert out.steps == ["done"] * 12
    assert out.decision == "Fund"
    assert out.p_fund == pytest.approx(enumeration_p_fund(HAPPY_EVIDENCE), abs=1e-9)
    assert out.p_fund > 0.5
    assert out.evidence == HAPPY_EVIDENCE
    assert out.tx_status == "Committed"
    assert out.settlement == 10_000
    assert world.chain(T3FIN).balances[FARMER_FRAN] == 10_000
    assert world.chain(FIN).balances[FINANCIER_ILZE] == 990_000
    assert world.total_balance() == total
    assert world.held_locks() == []


def test_unprepared_world_is_prepared_in_flight():
    config = default_config()
    del config["chains"]["T3Fin"]  # the sequence itself establishes it
    world = bootstrap_world("fresh", config)
    out = run_financing_sequence(world)
    assert out.steps == ["done"] * 12
    assert out.tx_status == "Committed"
    assert set(world.chain(T3FIN).members) == {FARMER_FRAN, FINANCIER_ILZE}
    assert world.chain(T3FIN).balances[FARMER_FRAN] == 10_000


def test_preparation_is_idempotent(prepared):
    world, addrs = prepared
    snapshot = world.export_bytes()
    assert prepare_world(world) == addrs
    assert world.export_bytes() == snapshot


def test_declined_run_changes_nothing(prepared):
    world, _ = prepared
    fixtures = default_fixtures()
    fixtures["credit_bureau"][FARMER_FRAN] = "Failed"
    fixtures["customer_list"] = []
    pre = world.export_bytes()
    out = run_financing_sequence(world, fixtures=fixtures)
    assert out.decision == "DoNotFund"
    assert out.p_fund < 0.5
    assert out.tx_status == "Ignored"
    assert out.settlement is None
    assert out.steps == ["done"] * 9 + ["failed", "pending", "pending"]
    assert "FundingDeclined" in out.detail["rejection"]
    assert world.export_bytes() == pre

    # the degraded case also degrades expected stability
    happy = run_financing_sequence(bootstrap_world("aux"))
    assert out.posteriors[STABILITY]["Stable"] < happy.posteriors[STABILITY]["Stable"]


def test_validation_failure_raises_after_rollback(prepared):
    world, _ = prepared
    pre = world.export_bytes()
    bad = FinancingRequest(FARMER_FRAN, 12_500, 60, 13_000, "Standard")
    with pytest.raises(ValidationFailed):
        run_financing_sequence(world, request=bad)
    assert world.export_bytes() == pre
    assert world.held_locks() == []


def test_additional_rewards_settle_discounted(prepared):
    world, _ = prepared
    req = FinancingRequest(FARMER_FRAN, 10_000, 60, 12_000, "Additional")
    out = run_financing_sequence(world, request=req)
    assert out.settlement == 9_500
    assert world.chain(T3FIN).balances[FARMER_FRAN] == 9_500
    booked = world.chain(FIN).contracts[
        next(iter(world.chain(FIN).contracts))
    ].storage["loans"]
    assert booked[0]["requested"] == 10_000
    assert booked[0]["funded"] == 9_500


def test_fault_at_step_11_rolls_back_cleanly(prepared):
    world, _ = prepared
    pre = world.export_bytes()
    out = run_financing_sequence(world, fault="step-11")
    assert out.steps == ["done"] * 10 + ["failed", "pending"]
    assert out.tx_status == "Ignored"
    assert out.settlement is None
    assert world.export_bytes() == pre
    assert world.held_locks() == []


@pytest.mark.parametrize("point", ALL_POINTS)
def test_fault_sweep_statuses_stay_prefix_shaped(point):
    world = bootstrap_world("sweep")
    prepare_world(world)
    pre = world.export_bytes()
    out = run_financing_sequence(world, fault=point)
    post = world.export_bytes()

    if point == "commit":
        assert out.tx_status == "Committed"
        assert out.settlement == 10_000
    else:
        assert post == pre
        assert out.settlement is None
    assert world.held_locks() == []

    statuses = out.steps
    i = 0
    while i < 12 and statuses[i] == "done":
        i += 1
    if i < 12 and statuses[i] == "failed":
        i += 1
    assert all(s == "pending" for s in statuses[i:])


def test_settlement_iff_fund_and_committed(prepared):
    """Ether moves exactly when the decision is Fund and the tx commits."""
    world, _ = prepared
    pre_balance = world.chain(T3FIN).balances[FARMER_FRAN]

    declined_fixtures = default_fixtures()
    declined_fixtures["credit_bureau"][FARMER_FRAN] = "Failed"
    declined_fixtures["customer_list"] = []
    out = run_financing_sequence(world, fixtures=declined_fixtures)
    assert out.settlement is None
    assert world.chain(T3FIN).balances[FARMER_FRAN] == pre_balance

    out2 = run_financing_sequence(world)
    assert out2.settlement == 10_000
    assert world.chain(T3FIN).balances[FARMER_FRAN] == pre_balance + 10_000


def test_flow_determinism_with_pinned_journal(tmp_path):
    def run(tag):
        world = bootstrap_world("det")
        prepare_world(world)
        path = tmp_path / f"{tag}.jsonl"
        run_financing_sequence(world, journal_path=path)
        return world.export_bytes(), path.read_text()

    export_a, journal_a = run("a")
    export_b, journal_b = run("b")
    assert export_a == export_b
    assert journal_a == journal_b


def test_outcome_to_dict_is_json_ready(prepared):
    import json

    world, _ = prepared
    out = run_financing_sequence(world)
    doc = out.to_dict()
    json.dumps(doc)
    assert doc["decision"] == "Fund"
    assert len(doc["steps"]) == 12

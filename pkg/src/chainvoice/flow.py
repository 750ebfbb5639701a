"""The twelve-step invoice-financing sequence, end to end.

Steps 1-5 prepare durable state and are idempotent: on a world where the
agreement is already countersigned and the contracts deployed, they
submit no transactions at all.  Step 6 plans the atomic crosschain
transaction; steps 7-12 are its six staged steps (read agreement,
validate, hand off, evaluate and book, cross-chain transfer, settle).

The funding decision is made by the financier's decision model over
whatever evidence the fixtures can actually supply; facts without a
fixture stay unobserved rather than being defaulted.  An injected crash
is recovered the way a restarted coordinator would recover it, so the
caller always gets a FlowOutcome whose world is either rolled back or
fully committed.
"""

from __future__ import annotations

import json
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .bn import Network, query
from .bootstrap import FIN, T2T3, T3FIN, default_config, party_tier
from .errors import (
    CoordinatorCrash,
    NotCountersigned,
    ValidationFailed,
)
from .finance.networks import (
    DECISION,
    FI_CREDIT,
    FI_REWARDS,
    LOWER_FUNDED,
    PERCEPTION_OF_RISK,
    SP_GWAL,
    SP_TIER1,
    STABILITY,
)
from .finance.store import load_overall_network
from .ledger import (
    FINANCE_CONTRACT,
    SUPPLY_CONTRACT,
    SupplyAgreement,
    World,
    check_request_against_agreement,
    early_payment_discount,
    is_countersigned,
    sign_agreement,
)
from .xchain import Call, Coordinator, FaultPlan, Read, Transfer

FUND = "Fund"
DO_NOT_FUND = "DoNotFund"

STEP_COUNT = 12
DONE = "done"
FAILED = "failed"
PENDING = "pending"

# Display titles for the 12 sequence steps, index i-1 <-> step i.
STEP_TITLES: tuple[str, ...] = (
    "Deploy agreement contract and upload draft",
    "Buyer downloads the draft agreement",
    "Countersign agreement and grant financier read access",
    "Establish supplier-financier chain",
    "Deploy validation and booking contracts",
    "Submit financing request and plan crosschain transaction",
    "Read agreement across chains",
    "Validate request against agreement",
    "Register financing request",
    "Book loan decision",
    "Transfer funds to supplier-financier chain",
    "Pay supplier",
)

DEFAULT_THRESHOLD = 0.5
DEFAULT_DISCOUNT_RATE = 0.05

SUPPLY_GROUP = "g-supply"
T3FIN_GROUP = "g-fin"
BOOK_GROUP = "g-book"


@dataclass(frozen=True)
class FinancingRequest:
    supplier: str
    amount: int                   # base units
    payment_terms_days: int
    total_unpaid: int
    rewards: str                  # Additional | Standard
    agreement_chain: str = T2T3
    agreement_address: str | None = None

    def __post_init__(self):
        if self.amount <= 0:
            raise ValueError("requested amount must be positive")
        if self.amount > self.total_unpaid:
            raise ValueError(
                "requested amount exceeds total unpaid invoice amount"
            )
        if self.rewards not in ("Additional", "Standard"):
            raise ValueError(f"unknown rewards terms {self.rewards!r}")

    def to_dict(self) -> dict:
        return {
            "supplier": self.supplier,
            "amount": self.amount,
            "payment_terms_days": self.payment_terms_days,
            "total_unpaid": self.total_unpaid,
            "rewards": self.rewards,
            "agreement_chain": self.agreement_chain,
            "agreement_address": self.agreement_address,
        }

    @staticmethod
    def from_dict(doc: dict) -> "FinancingRequest":
        return FinancingRequest(
            supplier=doc["supplier"],
            amount=int(doc["amount"]),
            payment_terms_days=int(doc["payment_terms_days"]),
            total_unpaid=int(doc["total_unpaid"]),
            rewards=doc["rewards"],
            agreement_chain=doc.get("agreement_chain", T2T3),
            agreement_address=doc.get("agreement_address"),
        )


@dataclass
class FlowOutcome:
    steps: list[str]              # 12 entries: done | failed | pending
    decision: str | None = None   # Fund | DoNotFund
    p_fund: float | None = None
    posteriors: dict | None = None
    evidence: dict | None = None
    settlement: int | None = None
    tx_status: str | None = None  # Committed | Ignored
    txid: str | None = None
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "steps": list(self.steps),
            "decision": self.decision,
            "p_fund": self.p_fund,
            "posteriors": self.posteriors,
            "evidence": self.evidence,
            "settlement": self.settlement,
            "tx_status": self.tx_status,
            "txid": self.txid,
            "detail": self.detail,
        }


def default_fixtures() -> dict:
    text = resources.files("chainvoice.data").joinpath("fixtures.json").read_text()
    return json.loads(text)


def default_request() -> FinancingRequest:
    text = resources.files("chainvoice.data").joinpath("request.json").read_text()
    return FinancingRequest.from_dict(json.loads(text))


# --- step 8 arithmetic, reusable outside the sequence ----------------------

def validate_request(keyring, agreement: SupplyAgreement, request: FinancingRequest) -> list[str]:
    """Violation codes for the request judged against the agreement; empty
    means Ok.  A draft that is not countersigned cannot be judged at all."""
    if not is_countersigned(keyring, agreement):
        raise NotCountersigned(
            f"agreement between {agreement.supplier} and {agreement.buyer} "
            "lacks a valid signature from both parties"
        )
    return check_request_against_agreement(
        agreement.to_dict(),
        {
            "supplier": request.supplier,
            "amount": request.amount,
            "payment_terms_days": request.payment_terms_days,
            "total_unpaid": request.total_unpaid,
        },
    )


def lower_tier_funded(customer_list, supply_link) -> str:
    """Yes iff any downstream party on the supplier's route to the retailer
    already appears in the financier's funded-customer list."""
    funded = set(customer_list)
    return "Yes" if any(party in funded for party in supply_link) else "No"


# --- evidence assembly ------------------------------------------------------

def assemble_evidence(
    request: FinancingRequest,
    fixtures: dict,
    buyer: str,
    world_config: dict | None = None,
) -> dict[str, str]:
    """Findings for the decision model; facts without a fixture are left
    unobserved instead of being guessed."""
    ev: dict[str, str] = {}
    flags = fixtures.get("supply_chain_flags", {})
    if request.supplier in flags:
        ev[SP_GWAL] = "Yes" if flags[request.supplier] else "No"
    tier = party_tier(request.supplier, world_config)
    if tier is not None:
        ev[SP_TIER1] = "Yes" if tier == 1 else "No"
    rating = fixtures.get("credit_bureau", {}).get(request.supplier)
    if rating is not None:
        ev[FI_CREDIT] = rating
    ev[FI_REWARDS] = request.rewards
    link = [buyer] + [
        p
        for p in fixtures.get("downstream", {}).get(request.supplier, ())
        if p != buyer
    ]
    ev[LOWER_FUNDED] = lower_tier_funded(fixtures.get("customer_list", ()), link)
    return ev


def evaluate_request(
    net: Network, evidence: dict[str, str], threshold: float = DEFAULT_THRESHOLD
) -> tuple[str, float, dict]:
    """(decision, P(Fund), posterior snapshot) under the given findings."""
    posteriors = {
        PERCEPTION_OF_RISK: query(net, evidence, PERCEPTION_OF_RISK).distribution,
        DECISION: query(net, evidence, DECISION).distribution,
        STABILITY: query(net, evidence, STABILITY).distribution,
    }
    p_fund = posteriors[DECISION][FUND]
    decision = FUND if p_fund > threshold else DO_NOT_FUND
    return decision, p_fund, posteriors


def funded_amount(request: FinancingRequest, rate: float = DEFAULT_DISCOUNT_RATE) -> int:
    if request.rewards == "Additional":
        return early_payment_discount(request.amount, rate)
    return request.amount


# --- idempotent preparation (sequence steps 1-5) ----------------------------

def _ensure_group(world: World, chain_id: str, group_id: str, members, author) -> None:
    if group_id not in world.chain(chain_id).groups:
        world.create_privacy_group(chain_id, group_id, members, author)


def _find_supply_contract(world: World, request: FinancingRequest) -> str | None:
    if request.agreement_address is not None:
        return request.agreement_address
    chain = world.chain(request.agreement_chain)
    for addr in sorted(chain.contracts):
        contract = chain.contracts[addr]
        if contract.kind != SUPPLY_CONTRACT:
            continue
        stored = contract.storage.get("agreement")
        if stored is not None and stored.get("supplier") == request.supplier:
            return addr
    return None


def _find_contract(world: World, chain_id: str, kind: str) -> str | None:
    chain = world.chain(chain_id)
    for addr in sorted(chain.contracts):
        if chain.contracts[addr].kind == kind:
            return addr
    return None


def _has_grant(world: World, chain_id: str, address: str, reader: str, key: str) -> bool:
    contract = world.chain(chain_id).contracts[address]
    return any(
        g["reader"] == reader and g["key"] == key
        for g in contract.storage.get("grants", ())
    )


def step1_deploy_and_upload_draft(world: World, request: FinancingRequest, fixtures: dict) -> str:
    """Buyer deploys the supply contract and uploads the agreement signed
    only by him.  Replay on a prepared world touches nothing."""
    addr = _find_supply_contract(world, request)
    terms = fixtures["agreement"]
    buyer = terms["buyer"]
    if addr is None:
        _ensure_group(
            world, request.agreement_chain, SUPPLY_GROUP,
            [buyer, terms["supplier"]], buyer,
        )
        addr = world.deploy_contract(
            request.agreement_chain, SUPPLY_CONTRACT, buyer, SUPPLY_GROUP
        )
    contract = world.chain(request.agreement_chain).contracts[addr]
    if contract.storage.get("agreement") is None:
        draft = sign_agreement(
            world.keyring, SupplyAgreement.from_dict(terms), buyer
        )
        world.call_contract(
            request.agreement_chain, addr, buyer,
            "upload_agreement", {"agreement": draft.to_dict()},
        )
    return addr


def step2_download(world: World, request: FinancingRequest, addr: str) -> SupplyAgreement:
    stored = world.read_state(
        request.agreement_chain, addr, "agreement", request.supplier
    )
    return SupplyAgreement.from_dict(stored)


def step3_countersign_and_grant(
    world: World, request: FinancingRequest, addr: str,
    agreement: SupplyAgreement, financier: str,
) -> SupplyAgreement:
    """Supplier countersigns and, by granting the financier read access,
    makes the agreement reachable for the crosschain read."""
    if not is_countersigned(world.keyring, agreement):
        agreement = sign_agreement(world.keyring, agreement, request.supplier)
        world.call_contract(
            request.agreement_chain, addr, request.supplier,
            "upload_agreement", {"agreement": agreement.to_dict()},
        )
    if not _has_grant(world, request.agreement_chain, addr, financier, "agreement"):
        world.call_contract(
            request.agreement_chain, addr, request.supplier,
            "grant_read", {"reader": financier, "key": "agreement"},
        )
    return agreement


def step4_establish_finance_chain(world: World, request: FinancingRequest, financier: str) -> None:
    if T3FIN not in world.chains:
        world.create_chain(T3FIN, [request.supplier, financier], creator=request.supplier)


def step5_deploy_finance_contracts(world: World, request: FinancingRequest, financier: str) -> tuple[str, str]:
    """Financier's standard contract on the shared chain plus her book
    contract on her own chain."""
    _ensure_group(world, T3FIN, T3FIN_GROUP, [request.supplier, financier], financier)
    validate_addr = _find_contract(world, T3FIN, FINANCE_CONTRACT)
    if validate_addr is None:
        validate_addr = world.deploy_contract(T3FIN, FINANCE_CONTRACT, financier, T3FIN_GROUP)
    _ensure_group(world, FIN, BOOK_GROUP, [financier], financier)
    book_addr = _find_contract(world, FIN, FINANCE_CONTRACT)
    if book_addr is None:
        book_addr = world.deploy_contract(FIN, FINANCE_CONTRACT, financier, BOOK_GROUP)
    return validate_addr, book_addr


def prepare_world(world: World, request: FinancingRequest | None = None,
                  fixtures: dict | None = None) -> dict:
    """Run preparation steps 1-5, returning the addresses the sequence
    will use.  Safe to call repeatedly; replays submit no transactions."""
    request = request or default_request()
    fixtures = fixtures or default_fixtures()
    financier = fixtures["financier"]
    supply_addr = step1_deploy_and_upload_draft(world, request, fixtures)
    agreement = step2_download(world, request, supply_addr)
    step3_countersign_and_grant(world, request, supply_addr, agreement, financier)
    step4_establish_finance_chain(world, request, financier)
    validate_addr, book_addr = step5_deploy_finance_contracts(world, request, financier)
    return {
        "supply_addr": supply_addr,
        "validate_addr": validate_addr,
        "book_addr": book_addr,
    }


# --- the sequence ------------------------------------------------------------

def build_plan_steps(
    request: FinancingRequest, financier: str,
    supply_addr: str, validate_addr: str, book_addr: str,
    decision: str, funded: int,
):
    """The six steps of the atomic transaction (sequence steps 7-12)."""
    request_doc = {
        "supplier": request.supplier,
        "amount": request.amount,
        "payment_terms_days": request.payment_terms_days,
        "total_unpaid": request.total_unpaid,
        "rewards": request.rewards,
    }
    return [
        Read(request.agreement_chain, supply_addr, "agreement", financier),
        Call(
            T3FIN, validate_addr, "validate_request",
            {"agreement": {"$read": 0}, "request": request_doc}, financier,
        ),
        Call(FIN, book_addr, "register_request", {"request": request_doc}, financier),
        Call(
            FIN, book_addr, "book_loan",
            {
                "decision": decision,
                "supplier": request.supplier,
                "requested": request.amount,
                "funded": funded,
            },
            financier,
        ),
        Transfer(FIN, T3FIN, financier, financier, funded),
        Transfer(T3FIN, T3FIN, financier, request.supplier, funded),
    ]


def _fault_point(fault) -> str | None:
    if fault is None:
        return None
    return fault.point if isinstance(fault, FaultPlan) else str(fault)


def _coordinator_fault(point: str | None) -> FaultPlan | None:
    """Translate a sequence-level crash point into the coordinator's frame:
    sequence step k >= 7 is plan step k - 6."""
    if point is None:
        return None
    if point in ("lock", "stage", "commit"):
        return FaultPlan(point)
    n = int(point.split("-", 1)[1])
    if n >= 7:
        return FaultPlan(f"step-{n - 6}")
    return None


def run_financing_sequence(
    world: World,
    request: FinancingRequest | None = None,
    fixtures: dict | None = None,
    fault: FaultPlan | str | None = None,
    *,
    network: Network | None = None,
    world_config: dict | None = None,
    journal_path: str | Path | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    discount_rate: float = DEFAULT_DISCOUNT_RATE,
) -> FlowOutcome:
    """Drive the full sequence and report per-step status.

    Crash points: "step-1" .. "step-12" halt before the named sequence
    step; "lock", "stage" and "commit" hit the transaction machinery
    between steps 6 and 7.  After any injected crash the coordinator is
    recovered in place, so the returned outcome describes a settled world.
    """
    request = request or default_request()
    fixtures = fixtures or default_fixtures()
    if world_config is None:
        world_config = default_config()
    financier = fixtures["financier"]
    point = _fault_point(fault)
    out = FlowOutcome(steps=[PENDING] * STEP_COUNT)

    def crash_before(k: int) -> bool:
        if point == f"step-{k}" and k <= 6:
            out.steps[k - 1] = FAILED
            out.detail["crash"] = point
            return True
        return False

    # 1: buyer deploys the supply contract, uploads his half-signed draft
    if crash_before(1):
        return out
    supply_addr = step1_deploy_and_upload_draft(world, request, fixtures)
    out.steps[0] = DONE

    # 2: supplier downloads the agreement
    if crash_before(2):
        return out
    agreement = step2_download(world, request, supply_addr)
    out.steps[1] = DONE

    # 3: supplier countersigns, uploads, grants the financier read access
    if crash_before(3):
        return out
    agreement = step3_countersign_and_grant(
        world, request, supply_addr, agreement, financier
    )
    out.steps[2] = DONE

    # 4: supplier establishes the shared chain with the financier
    if crash_before(4):
        return out
    step4_establish_finance_chain(world, request, financier)
    out.steps[3] = DONE

    # 5: financier deploys her finance contracts
    if crash_before(5):
        return out
    validate_addr, book_addr = step5_deploy_finance_contracts(world, request, financier)
    out.steps[4] = DONE

    # the financier's system evaluates the decision model up front; the
    # booking step inside the transaction enforces the verdict
    net = network if network is not None else load_overall_network()
    out.evidence = assemble_evidence(request, fixtures, agreement.buyer, world_config)
    out.decision, out.p_fund, out.posteriors = evaluate_request(
        net, out.evidence, threshold
    )
    funded = funded_amount(request, discount_rate)

    # 6: supplier submits the atomic crosschain transaction
    if crash_before(6):
        return out
    if journal_path is None:
        journal_path = Path(tempfile.mkdtemp(prefix="chainvoice-")) / "journal.jsonl"
    coordinator = Coordinator(world, journal_path)
    tx = coordinator.plan(
        request.supplier,
        build_plan_steps(
            request, financier, supply_addr, validate_addr, book_addr,
            out.decision, funded,
        ),
    )
    out.txid = tx.txid
    out.steps[5] = DONE

    # 7-12: the transaction runs; a crash is recovered as on restart
    try:
        status = coordinator.execute(tx, _coordinator_fault(point))
    except CoordinatorCrash as crash:
        out.detail["crash"] = crash.point
        outcomes = coordinator.recover()
        status = outcomes[tx.txid]
        _mark_crashed_steps(out, crash.point, status)
        out.tx_status = status
        if status == "Committed" and out.decision == FUND:
            out.settlement = funded
        return out

    out.tx_status = status
    if status == "Committed":
        for k in range(6, 12):
            out.steps[k] = DONE
        if out.decision == FUND:
            out.settlement = funded
        return out

    failed = tx.failed_step if tx.failed_step is not None else 1
    for k in range(1, failed):
        out.steps[5 + k] = DONE
    out.steps[5 + failed] = FAILED
    out.detail["rejection"] = tx.failure_reason
    if tx.failure_kind == "ValidationFailed":
        # a malformed request is the caller's error; the world has
        # already been rolled back and every lock released
        raise ValidationFailed(tx.failure_reason)
    return out


def _mark_crashed_steps(out: FlowOutcome, point: str, status: str) -> None:
    if status == "Committed":
        for k in range(6, 12):
            out.steps[k] = DONE
        return
    if point.startswith("step-"):
        n = int(point.split("-", 1)[1])
        for k in range(1, n):
            out.steps[5 + k] = DONE
        out.steps[5 + n] = FAILED

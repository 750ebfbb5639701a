"""Acceptance gate: the published behavior, checked end to end.

One test per criterion, each asserting the stated tolerances and time
budgets.  Expected numbers are written out literally here on purpose;
nothing in this module derives them from the code under test.
"""

import itertools
import json
import time

import pytest

from chainvoice.bn import build_network, query
from chainvoice.bn.joint import enumerate_joint
from chainvoice.bootstrap import FARMER_ERIC, FIN, PARTIES, T2T3, T3FIN, bootstrap_world
from chainvoice.errors import PrivacyViolation, ValidationFailed
from chainvoice.finance.fit import fitted_master
from chainvoice.finance.store import (
    INCENTIVE_FILE,
    SUPPLIER_FILE,
    load_model_class,
)
from chainvoice.flow import (
    FinancingRequest,
    default_request,
    prepare_world,
    run_financing_sequence,
)

SEED = "acceptance"

GENESIS_TOTAL = 1_000_000

CRASH_POINTS = [f"step-{i}" for i in range(1, 13)] + ["lock", "stage", "commit"]


def build_class_network(filename):
    return build_network(load_model_class(filename).spec)


def prepared_world():
    world = bootstrap_world(SEED)
    addrs = prepare_world(world)
    return world, addrs


def committed_reference() -> bytes:
    world, _ = prepared_world()
    outcome = run_financing_sequence(world)
    assert outcome.tx_status == "Committed"
    return world.export_bytes()


def test_supplier_profile_posteriors():
    """LowRisk 0.500 / 0.795 / 0.695 / 0.990 within 0.01, under a second."""
    net = build_class_network(SUPPLIER_FILE)
    cases = [
        ({}, 0.500),
        ({"GWaL": "Yes"}, 0.795),
        ({"Tier1": "Yes"}, 0.695),
        ({"Tier1": "Yes", "GWaL": "Yes"}, 0.990),
    ]
    start = time.perf_counter()
    for evidence, expected in cases:
        actual = query(net, evidence, "SupplierProfile")["LowRisk"]
        assert actual == pytest.approx(expected, abs=0.01), (evidence, actual)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"supplier queries took {elapsed:.3f}s"


def test_financial_incentive_posteriors():
    """Compelling 0.500/0.600/0.900/0.200/0.800/0.990 within 0.01, under a second."""
    net = build_class_network(INCENTIVE_FILE)
    cases = [
        ({}, 0.500),
        ({"FinancialRewards": "Additional"}, 0.600),
        ({"CreditRating": "Passed"}, 0.900),
        ({"CreditRating": "Failed", "FinancialRewards": "Additional"}, 0.200),
        ({"CreditRating": "Passed", "FinancialRewards": "Standard"}, 0.800),
        ({"CreditRating": "Passed", "FinancialRewards": "Additional"}, 0.990),
    ]
    start = time.perf_counter()
    for evidence, expected in cases:
        actual = query(net, evidence, "FinancialIncentive")["Compelling"]
        assert actual == pytest.approx(expected, abs=0.01), (evidence, actual)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"incentive queries took {elapsed:.3f}s"


def test_overall_model_posteriors_after_fitting():
    """Fit under 30s; uniform no-evidence baseline to 1e-6; published posteriors."""
    start = time.perf_counter()
    result = fitted_master()
    fit_time = time.perf_counter() - start
    assert fit_time < 30.0, f"fit took {fit_time:.1f}s"

    net = result.network
    for node in net.spec.nodes:
        posterior = query(net, {}, node.id)
        for state in node.states:
            assert posterior[state] == pytest.approx(0.5, abs=1e-6), (
                node.id,
                posterior.distribution,
            )

    gwal = {"SupplierProfile.GWaL": "Yes"}
    assert query(net, gwal, "PerceptionOfRisk")["AcceptableRisk"] == pytest.approx(
        0.618, abs=0.01
    )
    gwal_credit = dict(gwal, **{"FinancialIncentive.CreditRating": "Passed"})
    assert query(net, gwal_credit, "PerceptionOfRisk")[
        "AcceptableRisk"
    ] == pytest.approx(0.857, abs=0.01)

    funded_lower = dict(
        gwal_credit, **{"SupplierProfile.Tier1": "No", "LowerFunded": "Yes"}
    )
    assert query(net, funded_lower, "Decision")["Fund"] == pytest.approx(
        0.774, abs=0.01
    )
    assert query(net, funded_lower, "Stability")["Stable"] == pytest.approx(
        0.768, abs=0.01
    )

    declined = {"Decision": "DoNotFund", "LowerFunded": "Yes"}
    assert query(net, declined, "Stability")["Unstable"] == pytest.approx(
        0.990, abs=1e-3
    )


def test_oracle_equivalence_exhaustive():
    """Variable elimination equals joint enumeration to 1e-9 per state for
    every hard-evidence assignment over the observable nodes (each node
    unobserved or clamped to any of its states), every target, in <10s."""
    net = fitted_master().network
    observable = [
        "SupplierProfile.GWaL",
        "SupplierProfile.Tier1",
        "FinancialIncentive.CreditRating",
        "FinancialIncentive.FinancialRewards",
        "Decision",
        "LowerFunded",
    ]
    states = {n.id: n.states for n in net.spec.nodes}
    targets = [n.id for n in net.spec.nodes]

    start = time.perf_counter()
    checked = 0
    for combo in itertools.product(
        *[(None,) + tuple(states[o]) for o in observable]
    ):
        evidence = {o: s for o, s in zip(observable, combo) if s is not None}
        for target in targets:
            ve = query(net, evidence, target)
            joint = enumerate_joint(net, evidence, target)
            for state in states[target]:
                assert abs(ve[state] - joint[state]) <= 1e-9, (
                    evidence,
                    target,
                    state,
                )
            checked += 1
    elapsed = time.perf_counter() - start
    assert checked == 3**6 * len(targets)
    assert elapsed < 10.0, f"oracle sweep took {elapsed:.1f}s"


def test_atomicity_every_crash_point():
    """Every crash leaves the world byte-identical to the pre-transaction or
    the fully committed export, with zero locks held; sweep <30s."""
    reference_world, _ = prepared_world()
    pre = reference_world.export_bytes()
    committed = committed_reference()
    assert pre != committed

    start = time.perf_counter()
    for point in CRASH_POINTS:
        world, _ = prepared_world()
        assert world.export_bytes() == pre
        outcome = run_financing_sequence(world, fault=point)
        after = world.export_bytes()
        if point == "commit":
            # crash after the commit point: recovery completes the transaction
            assert after == committed, point
            assert outcome.tx_status == "Committed"
        else:
            assert after == pre, point
        assert world.held_locks() == [], point
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"fault sweep took {elapsed:.1f}s"


def test_privacy_every_nonmember_pair():
    """100% of unauthorized (party, contract) reads raise PrivacyViolation;
    the outsider can never retrieve the agreement."""
    world, addrs = prepared_world()
    run_financing_sequence(world)  # populate contract storage on every chain
    contracts = [
        (T2T3, addrs["supply_addr"], "agreement"),
        (T3FIN, addrs["validate_addr"], "validation"),
        (FIN, addrs["book_addr"], "loans"),
    ]

    denied = allowed = 0
    for party in PARTIES:
        for chain_id, address, key in contracts:
            chain = world.chains[chain_id]
            contract = chain.contracts[address]
            group = chain.groups[contract.privacy_group]
            granted = any(
                g["reader"] == party and g["key"] == key
                for g in contract.storage.get("grants", ())
            )
            if party in group.members or granted:
                value = world.read_state(chain_id, address, key, party)
                assert value is not None, (party, chain_id, key)
                allowed += 1
            else:
                with pytest.raises(PrivacyViolation):
                    world.read_state(chain_id, address, key, party)
                denied += 1
    assert denied >= 25          # the sweep is not vacuous
    assert allowed >= 3

    with pytest.raises(PrivacyViolation):
        world.read_state(T2T3, addrs["supply_addr"], "agreement", FARMER_ERIC)


def test_conservation_in_every_run():
    """Total balance never moves, in committed, faulted, and rejected runs."""
    for point in [None] + CRASH_POINTS:
        world, _ = prepared_world()
        run_financing_sequence(world, fault=point)
        assert world.total_balance() == GENESIS_TOTAL, point

    world, _ = prepared_world()
    outcome = run_financing_sequence(world, threshold=0.99)     # model says Fund, bar set higher
    assert outcome.decision == "DoNotFund"
    assert world.total_balance() == GENESIS_TOTAL

    world, _ = prepared_world()
    bad_terms = FinancingRequest.from_dict(
        dict(default_request().to_dict(), payment_terms_days=30)
    )
    with pytest.raises(ValidationFailed):
        run_financing_sequence(world, bad_terms)
    assert world.total_balance() == GENESIS_TOTAL


def test_determinism_exports_and_journals():
    """Identical seed and inputs give identical exports and journals."""

    def run(tmpdir, fault):
        world = bootstrap_world(SEED)
        journal = tmpdir / "journal.jsonl"
        run_financing_sequence(world, fault=fault, journal_path=journal)
        return world, journal.read_bytes()

    import tempfile
    from pathlib import Path

    for fault in (None, "step-11"):
        with tempfile.TemporaryDirectory() as da, tempfile.TemporaryDirectory() as db:
            wa, ja = run(Path(da), fault)
            wb, jb = run(Path(db), fault)
            assert wa.export_bytes() == wb.export_bytes(), fault
            assert ja == jb, fault
            for cid in wa.chains:
                assert wa.export_chain_jsonl(cid) == wb.export_chain_jsonl(cid)
            # journals are well-formed JSON lines
            for line in ja.decode().splitlines():
                json.loads(line)

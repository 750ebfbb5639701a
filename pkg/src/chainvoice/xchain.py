"""Atomic crosschain transactions: coordinator-driven two-phase commit.

A transaction is an ordered list of steps (reads, contract calls, value
transfers) spanning several chains.  Execution locks every touched
contract in a global deterministic order, stages all effects against a
shadow copy of the world, then flips a durable journal record to
Committed and applies the staged effects chain by chain.  The journal
flip IS the commit point: any failure or injected crash before it leaves
the world byte-identical to its pre-transaction export once recovery has
released the locks; any crash after it is completed by recovery replaying
the remaining per-chain applications.  Locks are in-memory coordination
state and never appear in logs or exports, so a rolled-back transaction
is invisible.

Call arguments may reference the output of an earlier read step with
``{"$read": i}``; the coordinator substitutes the value captured at stage
time, which is stable because read sources are locked first.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    ChainvoiceError,
    CoordinatorCrash,
    EmptyPlan,
    FundingDeclined,
    LockConflict,
    NoGrant,
    StepFailed,
    ValidationFailed,
)
from .ledger import World, canonical, digest_hex

PHASE_LOCK = "lock"
PHASE_STAGE = "stage"
PHASE_COMMIT = "commit"

# failures that mean "the business said no", not "the machinery broke"
BUSINESS_REJECTIONS = (ValidationFailed, FundingDeclined)


@dataclass(frozen=True)
class Read:
    chain: str
    address: str
    key: str
    reader: str


@dataclass(frozen=True)
class Call:
    chain: str
    address: str
    method: str
    args: dict
    caller: str


@dataclass(frozen=True)
class Transfer:
    from_chain: str
    to_chain: str
    from_party: str
    to_party: str
    amount: int


Step = Read | Call | Transfer

PLANNED = "Planned"
LOCKING = "Locking"
EXECUTING = "Executing"
COMMITTED = "Committed"
IGNORED = "Ignored"


@dataclass
class CrosschainTx:
    txid: str
    originator: str
    steps: tuple[Step, ...]
    status: str = PLANNED
    locks: tuple[tuple[str, str], ...] = ()
    reads: list = field(default_factory=list)
    failed_step: int | None = None    # 1-based plan step that rejected/failed
    failure_kind: str | None = None
    failure_reason: str | None = None


@dataclass(frozen=True)
class FaultPlan:
    """halt the coordinator at one named point: 'lock', 'stage',
    'step-N' (before staging step N, 1-based), or 'commit' (directly
    after the commit-point flip, before any application)."""

    point: str


def step_to_dict(step: Step) -> dict:
    if isinstance(step, Read):
        return {"type": "read", "chain": step.chain, "address": step.address,
                "key": step.key, "reader": step.reader}
    if isinstance(step, Call):
        return {"type": "call", "chain": step.chain, "address": step.address,
                "method": step.method, "args": step.args, "caller": step.caller}
    return {"type": "transfer", "from_chain": step.from_chain,
            "to_chain": step.to_chain, "from_party": step.from_party,
            "to_party": step.to_party, "amount": step.amount}


def step_from_dict(doc: dict) -> Step:
    kind = doc["type"]
    if kind == "read":
        return Read(doc["chain"], doc["address"], doc["key"], doc["reader"])
    if kind == "call":
        return Call(doc["chain"], doc["address"], doc["method"], doc["args"],
                    doc["caller"])
    return Transfer(doc["from_chain"], doc["to_chain"], doc["from_party"],
                    doc["to_party"], int(doc["amount"]))


def lock_set(steps) -> tuple[tuple[str, str], ...]:
    """Contracts touched by calls plus read sources, in the global lock
    order (chain id, then address) that excludes deadlock."""
    touched = set()
    for step in steps:
        if isinstance(step, (Read, Call)):
            touched.add((step.chain, step.address))
    return tuple(sorted(touched))


class Journal:
    """Append-only JSONL coordinator journal; the durable half of 2PC."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if not self.path.exists():
            self.path.write_text("")

    def append(self, record: dict) -> dict:
        record = {"seq": len(self.records()), **record}
        with self.path.open("a") as fh:
            fh.write(canonical(record).decode() + "\n")
        return record

    def records(self) -> list[dict]:
        out = []
        for line in self.path.read_text().splitlines():
            if line.strip():
                out.append(json.loads(line))
        return out

    def planned_count(self) -> int:
        return sum(1 for r in self.records() if r["phase"] == "planned")

    def by_tx(self) -> dict[str, list[dict]]:
        grouped: dict[str, list[dict]] = {}
        for r in self.records():
            grouped.setdefault(r["txid"], []).append(r)
        return grouped


class Coordinator:
    def __init__(self, world: World, journal: Journal | str | Path):
        self.world = world
        self.journal = journal if isinstance(journal, Journal) else Journal(journal)

    # -- planning --

    def plan(self, originator: str, steps) -> CrosschainTx:
        """Validate the steps, assign a tx id, and journal the plan.

        The id hashes originator, steps, and the count of previously
        planned transactions, so identical runs of identical plans get
        identical ids while distinct concurrent plans never collide."""
        steps = tuple(steps)
        if not steps:
            raise EmptyPlan("a crosschain transaction needs at least one step")
        step_docs = [step_to_dict(s) for s in steps]
        for step in steps:
            chains = (
                (step.from_chain, step.to_chain)
                if isinstance(step, Transfer)
                else (step.chain,)
            )
            for cid in chains:
                self.world.chain(cid)  # raises UnknownChain
        txid = digest_hex(
            {
                "originator": originator,
                "steps": step_docs,
                "nonce": self.journal.planned_count(),
            }
        )[:16]
        tx = CrosschainTx(
            txid=txid, originator=originator, steps=steps, locks=lock_set(steps)
        )
        self.journal.append(
            {
                "txid": txid,
                "phase": "planned",
                "originator": originator,
                "steps": step_docs,
                "locks": [list(pair) for pair in tx.locks],
            }
        )
        return tx

    # -- execution --

    def execute(self, tx: CrosschainTx, fault: FaultPlan | None = None) -> str:
        """Run the two-phase protocol to Committed or Ignored.

        An injected CoordinatorCrash propagates with locks and journal
        exactly as a real halt would leave them; call recover() afterwards,
        as a restarted coordinator would.
        """
        point = fault.point if fault else None
        if point == PHASE_LOCK:
            raise CoordinatorCrash(PHASE_LOCK)

        tx.status = LOCKING
        self._acquire(tx)
        self.journal.append({"txid": tx.txid, "phase": "locked"})

        if point == PHASE_STAGE:
            raise CoordinatorCrash(PHASE_STAGE)

        tx.status = EXECUTING
        try:
            effects = self._stage(tx, point)
        except CoordinatorCrash:
            raise
        except BUSINESS_REJECTIONS as exc:
            self._note_failure(tx, exc)
            self._ignore(tx, reason=tx.failure_reason)
            return IGNORED
        except Exception as exc:
            # any mechanical staging failure: the shadow world is discarded,
            # locks released, and the defect surfaced to the caller
            self._note_failure(tx, exc)
            self._ignore(tx, reason=tx.failure_reason)
            raise StepFailed(
                tx.failed_step if tx.failed_step is not None else -1,
                type(exc).__name__,
                {"message": str(exc)},
            ) from exc

        self.journal.append(
            {
                "txid": tx.txid,
                "phase": "staged",
                "effects": effects,
                "reads": tx.reads,
                "digest": digest_hex(effects),
            }
        )

        # commit point: after this record exists, the transaction WILL apply
        self.journal.append({"txid": tx.txid, "phase": "committed"})
        if point == PHASE_COMMIT:
            raise CoordinatorCrash(PHASE_COMMIT)

        self._apply(tx.txid, effects)
        self._release(tx)
        self.journal.append({"txid": tx.txid, "phase": "released"})
        tx.status = COMMITTED
        return COMMITTED

    # -- phases --

    def _acquire(self, tx: CrosschainTx) -> None:
        acquired = []
        for cid, addr in tx.locks:
            try:
                self.world.lock_contract(cid, addr, tx.txid)
                acquired.append((cid, addr))
            except ChainvoiceError as exc:
                for c, a in acquired:
                    self.world.release_lock(c, a, tx.txid)
                self.journal.append(
                    {"txid": tx.txid, "phase": "ignored", "reason": "lock conflict"}
                )
                tx.status = IGNORED
                raise LockConflict(f"{cid}/{addr}: {exc}") from exc

    def _stage(self, tx: CrosschainTx, point: str | None) -> list[dict]:
        """Run every step against a shadow world, returning the per-chain
        effect list that commit will apply for real."""
        shadow = copy.deepcopy(self.world)
        effects: list[dict] = []
        tx.reads = []
        for i, step in enumerate(tx.steps, start=1):
            if point == f"step-{i}":
                raise CoordinatorCrash(point)
            try:
                self._stage_step(shadow, tx, step, effects)
            except Exception as exc:
                exc._step_index = i
                raise
        return effects

    def _stage_step(self, shadow: World, tx, step: Step, effects: list[dict]) -> None:
        if isinstance(step, Read):
            value = self._crosschain_read(shadow, tx, step)
            tx.reads.append({"chain": step.chain, "address": step.address,
                             "key": step.key, "value": value})
        elif isinstance(step, Call):
            body = {
                "op": "call",
                "address": step.address,
                "method": step.method,
                "args": self._resolve(step.args, tx.reads),
            }
            shadow.submit_tx(step.chain, step.caller, dict(body), xtx=tx.txid)
            effects.append({"chain": step.chain, "author": step.caller, "body": body})
        else:
            for chain, author, body in transfer_bodies(step):
                shadow.submit_tx(chain, author, dict(body), xtx=tx.txid)
                effects.append({"chain": chain, "author": author, "body": body})

    def _crosschain_read(self, shadow: World, tx, step: Read):
        access = read_access(shadow, step.chain, step.address, step.key, step.reader)
        if access is None:
            raise NoGrant(
                f"{step.reader} holds no read grant for {step.key!r} "
                f"at {step.address} on {step.chain}"
            )
        return shadow.read_state(
            step.chain, step.address, step.key, step.reader, xtx=tx.txid
        )

    @staticmethod
    def _resolve(args: dict, reads: list[dict]):
        def subst(value):
            if isinstance(value, dict):
                if set(value.keys()) == {"$read"}:
                    return reads[value["$read"]]["value"]
                return {k: subst(v) for k, v in value.items()}
            if isinstance(value, list):
                return [subst(v) for v in value]
            return value

        return subst(args)

    def _apply(self, txid: str, effects: list[dict], already: set | None = None) -> None:
        by_chain: dict[str, list[dict]] = {}
        for eff in effects:
            by_chain.setdefault(eff["chain"], []).append(eff)
        for cid in sorted(by_chain):
            if already and cid in already:
                continue
            for eff in by_chain[cid]:
                self.world.submit_tx(cid, eff["author"], dict(eff["body"]), xtx=txid)
            self.journal.append({"txid": txid, "phase": "applied", "chain": cid})

    def _release(self, tx: CrosschainTx) -> None:
        for cid, addr in tx.locks:
            self.world.release_lock(cid, addr, tx.txid)

    def _ignore(self, tx: CrosschainTx, reason: str) -> None:
        self._release(tx)
        self.journal.append({"txid": tx.txid, "phase": "ignored", "reason": reason})
        tx.status = IGNORED

    @staticmethod
    def _note_failure(tx: CrosschainTx, exc: Exception) -> None:
        tx.failed_step = getattr(exc, "_step_index", None)
        tx.failure_kind = type(exc).__name__
        tx.failure_reason = f"{type(exc).__name__}: {exc}"

    # -- reads --

    def crosschain_read(self, tx: CrosschainTx, chain: str, address: str,
                        key: str, reader: str | None = None):
        """Last committed value under key, read on behalf of a transaction
        that holds the source lock (so the value is stable for its lifetime)."""
        who = reader or tx.originator
        access = read_access(self.world, chain, address, key, who)
        if access is None:
            raise NoGrant(
                f"{who} holds no read grant for {key!r} at {address} on {chain}"
            )
        return self.world.read_state(chain, address, key, who, xtx=tx.txid)

    # -- recovery --

    def recover(self) -> dict[str, str]:
        """Bring every journaled transaction to a terminal state, as a
        restarted coordinator would: roll back anything short of the
        commit point, finish anything past it.  Idempotent."""
        outcomes: dict[str, str] = {}
        for txid, records in self.journal.by_tx().items():
            phases = [r["phase"] for r in records]
            planned = next(r for r in records if r["phase"] == "planned")
            locks = [tuple(p) for p in planned.get("locks", ())]
            if "released" in phases or "ignored" in phases:
                outcomes[txid] = COMMITTED if "committed" in phases else IGNORED
                continue
            if "committed" in phases:
                staged = next(r for r in records if r["phase"] == "staged")
                done = {r["chain"] for r in records if r["phase"] == "applied"}
                self._apply(txid, staged["effects"], already=done)
                for cid, addr in locks:
                    self.world.release_lock(cid, addr, txid)
                self.journal.append({"txid": txid, "phase": "released"})
                outcomes[txid] = COMMITTED
            else:
                # locks are held only once the 'locked' record exists
                if "locked" in phases:
                    for cid, addr in locks:
                        self.world.release_lock(cid, addr, txid)
                self.journal.append(
                    {"txid": txid, "phase": "ignored", "reason": "recovered"}
                )
                outcomes[txid] = IGNORED
        return outcomes


def transfer_bodies(step: Transfer) -> list[tuple[str, str, dict]]:
    """(chain, author, body) triples realizing a transfer; cross-chain
    moves are a debit/credit pair that conserves the global total."""
    amount = int(step.amount)
    if step.from_chain == step.to_chain:
        return [
            (
                step.from_chain,
                step.from_party,
                {
                    "op": "transfer",
                    "from_party": step.from_party,
                    "to_party": step.to_party,
                    "amount": amount,
                },
            )
        ]
    return [
        (
            step.from_chain,
            step.from_party,
            {
                "op": "transfer_out",
                "from_party": step.from_party,
                "to_chain": step.to_chain,
                "to_party": step.to_party,
                "amount": amount,
            },
        ),
        (
            step.to_chain,
            step.to_party,
            {
                "op": "transfer_in",
                "from_chain": step.from_chain,
                "from_party": step.from_party,
                "to_party": step.to_party,
                "amount": amount,
            },
        ),
    ]


def read_access(world: World, chain_id: str, address: str, key: str, caller: str):
    """'member', 'grant', or None — how (and whether) caller may read."""
    chain = world.chain(chain_id)
    contract = world._contract(chain, address)
    group = chain.groups[contract.privacy_group]
    if caller in group.members:
        return "member"
    if World._has_grant(contract, caller, key):
        return "grant"
    return None

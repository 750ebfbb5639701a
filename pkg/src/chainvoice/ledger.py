"""Private-chain world simulator.

Each chain is a member set, an append-only hash-chained log of signed
transactions, a map of deployed contracts, and integer balances in base
units.  Contracts are native state machines (no VM): a supply contract
stores agreements and read grants, a finance contract registers and
validates financing requests and books loans.  Privacy groups restrict
payload visibility to a subset of chain members; everyone else sees an
envelope (or, for state reads, a refusal).

Determinism: signing keys derive from the run seed, records carry logical
indices instead of wall-clock time, and every serialization is canonical
JSON — so identical inputs reproduce identical exports byte for byte.
Contract locks are transient coordination state owned by the crosschain
layer; they are never logged and never exported.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.exceptions import InvalidSignature

from .errors import (
    BadSignature,
    ContractLocked,
    DuplicateChainId,
    FundingDeclined,
    InsufficientBalance,
    NotAMember,
    PrivacyViolation,
    RateOutOfRange,
    UnknownAddress,
    UnknownChain,
    ValidationFailed,
)

GENESIS_PREV = "0" * 64

SUPPLY_CONTRACT = "SupplyContract"
FINANCE_CONTRACT = "FinanceContract"


def canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def digest_hex(obj) -> str:
    data = obj if isinstance(obj, bytes) else canonical(obj)
    return hashlib.sha256(data).hexdigest()


class Keyring:
    """Deterministic Ed25519 keys, one per party, derived from the seed.

    Keys are rebuilt on demand from the seed so the keyring holds no
    foreign-library state and copies freely with the world.
    """

    def __init__(self, seed: str):
        self.seed = seed

    def _private(self, party: str) -> Ed25519PrivateKey:
        raw = hashlib.sha256(f"{self.seed}:{party}".encode()).digest()
        return Ed25519PrivateKey.from_private_bytes(raw)

    def public_hex(self, party: str) -> str:
        pub = self._private(party).public_key()
        from cryptography.hazmat.primitives.serialization import (
            Encoding,
            PublicFormat,
        )

        return pub.public_bytes(Encoding.Raw, PublicFormat.Raw).hex()

    def sign(self, party: str, payload) -> str:
        return self._private(party).sign(canonical(payload)).hex()

    def verify(self, party: str, payload, signature_hex: str) -> bool:
        pub = Ed25519PublicKey.from_public_bytes(
            bytes.fromhex(self.public_hex(party))
        )
        try:
            pub.verify(bytes.fromhex(signature_hex), canonical(payload))
            return True
        except (InvalidSignature, ValueError):
            return False


# --- supply agreements ----------------------------------------------------

@dataclass(frozen=True)
class SupplyAgreement:
    supplier: str
    buyer: str
    item: str
    quantity: int
    unit_price: int          # base units
    payment_terms_days: int  # 30 or 60
    signatures: tuple[tuple[str, str], ...] = ()

    def core(self) -> dict:
        return {
            "supplier": self.supplier,
            "buyer": self.buyer,
            "item": self.item,
            "quantity": self.quantity,
            "unit_price": self.unit_price,
            "payment_terms_days": self.payment_terms_days,
        }

    def to_dict(self) -> dict:
        doc = self.core()
        doc["signatures"] = [[p, s] for p, s in self.signatures]
        return doc

    @staticmethod
    def from_dict(doc: dict) -> "SupplyAgreement":
        return SupplyAgreement(
            supplier=doc["supplier"],
            buyer=doc["buyer"],
            item=doc["item"],
            quantity=int(doc["quantity"]),
            unit_price=int(doc["unit_price"]),
            payment_terms_days=int(doc["payment_terms_days"]),
            signatures=tuple((p, s) for p, s in doc.get("signatures", ())),
        )


def sign_agreement(keyring: Keyring, agreement: SupplyAgreement, party: str) -> SupplyAgreement:
    sig = keyring.sign(party, agreement.core())
    return replace(agreement, signatures=agreement.signatures + ((party, sig),))


def is_countersigned(keyring: Keyring, agreement: SupplyAgreement) -> bool:
    valid = {
        party
        for party, sig in agreement.signatures
        if keyring.verify(party, agreement.core(), sig)
    }
    return agreement.supplier in valid and agreement.buyer in valid


def early_payment_discount(amount: int, rate: float) -> int:
    """Discounted amount, floored to whole base units."""
    if not 0.0 <= rate < 1.0:
        raise RateOutOfRange(f"rate {rate} outside [0, 1)")
    return int(amount * (1.0 - rate))


def check_request_against_agreement(agreement: dict, request: dict) -> list[str]:
    """Violation codes for a financing request judged against the agreement
    it cites.  Empty list means the request is consistent."""
    violations = []
    value = int(agreement["quantity"]) * int(agreement["unit_price"])
    if int(request["amount"]) > value:
        violations.append("AmountExceedsAgreement")
    if int(request["payment_terms_days"]) != int(agreement["payment_terms_days"]):
        violations.append("PaymentTermsMismatch")
    if request["supplier"] != agreement["supplier"]:
        violations.append("SupplierMismatch")
    if int(request["amount"]) > int(request["total_unpaid"]):
        violations.append("AmountExceedsUnpaidInvoices")
    return violations


# --- chain state ----------------------------------------------------------

@dataclass
class PrivacyGroup:
    id: str
    members: tuple[str, ...]


@dataclass
class ContractState:
    kind: str
    address: str
    owner: str
    privacy_group: str
    storage: dict = field(default_factory=dict)
    lock: str | None = None  # crosschain tx id; transient, never exported


@dataclass
class Chain:
    id: str
    members: tuple[str, ...]
    log: list = field(default_factory=list)
    contracts: dict = field(default_factory=dict)
    balances: dict = field(default_factory=dict)
    groups: dict = field(default_factory=dict)

    def tip(self) -> str:
        return self.log[-1]["digest"] if self.log else GENESIS_PREV


class World:
    """All chains plus the keyring; the single mutation entry point.

    Every mutation goes through submit_tx, which validates, applies, and
    seals in one step — a failed transaction leaves no trace in the log.
    """

    def __init__(self, seed: str):
        self.seed = seed
        self.keyring = Keyring(seed)
        self.chains: dict[str, Chain] = {}
        self.parties: set[str] = set()

    # -- chain lifecycle --

    def create_chain(
        self,
        chain_id: str,
        members,
        creator: str | None = None,
        genesis_balances: dict | None = None,
    ) -> Chain:
        if chain_id in self.chains:
            raise DuplicateChainId(chain_id)
        members = tuple(members)
        if not members:
            raise ValueError("chain requires at least one member")
        creator = creator or members[0]
        if creator not in members:
            raise NotAMember(f"{creator} not in {chain_id} member set")
        genesis_balances = genesis_balances or {}
        for party in genesis_balances:
            if party not in members:
                raise NotAMember(f"genesis balance for non-member {party}")
        chain = Chain(id=chain_id, members=members)
        chain.balances = {m: 0 for m in members}
        self.chains[chain_id] = chain
        self.parties.update(members)
        self._seal(
            chain,
            author=creator,
            body={
                "op": "genesis",
                "chain": chain_id,
                "members": list(members),
                "balances": {k: int(v) for k, v in sorted(genesis_balances.items())},
            },
        )
        for party, amount in genesis_balances.items():
            chain.balances[party] = int(amount)
        return chain

    def chain(self, chain_id: str) -> Chain:
        try:
            return self.chains[chain_id]
        except KeyError:
            raise UnknownChain(chain_id) from None

    # -- transaction sealing --

    def _seal(self, chain: Chain, author: str, body: dict) -> dict:
        index = len(chain.log)
        prev = chain.tip()
        head = {"index": index, "prev": prev, "body": body}
        signature = self.keyring.sign(author, head)
        record = {
            "index": index,
            "prev": prev,
            "author": author,
            "body": body,
            "signature": signature,
        }
        record["digest"] = digest_hex(record)
        chain.log.append(record)
        return record

    def submit_tx(self, chain_id: str, author: str, body: dict, xtx: str | None = None) -> dict:
        """Validate and apply one transaction, then seal it into the log."""
        chain = self.chain(chain_id)
        if author not in chain.members:
            raise NotAMember(f"{author} is not a member of {chain_id}")
        body = dict(body)
        body["chain"] = chain_id
        if xtx is not None:
            body["xtx"] = xtx
        group_id = body.get("group")
        if group_id is not None:
            group = chain.groups.get(group_id)
            if group is None or author not in group.members:
                raise PrivacyViolation(
                    f"{author} is outside privacy group {group_id} on {chain_id}"
                )
        self._apply(chain, author, body, xtx)
        return self._seal(chain, author, body)

    def _apply(self, chain: Chain, author: str, body: dict, xtx: str | None) -> None:
        op = body["op"]
        if op == "create_group":
            members = tuple(body["members"])
            if not set(members) <= set(chain.members):
                raise NotAMember("privacy group must be a subset of chain members")
            if author not in members:
                raise PrivacyViolation("group creator must belong to the group")
            chain.groups[body["group_id"]] = PrivacyGroup(body["group_id"], members)
            # the record names the group's members, so it is itself private
            body["group"] = body["group_id"]
        elif op == "deploy":
            group = chain.groups.get(body["contract_group"])
            if group is None:
                raise PrivacyViolation(f"unknown privacy group {body['contract_group']}")
            if author not in group.members:
                raise PrivacyViolation(f"{author} outside group {group.id}")
            address = digest_hex(f"{chain.id}:{len(chain.log)}".encode())[:40]
            chain.contracts[address] = ContractState(
                kind=body["kind"],
                address=address,
                owner=author,
                privacy_group=group.id,
            )
            body["address"] = address
        elif op == "call":
            contract = self._contract(chain, body["address"])
            self._check_lock(contract, xtx)
            group = chain.groups[contract.privacy_group]
            if author not in group.members:
                raise PrivacyViolation(
                    f"{author} outside privacy group of {contract.address}"
                )
            _dispatch_call(self, chain, contract, author, body["method"], body["args"])
            body["group"] = contract.privacy_group
        elif op == "transfer":
            amount = int(body["amount"])
            if amount <= 0:
                raise ValueError("transfer amount must be positive")
            src, dst = body["from_party"], body["to_party"]
            if src != author:
                raise BadSignature("transfer must be authored by the paying party")
            if chain.balances.get(src, 0) < amount:
                raise InsufficientBalance(
                    f"{src} holds {chain.balances.get(src, 0)} < {amount} on {chain.id}"
                )
            if dst not in chain.members:
                raise NotAMember(f"{dst} is not a member of {chain.id}")
            chain.balances[src] -= amount
            chain.balances[dst] += amount
        elif op == "transfer_out":
            # cross-chain debit; the paired transfer_in credits the target
            amount = int(body["amount"])
            if amount <= 0:
                raise ValueError("transfer amount must be positive")
            src = body["from_party"]
            if src != author:
                raise BadSignature("transfer must be authored by the paying party")
            if chain.balances.get(src, 0) < amount:
                raise InsufficientBalance(
                    f"{src} holds {chain.balances.get(src, 0)} < {amount} on {chain.id}"
                )
            chain.balances[src] -= amount
        elif op == "transfer_in":
            amount = int(body["amount"])
            if amount <= 0:
                raise ValueError("transfer amount must be positive")
            dst = body["to_party"]
            if dst not in chain.members:
                raise NotAMember(f"{dst} is not a member of {chain.id}")
            chain.balances[dst] = chain.balances.get(dst, 0) + amount
        else:
            raise ValueError(f"unknown transaction op {op!r}")

    def _contract(self, chain: Chain, address: str) -> ContractState:
        try:
            return chain.contracts[address]
        except KeyError:
            raise UnknownAddress(f"{address} on {chain.id}") from None

    @staticmethod
    def _check_lock(contract: ContractState, xtx: str | None) -> None:
        if contract.lock is not None and contract.lock != xtx:
            raise ContractLocked(
                f"{contract.address} locked by {contract.lock}"
            )

    # -- convenience wrappers --

    def create_privacy_group(self, chain_id, group_id, members, author) -> dict:
        return self.submit_tx(
            chain_id,
            author,
            {"op": "create_group", "group_id": group_id, "members": list(members)},
        )

    def deploy_contract(self, chain_id, kind, deployer, group_id) -> str:
        record = self.submit_tx(
            chain_id,
            deployer,
            {"op": "deploy", "kind": kind, "contract_group": group_id},
        )
        return record["body"]["address"]

    def call_contract(self, chain_id, address, caller, method, args, xtx=None) -> dict:
        return self.submit_tx(
            chain_id,
            caller,
            {"op": "call", "address": address, "method": method, "args": args},
            xtx=xtx,
        )

    # -- reads --

    def read_state(self, chain_id, address, key, caller, xtx=None):
        chain = self.chain(chain_id)
        contract = self._contract(chain, address)
        self._check_lock(contract, xtx)
        group = chain.groups[contract.privacy_group]
        if caller not in group.members and not self._has_grant(contract, caller, key):
            raise PrivacyViolation(
                f"{caller} may not read {key!r} at {address} on {chain_id}"
            )
        return contract.storage.get(key)

    @staticmethod
    def _has_grant(contract: ContractState, caller: str, key: str) -> bool:
        return any(
            g["reader"] == caller and g["key"] == key
            for g in contract.storage.get("grants", ())
        )

    def log_view(self, chain_id: str, viewer: str) -> list[dict]:
        """The chain log as one member sees it: payloads of privacy-group
        transactions the viewer is outside of are replaced by envelopes."""
        chain = self.chain(chain_id)
        if viewer not in chain.members:
            raise NotAMember(f"{viewer} is not a member of {chain_id}")
        out = []
        for record in chain.log:
            group_id = record["body"].get("group")
            if group_id is not None and viewer not in chain.groups[group_id].members:
                out.append(
                    {
                        "index": record["index"],
                        "prev": record["prev"],
                        "author": record["author"],
                        "signature": record["signature"],
                        "digest": record["digest"],
                        "privacy_group": group_id,
                        "redacted": True,
                    }
                )
            else:
                out.append(record)
        return out

    # -- locks (crosschain coordination; never part of exports) --

    def lock_contract(self, chain_id, address, xtx: str) -> None:
        contract = self._contract(self.chain(chain_id), address)
        if contract.lock is not None and contract.lock != xtx:
            raise ContractLocked(f"{address} locked by {contract.lock}")
        contract.lock = xtx

    def release_lock(self, chain_id, address, xtx: str) -> None:
        contract = self._contract(self.chain(chain_id), address)
        if contract.lock == xtx:
            contract.lock = None

    def held_locks(self) -> list[tuple[str, str, str]]:
        return [
            (cid, addr, c.lock)
            for cid, chain in sorted(self.chains.items())
            for addr, c in sorted(chain.contracts.items())
            if c.lock is not None
        ]

    # -- integrity, conservation, export --

    def verify_chain(self, chain_id: str) -> bool:
        chain = self.chain(chain_id)
        prev = GENESIS_PREV
        for i, record in enumerate(chain.log):
            if record["index"] != i or record["prev"] != prev:
                raise BadSignature(f"broken hash chain at {chain_id}[{i}]")
            if record["author"] not in chain.members:
                raise NotAMember(f"non-member author at {chain_id}[{i}]")
            head = {"index": i, "prev": prev, "body": record["body"]}
            if not self.keyring.verify(record["author"], head, record["signature"]):
                raise BadSignature(f"bad signature at {chain_id}[{i}]")
            stripped = {k: v for k, v in record.items() if k != "digest"}
            if digest_hex(stripped) != record["digest"]:
                raise BadSignature(f"digest mismatch at {chain_id}[{i}]")
            prev = record["digest"]
        return True

    def total_balance(self) -> int:
        return sum(
            sum(chain.balances.values()) for chain in self.chains.values()
        )

    def export_chain(self, chain_id: str) -> list[dict]:
        return [dict(r) for r in self.chain(chain_id).log]

    def export_chain_jsonl(self, chain_id: str) -> str:
        lines = [canonical(r).decode() for r in self.export_chain(chain_id)]
        return "\n".join(lines) + ("\n" if lines else "")

    def export(self) -> dict:
        """Full world snapshot: logs, balances, contract storage.  Locks are
        deliberately absent — they are transient coordination state."""
        return {
            "chains": {
                cid: {
                    "members": list(chain.members),
                    "balances": {k: chain.balances[k] for k in sorted(chain.balances)},
                    "groups": {
                        gid: list(g.members) for gid, g in sorted(chain.groups.items())
                    },
                    "contracts": {
                        addr: {
                            "kind": c.kind,
                            "owner": c.owner,
                            "privacy_group": c.privacy_group,
                            "storage": c.storage,
                        }
                        for addr, c in sorted(chain.contracts.items())
                    },
                    "log": self.export_chain(cid),
                }
                for cid, chain in sorted(self.chains.items())
            }
        }

    def export_bytes(self) -> bytes:
        return canonical(self.export())


# --- native contract logic -------------------------------------------------

def _dispatch_call(world, chain, contract, caller, method, args) -> None:
    if contract.kind == SUPPLY_CONTRACT:
        _supply_call(world, contract, caller, method, args)
    elif contract.kind == FINANCE_CONTRACT:
        _finance_call(world, contract, caller, method, args)
    else:
        raise ValueError(f"unknown contract kind {contract.kind!r}")


def _supply_call(world, contract, caller, method, args) -> None:
    if method == "upload_agreement":
        # drafts with partial signatures are legal; countersignature is
        # checked by whoever consumes the agreement
        contract.storage["agreement"] = args["agreement"]
    elif method == "grant_read":
        grants = contract.storage.setdefault("grants", [])
        grant = {"reader": args["reader"], "key": args["key"]}
        if grant not in grants:
            grants.append(grant)
    else:
        raise ValueError(f"unknown supply-contract method {method!r}")


def _finance_call(world, contract, caller, method, args) -> None:
    if method == "register_request":
        contract.storage["request"] = args["request"]
    elif method == "validate_request":
        violations = check_request_against_agreement(args["agreement"], args["request"])
        if not is_countersigned(world.keyring, SupplyAgreement.from_dict(args["agreement"])):
            violations = ["NotCountersigned"] + violations
        if violations:
            # raise before touching storage: a rejected tx leaves no trace
            raise ValidationFailed(", ".join(violations))
        contract.storage["validation"] = {
            "request": args["request"],
            "violations": violations,
        }
    elif method == "book_loan":
        if args["decision"] != "Fund":
            # declined funding aborts the enclosing crosschain transaction
            raise FundingDeclined(f"decision was {args['decision']}")
        loans = contract.storage.setdefault("loans", [])
        loans.append(
            {
                "supplier": args["supplier"],
                "requested": int(args["requested"]),
                "funded": int(args["funded"]),
                "decision": args["decision"],
            }
        )
    else:
        raise ValueError(f"unknown finance-contract method {method!r}")

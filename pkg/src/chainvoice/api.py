"""HTTP gateway over one simulated world.

Every response carries a monotonically increasing world-version; mutations
(request runs, fault arming) are serialized through a single lock so
concurrent clients observe one linear history.  Identity is a signed party
token: HMAC of the party name under a key derived from the world seed,
issued at session bootstrap via GET /v1/parties.  That is simulation-grade
authentication; the point is that the log and read endpoints enforce
exactly the ledger's confidentiality rule, returning 403 where the ledger
raises a privacy error.
"""

from __future__ import annotations

import hashlib
import hmac
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .bn import Network, query
from .bn.oobn import OobnClass
from .bootstrap import DEFAULT_SEED, bootstrap_world, default_config, party_tier
from .errors import (
    ChainvoiceError,
    ImpossibleEvidence,
    NotAMember,
    NotCountersigned,
    PrivacyViolation,
    UnknownChain,
    UnknownNode,
    UnknownState,
    ValidationFailed,
)
from .finance.networks import DECISION, PERCEPTION_OF_RISK, STABILITY
from .finance.scenarios import scenarios_to_doc
from .finance.store import (
    INCENTIVE_FILE,
    OVERALL_FILE,
    SUPPLIER_FILE,
    load_model_class,
    load_overall_network,
    load_scenarios,
)
from .flow import (
    DEFAULT_THRESHOLD,
    DO_NOT_FUND,
    FUND,
    STEP_TITLES,
    FinancingRequest,
    default_request,
    run_financing_sequence,
)
from .ledger import World

DEFAULT_TARGETS = (PERCEPTION_OF_RISK, DECISION, STABILITY)

FAULT_POINTS = frozenset(
    {"lock", "stage", "commit"} | {f"step-{i}" for i in range(1, 13)}
)

MODEL_FILES = {
    "supplier_profile": SUPPLIER_FILE,
    "financial_incentive": INCENTIVE_FILE,
    "overall": OVERALL_FILE,
}


# --- party tokens -----------------------------------------------------------

def _token_key(seed: str) -> bytes:
    return hashlib.sha256(f"{seed}:party-token".encode()).digest()


def party_token(seed: str, party: str) -> str:
    return hmac.new(_token_key(seed), party.encode(), hashlib.sha256).hexdigest()[:32]


def verify_party_token(seed: str, party: str, token: str) -> bool:
    return hmac.compare_digest(party_token(seed, party), token)


# --- application state ------------------------------------------------------

@dataclass
class AppState:
    seed: str
    world: World
    network: Network
    world_config: dict | None
    frontend_dir: Path | None
    version: int = 0
    armed_fault: str | None = None
    history: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    _tmp: tempfile.TemporaryDirectory | None = None
    journal_path: Path | None = None

    def __post_init__(self):
        if self.journal_path is None:
            self._tmp = tempfile.TemporaryDirectory(prefix="chainvoice-api-")
            self.journal_path = Path(self._tmp.name) / "journal.jsonl"


# --- request bodies ---------------------------------------------------------

class QueryBody(BaseModel):
    evidence: dict[str, str] = Field(default_factory=dict)
    target: str | None = None
    targets: list[str] | None = None


class RequestBody(BaseModel):
    request: dict | None = None
    fixtures: dict | None = None
    expected_version: int | None = None
    decision: str | None = None      # financier override: Fund | DoNotFund
    threshold: float | None = None


class FaultBody(BaseModel):
    point: str | None = None         # None disarms


# --- helpers ----------------------------------------------------------------

def _state(request: Request) -> AppState:
    return request.app.state.cv


def _identity(request: Request) -> str | None:
    """Authenticated party from headers, None when anonymous."""
    st = _state(request)
    party = request.headers.get("x-party")
    token = request.headers.get("x-party-token")
    if party is None and token is None:
        return None
    if party is None or token is None:
        raise HTTPException(
            status_code=400,
            detail="identity requires both X-Party and X-Party-Token headers",
        )
    if not verify_party_token(st.seed, party, token):
        raise HTTPException(status_code=403, detail=f"invalid token for {party!r}")
    return party


def _require_identity(request: Request) -> str:
    party = _identity(request)
    if party is None:
        raise HTTPException(
            status_code=400,
            detail="this endpoint requires X-Party and X-Party-Token headers",
        )
    return party


def _resolve_node(node_ids: tuple[str, ...], name: str) -> str:
    """Accept unqualified node names when the suffix match is unique."""
    if name in node_ids:
        return name
    matches = [i for i in node_ids if i.endswith("." + name)]
    if len(matches) == 1:
        return matches[0]
    if len(matches) > 1:
        raise HTTPException(
            status_code=400,
            detail=f"ambiguous node name {name!r}: {', '.join(sorted(matches))}",
        )
    return name                      # unknown: let the engine's error surface


def _model_doc(name: str, cls: OobnClass) -> dict:
    return {
        "name": name,
        "inputs": list(cls.inputs),
        "outputs": list(cls.outputs),
        "nodes": [
            {"id": n.id, "states": list(n.states), "parents": list(n.parents)}
            for n in cls.spec.nodes
        ],
    }


def _world_parties(world: World, config: dict | None) -> list[str]:
    """Chain members plus tier-mapped outsiders (parties with no membership)."""
    parties: set[str] = set()
    for chain in world.chains.values():
        parties.update(chain.members)
    parties.update((config or default_config()).get("tiers", {}))
    return sorted(parties)


# --- app factory ------------------------------------------------------------

def create_app(
    seed: str = DEFAULT_SEED,
    *,
    world_config: dict | None = None,
    data_dir: str | Path | None = None,
    frontend_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="chainvoice", version="0.1.0", docs_url=None, redoc_url=None)
    app.state.cv = AppState(
        seed=seed,
        world=bootstrap_world(seed, world_config),
        network=load_overall_network(data_dir),
        world_config=world_config,
        frontend_dir=Path(frontend_dir) if frontend_dir else None,
    )
    scenarios_doc = scenarios_to_doc(load_scenarios(data_dir))
    models_doc = [
        _model_doc(name, load_model_class(fn, data_dir))
        for name, fn in MODEL_FILES.items()
    ]

    @app.exception_handler(RequestValidationError)
    def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"detail": "malformed request", "errors": str(exc)},
        )

    @app.get("/v1/models")
    def get_models(request: Request):
        st = _state(request)
        return {"models": models_doc, "world_version": st.version}

    @app.post("/v1/query")
    def post_query(request: Request, body: QueryBody):
        st = _state(request)
        if body.target is not None and body.targets is not None:
            raise HTTPException(
                status_code=400, detail="give either target or targets, not both"
            )
        targets = (
            [body.target] if body.target is not None
            else body.targets if body.targets is not None
            else list(DEFAULT_TARGETS)
        )
        ids = st.network.node_ids
        targets = [_resolve_node(ids, t) for t in targets]
        evidence = {_resolve_node(ids, n): s for n, s in body.evidence.items()}
        try:
            posteriors = {
                t: query(st.network, evidence, t).distribution for t in targets
            }
        except UnknownNode as e:
            raise HTTPException(status_code=400, detail=f"unknown node: {e}")
        except UnknownState as e:
            raise HTTPException(status_code=400, detail=f"unknown state: {e}")
        except ImpossibleEvidence as e:
            raise HTTPException(status_code=400, detail=f"impossible evidence: {e}")
        return {
            "evidence": evidence,        # canonical node ids after resolution
            "posteriors": posteriors,
            "world_version": st.version,
        }

    @app.get("/v1/scenarios")
    def get_scenarios(request: Request):
        st = _state(request)
        return {**scenarios_doc, "world_version": st.version}

    @app.get("/v1/parties")
    def get_parties(request: Request):
        """Session bootstrap: every party's token.  Simulation-grade auth."""
        st = _state(request)
        return {
            "parties": [
                {
                    "party": p,
                    "token": party_token(st.seed, p),
                    "tier": party_tier(p, st.world_config),
                }
                for p in _world_parties(st.world, st.world_config)
            ],
            "world_version": st.version,
        }

    @app.get("/v1/chains")
    def get_chains(request: Request):
        st = _state(request)
        party = _identity(request)
        with st.lock:
            chains = []
            for cid in sorted(st.world.chains):
                chain = st.world.chains[cid]
                doc: dict = {
                    "id": cid,
                    "members": list(chain.members),
                    "records": len(chain.log),
                }
                if party in chain.members:
                    doc["balances"] = dict(chain.balances)
                chains.append(doc)
            return {"chains": chains, "world_version": st.version}

    @app.get("/v1/chains/{chain_id}/log")
    def get_chain_log(request: Request, chain_id: str):
        st = _state(request)
        party = _require_identity(request)
        with st.lock:
            try:
                log = st.world.log_view(chain_id, party)
            except UnknownChain:
                raise HTTPException(
                    status_code=404, detail=f"no such chain: {chain_id}"
                )
            except (NotAMember, PrivacyViolation) as e:
                raise HTTPException(status_code=403, detail=str(e))
            return {
                "chain": chain_id,
                "viewer": party,
                "log": log,
                "world_version": st.version,
            }

    @app.get("/v1/requests")
    def get_requests(request: Request):
        st = _state(request)
        with st.lock:
            return {
                "pending": default_request().to_dict(),
                "step_titles": list(STEP_TITLES),
                "history": list(st.history),
                "world_version": st.version,
            }

    @app.post("/v1/requests")
    def post_request(request: Request, body: RequestBody):
        st = _state(request)
        if body.decision is not None and body.decision not in (FUND, DO_NOT_FUND):
            raise HTTPException(
                status_code=400, detail=f"unknown decision {body.decision!r}"
            )
        if body.decision is not None and body.threshold is not None:
            raise HTTPException(
                status_code=400, detail="give either decision or threshold, not both"
            )
        try:
            fin_request = (
                FinancingRequest.from_dict(body.request)
                if body.request is not None
                else None
            )
        except (KeyError, TypeError, ValueError) as e:
            raise HTTPException(status_code=400, detail=f"bad request document: {e}")

        # The override stands in for the financier's judgement: force the
        # decision while still reporting the model's P(Fund) honestly.
        threshold = DEFAULT_THRESHOLD
        if body.threshold is not None:
            threshold = body.threshold
        elif body.decision == FUND:
            threshold = -1.0
        elif body.decision == DO_NOT_FUND:
            threshold = 2.0

        with st.lock:
            if body.expected_version is not None and body.expected_version != st.version:
                return JSONResponse(
                    status_code=409,
                    content={
                        "detail": (
                            f"stale submission: expected world version "
                            f"{body.expected_version}, current is {st.version}"
                        ),
                        "world_version": st.version,
                    },
                )
            fault, st.armed_fault = st.armed_fault, None
            try:
                outcome = run_financing_sequence(
                    st.world,
                    fin_request,
                    body.fixtures,
                    fault,
                    network=st.network,
                    world_config=st.world_config,
                    journal_path=st.journal_path,
                    threshold=threshold,
                )
            except (ValidationFailed, NotCountersigned, ValueError) as e:
                raise HTTPException(
                    status_code=400, detail=f"request rejected: {e}"
                )
            except (PrivacyViolation,) as e:
                raise HTTPException(status_code=403, detail=str(e))
            except ChainvoiceError as e:
                raise HTTPException(
                    status_code=500, detail=f"{type(e).__name__}: {e}"
                )
            st.version += 1
            entry = {"world_version": st.version, "outcome": outcome.to_dict()}
            st.history.append(entry)
            return entry

    @app.get("/v1/faults")
    def get_faults(request: Request):
        st = _state(request)
        return {"armed": st.armed_fault, "world_version": st.version}

    @app.post("/v1/faults")
    def post_fault(request: Request, body: FaultBody):
        st = _state(request)
        if body.point is not None and body.point not in FAULT_POINTS:
            raise HTTPException(
                status_code=400,
                detail=f"unknown fault point {body.point!r}; "
                f"expected lock, stage, commit, or step-1..step-12",
            )
        with st.lock:
            st.armed_fault = body.point
            return {"armed": st.armed_fault, "world_version": st.version}

    if app.state.cv.frontend_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount(
            "/",
            StaticFiles(directory=app.state.cv.frontend_dir, html=True),
            name="console",
        )
    else:

        @app.get("/")
        def index(request: Request):
            st = _state(request)
            return {
                "service": "chainvoice",
                "endpoints": [
                    "/v1/models",
                    "/v1/query",
                    "/v1/scenarios",
                    "/v1/parties",
                    "/v1/chains",
                    "/v1/chains/{id}/log",
                    "/v1/requests",
                    "/v1/faults",
                ],
                "world_version": st.version,
            }

    return app

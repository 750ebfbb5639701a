"""The simulated world: parties of the egg-to-retailer supply chain and
the private blockchains that connect adjacent tiers.

Chain T3Fin links the supplier seeking finance to the financier, Fin is
the financier's own book, and Cert belongs to the certification
authority.  FarmerEric participates in no chain at all, which makes him
the canonical outsider for privacy checks.
"""

from __future__ import annotations

import json
from importlib import resources

from .ledger import World

GOLDEN_WAIT_A_LOT = "GoldenWaitALot"
MANUFACTURER_MARK = "ManufacturerMark"
REGINALDS_PRODUCE = "ReginaldsProduce"
SANJEETAS_SPICES = "SanjeetasSpices"
FARMER_FRAN = "FarmerFran"
FARMER_OLIVIER = "FarmerOlivier"
FARMER_LUCY = "FarmerLucy"
FARMER_TOM = "FarmerTom"
FARMER_ERIC = "FarmerEric"
FINANCIER_ILZE = "FinancierIlze"
CERT_AUTHORITY = "CertAuthority"

PARTIES = (
    GOLDEN_WAIT_A_LOT,
    MANUFACTURER_MARK,
    REGINALDS_PRODUCE,
    SANJEETAS_SPICES,
    FARMER_FRAN,
    FARMER_OLIVIER,
    FARMER_LUCY,
    FARMER_TOM,
    FARMER_ERIC,
    FINANCIER_ILZE,
    CERT_AUTHORITY,
)

T0T1 = "T0T1"
T1T2 = "T1T2"
T2T3 = "T2T3"
T3FIN = "T3Fin"
T3T3 = "T3T3"
FIN = "Fin"
CERT = "Cert"

DEFAULT_SEED = "chainvoice"


def default_config() -> dict:
    text = resources.files("chainvoice.data").joinpath("world.json").read_text()
    return json.loads(text)


def bootstrap_world(seed: str = DEFAULT_SEED, config: dict | None = None) -> World:
    """Create every configured chain with its members and genesis balances.

    Chains are created in sorted id order so that equal seeds yield
    byte-identical exports.
    """
    if config is None:
        config = default_config()
    world = World(seed=seed)
    for chain_id in sorted(config["chains"]):
        entry = config["chains"][chain_id]
        world.create_chain(
            chain_id,
            entry["members"],
            genesis_balances=entry.get("genesis"),
        )
    return world


def party_tier(party: str, config: dict | None = None) -> int | None:
    """Supply-chain tier from world config; None for untiered parties
    such as the financier and the certification authority."""
    if config is None:
        config = default_config()
    tier = config.get("tiers", {}).get(party)
    return None if tier is None else int(tier)

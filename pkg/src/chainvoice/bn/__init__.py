from .core import (
    Cpt,
    Evidence,
    Network,
    NetworkSpec,
    NodeSpec,
    Posterior,
    build_network,
    query,
)
from .joint import enumerate_joint
from .netio import load_network, network_from_dict, network_to_dict, save_network
from .oobn import MasterSpec, OobnClass, flatten, load_master, master_from_dict

__all__ = [
    "Cpt",
    "Evidence",
    "Network",
    "NetworkSpec",
    "NodeSpec",
    "Posterior",
    "build_network",
    "query",
    "enumerate_joint",
    "load_network",
    "save_network",
    "network_from_dict",
    "network_to_dict",
    "OobnClass",
    "MasterSpec",
    "flatten",
    "load_master",
    "master_from_dict",
]

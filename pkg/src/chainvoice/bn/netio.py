"""Network file format.

One JSON document per network:

    {"name": ..., "nodes": [{"id", "label", "states": [...],
                             "parents": [...], "cpt": [[...], ...]}, ...]}

CPT rows are ordered by lexicographic parent-state index with the
first-listed parent most significant.  The fitting tool and the gateway
both read and write this format.
"""

from __future__ import annotations

import json
from pathlib import Path

from .core import NetworkSpec, NodeSpec


def network_to_dict(spec: NetworkSpec) -> dict:
    return {
        "name": spec.name,
        "nodes": [
            {
                "id": n.id,
                "label": n.label,
                "states": list(n.states),
                "parents": list(n.parents),
                "cpt": [list(row) for row in n.cpt],
            }
            for n in spec.nodes
        ],
    }


def network_from_dict(doc: dict) -> NetworkSpec:
    nodes = tuple(
        NodeSpec.make(
            id=n["id"],
            states=n["states"],
            cpt=n["cpt"],
            parents=n.get("parents", ()),
            label=n.get("label", ""),
        )
        for n in doc["nodes"]
    )
    return NetworkSpec(nodes=nodes, name=doc.get("name", ""))


def save_network(spec: NetworkSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(spec), indent=2) + "\n")


def load_network(path: str | Path) -> NetworkSpec:
    return network_from_dict(json.loads(Path(path).read_text()))

"""Object-oriented network composition by compile-time flattening.

A class network exposes interface nodes: inputs (roots usable as evidence
entry points) and outputs (internal nodes other networks may bind to).
A master network instantiates classes under instance names and may use a
bound output ``instance.node`` as a parent of its own nodes.  Flattening
inlines every instance, namespacing node ids with the instance name and a
reserved ``.`` separator; bound outputs are shared by reference, never
duplicated, so evidence entered on a sub-network node flows through to the
master exactly as it would standalone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import BindingToNonOutput, CycleAfterFlatten, CycleDetected, UnknownNode
from .core import NetworkSpec, NodeSpec, build_network
from .netio import network_from_dict, network_to_dict

SEP = "."


@dataclass(frozen=True)
class OobnClass:
    spec: NetworkSpec
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()

    def validate(self) -> None:
        ids = {n.id for n in self.spec.nodes}
        by_id = {n.id: n for n in self.spec.nodes}
        for nid in self.inputs + self.outputs:
            if nid not in ids:
                raise UnknownNode(f"interface node {nid!r} not in class spec")
        for nid in self.inputs:
            if by_id[nid].parents:
                raise BindingToNonOutput(
                    f"input node {nid!r} must have no parents inside its class"
                )


@dataclass(frozen=True)
class MasterSpec:
    instances: dict[str, OobnClass]
    nodes: tuple[NodeSpec, ...]
    bindings: tuple[tuple[str, str], ...] = ()  # (instance.output, master node id)
    name: str = ""


def _split_ref(ref: str) -> tuple[str, str]:
    inst, _, node = ref.partition(SEP)
    return inst, node


def flatten(master: MasterSpec) -> NetworkSpec:
    """Inline every instance into a single flat NetworkSpec.

    Instance nodes are renamed ``instance.node``; master nodes keep their
    bare ids.  Raises on duplicate instance names (the dataclass dict cannot
    hold them, but file loading can see them), bindings to non-output nodes,
    or a cycle in the combined graph.
    """
    for name, cls in master.instances.items():
        if SEP in name:
            raise UnknownNode(f"instance name {name!r} contains {SEP!r}")
        cls.validate()

    declared_outputs = set()
    for name, cls in master.instances.items():
        for out in cls.outputs:
            declared_outputs.add(f"{name}{SEP}{out}")

    master_ids = {n.id for n in master.nodes}
    for src, dst in master.bindings:
        if src not in declared_outputs:
            raise BindingToNonOutput(
                f"binding source {src!r} is not a declared instance output"
            )
        if dst not in master_ids:
            raise UnknownNode(f"binding target {dst!r} is not a master node")

    nodes: list[NodeSpec] = []
    for name, cls in master.instances.items():
        for n in cls.spec.nodes:
            nodes.append(
                NodeSpec(
                    id=f"{name}{SEP}{n.id}",
                    states=n.states,
                    cpt=n.cpt,
                    parents=tuple(f"{name}{SEP}{p}" for p in n.parents),
                    label=n.label,
                )
            )

    bound = {src for src, _ in master.bindings}
    for n in master.nodes:
        for p in n.parents:
            # a dotted parent whose prefix names an instance must be bound;
            # any other id is an ordinary master node reference
            if SEP in p and p not in bound:
                inst, _ = _split_ref(p)
                if inst in master.instances:
                    raise BindingToNonOutput(
                        f"master node {n.id!r} uses {p!r} as parent without a binding"
                    )
        nodes.append(n)

    flat = NetworkSpec(nodes=tuple(nodes), name=master.name or "flattened")
    try:
        build_network(flat)
    except CycleDetected as exc:
        raise CycleAfterFlatten(str(exc)) from exc
    return flat


# --- master file format -------------------------------------------------

def oobn_class_to_dict(cls: OobnClass) -> dict:
    doc = network_to_dict(cls.spec)
    doc["interface"] = {"inputs": list(cls.inputs), "outputs": list(cls.outputs)}
    return doc


def oobn_class_from_dict(doc: dict) -> OobnClass:
    interface = doc.get("interface", {})
    cls = OobnClass(
        spec=network_from_dict(doc),
        inputs=tuple(interface.get("inputs", ())),
        outputs=tuple(interface.get("outputs", ())),
    )
    cls.validate()
    return cls


def master_to_dict(master: MasterSpec) -> dict:
    return {
        "name": master.name,
        "instances": {
            name: oobn_class_to_dict(cls) for name, cls in master.instances.items()
        },
        "bindings": [{"from": src, "to": dst} for src, dst in master.bindings],
        "nodes": network_to_dict(NetworkSpec(nodes=master.nodes))["nodes"],
    }


def master_from_dict(doc: dict, base_dir: str | Path | None = None) -> MasterSpec:
    """Parse a master document; instance values may be inline dicts or
    relative paths to class files (resolved against ``base_dir``).

    ``instances`` is a name-to-class object, or a list of
    ``{"name": ..., "class": ...}`` entries when order matters; the list
    form rejects repeated names (JSON objects cannot represent them).
    """
    from ..errors import DuplicateInstanceName

    raw = doc.get("instances", {})
    if isinstance(raw, dict):
        pairs = list(raw.items())
    else:
        pairs = [(entry["name"], entry["class"]) for entry in raw]

    instances: dict[str, OobnClass] = {}
    for name, value in pairs:
        if name in instances:
            raise DuplicateInstanceName(name)
        if isinstance(value, str):
            path = Path(base_dir or ".") / value
            value = json.loads(path.read_text())
        instances[name] = oobn_class_from_dict(value)
    nodes = network_from_dict({"nodes": doc.get("nodes", [])}).nodes
    bindings = tuple((b["from"], b["to"]) for b in doc.get("bindings", ()))
    return MasterSpec(
        instances=instances,
        nodes=nodes,
        bindings=bindings,
        name=doc.get("name", ""),
    )


def load_master(path: str | Path) -> MasterSpec:
    p = Path(path)
    return master_from_dict(json.loads(p.read_text()), base_dir=p.parent)

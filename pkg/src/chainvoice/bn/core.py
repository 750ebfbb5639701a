"""Discrete Bayesian networks with exact inference by variable elimination.

A network is a DAG of nodes, each carrying a conditional probability table
over its own states, one row per combination of parent states.  Hard evidence
is applied by slicing factors; the posterior over a single target node is
obtained by summing out every other unobserved variable in ascending
topological rank, which keeps the elimination (and hence every intermediate
factor) reproducible between runs and independent of node declaration order.

Networks are immutable after :func:`build_network`; queries are pure
functions, so a built network may be shared freely between threads.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    CptRowNotNormalized,
    CptShapeMismatch,
    CycleDetected,
    ImpossibleEvidence,
    UnknownNode,
    UnknownState,
)

ROW_SUM_TOL = 1e-9

# A CPT is a list of rows, one per combination of parent states ordered by
# lexicographic parent-state index (first-listed parent most significant),
# each row a distribution over the node's own states.
Cpt = tuple[tuple[float, ...], ...]

# Hard findings only: node id -> observed state name.
Evidence = dict[str, str]


@dataclass(frozen=True)
class NodeSpec:
    id: str
    states: tuple[str, ...]
    cpt: Cpt
    parents: tuple[str, ...] = ()
    label: str = ""

    @staticmethod
    def make(id, states, cpt, parents=(), label=""):
        """Build a NodeSpec from plain lists (convenience for literals)."""
        return NodeSpec(
            id=id,
            states=tuple(states),
            cpt=tuple(tuple(float(p) for p in row) for row in cpt),
            parents=tuple(parents),
            label=label or id,
        )


@dataclass(frozen=True)
class NetworkSpec:
    nodes: tuple[NodeSpec, ...]
    name: str = ""

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return tuple((p, n.id) for n in self.nodes for p in n.parents)


@dataclass(frozen=True)
class Posterior:
    node: str
    distribution: dict[str, float]

    def __getitem__(self, state: str) -> float:
        return self.distribution[state]


@dataclass(frozen=True)
class Network:
    """Validated network with precomputed topological order and factor tables."""

    spec: NetworkSpec
    order: tuple[str, ...]                      # deterministic topological order
    rank: dict[str, int] = field(repr=False)
    nodes: dict[str, NodeSpec] = field(repr=False)
    tables: dict[str, np.ndarray] = field(repr=False)  # shape (*parent cards, own card)

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.spec.nodes)

    def states_of(self, node_id: str) -> tuple[str, ...]:
        try:
            return self.nodes[node_id].states
        except KeyError:
            raise UnknownNode(f"unknown node {node_id!r}") from None

    def state_index(self, node_id: str, state: str) -> int:
        states = self.states_of(node_id)
        try:
            return states.index(state)
        except ValueError:
            raise UnknownState(
                f"node {node_id!r} has no state {state!r} (states: {list(states)})"
            ) from None


def _topological_order(spec: NetworkSpec) -> tuple[str, ...]:
    """Kahn's algorithm with a min-heap on node id.

    Tie-breaking by id makes the order a function of the graph alone, so
    permuting the node declaration list cannot change elimination order.
    """
    ids = [n.id for n in spec.nodes]
    indegree = {n.id: len(n.parents) for n in spec.nodes}
    children: dict[str, list[str]] = {i: [] for i in ids}
    for n in spec.nodes:
        for p in n.parents:
            children[p].append(n.id)
    ready = [i for i, d in indegree.items() if d == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        nid = heapq.heappop(ready)
        order.append(nid)
        for c in children[nid]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(ready, c)
    if len(order) != len(ids):
        stuck = sorted(i for i, d in indegree.items() if d > 0)
        raise CycleDetected(f"edge set contains a cycle through {stuck}")
    return tuple(order)


def build_network(spec: NetworkSpec) -> Network:
    """Validate a spec and compile it for inference.

    Checks: unique node ids, edge endpoints exist, acyclicity, CPT shape
    (rows == product of parent cardinalities, columns == own cardinality),
    entries within [0, 1], and every row normalized within ``ROW_SUM_TOL``.
    Normalization failures are reported, never silently repaired.
    """
    seen: set[str] = set()
    for n in spec.nodes:
        if n.id in seen:
            raise UnknownNode(f"duplicate node id {n.id!r}")
        seen.add(n.id)
        if len(n.states) < 2:
            raise CptShapeMismatch(f"node {n.id!r} needs at least 2 states")
        if len(set(n.states)) != len(n.states):
            raise CptShapeMismatch(f"node {n.id!r} has duplicate state names")

    by_id = {n.id: n for n in spec.nodes}
    for n in spec.nodes:
        for p in n.parents:
            if p not in by_id:
                raise UnknownNode(f"node {n.id!r} references missing parent {p!r}")

    order = _topological_order(spec)

    tables: dict[str, np.ndarray] = {}
    for n in spec.nodes:
        parent_cards = tuple(len(by_id[p].states) for p in n.parents)
        expected_rows = math.prod(parent_cards) if parent_cards else 1
        if len(n.cpt) != expected_rows:
            raise CptShapeMismatch(
                f"node {n.id!r}: CPT has {len(n.cpt)} rows, expected {expected_rows}"
            )
        for r, row in enumerate(n.cpt):
            if len(row) != len(n.states):
                raise CptShapeMismatch(
                    f"node {n.id!r} row {r}: {len(row)} entries, expected {len(n.states)}"
                )
            if any(p < 0.0 or p > 1.0 for p in row):
                raise CptRowNotNormalized(
                    f"node {n.id!r} row {r}: entries outside [0, 1]"
                )
            s = math.fsum(row)
            if abs(s - 1.0) > ROW_SUM_TOL:
                raise CptRowNotNormalized(
                    f"node {n.id!r} row {r}: sums to {s!r}, not 1"
                )
        arr = np.asarray(n.cpt, dtype=np.float64)
        tables[n.id] = arr.reshape(parent_cards + (len(n.states),))

    rank = {nid: i for i, nid in enumerate(order)}
    return Network(spec=spec, order=order, rank=rank, nodes=by_id, tables=tables)


class _Factor:
    """Dense factor over an ordered tuple of variable ids."""

    __slots__ = ("vars", "table")

    def __init__(self, vars: tuple[str, ...], table: np.ndarray):
        self.vars = vars
        self.table = table

    def reduce(self, var: str, index: int) -> "_Factor":
        ax = self.vars.index(var)
        return _Factor(
            self.vars[:ax] + self.vars[ax + 1:],
            np.take(self.table, index, axis=ax),
        )

    def multiply(self, other: "_Factor") -> "_Factor":
        merged = self.vars + tuple(v for v in other.vars if v not in self.vars)
        a = np.asarray(self.table).reshape(
            self.table.shape + (1,) * (len(merged) - len(self.vars))
        )
        src_axes = [other.vars.index(v) for v in merged if v in other.vars]
        shape = [
            other.table.shape[other.vars.index(v)] if v in other.vars else 1
            for v in merged
        ]
        b = np.transpose(np.asarray(other.table), src_axes).reshape(shape)
        return _Factor(merged, a * b)

    def sum_out(self, var: str) -> "_Factor":
        ax = self.vars.index(var)
        return _Factor(
            self.vars[:ax] + self.vars[ax + 1:],
            self.table.sum(axis=ax),
        )


def _validate_evidence(net: Network, ev: Evidence) -> dict[str, int]:
    return {nid: net.state_index(nid, state) for nid, state in ev.items()}


def query(net: Network, ev: Evidence, target: str) -> Posterior:
    """Exact posterior P(target | evidence) by variable elimination.

    Hidden variables are summed out in ascending topological rank.  The
    normalizing constant doubles as the evidence-consistency check: zero
    probability mass raises :class:`ImpossibleEvidence` rather than
    returning a NaN posterior.
    """
    if target not in net.nodes:
        raise UnknownNode(f"unknown node {target!r}")
    ev_idx = _validate_evidence(net, ev)

    factors: list[_Factor] = []
    for nid in net.order:
        node = net.nodes[nid]
        f = _Factor(node.parents + (nid,), net.tables[nid])
        for var in f.vars:
            if var in ev_idx:
                f = f.reduce(var, ev_idx[var])
        factors.append(f)

    hidden = [
        nid for nid in net.order
        if nid != target and nid not in ev_idx
    ]
    for var in hidden:
        involved = [f for f in factors if var in f.vars]
        if not involved:
            continue
        prod = involved[0]
        for f in involved[1:]:
            prod = prod.multiply(f)
        prod = prod.sum_out(var)
        factors = [f for f in factors if var not in f.vars]
        factors.append(prod)

    # Remaining factor scopes are {} or {target}; fold them together.
    result = _Factor((), np.array(1.0))
    for f in factors:
        result = result.multiply(f)

    z = float(np.sum(result.table))
    if z <= 0.0:
        raise ImpossibleEvidence(f"evidence {ev!r} has zero probability")

    states = net.states_of(target)
    if target in ev_idx:
        dist = {s: (1.0 if i == ev_idx[target] else 0.0) for i, s in enumerate(states)}
        return Posterior(node=target, distribution=dist)

    probs = np.asarray(result.table, dtype=np.float64).reshape(len(states)) / z
    return Posterior(node=target, distribution={s: float(p) for s, p in zip(states, probs)})

"""Brute-force posterior computation by materializing the full joint.

Kept deliberately separate from the elimination engine: this module builds
the complete joint distribution over all nodes and answers queries by
slicing and summing it, which makes it a slow but independent oracle for
equivalence testing.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ImpossibleEvidence, StateSpaceTooLarge, UnknownNode
from .core import Evidence, Network, Posterior

MAX_JOINT_STATES = 2 ** 20


def _full_joint(net: Network) -> np.ndarray:
    """Joint P(all nodes) as one dense array, axes in topological order."""
    cards = [len(net.states_of(nid)) for nid in net.order]
    total = math.prod(cards)
    if total > MAX_JOINT_STATES:
        raise StateSpaceTooLarge(
            f"joint has {total} states, cap is {MAX_JOINT_STATES}"
        )
    axis = {nid: i for i, nid in enumerate(net.order)}
    joint = np.ones(cards, dtype=np.float64)
    for nid in net.order:
        node = net.nodes[nid]
        axes = [axis[p] for p in node.parents] + [axis[nid]]
        table = np.transpose(net.tables[nid], np.argsort(axes))
        # place the table's dimensions on its own axes, size 1 elsewhere
        shape = [cards[i] if i in axes else 1 for i in range(len(cards))]
        joint *= table.reshape(shape)
    return joint


def enumerate_joint(net: Network, ev: Evidence, target: str) -> Posterior:
    """Posterior P(target | evidence) by summing the full joint.

    Same contract as :func:`chainvoice.bn.core.query`, different algorithm.
    """
    if target not in net.nodes:
        raise UnknownNode(f"unknown node {target!r}")
    ev_idx = {nid: net.state_index(nid, state) for nid, state in ev.items()}

    joint = _full_joint(net)
    axis = {nid: i for i, nid in enumerate(net.order)}

    index: list = [slice(None)] * len(net.order)
    for nid, i in ev_idx.items():
        index[axis[nid]] = i
    sliced = joint[tuple(index)]

    remaining = [nid for nid in net.order if nid not in ev_idx]
    if target in ev_idx:
        z = float(sliced.sum())
        if z <= 0.0:
            raise ImpossibleEvidence(f"evidence {ev!r} has zero probability")
        states = net.states_of(target)
        dist = {s: (1.0 if i == ev_idx[target] else 0.0) for i, s in enumerate(states)}
        return Posterior(node=target, distribution=dist)

    target_pos = remaining.index(target)
    other_axes = tuple(i for i in range(len(remaining)) if i != target_pos)
    marginal = sliced.sum(axis=other_axes) if other_axes else sliced
    z = float(marginal.sum())
    if z <= 0.0:
        raise ImpossibleEvidence(f"evidence {ev!r} has zero probability")
    states = net.states_of(target)
    return Posterior(
        node=target,
        distribution={s: float(p) for s, p in zip(states, marginal / z)},
    )

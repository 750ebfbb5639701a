"""Inference engine tests.

The dual-route check is the backbone here: every posterior produced by
variable elimination is compared against full-joint enumeration, which is
an independent algorithm over the same semantics.  Fixed nets pin
hand-derived values; hypothesis covers random shapes.
"""

from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainvoice.bn import (
    NetworkSpec,
    NodeSpec,
    build_network,
    enumerate_joint,
    load_network,
    network_from_dict,
    network_to_dict,
    query,
    save_network,
)
from chainvoice.errors import (
    CptRowNotNormalized,
    CptShapeMismatch,
    CycleDetected,
    ImpossibleEvidence,
    StateSpaceTooLarge,
    UnknownNode,
    UnknownState,
)

YN = ("yes", "no")


def sprinkler() -> NetworkSpec:
    return NetworkSpec(
        name="sprinkler",
        nodes=(
            NodeSpec.make("cloudy", YN, [[0.5, 0.5]]),
            NodeSpec.make("sprinkler", YN, [[0.1, 0.9], [0.5, 0.5]], parents=["cloudy"]),
            NodeSpec.make("rain", YN, [[0.8, 0.2], [0.2, 0.8]], parents=["cloudy"]),
            NodeSpec.make(
                "wet",
                YN,
                [[0.99, 0.01], [0.9, 0.1], [0.9, 0.1], [0.0, 1.0]],
                parents=["sprinkler", "rain"],
            ),
        ),
    )


def chain5() -> NetworkSpec:
    # a -> b -> c -> d -> e, plus a -> e to make elimination non-trivial
    return NetworkSpec(
        name="chain5",
        nodes=(
            NodeSpec.make("a", YN, [[0.3, 0.7]]),
            NodeSpec.make("b", YN, [[0.9, 0.1], [0.4, 0.6]], parents=["a"]),
            NodeSpec.make("c", YN, [[0.2, 0.8], [0.7, 0.3]], parents=["b"]),
            NodeSpec.make("d", YN, [[0.6, 0.4], [0.1, 0.9]], parents=["c"]),
            NodeSpec.make(
                "e",
                YN,
                [[0.5, 0.5], [0.25, 0.75], [0.8, 0.2], [0.05, 0.95]],
                parents=["a", "d"],
            ),
        ),
    )


def test_prior_passthrough():
    net = build_network(sprinkler())
    post = query(net, {}, "cloudy")
    assert post["yes"] == pytest.approx(0.5, abs=1e-12)
    assert post["no"] == pytest.approx(0.5, abs=1e-12)


def test_sprinkler_known_posteriors():
    # hand-derived with exact fractions: 309/719 and 509/719
    net = build_network(sprinkler())
    assert query(net, {"wet": "yes"}, "sprinkler")["yes"] == pytest.approx(
        309 / 719, abs=1e-12
    )
    assert query(net, {"wet": "yes"}, "rain")["yes"] == pytest.approx(
        509 / 719, abs=1e-12
    )


def test_posterior_normalized():
    net = build_network(chain5())
    post = query(net, {"e": "no"}, "c")
    assert math.fsum(post.distribution.values()) == pytest.approx(1.0, abs=1e-12)


def test_target_in_evidence_is_point_mass():
    net = build_network(sprinkler())
    post = query(net, {"rain": "no"}, "rain")
    assert post["no"] == 1.0 and post["yes"] == 0.0


def test_elimination_matches_enumeration_all_evidence_subsets():
    # exhaustive dual-route check on the 5-node net: every evidence
    # assignment over every subset of nodes, every target
    net = build_network(chain5())
    ids = net.node_ids
    for r in range(len(ids) + 1):
        for subset in itertools.combinations(ids, r):
            for states in itertools.product(YN, repeat=len(subset)):
                ev = dict(zip(subset, states))
                for target in ids:
                    try:
                        got = query(net, ev, target)
                    except ImpossibleEvidence:
                        with pytest.raises(ImpossibleEvidence):
                            enumerate_joint(net, ev, target)
                        continue
                    want = enumerate_joint(net, ev, target)
                    for s in YN:
                        assert got[s] == pytest.approx(want[s], abs=1e-9)


def test_impossible_evidence_raises():
    # wet is deterministically "no" when sprinkler and rain are both off
    net = build_network(sprinkler())
    ev = {"sprinkler": "no", "rain": "no", "wet": "yes"}
    with pytest.raises(ImpossibleEvidence):
        query(net, ev, "cloudy")
    with pytest.raises(ImpossibleEvidence):
        enumerate_joint(net, ev, "cloudy")


def test_declaration_order_irrelevant():
    base = sprinkler()
    net0 = build_network(base)
    for perm in itertools.permutations(base.nodes):
        net = build_network(NetworkSpec(nodes=perm, name="p"))
        for target in net.node_ids:
            a = query(net0, {"wet": "yes"}, target)
            b = query(net, {"wet": "yes"}, target)
            for s in YN:
                assert abs(a[s] - b[s]) <= 1e-12


def test_query_validates_names():
    net = build_network(sprinkler())
    with pytest.raises(UnknownNode):
        query(net, {}, "nope")
    with pytest.raises(UnknownNode):
        query(net, {"nope": "yes"}, "rain")
    with pytest.raises(UnknownState):
        query(net, {"rain": "maybe"}, "wet")


def test_build_rejects_cycles():
    spec = NetworkSpec(
        nodes=(
            NodeSpec.make("x", YN, [[0.5, 0.5], [0.5, 0.5]], parents=["y"]),
            NodeSpec.make("y", YN, [[0.5, 0.5], [0.5, 0.5]], parents=["x"]),
        )
    )
    with pytest.raises(CycleDetected):
        build_network(spec)


def test_build_rejects_bad_shapes():
    with pytest.raises(CptShapeMismatch):
        build_network(
            NetworkSpec(
                nodes=(
                    NodeSpec.make("a", YN, [[0.5, 0.5]]),
                    # one row, needs two (one per parent state)
                    NodeSpec.make("b", YN, [[0.5, 0.5]], parents=["a"]),
                )
            )
        )
    with pytest.raises(CptShapeMismatch):
        build_network(
            NetworkSpec(nodes=(NodeSpec.make("a", YN, [[0.5, 0.3, 0.2]]),))
        )


def test_build_rejects_unnormalized_rows():
    with pytest.raises(CptRowNotNormalized):
        build_network(NetworkSpec(nodes=(NodeSpec.make("a", YN, [[0.6, 0.6]]),)))
    with pytest.raises(CptRowNotNormalized):
        build_network(NetworkSpec(nodes=(NodeSpec.make("a", YN, [[1.2, -0.2]]),)))


def test_build_rejects_unknown_parent_and_duplicate_id():
    with pytest.raises(UnknownNode):
        build_network(
            NetworkSpec(
                nodes=(NodeSpec.make("a", YN, [[0.5, 0.5], [0.5, 0.5]], parents=["g"]),)
            )
        )
    with pytest.raises(Exception):
        build_network(
            NetworkSpec(
                nodes=(
                    NodeSpec.make("a", YN, [[0.5, 0.5]]),
                    NodeSpec.make("a", YN, [[0.5, 0.5]]),
                )
            )
        )


def test_enumeration_cap():
    nodes = [NodeSpec.make("n0", YN, [[0.5, 0.5]])]
    for i in range(1, 21):
        nodes.append(
            NodeSpec.make(f"n{i}", YN, [[0.5, 0.5], [0.5, 0.5]], parents=[f"n{i-1}"])
        )
    net = build_network(NetworkSpec(nodes=tuple(nodes)))
    with pytest.raises(StateSpaceTooLarge):
        enumerate_joint(net, {}, "n0")
    # elimination has no such cap
    assert query(net, {}, "n20")["yes"] == pytest.approx(0.5, abs=1e-9)


def test_file_round_trip(tmp_path):
    spec = sprinkler()
    doc = network_to_dict(spec)
    assert network_from_dict(doc) == spec
    path = tmp_path / "net.json"
    save_network(spec, path)
    loaded = load_network(path)
    assert loaded == spec
    # same answers after a round trip
    a = query(build_network(spec), {"wet": "yes"}, "rain")
    b = query(build_network(loaded), {"wet": "yes"}, "rain")
    assert a.distribution == b.distribution


# --- randomized dual-route check -----------------------------------------

@st.composite
def random_network(draw):
    n = draw(st.integers(min_value=1, max_value=5))
    nodes = []
    for i in range(n):
        card = draw(st.integers(min_value=2, max_value=3))
        states = tuple(f"s{k}" for k in range(card))
        max_parents = min(i, 2)
        n_parents = draw(st.integers(min_value=0, max_value=max_parents))
        if n_parents:
            picks = draw(
                st.lists(
                    st.integers(min_value=0, max_value=i - 1),
                    min_size=n_parents,
                    max_size=n_parents,
                    unique=True,
                )
            )
        else:
            picks = []
        parents = tuple(f"v{j}" for j in sorted(picks))
        rows = 1
        for p in parents:
            rows *= len(nodes[int(p[1:])].states)
        cpt = []
        for _ in range(rows):
            raw = draw(
                st.lists(
                    st.floats(min_value=0.01, max_value=1.0),
                    min_size=card,
                    max_size=card,
                )
            )
            total = sum(raw)
            cpt.append([x / total for x in raw])
        nodes.append(NodeSpec.make(f"v{i}", states, cpt, parents=parents))
    return NetworkSpec(nodes=tuple(nodes), name="rand")


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_random_nets_agree_with_enumeration(data):
    spec = data.draw(random_network())
    net = build_network(spec)
    ids = net.node_ids
    ev_nodes = data.draw(st.lists(st.sampled_from(ids), unique=True, max_size=3))
    ev = {
        nid: data.draw(st.sampled_from(net.states_of(nid)), label=f"ev[{nid}]")
        for nid in ev_nodes
    }
    target = data.draw(st.sampled_from(ids))
    try:
        got = query(net, ev, target)
    except ImpossibleEvidence:
        with pytest.raises(ImpossibleEvidence):
            enumerate_joint(net, ev, target)
        return
    want = enumerate_joint(net, ev, target)
    assert math.fsum(got.distribution.values()) == pytest.approx(1.0, abs=1e-9)
    for s in net.states_of(target):
        assert got[s] == pytest.approx(want[s], abs=1e-9)

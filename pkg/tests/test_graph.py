"""Network construction and bisection, checked against exhaustive oracles."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from echospread.graph import (
    FollowerNetwork,
    PartitionAssignment,
    RetweetNetwork,
    allowed_group_size,
    bisect_partition,
    build_retweet_network,
    connected_components,
    largest_component,
    to_dot,
)
from echospread.ingest import Cascade, TweetRecord


def net_from_pairs(pairs):
    nodes = frozenset(u for e in pairs for u in e)
    edges = frozenset(tuple(sorted(e)) for e in pairs)
    return RetweetNetwork(nodes, edges)


def cascade(tweet_id, author, retweeters):
    origin = TweetRecord(tweet_id, author, 0, "climate")
    rts = tuple(
        TweetRecord(f"{tweet_id}-r{i}", u, i + 1, "rt", retweet_of=tweet_id)
        for i, u in enumerate(retweeters)
    )
    return Cascade(origin, rts)


def enumerate_min_cut(net, balance_tol):
    """Oracle: exhaustive scan of all admissible bisections."""
    nodes = sorted(net.nodes)
    n = len(nodes)
    allowed = allowed_group_size(n, balance_tol)
    best = None
    best_groups = []
    for size in range(n - allowed, allowed + 1):
        if size == 0 or size == n:
            continue
        for side0 in itertools.combinations(nodes, size):
            s0 = set(side0)
            cut = sum(1 for a, b in net.edges if (a in s0) != (b in s0))
            if best is None or cut < best:
                best = cut
                best_groups = [s0]
            elif cut == best:
                best_groups.append(s0)
    return best, best_groups


def assert_locally_optimal(net, assignment, balance_tol):
    groups = dict(assignment.groups)
    n = len(groups)
    allowed = allowed_group_size(n, balance_tol)
    adj = net.adjacency()
    sizes = [n - sum(groups.values()), sum(groups.values())]
    for u in sorted(groups):
        g = groups[u]
        if sizes[1 - g] + 1 > allowed or sizes[g] - 1 == 0:
            continue
        same = sum(1 for v in adj[u] if groups[v] == g)
        cross = len(adj[u]) - same
        assert cross <= same, f"moving {u} reduces the cut by {cross - same}"


class TestRetweetNetwork:
    def test_multiplicity_collapses_to_one_edge(self):
        cascades = [cascade("t1", "v", ["u", "u", "u"])]
        net = build_retweet_network(cascades, {"u", "v"})
        assert net.edges == frozenset({("u", "v")})

    def test_mutual_retweets_single_edge(self):
        cascades = [cascade("t1", "u", ["v"]), cascade("t2", "v", ["u"])]
        net = build_retweet_network(cascades, {"u", "v"})
        assert net.edges == frozenset({("u", "v")})

    def test_ineligible_users_excluded(self):
        cascades = [cascade("t1", "a", ["b", "c"])]
        net = build_retweet_network(cascades, {"a", "b"})
        assert net.nodes == frozenset({"a", "b"})
        assert net.edges == frozenset({("a", "b")})

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            RetweetNetwork(frozenset({"a"}), frozenset({("a", "a")}))


class TestLargestComponent:
    def test_picks_bigger_component(self):
        net = net_from_pairs(
            [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("x", "y"), ("y", "z")]
        )
        assert largest_component(net).nodes == frozenset("abcde")

    def test_identity_on_connected(self):
        net = net_from_pairs([("a", "b"), ("b", "c")])
        assert largest_component(net) == net

    def test_tie_breaks_to_smallest_member(self):
        net = net_from_pairs([("m", "n"), ("a", "z")])
        assert largest_component(net).nodes == frozenset({"a", "z"})

    def test_idempotent(self):
        net = net_from_pairs([("a", "b"), ("x", "y"), ("y", "z")])
        once = largest_component(net)
        assert largest_component(once) == once

    def test_empty_network(self):
        net = RetweetNetwork(frozenset(), frozenset())
        assert largest_component(net) == net

    def test_components_cover_nodes(self):
        net = net_from_pairs([("a", "b"), ("x", "y")])
        comps = connected_components(net)
        assert sorted(map(sorted, comps)) == [["a", "b"], ["x", "y"]]


class TestFollowerNetwork:
    def test_duplicate_rows_collapse(self):
        net, dropped = FollowerNetwork.from_edges(
            [("a", "b"), ("a", "b"), ("b", "c")], {"a", "b", "c"}
        )
        assert net.n_edges == 2
        assert dropped == 0

    def test_unknown_endpoint_dropped_and_counted(self):
        net, dropped = FollowerNetwork.from_edges([("a", "x")], {"a", "b"})
        assert net.n_edges == 0
        assert dropped == 1

    def test_views_consistent(self):
        net, _ = FollowerNetwork.from_edges(
            [("a", "b"), ("c", "b"), ("b", "a")], {"a", "b", "c"}
        )
        assert net.consistent()
        assert net.followers_of("b") == frozenset({"a", "c"})
        assert net.followees_of("a") == frozenset({"b"})


def two_triangles():
    return net_from_pairs(
        [("a1", "a2"), ("a2", "a3"), ("a1", "a3"),
         ("b1", "b2"), ("b2", "b3"), ("b1", "b3"),
         ("a3", "b1")]
    )


class TestBisect:
    def test_two_triangles_cut_is_bridge(self):
        net = two_triangles()
        oracle_cut, oracle_groups = enumerate_min_cut(net, 0.2)
        assert oracle_cut == 1
        result = bisect_partition(net, balance_tol=0.2, seed=0)
        assert result.cut_size == 1
        assert result.members(0) in [set(g) for g in oracle_groups] or result.members(
            1
        ) in [set(g) for g in oracle_groups]
        assert result.members(0) == {"a1", "a2", "a3"}

    def test_k4_any_even_split(self):
        net = net_from_pairs([(f"n{i}", f"n{j}") for i in range(4) for j in range(i + 1, 4)])
        oracle_cut, _ = enumerate_min_cut(net, 0.0)
        assert oracle_cut == 4
        result = bisect_partition(net, balance_tol=0.0, seed=1)
        assert result.cut_size == 4
        assert result.group_sizes() == (2, 2)

    def test_single_node_not_bisectable(self):
        net = RetweetNetwork(frozenset({"a"}), frozenset())
        with pytest.raises(ValueError, match="not bisectable"):
            bisect_partition(net)

    def test_disconnected_rejected(self):
        net = net_from_pairs([("a", "b"), ("x", "y")])
        with pytest.raises(ValueError, match="connected"):
            bisect_partition(net)

    def test_two_nodes(self):
        net = net_from_pairs([("a", "b")])
        result = bisect_partition(net)
        assert result.cut_size == 1
        assert result.group_sizes() == (1, 1)

    def test_group_zero_holds_smallest_id(self):
        net = two_triangles()
        result = bisect_partition(net, balance_tol=0.2, seed=3)
        assert result.groups["a1"] == 0

    def test_deterministic_for_seed(self):
        net = two_triangles()
        a = bisect_partition(net, balance_tol=0.2, seed=7)
        b = bisect_partition(net, balance_tol=0.2, seed=7)
        assert a.groups == b.groups
        assert a.cut_size == b.cut_size

    def test_cut_size_matches_recount(self):
        net = two_triangles()
        result = bisect_partition(net, balance_tol=0.2, seed=0)
        recount = sum(
            1 for a, b in net.edges if result.groups[a] != result.groups[b]
        )
        assert result.cut_size == recount


def planted_two_blocks(rng, n_per=50, p_in=0.3, p_out=0.002):
    left = [f"l{i:02d}" for i in range(n_per)]
    right = [f"r{i:02d}" for i in range(n_per)]
    pairs = []
    for block in (left, right):
        for i in range(n_per):
            for j in range(i + 1, n_per):
                if rng.random() < p_in:
                    pairs.append((block[i], block[j]))
    cross = 0
    for a in left:
        for b in right:
            if rng.random() < p_out:
                pairs.append((a, b))
                cross += 1
    return net_from_pairs(pairs), set(left), set(right), cross


class TestPlantedPartition:
    def test_recovers_planted_blocks(self):
        rng = np.random.default_rng(11)
        net, left, right, cross = planted_two_blocks(rng)
        if cross == 0 or len(connected_components(net)) > 1:
            pytest.skip("generator produced a disconnected draw")
        result = bisect_partition(net, balance_tol=0.1, seed=0)
        side0 = result.members(0)
        agreement = max(len(side0 & left), len(side0 & right)) / len(left)
        assert agreement == 1.0
        assert result.cut_size == cross


class TestLocalOptimality:
    @given(st.integers(min_value=0, max_value=1000), st.integers(min_value=6, max_value=14))
    @settings(max_examples=40, deadline=None)
    def test_no_single_move_improves(self, seed, n):
        rng = np.random.default_rng(seed)
        pairs = [
            (f"v{i:02d}", f"v{j:02d}")
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < 0.4
        ]
        if not pairs:
            return
        net = largest_component(net_from_pairs(pairs))
        if net.n_nodes < 2:
            return
        result = bisect_partition(net, balance_tol=0.1, seed=seed)
        assert_locally_optimal(net, result, 0.1)

    @given(st.integers(min_value=0, max_value=500))
    @settings(max_examples=25, deadline=None)
    def test_matches_enumeration_on_small_graphs(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 9))
        pairs = [
            (f"v{i}", f"v{j}")
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < 0.5
        ]
        if not pairs:
            return
        net = largest_component(net_from_pairs(pairs))
        if net.n_nodes < 2:
            return
        oracle_cut, _ = enumerate_min_cut(net, 0.1)
        result = bisect_partition(net, balance_tol=0.1, seed=seed)
        assert result.cut_size >= oracle_cut
        n = net.n_nodes
        allowed = allowed_group_size(n, 0.1)
        assert max(result.group_sizes()) <= allowed


class TestBalance:
    def test_balance_respects_tolerance(self):
        rng = np.random.default_rng(5)
        pairs = [
            (f"v{i:02d}", f"v{j:02d}")
            for i in range(30)
            for j in range(i + 1, 30)
            if rng.random() < 0.2
        ]
        net = largest_component(net_from_pairs(pairs))
        result = bisect_partition(net, balance_tol=0.1, seed=2)
        allowed = allowed_group_size(net.n_nodes, 0.1)
        assert max(result.group_sizes()) <= allowed

    def test_allowed_group_size_floor(self):
        assert allowed_group_size(4, 0.0) == 2
        assert allowed_group_size(5, 0.0) == 3
        assert allowed_group_size(10, 0.1) == 6
        assert allowed_group_size(6, 0.1) == 3


class TestDotExport:
    def test_contains_nodes_edges_and_colors(self):
        net = two_triangles()
        result = bisect_partition(net, balance_tol=0.2, seed=0)
        dot = to_dot(net, result)
        assert dot.startswith("graph")
        assert '"a1" -- "a2";' in dot
        assert "fillcolor" in dot

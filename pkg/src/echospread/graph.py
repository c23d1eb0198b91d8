"""Retweet and follower networks, connected components, and two-way bisection.

The bisection is a self-contained multilevel partitioner: heavy-edge-matching
coarsening, greedy initial growing, and Fiduccia-Mattheyses-style refinement
with a balance constraint. It is deterministic for a fixed seed.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .ingest import Cascade


def _canon(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class RetweetNetwork:
    """Undirected co-retweet graph: one edge per user pair with any retweet."""

    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self) -> None:
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on {a}")
            if a > b:
                raise ValueError("edges must be stored in canonical order")

    def adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {u: set() for u in self.nodes}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class FollowerNetwork:
    """Directed follow graph with forward and reverse adjacency views.

    An edge (follower, followee) means the follower subscribes to the
    followee; exposure travels followee -> follower.
    """

    followees: Mapping[str, frozenset[str]]
    followers: Mapping[str, frozenset[str]]

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[str, str]],
        universe: set[str] | frozenset[str] | None = None,
    ) -> tuple["FollowerNetwork", int]:
        """Build from (follower, followee) pairs; returns (net, dropped count).

        Self-loops, duplicates, and edges leaving the universe are dropped;
        only out-of-universe and self-loop edges are counted as dropped.
        """
        fwd: dict[str, set[str]] = {}
        rev: dict[str, set[str]] = {}
        dropped = 0
        for follower, followee in edges:
            if follower == followee:
                dropped += 1
                continue
            if universe is not None and (
                follower not in universe or followee not in universe
            ):
                dropped += 1
                continue
            fwd.setdefault(follower, set()).add(followee)
            rev.setdefault(followee, set()).add(follower)
        return (
            cls(
                followees={u: frozenset(v) for u, v in fwd.items()},
                followers={u: frozenset(v) for u, v in rev.items()},
            ),
            dropped,
        )

    def followees_of(self, user: str) -> frozenset[str]:
        return self.followees.get(user, frozenset())

    def followers_of(self, user: str) -> frozenset[str]:
        return self.followers.get(user, frozenset())

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self.followees.values())

    def consistent(self) -> bool:
        fwd = {(u, v) for u, vs in self.followees.items() for v in vs}
        rev = {(u, v) for v, us in self.followers.items() for u in us}
        return fwd == rev


@dataclass(frozen=True)
class PartitionAssignment:
    """A two-way node assignment with its recounted cut size and balance."""

    groups: Mapping[str, int]
    cut_size: int
    balance: float

    def __post_init__(self) -> None:
        sizes = self.group_sizes()
        if sizes[0] == 0 or sizes[1] == 0:
            raise ValueError("both groups must be nonempty")

    def group_sizes(self) -> tuple[int, int]:
        n1 = sum(self.groups.values())
        return (len(self.groups) - n1, n1)

    def members(self, group: int) -> set[str]:
        return {u for u, g in self.groups.items() if g == group}


def build_retweet_network(
    cascades: Sequence[Cascade], users: set[str] | frozenset[str]
) -> RetweetNetwork:
    """Undirected network over eligible users appearing in the cascades."""
    nodes: set[str] = set()
    edges: set[tuple[str, str]] = set()
    for cascade in cascades:
        author = cascade.origin.user_id
        if author in users:
            nodes.add(author)
        for rt in cascade.retweets:
            u = rt.user_id
            if u not in users:
                continue
            nodes.add(u)
            if author in users and author != u:
                edges.add(_canon(author, u))
    return RetweetNetwork(frozenset(nodes), frozenset(edges))


def connected_components(net: RetweetNetwork) -> list[set[str]]:
    adj = net.adjacency()
    seen: set[str] = set()
    components: list[set[str]] = []
    for start in sorted(net.nodes):
        if start in seen:
            continue
        comp = {start}
        frontier = [start]
        while frontier:
            u = frontier.pop()
            for v in adj[u]:
                if v not in comp:
                    comp.add(v)
                    frontier.append(v)
        seen |= comp
        components.append(comp)
    return components


def largest_component(net: RetweetNetwork) -> RetweetNetwork:
    """Induced subgraph on the largest component; ties by smallest member id."""
    if not net.nodes:
        return net
    components = connected_components(net)
    size = max(len(c) for c in components)
    # break size ties toward the component holding the smallest user id
    best = min((c for c in components if len(c) == size), key=min)
    edges = frozenset(e for e in net.edges if e[0] in best)
    return RetweetNetwork(frozenset(best), edges)


def build_follower_network(
    path: str | Path, universe: set[str] | frozenset[str]
) -> tuple[FollowerNetwork, int]:
    """Read an edge CSV with header ``follower,followee`` restricted to universe."""
    pairs: list[tuple[str, str]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["follower", "followee"]:
            raise ValueError(f"{path}: expected header 'follower,followee'")
        for row in reader:
            if len(row) < 2:
                raise ValueError(f"{path}: short row {row!r}")
            pairs.append((row[0], row[1]))
    return FollowerNetwork.from_edges(pairs, universe)


# ---------------------------------------------------------------------------
# Multilevel bisection
# ---------------------------------------------------------------------------

_COARSE_TARGET = 24


def allowed_group_size(total_weight: int, balance_tol: float) -> int:
    """Largest admissible side weight: max of the tolerance cap and the
    minimum achievable for unit weights."""
    cap = int(total_weight * (0.5 + balance_tol) + 1e-9)
    return max(cap, (total_weight + 1) // 2)


def _cut_weight(adj: list[dict[int, int]], side: list[int]) -> int:
    cut = 0
    for v, nbrs in enumerate(adj):
        for u, w in nbrs.items():
            if u > v and side[u] != side[v]:
                cut += w
    return cut


def _match_heavy_edges(
    adj: list[dict[int, int]], rng: random.Random
) -> list[int]:
    """Heavy-edge matching; returns coarse id per node."""
    n = len(adj)
    order = list(range(n))
    rng.shuffle(order)
    mate = [-1] * n
    for v in order:
        if mate[v] != -1:
            continue
        best = -1
        best_w = 0
        for u, w in adj[v].items():
            if mate[u] == -1 and (w > best_w or (w == best_w and (best == -1 or u < best))):
                best, best_w = u, w
        if best != -1:
            mate[v] = best
            mate[best] = v
    coarse_id = [-1] * n
    nxt = 0
    for v in range(n):
        if coarse_id[v] != -1:
            continue
        coarse_id[v] = nxt
        if mate[v] != -1:
            coarse_id[mate[v]] = nxt
        nxt += 1
    return coarse_id


def _coarsen(
    adj: list[dict[int, int]], node_w: list[int], coarse_id: list[int]
) -> tuple[list[dict[int, int]], list[int]]:
    n_coarse = max(coarse_id) + 1
    c_adj: list[dict[int, int]] = [{} for _ in range(n_coarse)]
    c_w = [0] * n_coarse
    for v, cv in enumerate(coarse_id):
        c_w[cv] += node_w[v]
        for u, w in adj[v].items():
            cu = coarse_id[u]
            if cu != cv:
                c_adj[cv][cu] = c_adj[cv].get(cu, 0) + w
    return c_adj, c_w


def _grow_partition(
    adj: list[dict[int, int]],
    node_w: list[int],
    start: int,
    allowed: int,
) -> list[int]:
    """Greedy region growing from a start node toward half the total weight."""
    n = len(adj)
    total = sum(node_w)
    side = [1] * n
    side[start] = 0
    w_a = node_w[start]
    attach: dict[int, int] = dict(adj[start])
    while w_a < total // 2:
        candidates = [u for u in attach if w_a + node_w[u] <= allowed]
        if not candidates:
            break
        best = min(candidates, key=lambda u: (-attach[u], u))
        attach.pop(best)
        side[best] = 0
        w_a += node_w[best]
        for u, w in adj[best].items():
            if side[u] == 1:
                attach[u] = attach.get(u, 0) + w
    return side


def _gains(adj: list[dict[int, int]], side: list[int]) -> list[int]:
    gains = []
    for v, nbrs in enumerate(adj):
        g = 0
        for u, w in nbrs.items():
            g += w if side[u] != side[v] else -w
        gains.append(g)
    return gains


def _rebalance(
    adj: list[dict[int, int]],
    node_w: list[int],
    side: list[int],
    allowed: int,
) -> None:
    """Move max-gain nodes off the heavy side until the balance cap holds."""
    w_side = [0, 0]
    for v, s in enumerate(side):
        w_side[s] += node_w[v]
    gains = _gains(adj, side)
    while max(w_side) > allowed:
        heavy = 0 if w_side[0] >= w_side[1] else 1
        movable = [v for v in range(len(side)) if side[v] == heavy]
        v = min(movable, key=lambda x: (-gains[x], x))
        side[v] = 1 - heavy
        w_side[heavy] -= node_w[v]
        w_side[1 - heavy] += node_w[v]
        gains[v] = -gains[v]
        for u, w in adj[v].items():
            gains[u] += 2 * w if side[u] == heavy else -2 * w


def _fm_refine(
    adj: list[dict[int, int]],
    node_w: list[int],
    side: list[int],
    allowed: int,
    max_passes: int = 30,
) -> int:
    """FM refinement: sequences of locked moves, keeping the best prefix.

    Returns the final cut weight. The final state admits no single-node move
    that both respects the balance cap and strictly reduces the cut.
    """
    n = len(adj)
    cut = _cut_weight(adj, side)
    for _ in range(max_passes):
        w_side = [0, 0]
        for v, s in enumerate(side):
            w_side[s] += node_w[v]
        gains = _gains(adj, side)
        locked = [False] * n
        moves: list[int] = []
        cur = cut
        best_cut = cut
        best_len = 0
        while True:
            best_v = -1
            best_g = None
            for v in range(n):
                if locked[v]:
                    continue
                s = side[v]
                if w_side[1 - s] + node_w[v] > allowed:
                    continue
                if w_side[s] - node_w[v] <= 0:
                    continue
                if best_g is None or gains[v] > best_g:
                    best_v, best_g = v, gains[v]
            if best_v == -1:
                break
            s = side[best_v]
            side[best_v] = 1 - s
            w_side[s] -= node_w[best_v]
            w_side[1 - s] += node_w[best_v]
            cur -= best_g
            locked[best_v] = True
            moves.append(best_v)
            for u, w in adj[best_v].items():
                if not locked[u]:
                    gains[u] += 2 * w if side[u] == s else -2 * w
            if cur < best_cut:
                best_cut = cur
                best_len = len(moves)
        for v in moves[best_len:]:
            side[v] = 1 - side[v]
        if best_cut >= cut:
            break
        cut = best_cut
    return cut


def bisect_partition(
    net: RetweetNetwork, balance_tol: float = 0.1, seed: int = 0
) -> PartitionAssignment:
    """Bisect a connected network into two groups with a near-minimal cut.

    Multilevel scheme: coarsen by heavy-edge matching, grow an initial
    region on the coarsest graph (several seeded starts), then refine with
    FM passes at every level while honoring the balance cap
    ``allowed_group_size(n, balance_tol)``. Group 0 is the group holding
    the lexicographically smallest node id.
    """
    nodes = sorted(net.nodes)
    n = len(nodes)
    if n < 2:
        raise ValueError("not bisectable")
    index = {u: i for i, u in enumerate(nodes)}
    adj: list[dict[int, int]] = [{} for _ in range(n)]
    for a, b in net.edges:
        ia, ib = index[a], index[b]
        adj[ia][ib] = 1
        adj[ib][ia] = 1

    comp = {0}
    frontier = [0]
    while frontier:
        v = frontier.pop()
        for u in adj[v]:
            if u not in comp:
                comp.add(u)
                frontier.append(u)
    if len(comp) != n:
        raise ValueError("network must be connected; take largest_component first")

    rng = random.Random(seed)
    levels: list[tuple[list[dict[int, int]], list[int]]] = [(adj, [1] * n)]
    maps: list[list[int]] = []
    while len(levels[-1][0]) > _COARSE_TARGET:
        cur_adj, cur_w = levels[-1]
        coarse_id = _match_heavy_edges(cur_adj, rng)
        if max(coarse_id) + 1 > 0.95 * len(cur_adj):
            break
        maps.append(coarse_id)
        levels.append(_coarsen(cur_adj, cur_w, coarse_id))

    c_adj, c_w = levels[-1]
    n_c = len(c_adj)
    total = sum(c_w)
    allowed_c = max(allowed_group_size(total, balance_tol), total // 2 + max(c_w))
    starts = list(range(n_c)) if n_c <= _COARSE_TARGET else rng.sample(range(n_c), 10)
    best_side = None
    best_cut = None
    for start in starts:
        side = _grow_partition(c_adj, c_w, start, allowed_c)
        if len(set(side)) < 2:
            continue
        _rebalance(c_adj, c_w, side, allowed_c)
        cut = _fm_refine(c_adj, c_w, side, allowed_c)
        if best_cut is None or cut < best_cut:
            best_cut = cut
            best_side = side
    if best_side is None:
        # degenerate coarse graph; split by index order
        best_side = [0 if i < n_c // 2 else 1 for i in range(n_c)]
    side = best_side

    for level in range(len(maps) - 1, -1, -1):
        coarse_id = maps[level]
        fine_adj, fine_w = levels[level]
        side = [side[coarse_id[v]] for v in range(len(fine_adj))]
        total = sum(fine_w)
        allowed = max(
            allowed_group_size(total, balance_tol), total // 2 + max(fine_w)
        ) if level > 0 else allowed_group_size(total, balance_tol)
        _rebalance(fine_adj, fine_w, side, allowed)
        _fm_refine(fine_adj, fine_w, side, allowed)

    if len(levels) == 1:
        allowed = allowed_group_size(n, balance_tol)
        _rebalance(adj, [1] * n, side, allowed)
        _fm_refine(adj, [1] * n, side, allowed)

    if side[0] == 1:
        side = [1 - s for s in side]
    groups = {u: side[index[u]] for u in nodes}
    cut = sum(1 for a, b in net.edges if groups[a] != groups[b])
    balance = max(sum(side), n - sum(side)) / n
    return PartitionAssignment(groups=groups, cut_size=cut, balance=balance)


def to_dot(net: RetweetNetwork, assignment: PartitionAssignment | None = None) -> str:
    """DOT serialization of the network, node color by group when given."""
    colors = {0: "#e08214", 1: "#7fbf7b"}
    lines = ["graph retweet_network {", "  node [style=filled];"]
    for u in sorted(net.nodes):
        if assignment is not None and u in assignment.groups:
            color = colors[assignment.groups[u]]
            lines.append(f'  "{u}" [fillcolor="{color}"];')
        else:
            lines.append(f'  "{u}";')
    for a, b in sorted(net.edges):
        lines.append(f'  "{a}" -- "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"

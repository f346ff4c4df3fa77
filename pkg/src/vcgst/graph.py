"""Temporal bipartite investment network with monthly increments.

Nodes are persons or start-ups; edges (invest/employ) only connect the two
kinds. Content is append-only: a base snapshot holds everything up to a
cutoff period and later months arrive as increments. All queries take an
``as-of`` period and never expose later content.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import (BipartiteViolation, DanglingEdge, MalformedRecord,
                     OutOfOrderIncrement)


class NodeKind(Enum):
    PERSON = "person"
    STARTUP = "startup"


class EdgeKind(Enum):
    INVEST = "invest"
    EMPLOY = "employ"


@dataclass(frozen=True)
class Edge:
    person: str
    startup: str
    kind: EdgeKind
    period: int


@dataclass(frozen=True)
class NodeEvent:
    period: int
    node: str
    kind: NodeKind


@dataclass(frozen=True)
class EdgeEvent:
    period: int
    person: str
    startup: str
    kind: EdgeKind


@dataclass
class GraphIncrement:
    period: int
    new_nodes: list[tuple[str, NodeKind]] = field(default_factory=list)
    new_edges: list[Edge] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not self.new_nodes and not self.new_edges


class TemporalBipartiteGraph:
    """Cumulative node/edge store with per-period as-of views.

    Adjacency lists are kept sorted by period (increments arrive in
    order), so an as-of query is a bisect. Duplicate (person, startup,
    kind) edges within one period are dropped; across periods they are
    distinct edges, so degrees are edge counts while neighbor queries
    return unique nodes.
    """

    def __init__(self):
        self.node_kind: dict[str, NodeKind] = {}
        self.node_period: dict[str, int] = {}
        # node -> parallel lists (periods sorted asc, neighbor ids, kinds)
        self._adj_periods: dict[str, list[int]] = {}
        self._adj_nodes: dict[str, list[str]] = {}
        self._adj_kinds: dict[str, list[EdgeKind]] = {}
        self._edge_keys: set[tuple[str, str, EdgeKind, int]] = set()
        self._pair_first: dict[tuple[str, str], int] = {}
        self.edges: list[Edge] = []
        self.max_period: int = 0
        self.base_period: int = 0

    # -- construction ---------------------------------------------------------

    def _add_node(self, node: str, kind: NodeKind, period: int) -> None:
        existing = self.node_kind.get(node)
        if existing is not None:
            if existing is not kind:
                raise BipartiteViolation(
                    f"node {node!r} registered as both kinds")
            return
        self.node_kind[node] = kind
        self.node_period[node] = period
        self._adj_periods[node] = []
        self._adj_nodes[node] = []
        self._adj_kinds[node] = []

    def _add_edge(self, edge: Edge) -> None:
        pk = self.node_kind.get(edge.person)
        sk = self.node_kind.get(edge.startup)
        if pk is None or sk is None:
            raise DanglingEdge(
                f"edge {edge.person}-{edge.startup} has an unknown endpoint")
        if pk is not NodeKind.PERSON or sk is not NodeKind.STARTUP:
            raise BipartiteViolation(
                f"edge {edge.person}-{edge.startup} joins {pk.value} "
                f"and {sk.value}")
        key = (edge.person, edge.startup, edge.kind, edge.period)
        if key in self._edge_keys:
            return  # within-period duplicate
        self._edge_keys.add(key)
        self.edges.append(edge)
        for a, b in ((edge.person, edge.startup), (edge.startup, edge.person)):
            self._adj_periods[a].append(edge.period)
            self._adj_nodes[a].append(b)
            self._adj_kinds[a].append(edge.kind)
        pair = (edge.person, edge.startup)
        if pair not in self._pair_first or self._pair_first[pair] > edge.period:
            self._pair_first[pair] = edge.period

    def apply_increment(self, inc: GraphIncrement) -> None:
        if inc.period != self.max_period + 1:
            raise OutOfOrderIncrement(
                f"expected period {self.max_period + 1}, got {inc.period}")
        for node, kind in inc.new_nodes:
            if node in self.node_kind:
                existing = self.node_kind[node]
                if existing is not kind:
                    raise BipartiteViolation(
                        f"node {node!r} registered as both kinds")
                continue
            self._add_node(node, kind, inc.period)
        for edge in inc.new_edges:
            if edge.period != inc.period:
                raise MalformedRecord(
                    f"edge period {edge.period} inside increment {inc.period}")
            self._add_edge(edge)
        self.max_period = inc.period

    # -- queries ----------------------------------------------------------------

    def has_node(self, node: str, period: int | None = None) -> bool:
        if node not in self.node_kind:
            return False
        return period is None or self.node_period[node] <= period

    def nodes_asof(self, period: int) -> list[str]:
        return [n for n, p in self.node_period.items() if p <= period]

    def kind(self, node: str) -> NodeKind:
        return self.node_kind[node]

    def neighbors_asof(self, node: str, period: int) -> list[str]:
        """Unique neighbors via edges dated <= period, first-seen order."""
        periods = self._adj_periods.get(node)
        if not periods:
            return []
        hi = bisect.bisect_right(periods, period)
        seen: dict[str, None] = {}
        for other in self._adj_nodes[node][:hi]:
            seen.setdefault(other)
        return list(seen)

    def degree_asof(self, node: str, period: int) -> int:
        """Edge count (multigraph degree) as-of period."""
        periods = self._adj_periods.get(node, [])
        return bisect.bisect_right(periods, period)

    def edges_asof(self, period: int) -> list[Edge]:
        return [e for e in self.edges if e.period <= period]

    def has_pair_asof(self, person: str, startup: str, period: int) -> bool:
        first = self._pair_first.get((person, startup))
        return first is not None and first <= period

    def node_count_asof(self, period: int) -> int:
        return sum(1 for p in self.node_period.values() if p <= period)

    def edge_count_asof(self, period: int) -> int:
        return sum(1 for e in self.edges if e.period <= period)

    def pair_count_asof(self, period: int) -> int:
        """Distinct linked (person, startup) pairs as-of period."""
        return sum(1 for first in self._pair_first.values()
                   if first <= period)

    def increment_view(self, period: int) -> GraphIncrement:
        """Reconstruct the increment of one stored period."""
        nodes = [(n, self.node_kind[n])
                 for n, p in self.node_period.items() if p == period]
        edges = [e for e in self.edges if e.period == period]
        return GraphIncrement(period=period, new_nodes=nodes,
                              new_edges=edges)

    # -- analyses ---------------------------------------------------------------

    def affected_nodes(self, inc: GraphIncrement, n_hops: int) -> set[str]:
        """New nodes, endpoints of new edges, and their n-hop neighborhood
        as-of the increment's period."""
        seeds: set[str] = {n for n, _ in inc.new_nodes}
        for e in inc.new_edges:
            seeds.add(e.person)
            seeds.add(e.startup)
        period = inc.period
        result = set(seeds)
        frontier = seeds
        for _ in range(n_hops):
            nxt: set[str] = set()
            for node in frontier:
                for other in self.neighbors_asof(node, period):
                    if other not in result:
                        nxt.add(other)
            result |= nxt
            frontier = nxt
            if not frontier:
                break
        return result

    def degree_centrality(self, period: int) -> dict[str, int]:
        return {n: self.degree_asof(n, period)
                for n, p in self.node_period.items() if p <= period}

    def structural_stats(self, period: int) -> "StructuralStats":
        nodes = self.nodes_asof(period)
        uf = _UnionFind(nodes)
        for e in self.edges:
            if e.period <= period:
                uf.union(e.person, e.startup)
        components: dict[str, list[str]] = {}
        for n in nodes:
            components.setdefault(uf.find(n), []).append(n)
        sizes = sorted((len(m) for m in components.values()), reverse=True)
        if components:
            lcc_root = max(components, key=lambda r: (len(components[r]), r))
            lcc_members = frozenset(components[lcc_root])
            lcc_fraction = len(lcc_members) / len(nodes)
        else:
            lcc_members = frozenset()
            lcc_fraction = 0.0
        histogram: dict[NodeKind, dict[int, int]] = {
            NodeKind.PERSON: {}, NodeKind.STARTUP: {}}
        for n in nodes:
            h = histogram[self.node_kind[n]]
            deg = self.degree_asof(n, period)
            h[deg] = h.get(deg, 0) + 1
        return StructuralStats(degree_histogram_by_kind=histogram,
                               component_sizes=sizes,
                               lcc_fraction=lcc_fraction,
                               lcc_membership=lcc_members)


@dataclass
class StructuralStats:
    degree_histogram_by_kind: dict[NodeKind, dict[int, int]]
    component_sizes: list[int]
    lcc_fraction: float
    lcc_membership: frozenset[str]


class _UnionFind:
    """Union by size with path compression."""

    def __init__(self, items):
        self._parent = {x: x for x in items}
        self._size = {x: 1 for x in items}

    def find(self, x):
        root = x
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[x] != root:
            self._parent[x], x = root, self._parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size[rb]


# -- event streams ----------------------------------------------------------------

def build_initial_graph(events, cutoff_period: int) -> TemporalBipartiteGraph:
    """Base snapshot from all events dated <= cutoff; later events ignored.

    Node events must precede edge events that use them (within a period
    the builder adds nodes first).
    """
    if cutoff_period < 0:
        raise MalformedRecord("cutoff period must be >= 0")
    graph = TemporalBipartiteGraph()
    kept = [ev for ev in events if ev.period <= cutoff_period]
    for ev in sorted(kept, key=_event_sort_key):
        if ev.period < 0:
            raise MalformedRecord(f"negative period in {ev}")
        if isinstance(ev, NodeEvent):
            graph._add_node(ev.node, ev.kind, ev.period)
        else:
            graph._add_edge(Edge(ev.person, ev.startup, ev.kind, ev.period))
    graph.max_period = cutoff_period
    graph.base_period = cutoff_period
    return graph


def group_increments(events, cutoff_period: int,
                     last_period: int) -> list[GraphIncrement]:
    """Bundle events in (cutoff, last] into one increment per period."""
    by_period: dict[int, GraphIncrement] = {
        p: GraphIncrement(period=p)
        for p in range(cutoff_period + 1, last_period + 1)}
    for ev in sorted(events, key=_event_sort_key):
        if ev.period <= cutoff_period or ev.period > last_period:
            continue
        inc = by_period[ev.period]
        if isinstance(ev, NodeEvent):
            inc.new_nodes.append((ev.node, ev.kind))
        else:
            inc.new_edges.append(Edge(ev.person, ev.startup, ev.kind,
                                      ev.period))
    return [by_period[p] for p in sorted(by_period)]


def build_temporal_graph(events, cutoff_period: int,
                         last_period: int) -> TemporalBipartiteGraph:
    """Base snapshot at the cutoff plus one applied increment per period."""
    events = list(events)
    graph = build_initial_graph(events, cutoff_period)
    for inc in group_increments(events, cutoff_period, last_period):
        graph.apply_increment(inc)
    return graph


def _event_sort_key(ev):
    if isinstance(ev, NodeEvent):
        return (ev.period, 0, ev.node, "")
    return (ev.period, 1, ev.person, ev.startup)


# -- flat-file event log --------------------------------------------------------------

def save_event_log(path, events) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("record\tperiod\ta\tb\tkind\n")
        for ev in sorted(events, key=_event_sort_key):
            if isinstance(ev, NodeEvent):
                fh.write(f"node\t{ev.period}\t{ev.node}\t\t{ev.kind.value}\n")
            else:
                fh.write(f"edge\t{ev.period}\t{ev.person}\t{ev.startup}\t"
                         f"{ev.kind.value}\n")


def load_event_log(path):
    events = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != "record\tperiod\ta\tb\tkind":
            raise MalformedRecord(f"{path}: unexpected event log header")
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 5:
                raise MalformedRecord(f"{path}:{lineno}: expected 5 columns")
            record, period, a, b, kind = parts
            try:
                period = int(period)
            except ValueError as exc:
                raise MalformedRecord(
                    f"{path}:{lineno}: bad period {period!r}") from exc
            if record == "node":
                events.append(NodeEvent(period, a, NodeKind(kind)))
            elif record == "edge":
                events.append(EdgeEvent(period, a, b, EdgeKind(kind)))
            else:
                raise MalformedRecord(
                    f"{path}:{lineno}: unknown record type {record!r}")
    return events

"""Weighted agent-item bipartite graphs and the matching routines built on them.

Item-side vertices are tuples of item ids: ``(j,)`` for a plain item and
``(i, j)`` for a merged pair.  Agent-side vertices are agent indices.  All
matchings are computed by successive shortest paths on a unit-capacity flow
network with exact rational costs.  Ties between optimal matchings are broken
towards the lexicographically smallest sorted edge list.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import InfeasibleError, PreconditionError, UnsupportedError
from .values import ZERO

XVertex = tuple[int, ...]
Edge = tuple[XVertex, int]


@dataclass(frozen=True, eq=False)
class ValueGraph:
    xs: tuple[XVertex, ...]
    ys: tuple[int, ...]
    weights: Mapping[Edge, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(self.xs))
        object.__setattr__(self, "ys", tuple(self.ys))
        object.__setattr__(self, "weights", dict(self.weights))
        xset, yset = set(self.xs), set(self.ys)
        for (x, y), w in self.weights.items():
            if x not in xset or y not in yset:
                raise PreconditionError(f"edge {(x, y)} has an endpoint outside the graph")
            if w < 0:
                raise PreconditionError(f"edge {(x, y)} has negative weight")

    @property
    def edges(self) -> list[Edge]:
        return sorted(self.weights)

    def weight(self, x: XVertex, y: int) -> Fraction:
        return self.weights[(x, y)]

    def has_edge(self, x: XVertex, y: int) -> bool:
        return (x, y) in self.weights

    def x_neighbors(self) -> dict[XVertex, list[int]]:
        adj: dict[XVertex, list[int]] = {x: [] for x in self.xs}
        for x, y in self.edges:
            adj[x].append(y)
        return adj

    def y_neighbors(self) -> dict[int, list[XVertex]]:
        adj: dict[int, list[XVertex]] = {y: [] for y in self.ys}
        for x, y in self.edges:
            adj[y].append(x)
        return adj

    def neighborhood(self, xs: Iterable[XVertex]) -> set[int]:
        wanted = set(xs)
        return {y for (x, y) in self.weights if x in wanted}

    def induced(self, xs: Iterable[XVertex], ys: Iterable[int]) -> "ValueGraph":
        xkeep, ykeep = set(xs), set(ys)
        return ValueGraph(
            tuple(x for x in self.xs if x in xkeep),
            tuple(y for y in self.ys if y in ykeep),
            {(x, y): w for (x, y), w in self.weights.items() if x in xkeep and y in ykeep},
        )

    def __repr__(self):
        return f"ValueGraph(xs={self.xs}, ys={self.ys}, edges={len(self.weights)})"


def value_graph(valuations: Sequence, agents: Iterable[int], items: Iterable[int]) -> ValueGraph:
    """Complete bipartite graph weighted by each agent's value of each single item."""
    agents, items = list(agents), list(items)
    weights = {((j,), i): valuations[i].value((j,)) for i in agents for j in items}
    return ValueGraph(tuple((j,) for j in items), tuple(agents), weights)


@dataclass(frozen=True)
class Matching:
    pairs: frozenset[Edge]

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset(self.pairs))
        xs = [x for x, _ in self.pairs]
        ys = [y for _, y in self.pairs]
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            raise PreconditionError("a vertex appears in two matched pairs")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))

    @property
    def x_mate(self) -> dict[XVertex, int]:
        return {x: y for x, y in self.pairs}

    @property
    def y_mate(self) -> dict[int, XVertex]:
        return {y: x for x, y in self.pairs}

    def weight(self, graph: ValueGraph) -> Fraction:
        return sum((graph.weight(x, y) for x, y in self.pairs), ZERO)


def beta_filter(graph: ValueGraph, beta) -> ValueGraph:
    """Keep edges of weight at least ``beta`` and the vertices they touch."""
    kept = {e: w for e, w in graph.weights.items() if w >= beta}
    xs = {x for x, _ in kept}
    ys = {y for _, y in kept}
    return ValueGraph(
        tuple(x for x in graph.xs if x in xs), tuple(y for y in graph.ys if y in ys), kept
    )


def merge(graph: ValueGraph, xi: XVertex, xj: XVertex) -> ValueGraph:
    """Replace two plain item vertices by one vertex whose weights are their sums."""
    if xi == xj:
        raise PreconditionError("cannot merge a vertex with itself")
    for x in (xi, xj):
        if x not in graph.xs:
            raise PreconditionError(f"vertex {x} is not in the graph")
        if len(x) != 1:
            raise UnsupportedError(f"vertex {x} is already merged")
    merged = tuple(sorted(xi + xj))
    weights = {e: w for e, w in graph.weights.items() if e[0] not in (xi, xj)}
    for y in graph.ys:
        if graph.has_edge(xi, y) or graph.has_edge(xj, y):
            weights[(merged, y)] = graph.weights.get((xi, y), ZERO) + graph.weights.get((xj, y), ZERO)
    xs = sorted([x for x in graph.xs if x not in (xi, xj)] + [merged])
    return ValueGraph(tuple(xs), graph.ys, weights)


# ---------------------------------------------------------------------------
# Min-cost max-flow on the bipartite network (unit capacities)


def _add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _neg(a):
    return (-a[0], -a[1])


def _min_cost_matching(graph: ValueGraph, primary) -> Matching:
    """Maximum-cardinality matching minimizing (sum of primary costs, tie-break).

    The secondary cost rewards edges early in sorted order with weights
    2^(E-1-rank), which makes the optimum the lexicographically smallest edge
    list among all optima.
    """
    edges = graph.edges
    if not edges:
        return Matching(frozenset())
    count = len(edges)
    source, sink = ("s",), ("t",)
    # Residual arcs as [tail, head, capacity, cost, reverse index].
    arcs: list[list] = []
    out: dict = {}

    def add_arc(u, v, cost):
        out.setdefault(u, []).append(len(arcs))
        arcs.append([u, v, 1, cost, len(arcs) + 1])
        out.setdefault(v, []).append(len(arcs))
        arcs.append([v, u, 0, _neg(cost), len(arcs) - 1])

    zero = (ZERO, 0)
    for x in sorted({x for x, _ in edges}):
        add_arc(source, ("x", x), zero)
    for rank, (x, y) in enumerate(edges):
        add_arc(("x", x), ("y", y), (primary(x, y), -(1 << (count - 1 - rank))))
    for y in sorted({y for _, y in edges}):
        add_arc(("y", y), sink, zero)

    nodes = list(out)
    while True:
        dist = {source: zero}
        via: dict = {}
        for _ in range(len(nodes)):
            changed = False
            for u in nodes:
                if u not in dist:
                    continue
                du = dist[u]
                for a in out[u]:
                    _, v, cap, cost, _ = arcs[a]
                    if cap <= 0:
                        continue
                    nd = _add(du, cost)
                    if v not in dist or nd < dist[v]:
                        dist[v], via[v] = nd, a
                        changed = True
            if not changed:
                break
        if sink not in dist:
            break
        v = sink
        while v != source:
            a = via[v]
            arcs[a][2] -= 1
            arcs[arcs[a][4]][2] += 1
            v = arcs[a][0]

    pairs = set()
    for u, v, cap, _, _ in arcs:
        if u[0] == "x" and v[0] == "y" and cap == 0:
            pairs.add((u[1], v[1]))
    return Matching(frozenset(pairs))


def mcmwm(graph: ValueGraph) -> Matching:
    """Maximum-cardinality matching of maximum total weight (canonical among optima)."""
    return _min_cost_matching(graph, lambda x, y: -graph.weight(x, y))


def maximum_matching(graph: ValueGraph) -> Matching:
    return _min_cost_matching(graph, lambda x, y: ZERO)


def min_position_matching(
    graph: ValueGraph, positions: Mapping[int, int], *, require_saturating: bool = True
) -> Matching:
    """Maximum matching minimizing the sum of the matched agents' positions.

    With ``require_saturating`` (the default) an :class:`InfeasibleError` is raised
    when no matching covers every item vertex.
    """
    matching = _min_cost_matching(graph, lambda x, y: Fraction(positions[y]))
    if require_saturating and len(matching) < len(graph.xs):
        unmatched = sorted(set(graph.xs) - set(matching.x_mate))
        raise InfeasibleError(f"item vertices {unmatched} cannot all be saturated")
    return matching


# ---------------------------------------------------------------------------
# Alternating-path structure


def _check_matching(graph: ValueGraph, matching: Matching) -> None:
    for x, y in matching.pairs:
        if not graph.has_edge(x, y):
            raise PreconditionError(f"matched pair {(x, y)} is not an edge of the graph")


def alternating_reach(graph: ValueGraph, matching: Matching) -> tuple[set[int], set[XVertex]]:
    """Agents and item vertices reachable from unsaturated agents by alternating paths."""
    x_mate, y_mate = matching.x_mate, matching.y_mate
    adj = graph.y_neighbors()
    start = [y for y in graph.ys if y not in y_mate]
    seen_y, seen_x = set(start), set()
    queue = deque(start)
    while queue:
        y = queue.popleft()
        for x in adj[y]:
            if y_mate.get(y) == x or x in seen_x:
                continue
            seen_x.add(x)
            mate = x_mate.get(x)
            if mate is not None and mate not in seen_y:
                seen_y.add(mate)
                queue.append(mate)
    return seen_y, seen_x


def is_maximum(graph: ValueGraph, matching: Matching) -> bool:
    """True iff no augmenting path exists."""
    _, reached_x = alternating_reach(graph, matching)
    x_mate = matching.x_mate
    return all(x in x_mate for x in reached_x)


def compute_F(graph: ValueGraph, matching: Matching, xside: Iterable[XVertex] | None = None) -> frozenset[XVertex]:
    """Item vertices of ``xside`` not matched to an agent reachable from an unsaturated agent."""
    _check_matching(graph, matching)
    if not is_maximum(graph, matching):
        raise PreconditionError("compute_F needs a maximum matching; an augmenting path exists")
    reached_y, _ = alternating_reach(graph, matching)
    y_mate = matching.y_mate
    blocked = {y_mate[y] for y in reached_y if y in y_mate}
    xside = graph.xs if xside is None else xside
    return frozenset(x for x in xside if x not in blocked)

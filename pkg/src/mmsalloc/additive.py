"""Solvers for additive agents: bag-filling, the 1/2 and 2/3 baselines, and 3/4.

The 3/4 solver works on unit-scaled values (every agent's share is 1) and runs
in two phases.  Phase one builds three clusters of agents from maximum
matchings of heavy items, handing out items that finish agents where possible.
Phase two repeatedly hands a minimal feasible set of free items to the
lowest-priority agent it can serve.  When one of the runtime invariants fails
in a way that exposes a reduction, the reduction is applied and the whole
pipeline restarts on the smaller instance.

The 2/3 solver reuses the same machinery with heavy threshold 1/3 and without
the middle cluster.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

from .bipartite import (
    ValueGraph,
    beta_filter,
    compute_F,
    maximum_matching,
    mcmwm,
    merge,
    min_position_matching,
)
from .errors import GuaranteeError, InfeasibleError, InvariantViolation
from .instance import Allocation, Instance, additive_rows, assemble
from .mms import agent_mms, scale_to_unit
from .reduction import check_pair_invariant, reduce_singletons
from .valuations import Bundle
from .values import ZERO, as_value

log = logging.getLogger(__name__)

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)


# ---------------------------------------------------------------------------
# Bag-filling


def bag_filling(
    instance: Instance,
    alpha,
    mms: Sequence,
    agents: Iterable[int] | None = None,
    items: Iterable[int] | None = None,
) -> Allocation:
    """Grow a bag in item-id order and hand it to the first agent it serves.

    An agent is served once the bag is worth ``(1 - alpha) * mms[i]`` to them;
    ties go to the lowest agent index.  Leftover items join the last bag.
    """
    alpha = as_value(alpha)
    waiting = sorted(range(instance.n) if agents is None else agents)
    pool = sorted(range(instance.m) if items is None else items)
    bundles: dict[int, list[int]] = {}
    bag: list[int] = []
    last = None
    for j in pool:
        bag.append(j)
        for i in waiting:
            if instance.valuations[i].value(bag) >= (1 - alpha) * mms[i]:
                bundles[i] = bag
                waiting.remove(i)
                last, bag = i, []
                break
    if waiting:
        raise GuaranteeError(
            f"bag-filling left agents {waiting} unserved",
            {"unserved": waiting, "bag": bag},
        )
    if bag:
        if last is None:
            raise GuaranteeError("no agent to receive the leftover items", {"bag": bag})
        bundles[last].extend(bag)
    return assemble(instance.n, bundles.items())


def _serve_zero_share(mms: Sequence) -> tuple[list[int], list[tuple[int, Bundle]]]:
    live = [i for i, share in enumerate(mms) if share > 0]
    return live, [(i, ()) for i, share in enumerate(mms) if share == 0]


def _attach_leftover(parts: list[tuple[int, Bundle]], leftover: Iterable[int], n: int):
    leftover = tuple(leftover)
    if not leftover:
        return
    if parts:
        agent, bundle = parts[-1]
        parts[-1] = (agent, tuple(bundle) + leftover)
    else:
        parts.append((n - 1, leftover))


def solve_half(instance: Instance, mms: Sequence | None = None) -> Allocation:
    """Singleton reduction at 1/2 followed by bag-filling at 1/2."""
    additive_rows(instance)
    mms = agent_mms(instance) if mms is None else [as_value(x) for x in mms]
    step = reduce_singletons(instance, HALF, mms)
    parts = list(step.satisfied)
    if step.agents:
        rest = bag_filling(instance, HALF, mms, step.agents, step.items)
        parts.extend((i, rest.bundles[i]) for i in step.agents)
    else:
        _attach_leftover(parts, step.items, instance.n)
    allocation = assemble(instance.n, parts)
    allocation.meta["reductions"] = len(step.satisfied)
    return allocation


# ---------------------------------------------------------------------------
# Phase-two helpers


def minimal_feasible_subset(
    free: Iterable[int],
    demands: Mapping[int, tuple[Callable[[Sequence[int]], Fraction], Fraction]],
) -> tuple[Bundle, frozenset[int]]:
    """Shrink ``free`` to a minimal bundle some agent still accepts.

    ``demands[i]`` is ``(value_function, threshold)``; a bundle is feasible for
    agent ``i`` when its value reaches the threshold.  Items are dropped in
    descending id order whenever the rest stays feasible for someone.  Returns
    the bundle and every agent it is feasible for; raises
    :class:`InfeasibleError` when ``free`` itself is infeasible.
    """

    def takers(bundle) -> frozenset[int]:
        return frozenset(i for i, (value, need) in demands.items() if value(bundle) >= need)

    bag = sorted(free)
    if not takers(bag):
        raise InfeasibleError("the free items are not feasible for any agent")
    for j in sorted(bag, reverse=True):
        trial = [k for k in bag if k != j]
        if takers(trial):
            bag = trial
    return tuple(bag), takers(bag)


def envy_order(agents: Iterable[int], first: Mapping[int, Bundle], value) -> tuple[list[int], bool]:
    """Topological order of the strict-envy digraph among ``agents``.

    Agent ``i`` points to ``j`` when ``i`` strictly prefers ``first[j]`` to
    ``first[i]``; envious agents come first.  Ties are broken by agent index.
    Returns the order and whether the digraph was acyclic (on a cycle the
    remaining agents are appended by index).
    """
    agents = sorted(agents)
    envies = {i: [j for j in agents if j != i and value(i, first[j]) > value(i, first[i])] for i in agents}
    indegree = {i: 0 for i in agents}
    for i in agents:
        for j in envies[i]:
            indegree[j] += 1
    heap = [i for i in agents if indegree[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        i = heapq.heappop(heap)
        order.append(i)
        for j in envies[i]:
            indegree[j] -= 1
            if indegree[j] == 0:
                heapq.heappush(heap, j)
    acyclic = len(order) == len(agents)
    if not acyclic:
        order.extend(i for i in agents if i not in order)
    return order, acyclic


# ---------------------------------------------------------------------------
# The clustering engine


@dataclass
class AgentState:
    agent: int
    cluster: str = "free"
    f: Bundle = ()
    g: Bundle = ()
    eps: Fraction | None = None
    status: str = "unsatisfied"
    lender: int | None = None


@dataclass
class _Outcome:
    bundles: dict[int, Bundle] = field(default_factory=dict)
    reduction: list[tuple[int, Bundle]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)


class _Clustering:
    """One run of the two-phase procedure on a live sub-instance."""

    def __init__(self, rows, agents, items, alpha, heavy, middle_cluster, check):
        self.rows = rows
        self.agents = list(agents)
        self.items = list(items)
        self.alpha = alpha
        self.heavy = heavy
        self.middle_cluster = middle_cluster
        self.check = check
        self.states = {i: AgentState(i) for i in self.agents}
        self.satisfied_order: list[int] = []
        self.notes: list[str] = []
        self.stats = {"C1": 0, "C2": 0, "C3": 0, "merges": 0, "rounds": 0, "borrows": 0}

    # -- small helpers -------------------------------------------------------
    def val(self, i: int, bundle: Iterable[int]) -> Fraction:
        row = self.rows[i]
        return sum((row[j] for j in bundle), ZERO)

    def fail(self, message: str):
        if self.check:
            raise InvariantViolation(message)
        self.notes.append(message)
        log.debug(message)

    def semi(self, i: int, f: Bundle, cluster: str):
        st = self.states[i]
        st.cluster, st.f, st.g, st.status = cluster, tuple(sorted(f)), (), "semi-satisfied"
        st.eps = self.alpha - self.val(i, st.f)
        if self.val(i, st.f) < self.heavy or st.eps > self.alpha - self.heavy:
            self.fail(f"agent {i}: first bundle {st.f} below the heavy threshold")
        if st.eps <= 0:
            self.fail(f"agent {i}: first bundle {st.f} already reaches alpha")
            self.finish(i, ())

    def finish(self, i: int, g: Iterable[int]):
        st = self.states[i]
        st.g = tuple(sorted(g))
        st.status = "satisfied"
        st.cluster = "done-" + st.cluster
        self.satisfied_order.append(i)
        if self.val(i, st.f + st.g) < self.alpha:
            raise InvariantViolation(f"agent {i} marked satisfied below alpha")

    def graph(self, agents, items) -> ValueGraph:
        weights = {((j,), i): self.rows[i][j] for i in agents for j in items}
        return ValueGraph(tuple((j,) for j in items), tuple(agents), weights)

    def reduction_for(self, agents, pairs, mms_one) -> list[tuple[int, Bundle]] | None:
        if check_pair_invariant(
            self.instance_view, agents, pairs, mms_one, alpha=self.alpha, others=self.agents
        ):
            return [(i, tuple(sorted(p))) for i, p in zip(agents, pairs)]
        return None

    # -- phase one -----------------------------------------------------------
    def run(self, instance_view, mms_one) -> _Outcome:
        self.instance_view = instance_view
        self.mms_one = mms_one
        graph = self.graph(self.agents, self.items)

        # First cluster: neighbours of F in the heavy-edge graph.
        heavy_graph = beta_filter(graph, self.heavy)
        matching = mcmwm(heavy_graph)
        f_set = compute_F(heavy_graph, matching)
        c1 = sorted(heavy_graph.neighborhood(f_set))
        mate = matching.y_mate
        s1 = set()
        for y in c1:
            x = mate.get(y)
            if x is None or x not in f_set:
                self.fail(f"first-cluster agent {y} is not matched into F")
                continue
            s1.add(x)
            self.semi(y, x, "C1")
        u1 = set(f_set) - s1
        heavy_items = set(heavy_graph.xs)
        light = [x for x in graph.xs if x not in heavy_items]
        c1_live = [y for y in c1 if self.states[y].status == "semi-satisfied"]
        w1 = sorted(u1 | {x for x in light if any(self.val(y, x) >= self.states[y].eps for y in c1_live)})

        g1 = ValueGraph(
            tuple(w1),
            tuple(c1_live),
            {(x, y): self.val(y, x) for x in w1 for y in c1_live if self.val(y, x) >= self.states[y].eps},
        )
        full = maximum_matching(g1)
        blocked = compute_F(g1, full)
        saturating = True
        if blocked:
            t_agents = sorted(g1.neighborhood(blocked))
            pairs = []
            for y in t_agents:
                x = full.y_mate.get(y)
                pairs.append(self.states[y].f + (x or ()))
            reduction = self.reduction_for(t_agents, pairs, mms_one)
            if reduction is not None:
                return _Outcome(reduction=reduction, notes=self.notes)
            self.fail("refinement graph cannot saturate W1 and no pair reduction applies")
            saturating = False
        order1, acyclic = envy_order(c1_live, {y: self.states[y].f for y in c1_live}, self.val)
        if not acyclic:
            self.fail("first cluster envy digraph has a cycle")
        positions = {y: k for k, y in enumerate(order1)}
        m1 = min_position_matching(g1, positions, require_saturating=saturating)
        for x, y in m1:
            self.finish(y, x)
        c1_left = [y for y in order1 if self.states[y].status == "semi-satisfied"]
        self.stats["C1"] = len(c1)

        taken = set(s1) | set(w1)
        rest_items = [j for j in self.items if (j,) not in taken]
        rest_agents = [y for y in self.agents if y not in set(c1)]

        # Pair invariant over the light items of the rest.
        sub = self.graph(rest_agents, rest_items)
        light_rest = [x[0] for x in sub.xs if x not in set(beta_filter(sub, self.heavy).xs)]
        if self.middle_cluster:
            live = [y for y in self.agents if self.states[y].status != "satisfied"]
            for a, b in combinations(light_rest, 2):
                for k in live:
                    if self.val(k, (a, b)) >= self.alpha:
                        reduction = self.reduction_for([k], [(a, b)], mms_one)
                        if reduction is not None:
                            return _Outcome(reduction=reduction, notes=self.notes)
                        self.fail(f"light pair {(a, b)} reaches alpha for agent {k} without a valid reduction")

        c2_left: list[int] = []
        if self.middle_cluster:
            sub, c2_left, rest_agents = self.middle(sub, rest_agents)
        self.last_cluster(sub, rest_agents)
        return self.phase_two(order1, c1_left, c2_left, rest_agents)

    def middle(self, sub: ValueGraph, rest_agents: list[int]):
        while True:
            heavy_graph = beta_filter(sub, self.heavy)
            matching = mcmwm(heavy_graph)
            f_set = compute_F(heavy_graph, matching)
            c2 = heavy_graph.neighborhood(f_set)
            outside = [y for y in rest_agents if y not in c2]
            heavy_items = set(heavy_graph.xs)
            light = [x for x in sub.xs if x not in heavy_items]
            desirable = next(
                (
                    (a, b)
                    for a, b in combinations(light, 2)
                    if any(sub.weight(a, y) + sub.weight(b, y) >= self.heavy for y in outside)
                ),
                None,
            )
            if desirable is None:
                break
            sub = merge(sub, *desirable)
            self.stats["merges"] += 1
        mate = matching.y_mate
        for y in sorted(c2):
            x = mate.get(y)
            if x is None or x not in f_set:
                self.fail(f"second-cluster agent {y} is not matched into F")
                continue
            self.semi(y, x, "C2")
        c2_live = [y for y in sorted(c2) if self.states[y].status == "semi-satisfied"]
        order2, acyclic = envy_order(c2_live, {y: self.states[y].f for y in c2_live}, self.val)
        if not acyclic:
            self.fail("second cluster envy digraph has a cycle")
        w2: list = []
        for y in order2:
            eps = self.states[y].eps
            x = next((x for x in light if x not in w2 and self.val(y, x) >= eps), None)
            if x is not None:
                w2.append(x)
                self.finish(y, x)
        c2_left = [y for y in order2 if self.states[y].status == "semi-satisfied"]
        self.stats["C2"] = len(c2)
        keep_x = [x for x in sub.xs if x not in f_set and x not in w2]
        keep_y = [y for y in rest_agents if y not in c2]
        return sub.induced(keep_x, keep_y), c2_left, keep_y

    def last_cluster(self, sub: ValueGraph, c3: list[int]):
        heavy_graph = beta_filter(sub, self.heavy)
        matching = mcmwm(heavy_graph)
        for x, y in matching:
            self.states[y].cluster = "C3"
            self.states[y].f = x
            self.states[y].status = "semi-satisfied"
        for y in c3:
            self.states[y].cluster = "C3"
        self.stats["C3"] = len(c3)
        unmatched = [x for x in heavy_graph.xs if x not in matching.x_mate]
        if unmatched:
            self.fail(f"heavy vertices {unmatched} of the last cluster are unsaturated")

    # -- phase two -----------------------------------------------------------
    def free_items(self) -> list[int]:
        used = set()
        for st in self.states.values():
            used.update(st.f)
            used.update(st.g)
        return [j for j in self.items if j not in used]

    def update_c3(self, c3: list[int]):
        holders = [y for y in c3 if self.states[y].status == "semi-satisfied"]
        for y in c3:
            st = self.states[y]
            if st.status == "satisfied":
                continue
            if st.f:
                st.cluster, st.eps, st.lender = "C3s", self.alpha - self.val(y, st.f), None
                continue
            best, lender = ZERO, None
            for s in holders:
                v = self.val(y, self.states[s].f)
                if v > best:
                    best, lender = v, s
            if lender is not None and best >= self.heavy:
                st.cluster, st.eps, st.lender = "C3b", self.alpha - best, lender
            else:
                st.cluster, st.eps, st.lender = "C3f", None, None

    def check_entry(self, free, c1_left, c2_left, c3):
        for y in c1_left + c2_left:
            eps = self.states[y].eps
            bad = [j for j in free if self.rows[y][j] >= eps]
            if bad:
                self.fail(f"free items {bad} reach the deficit of clustered agent {y}")
        quarter = self.alpha - self.heavy
        for y in c3:
            big = [j for j in free if self.rows[y][j] >= quarter]
            if len(big) > 1:
                self.fail(f"agent {y} sees several free items worth {quarter} or more")

    def check_first_bundles(self):
        holders = [st for st in self.states.values() if st.f]
        for st in holders:
            for other in self.agents:
                if other != st.agent and self.states[other].status != "satisfied":
                    if self.val(other, st.f) >= self.alpha:
                        self.fail(f"first bundle of {st.agent} reaches alpha for {other}")

    def phase_two(self, order1, c1_left, c2_left, c3) -> _Outcome:
        free = self.free_items()
        self.update_c3(c3)
        self.check_entry(free, c1_left, c2_left, c3)
        if self.check:
            self.check_first_bundles()
        order2 = [y for y in c2_left]
        while True:
            self.update_c3(c3)
            live = [i for i in self.agents if self.states[i].status != "satisfied"]
            if not live:
                break
            demands = {}
            for i in live:
                st = self.states[i]
                need = self.heavy if st.cluster == "C3f" else st.eps
                demands[i] = (lambda bundle, i=i: self.val(i, bundle), need)
            try:
                bundle, takers = minimal_feasible_subset(free, demands)
            except InfeasibleError:
                break
            holders = [y for y in c3 if self.states[y].cluster == "C3s"]
            order3, acyclic = envy_order(holders, {y: self.states[y].f for y in holders}, self.val)
            if not acyclic:
                self.fail("semi-satisfied last-cluster envy digraph has a cycle")
            rank = {}
            for k, y in enumerate(order1):
                rank[y] = (1, k)
            for k, y in enumerate(order2):
                rank[y] = (2, k)
            for k, y in enumerate(order3):
                rank[y] = (3, k)
            for y in c3:
                cl = self.states[y].cluster
                if cl == "C3f":
                    rank[y] = (0, y)
                elif cl == "C3b":
                    rank[y] = (4, y)
            agent = min(takers, key=lambda y: rank[y])
            st = self.states[agent]
            free = [j for j in free if j not in bundle]
            if st.cluster == "C3f":
                st.f, st.status = bundle, "semi-satisfied"
                if self.val(agent, bundle) >= self.alpha:
                    self.fail(f"agent {agent} received a minimal bag already worth alpha")
                    self.finish(agent, ())
            elif st.cluster == "C3b":
                lender = self.states[st.lender]
                st.f, lender.f = lender.f, ()
                lender.status = "unsatisfied"
                self.stats["borrows"] += 1
                self.finish(agent, bundle)
            else:
                self.finish(agent, bundle)
            self.stats["rounds"] += 1
            if self.check:
                self.check_first_bundles()
        live = [i for i in self.agents if self.states[i].status != "satisfied"]
        if live:
            dump = {
                "unsatisfied": live,
                "free": free,
                "states": {i: vars(st).copy() for i, st in self.states.items()},
                "notes": list(self.notes),
            }
            raise GuaranteeError(f"agents {live} left unsatisfied", dump)
        bundles = {i: self.states[i].f + self.states[i].g for i in self.agents}
        if free:
            last = self.satisfied_order[-1]
            bundles[last] = bundles[last] + tuple(free)
        return _Outcome(
            bundles={i: tuple(sorted(b)) for i, b in bundles.items()}, notes=self.notes, stats=self.stats
        )


def _cluster_solve(instance, mms, alpha, heavy, middle_cluster, check) -> Allocation:
    additive_rows(instance)
    mms = agent_mms(instance) if mms is None else [as_value(x) for x in mms]
    live, parts = _serve_zero_share(mms)
    if not live:
        _attach_leftover(parts, range(instance.m), instance.n)
        return assemble(instance.n, parts)
    shares = [x if x > 0 else Fraction(1) for x in mms]
    unit = scale_to_unit(instance, shares)
    rows = additive_rows(unit)
    ones = [Fraction(1)] * instance.n
    items = list(range(instance.m))
    restarts, notes, stats = 0, [], {}
    while True:
        step = reduce_singletons(unit, alpha, ones, live, items)
        parts.extend(step.satisfied)
        live, items = list(step.agents), list(step.items)
        if len(live) <= 1:
            if live:
                parts.append((live[0], tuple(items)))
            else:
                _attach_leftover(parts, items, instance.n)
            break
        outcome = _Clustering(rows, live, items, alpha, heavy, middle_cluster, check).run(unit, ones)
        notes.extend(outcome.notes)
        if outcome.reduction:
            restarts += 1
            parts.extend(outcome.reduction)
            served = {i for i, _ in outcome.reduction}
            gone = {j for _, b in outcome.reduction for j in b}
            live = [i for i in live if i not in served]
            items = [j for j in items if j not in gone]
            if not live:
                _attach_leftover(parts, items, instance.n)
                break
            continue
        parts.extend(outcome.bundles.items())
        stats = outcome.stats
        break
    allocation = assemble(instance.n, parts)
    allocation.meta.update(restarts=restarts, notes=notes, **stats)
    return allocation


def solve_threequarters(instance: Instance, mms: Sequence | None = None, *, check: bool = False) -> Allocation:
    """Allocation giving every additive agent at least 3/4 of their share.

    ``mms`` defaults to the exact shares.  With ``check`` the runtime
    invariants raise :class:`InvariantViolation` instead of being logged.
    """
    return _cluster_solve(instance, mms, Fraction(3, 4), HALF, True, check)


def solve_twothirds(instance: Instance, mms: Sequence | None = None, *, check: bool = False) -> Allocation:
    """Allocation giving every additive agent at least 2/3 of their share."""
    return _cluster_solve(instance, mms, Fraction(2, 3), THIRD, False, check)

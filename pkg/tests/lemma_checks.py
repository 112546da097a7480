"""Exhaustive property checks.  Each function returns ``(checks, violations)``."""

from __future__ import annotations

import math
import random
from fractions import Fraction as F
from itertools import product

from mmsalloc.bipartite import ValueGraph, compute_F, maximum_matching, mcmwm
from mmsalloc.four import FOUR_FIFTHS, core, prefix_at_least
from mmsalloc.mms import mms_exact
from mmsalloc.valuations import (
    Additive,
    BudgetAdditive,
    Coverage,
    KDemand,
    Tabulated,
    ceiling,
    check_class,
)

from oracles import random_xos, subsets


def random_graph(rng: random.Random, max_side: int = 7, density: float = 0.4) -> ValueGraph:
    nx, ny = rng.randint(0, max_side), rng.randint(0, max_side)
    xs = tuple((j,) for j in range(nx))
    ys = tuple(range(ny))
    weights = {(x, y): F(rng.randint(0, 4)) for x in xs for y in ys if rng.random() < density}
    return ValueGraph(xs, ys, weights)


def random_submodular(rng: random.Random, m: int):
    vals = [rng.randint(0, 30) for _ in range(m)]
    kind = rng.randrange(3)
    if kind == 0:
        return KDemand(vals, rng.randint(1, 3))
    if kind == 1:
        return BudgetAdditive(vals, rng.randint(1, 60))
    covers = [frozenset(e for e in range(2 * m) if rng.random() < 0.3) for _ in range(m)]
    return Coverage(covers, [rng.randint(1, 9) for _ in range(2 * m)])


def random_subadditive(rng: random.Random, m: int) -> Tabulated:
    """Rounded-up scaled additive function: subadditive and usually not XOS."""
    vals = [rng.randint(0, 10) for _ in range(m)]
    step = rng.randint(2, 7)
    return Tabulated([F(math.ceil(sum(vals[j] for j in range(m) if mask >> j & 1) / step)) for mask in range(1 << m)])


def ceiling_preservation(seed: int = 0, per_class: int = 15, max_m: int = 6):
    rng = random.Random(seed)
    checks = violations = 0
    builders = {"submodular": random_submodular, "xos": random_xos, "subadditive": random_subadditive}
    for cls, build in builders.items():
        for _ in range(per_class):
            v = build(rng, rng.randint(1, max_m))
            if not check_class(v, cls):
                violations += 1
                continue
            top = v.value(range(v.m))
            for cap in {F(0), F(1, 3) * top, F(1, 2) * top, F(2, 3) * top, top, top + 1, F(7, 5)}:
                checks += 1
                violations += not check_class(ceiling(v, cap), cls)
    return checks, violations


def _neighbors(graph, ts):
    return graph.neighborhood(ts)


def rem_and_remcol(seed: int = 0, graphs: int = 300):
    """Every T outside F has more neighbours than members; the reduced graph has empty F."""
    rng = random.Random(seed)
    checks = violations = 0
    for _ in range(graphs):
        graph = random_graph(rng)
        matching = maximum_matching(graph)
        free = compute_F(graph, matching)
        rest = [x for x in graph.xs if x not in free]
        for ts in subsets(rest):
            if ts:
                checks += 1
                violations += not len(_neighbors(graph, ts)) > len(ts)
        blocked = graph.neighborhood(free)
        sub = graph.induced(rest, [y for y in graph.ys if y not in blocked])
        checks += 1
        violations += bool(compute_F(sub, maximum_matching(sub)))
    return checks, violations


def wm_conditions(seed: int = 0, graphs: int = 300):
    """Winner, loser, and no-preferred-unsaturated-item conditions of an MCMWM."""
    rng = random.Random(seed)
    checks = violations = 0
    for _ in range(graphs):
        graph = random_graph(rng, density=0.6)
        matching = mcmwm(graph)
        mate = matching.y_mate
        w = graph.weights

        def envies(a, b):
            return (mate[b], a) in w and w[(mate[b], a)] > w[(mate[a], a)]

        for ts in subsets(sorted(mate)):
            if not ts:
                continue
            checks += 2
            violations += not any(not any(envies(a, b) for b in ts if b != a) for a in ts)
            violations += not any(not any(envies(b, a) for b in ts if b != a) for a in ts)
        saturated = set(matching.x_mate)
        for y, x in mate.items():
            for xu in graph.xs:
                if xu not in saturated and (xu, y) in w:
                    checks += 1
                    violations += w[(xu, y)] > w[(x, y)]
    return checks, violations


def submodular_average_removal(seed: int = 0, cases: int = 25, max_m: int = 6, k: int = 3):
    """Summed over e, sum_i f_i(S_i - e) >= (|U| - 1) sum_i f_i(S_i) for all disjoint S_i."""
    rng = random.Random(seed)
    checks = violations = 0
    for _ in range(cases):
        m = rng.randint(1, max_m)
        fs = [random_submodular(rng, m) for _ in range(k)]
        for labels in product(range(k + 1), repeat=m):
            sets = [[j for j in range(m) if labels[j] == i] for i in range(k)]
            union = [j for j in range(m) if labels[j] < k]
            total = sum((f.value(s) for f, s in zip(fs, sets)), F(0))
            removed = sum(
                (f.value([j for j in s if j != e]) for e in union for f, s in zip(fs, sets)), F(0)
            )
            checks += 1
            violations += removed < (len(union) - 1) * total
    return checks, violations


def submodular_average_gain(seed: int = 0, cases: int = 300, max_m: int = 8):
    """For disjoint S_i worth 1 or more and f(S) < 1/3, summed marginals over U - S reach 2k/3."""
    rng = random.Random(seed)
    checks = violations = 0
    for _ in range(cases):
        m = rng.randint(2, max_m)
        f = random_submodular(rng, m)
        k = rng.randint(1, 3)
        labels = [rng.randrange(k + 1) for _ in range(m)]
        sets = [[j for j in range(m) if labels[j] == i] for i in range(k)]
        low = min(f.value(s) for s in sets)
        if low == 0:
            continue
        union = [j for j in range(m) if labels[j] < k]
        for s in subsets(union):
            base = f.value(s) / low
            if base >= F(1, 3):
                continue
            gain = sum((f.value(s + (e,)) / low - base for e in union if e not in s), F(0))
            checks += 1
            violations += gain < F(2 * k, 3)
    return checks, violations


def xos_partition_bound(seed: int = 0, cases: int = 10, max_m: int = 6, max_k: int = 4):
    """sum_i (f(S) - f(S - S_i)) <= f(S) over every S and every labelled split into k parts."""
    rng = random.Random(seed)
    checks = violations = 0
    for _ in range(cases):
        m = rng.randint(1, max_m)
        f = random_xos(rng, m)
        k = rng.randint(1, max_k)
        for labels in product(range(k + 1), repeat=m):
            s = [j for j in range(m) if labels[j] < k]
            whole = f.value(s)
            drop = sum((whole - f.value([j for j in s if labels[j] != i]) for i in range(k)), F(0))
            checks += 1
            violations += drop > whole
    return checks, violations


def two_n_sets(seed: int = 0, cases: int = 40):
    """Greedy prefix splits of an exact witness give 2n parts worth 2/5 when items are below 1/5."""
    rng = random.Random(seed)
    checks = violations = 0
    tried = 0
    while tried < cases:
        n = rng.randint(1, 2)
        m = rng.randint(5 * n + 1, 12)
        v = Additive([rng.randint(10, 15) for _ in range(m)])
        share = mms_exact(v, n)
        unit = Additive([x / share.value for x in v.values])
        if max(unit.values) >= F(1, 5):
            continue
        tried += 1
        parts = []
        for bundle in share.witness:
            head = prefix_at_least(unit, bundle, F(2, 5))
            parts += [head, tuple(j for j in bundle if j not in head)]
        checks += 1
        violations += len(parts) != 2 * n or any(unit.value(p) < F(2, 5) for p in parts)
    return checks, violations


def core_and_prefix(seed: int = 0, cases: int = 400):
    """Core bounds and the prefix-sum window on random unit-scaled bundles."""
    rng = random.Random(seed)
    checks = violations = 0
    for _ in range(cases):
        m = rng.randint(1, 10)
        v = Additive([F(rng.randint(1, 79), 100) for _ in range(m)])
        bundle = tuple(j for j in range(m) if rng.random() < 0.7)
        if v.value(bundle) >= FOUR_FIFTHS:
            c = core(v, bundle)
            low = min(c.core, key=lambda j: (v.values[j], j))
            checks += 1
            violations += not (
                set(c.core) <= set(bundle)
                and FOUR_FIFTHS <= v.value(c.core) < 2 * FOUR_FIFTHS
                and v.value([j for j in c.core if j != low]) < FOUR_FIFTHS
                and all(v.values[j] > v.value(c.core) - FOUR_FIFTHS for j in c.core)
            )
        target = F(rng.randint(1, 80), 100)
        if bundle and v.value(bundle) >= target and all(v.values[j] <= target for j in bundle):
            head = prefix_at_least(v, bundle, target)
            checks += 1
            violations += not target <= v.value(head) < 2 * target
    return checks, violations


ALL = {
    "ceiling preservation": ceiling_preservation,
    "alternating-path neighbourhoods and reduced graph": rem_and_remcol,
    "MCMWM winner/loser/unsaturated": wm_conditions,
    "submodular average removal": submodular_average_removal,
    "submodular average gain": submodular_average_gain,
    "XOS partition bound": xos_partition_bound,
    "2n parts of value 2/5": two_n_sets,
    "core and prefix bounds": core_and_prefix,
}

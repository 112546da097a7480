"""Instances where no allocation reaches a constant fraction of the share, and
an exhaustive checker for the best achievable fraction."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import CapacityError, InputError
from .instance import Allocation, Instance
from .mms import agent_mms
from .valuations import PairSubmodular, XOSExplicit
from .values import ZERO, as_value

MAX_ASSIGNMENTS = 3**12


def build_submodular_counterexample(n: int) -> Instance:
    """``2n`` items; the first ``n-1`` agents share one pair structure and the
    last agent sees it rotated by one item."""
    if n < 2:
        raise InputError("the counterexample needs n >= 2")
    m = 2 * n
    return Instance(tuple(PairSubmodular(m, 0) for _ in range(n - 1)) + (PairSubmodular(m, 1),), m)


def pair_clauses(m: int, shift: int = 0) -> tuple[tuple[Fraction, ...], ...]:
    """Additive clauses of the pair-structured XOS function on ``m`` items.

    One clause gives 1 to both items of each matched pair; one clause per
    4-subset gives 1/2 to each of its items.  Their maximum is 1 on singletons,
    2 on matched pairs, 1 on other pairs and 2 on every set with a matched pair
    or at least four items.
    """
    if m < 2 or m % 2:
        raise InputError("pair clauses need an even m >= 2")
    base: list[list[Fraction]] = []
    for i in range(m // 2):
        row = [ZERO] * m
        row[2 * i] = row[2 * i + 1] = Fraction(1)
        base.append(row)
    for quad in combinations(range(m), 4):
        row = [ZERO] * m
        for j in quad:
            row[j] = Fraction(1, 2)
        base.append(row)
    return tuple(tuple(row[(j + shift) % m] for j in range(m)) for row in base)


def build_xos_counterexample(n: int) -> Instance:
    """Like the submodular counterexample, with the XOS pair function in clause form."""
    if n < 2:
        raise InputError("the counterexample needs n >= 2")
    m = 2 * n
    shared = XOSExplicit(pair_clauses(m, 0))
    return Instance((shared,) * (n - 1) + (XOSExplicit(pair_clauses(m, 1)),), m)


@dataclass(frozen=True)
class RatioReport:
    best_min_ratio: Fraction
    witness: Allocation
    mms: tuple[Fraction, ...]


def best_ratio(instance: Instance, mms=None) -> RatioReport:
    """Largest ``min_i V_i(A_i) / MMS_i`` over all allocations (1 when MMS_i = 0)."""
    n, m = instance.n, instance.m
    if n**m > MAX_ASSIGNMENTS:
        raise CapacityError(f"{n}^{m} allocations exceed the enumeration limit {MAX_ASSIGNMENTS}")
    shares = tuple(agent_mms(instance) if mms is None else (as_value(x) for x in mms))
    vals = instance.valuations

    def ratio(agent: int, bundle) -> Fraction:
        if shares[agent] == 0:
            return Fraction(1)
        return vals[agent].value(bundle) / shares[agent]

    bundles: list[list[int]] = [[] for _ in range(n)]
    best = [Fraction(-1), None]

    def search(j: int) -> None:
        rest = list(range(j, m))
        # Monotone valuations: no agent can exceed their value for their bundle plus all unassigned items.
        if min(ratio(a, bundles[a] + rest) for a in range(n)) <= best[0]:
            return
        if j == m:
            best[0] = min(ratio(a, bundles[a]) for a in range(n))
            best[1] = [tuple(b) for b in bundles]
            return
        for a in range(n):
            bundles[a].append(j)
            search(j + 1)
            bundles[a].pop()

    search(0)
    return RatioReport(best[0], Allocation(tuple(best[1])), shares)

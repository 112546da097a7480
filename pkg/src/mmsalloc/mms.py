"""Maximin shares: exact branch-and-bound, a certified lower bound, and unit scaling."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import CapacityError, DegenerateInstanceError, InputError
from .instance import Instance
from .valuations import (
    Additive,
    Bundle,
    Valuation,
    as_bundle,
    integer_table,
    scaled,
    value_table,
)
from .values import ZERO, as_value, common_denominator

log = logging.getLogger(__name__)

ADDITIVE_ITEM_LIMIT, ADDITIVE_PART_LIMIT = 18, 5
ORACLE_ITEM_LIMIT, ORACLE_PART_LIMIT = 12, 4


@dataclass(frozen=True)
class MmsResult:
    value: Fraction
    witness: tuple[Bundle, ...]


def _trivial(valuation: Valuation, r: int, items: Bundle) -> MmsResult | None:
    if r < 1:
        raise InputError("the number of parts must be at least 1")
    if r == 1:
        return MmsResult(valuation.value(items), (items,))
    if r > len(items):
        parts = [(j,) for j in items] + [()] * (r - len(items))
        return MmsResult(ZERO, tuple(parts))
    return None


def mms_exact(valuation: Valuation, r: int, items: Iterable[int] | None = None) -> MmsResult:
    """Exact MMS over ``items`` (default: the whole ground set) split into ``r`` parts."""
    items = as_bundle(range(valuation.m) if items is None else items, valuation.m)
    trivial = _trivial(valuation, r, items)
    if trivial is not None:
        return trivial
    if isinstance(valuation, Additive):
        if len(items) > ADDITIVE_ITEM_LIMIT or r > ADDITIVE_PART_LIMIT:
            raise CapacityError(
                f"exact additive MMS supports <= {ADDITIVE_ITEM_LIMIT} items and "
                f"<= {ADDITIVE_PART_LIMIT} parts (got {len(items)}, {r})"
            )
        return _additive_exact([valuation.values[j] for j in items], items, r)
    if len(items) > ORACLE_ITEM_LIMIT or r > ORACLE_PART_LIMIT:
        raise CapacityError(
            f"exact MMS for {valuation.kind} supports <= {ORACLE_ITEM_LIMIT} items and "
            f"<= {ORACLE_PART_LIMIT} parts (got {len(items)}, {r})"
        )
    return _table_exact(valuation, items, r)


def _additive_exact(values: Sequence[Fraction], items: Bundle, r: int) -> MmsResult:
    den = common_denominator(values)
    ints = [int(v * den) for v in values]
    order = sorted(range(len(items)), key=lambda k: (-ints[k], items[k]))
    best, assign = _partition_search([ints[k] for k in order], r)
    parts: list[list[int]] = [[] for _ in range(r)]
    for pos, part in enumerate(assign):
        parts[part].append(items[order[pos]])
    return MmsResult(Fraction(best, den), tuple(tuple(sorted(p)) for p in parts))


def _lpt(vals: list[int], r: int) -> list[int]:
    sums = [0] * r
    assign = []
    for v in vals:
        p = min(range(r), key=lambda q: (sums[q], q))
        sums[p] += v
        assign.append(p)
    return assign


def _partition_search(vals: list[int], r: int) -> tuple[int, list[int]]:
    """Maximize the minimum part sum; ``vals`` sorted non-increasing."""
    count = len(vals)
    upper = sum(vals) // r
    assign = _lpt(vals, r)
    sums = [0] * r
    for v, p in zip(vals, assign):
        sums[p] += v
    best = min(sums)
    if best == upper:
        return best, assign
    best_assign = list(assign)
    remaining = [0] * (count + 1)
    for k in range(count - 1, -1, -1):
        remaining[k] = remaining[k + 1] + vals[k]
    sums = [0] * r
    current = [0] * count

    def dfs(k: int) -> bool:
        nonlocal best, best_assign
        if k == count:
            low = min(sums)
            if low > best:
                best, best_assign = low, list(current)
            return best == upper
        target = best + 1
        deficit = sum(target - s for s in sums if s < target)
        if deficit > remaining[k]:
            return False
        tried = set()
        for p in range(r):
            s = sums[p]
            if s in tried:
                continue
            tried.add(s)
            sums[p] = s + vals[k]
            current[k] = p
            done = dfs(k + 1)
            sums[p] = s
            if done:
                return True
        return False

    dfs(0)
    return best, best_assign


def _table_exact(valuation: Valuation, items: Bundle, r: int) -> MmsResult:
    fractions_table = value_table(valuation, items)
    table, den = integer_table(fractions_table)
    memo: dict[tuple[int, int], tuple[int, int]] = {}

    def solve(parts: int, mask: int) -> int:
        if parts == 1:
            return table[mask]
        if bin(mask).count("1") < parts:
            return 0
        key = (parts, mask)
        if key in memo:
            return memo[key][0]
        low = mask & -mask
        rest_all = mask ^ low
        best, choice = -1, 0
        sub = rest_all
        while True:
            part = sub | low
            rest = mask ^ part
            bound = min(table[part], table[rest])
            if bound > best:
                value = min(table[part], solve(parts - 1, rest))
                if value > best:
                    best, choice = value, part
            if sub == 0:
                break
            sub = (sub - 1) & rest_all
        memo[key] = (best, choice)
        return best

    full = (1 << len(items)) - 1
    value = solve(r, full)
    parts: list[Bundle] = []
    mask = full
    for remaining_parts in range(r, 1, -1):
        if bin(mask).count("1") < remaining_parts:
            break
        choice = memo[(remaining_parts, mask)][1]
        parts.append(tuple(items[k] for k in range(len(items)) if choice >> k & 1))
        mask ^= choice
    parts.append(tuple(items[k] for k in range(len(items)) if mask >> k & 1))
    while len(parts) < r:
        parts.append(())
    return MmsResult(Fraction(value, den), tuple(parts))


def _cover(vals: list[int], r: int, target: int) -> list[int] | None:
    """First-fit-decreasing bin covering; ``vals`` sorted non-increasing."""
    sums = [0] * r
    assign = []
    for v in vals:
        p = next((q for q in range(r) if sums[q] < target), None)
        if p is None:
            p = min(range(r), key=lambda q: (sums[q], q))
        sums[p] += v
        assign.append(p)
    return assign if min(sums) >= target else None


def mms_additive_lb(values: Sequence, r: int, eps, *, heuristic_only: bool = False) -> MmsResult:
    """A certified lower bound on the additive MMS, with the partition achieving it.

    Binary search over the target with first-fit-decreasing bin covering.  When
    the result is not provably within ``1 - eps`` of the trivial upper bound
    ``total / r`` and the instance is small enough, the exact solver is used.
    """
    values = [as_value(v) for v in values]
    eps = as_value(eps)
    if not 0 < eps < 1:
        raise InputError("eps must lie strictly between 0 and 1")
    items = tuple(range(len(values)))
    trivial = _trivial(Additive(tuple(values)), r, items)
    if trivial is not None:
        return trivial
    den = common_denominator(values)
    ints = [int(v * den) for v in values]
    order = sorted(items, key=lambda k: (-ints[k], k))
    vals = [ints[k] for k in order]
    upper = sum(vals) // r
    low, high = 0, upper
    best_assign = _cover(vals, r, 0)
    while low < high:
        mid = (low + high + 1) // 2
        assign = _cover(vals, r, mid)
        if assign is None:
            high = mid - 1
        else:
            low, best_assign = mid, assign
    sums = [0] * r
    for v, p in zip(vals, best_assign):
        sums[p] += v
    value = Fraction(min(sums), den)
    parts: list[list[int]] = [[] for _ in range(r)]
    for pos, p in enumerate(best_assign):
        parts[p].append(order[pos])
    result = MmsResult(value, tuple(tuple(sorted(p)) for p in parts))
    if heuristic_only:
        return result
    good_enough = value >= (1 - eps) * Fraction(sum(vals), den * r)
    if not good_enough and len(values) <= ADDITIVE_ITEM_LIMIT and r <= ADDITIVE_PART_LIMIT:
        return _additive_exact(values, items, r)
    return result


def agent_mms(instance: Instance) -> list[Fraction]:
    """Exact MMS of every agent with the instance's agent count as part count."""
    return [mms_exact(v, instance.n).value for v in instance.valuations]


def scale_to_unit(instance: Instance, mms: Sequence) -> Instance:
    """Rescale each agent so that their given MMS value becomes 1."""
    if len(mms) != instance.n:
        raise InputError(f"expected {instance.n} MMS values, got {len(mms)}")
    scaled_vals = []
    for i, (v, share) in enumerate(zip(instance.valuations, mms)):
        share = as_value(share)
        if share == 0:
            raise DegenerateInstanceError(f"agent {i} has a maximin share of 0")
        scaled_vals.append(scaled(v, 1 / share))
    return Instance(tuple(scaled_vals), instance.m)
